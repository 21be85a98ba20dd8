from __future__ import annotations

import io
import json
import math
from fractions import Fraction

import pytest

from hoconvex.certify import certify_jensen
from hoconvex.cli import RunConfig, main
from hoconvex.errors import IngestionError, UsageError
from hoconvex.families import function_from_manifest, gen_family, parse_family
from hoconvex.io import ingest_module_csv, ingest_real_csv, write_module_csv, write_real_csv
from hoconvex.scalar import SQRT2, QuadElem


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def write(path, text):
    path.write_text(text)
    return str(path)


class TestIngest:
    def test_two_rows(self, tmp_path):
        g = ingest_real_csv(write(tmp_path / "a.csv", "x,value\n0,0\n1,1\n"))
        assert len(g) == 2 and g(Fraction(1)) == 1

    def test_duplicate_names_line(self, tmp_path):
        with pytest.raises(IngestionError) as exc:
            ingest_real_csv(write(tmp_path / "a.csv", "x,value\n0,0\n1,1\n1,2\n"))
        assert exc.value.line == 4 and "line 4" in str(exc.value)

    def test_unsorted(self, tmp_path):
        with pytest.raises(IngestionError, match="unsorted"):
            ingest_real_csv(write(tmp_path / "a.csv", "x,value\n1,0\n0,1\n"))

    def test_bad_token(self, tmp_path):
        with pytest.raises(IngestionError, match="'1/0'"):
            ingest_real_csv(write(tmp_path / "a.csv", "x,value\n0,0\n1,1/0\n"))

    def test_square_mesh_hundredth_certifies(self, tmp_path):
        xs = [Fraction(i, 100) for i in range(101)]
        path = tmp_path / "sq.csv"
        write_real_csv(path, xs, [x * x for x in xs])
        g = ingest_real_csv(path)
        assert len(g) == 101
        assert certify_jensen(g, 1).certified

    def test_float_mode_accepts_rational_tokens(self, tmp_path):
        g = ingest_real_csv(write(tmp_path / "a.csv", "x,value\n0,1\n1/4,0.5\n"), mode="float")
        assert g.points == (0.0, 0.25)

    def test_quad_values_roundtrip(self, tmp_path):
        path = tmp_path / "q.csv"
        write_real_csv(path, [Fraction(0), Fraction(1)], [SQRT2, QuadElem(3, -1)])
        g = ingest_real_csv(path, mode="quad")
        assert g.values == (SQRT2, QuadElem(3, -1))

    def test_module_rational_only(self, tmp_path):
        s = ingest_module_csv(write(tmp_path / "m.csv", "p,q,vp,vq\n0,0,0,0\n1/2,0,1/4,0\n1,0,1,0\n"))
        assert len(s.rational_grid()) == 3

    def test_module_mixed(self, tmp_path):
        pts = [QuadElem(Fraction(i, 4)) for i in range(5)] + [QuadElem(0, Fraction(1, 5))]
        path = tmp_path / "m.csv"
        write_module_csv(path, pts, [x * x for x in pts])
        s = ingest_module_csv(path)
        assert len(s.points) == 6 and s.rational_grid().mesh == Fraction(1, 4)

    def test_module_malformed_rational(self, tmp_path):
        with pytest.raises(IngestionError, match="3/0"):
            ingest_module_csv(write(tmp_path / "m.csv", "p,q,value\n0,0,1.0\n3/0,0,2.0\n"))

    def test_module_without_rational_grid(self, tmp_path):
        with pytest.raises(UsageError):
            ingest_module_csv(write(tmp_path / "m.csv", "p,q,value\n0,1,1.0\n1,1,2.0\n"))

    def test_header(self, tmp_path):
        with pytest.raises(IngestionError, match="header"):
            ingest_real_csv(write(tmp_path / "a.csv", "t,y\n0,0\n1,1\n"))


class TestFamilies:
    def test_exp_rows(self, tmp_path):
        m = gen_family("exp", tmp_path, interval=(0, 1), mesh="1/64")
        assert m["rows"] == 65
        assert len((tmp_path / "exp.csv").read_text().splitlines()) == 66

    def test_cube_symmetric_violates_jensen(self, tmp_path):
        gen_family("monomial(3)", tmp_path, interval=(-1, 1), mesh="1/8")
        assert certify_jensen(ingest_real_csv(tmp_path / "monomial.csv"), 1).violated

    def test_deterministic(self, tmp_path):
        a = gen_family("wright_synthetic(2)", tmp_path / "a", seed=7)
        b = gen_family("wright_synthetic(2)", tmp_path / "b", seed=7)
        assert a == b
        assert (tmp_path / "a" / "wright_synthetic.csv").read_bytes() == (tmp_path / "b" / "wright_synthetic.csv").read_bytes()

    @pytest.mark.parametrize("family", ["abs", "monomial(2)", "standard_poly(3)", "polyfun(2)", "wright_synthetic(1)"])
    def test_manifest_reconstructs_function(self, tmp_path, family):
        m = gen_family(family, tmp_path, seed=4)
        f = function_from_manifest(m)
        path = tmp_path / m["csv"]
        if m["format"] == "real":
            g = ingest_real_csv(path)
            assert all(f(x) == v for x, v in zip(g.points, g.values))
        else:
            s = ingest_module_csv(path)
            assert all(f(x) == v for x, v in zip(s.points, s.values))

    def test_exp_manifest(self, tmp_path):
        m = gen_family("exp", tmp_path)
        g = ingest_real_csv(tmp_path / "exp.csv", mode="float")
        f = function_from_manifest(m)
        assert all(math.isclose(f(x), v, rel_tol=1e-15) for x, v in zip(g.points, g.values))

    def test_unknown_family(self, tmp_path):
        with pytest.raises(UsageError):
            gen_family("gaussian", tmp_path)
        assert parse_family("monomial:4") == ("monomial", 4)


class TestRunConfig:
    @pytest.mark.parametrize("kwargs", [{"order": 0}, {"budget": 0}, {"tolerance": Fraction(-1)},
                                        {"mode": "complex"}])
    def test_invariants(self, kwargs):
        with pytest.raises(UsageError):
            RunConfig(command="certify", **kwargs)


class TestCli:
    @pytest.fixture
    def square(self, tmp_path):
        xs = [Fraction(i, 8) for i in range(9)]
        path = tmp_path / "sq.csv"
        write_real_csv(path, xs, [x * x for x in xs])
        return str(path)

    @pytest.fixture
    def concave(self, tmp_path):
        xs = [Fraction(i, 8) for i in range(9)]
        path = tmp_path / "cc.csv"
        write_real_csv(path, xs, [-x * x for x in xs])
        return str(path)

    @pytest.mark.parametrize("notion", ["jensen", "wright", "convex"])
    def test_certify_convex_data(self, square, notion):
        code, out = run("certify", "--input", square, "--notion", notion)
        assert code == 0
        data = json.loads(out)
        assert data["report"]["verdict"] == "certified"
        assert "sweep" in data["report"] and "sweep set" in data["note"]

    def test_certify_concave_data(self, concave):
        code, out = run("certify", "--input", concave, "--notion", "wright")
        assert code == 1
        assert json.loads(out)["report"]["witness"]

    def test_certify_inconclusive(self, square):
        code, _ = run("certify", "--input", square, "--notion", "wright", "--budget", "3")
        assert code == 2

    def test_frechet(self, square):
        assert run("certify", "--input", square, "--notion", "frechet", "--order", "2")[0] == 0
        assert run("certify", "--input", square, "--notion", "frechet", "--order", "1")[0] == 1

    def test_plot_csv(self, concave, tmp_path):
        plot = tmp_path / "plot.csv"
        run("certify", "--input", concave, "--plot-csv", str(plot))
        lines = plot.read_text().splitlines()
        assert lines[0] == "x,margin" and len(lines) > 1

    def test_non_uniform_falls_back(self, tmp_path):
        path = write(tmp_path / "nu.csv", "x,value\n0,0\n1,1\n3,9\n4,16\n")
        code, out = run("certify", "--input", path, "--notion", "jensen")
        assert code == 2
        assert json.loads(out)["report"]["sweep"]["kind"] != "uniform-grid"

    def test_identity(self, square):
        code, out = run("identity", "--input", square, "--order", "1")
        assert code == 0 and json.loads(out)["report"]["failures"] == 0

    def test_lipschitz(self, tmp_path):
        xs = [Fraction(-1)] + [Fraction(i, 16) for i in range(17)] + [Fraction(2)]
        path = tmp_path / "lip.csv"
        write_real_csv(path, xs, [x * x for x in xs])
        code, out = run("lipschitz", "--input", str(path), "--u=-1", "--u-prime", "2")
        cert = json.loads(out)["certificate"]
        assert code == 0
        assert Fraction(cert["L"]) >= Fraction(cert["empirical_slope"])

    def test_decompose_and_verify_round_trip(self, tmp_path):
        assert run("gen", "--family", "wright_synthetic(2)", "--seed", "7", "--out", str(tmp_path))[0] == 0
        data = str(tmp_path / "wright_synthetic.csv")
        g_csv = str(tmp_path / "g.csv")
        code, out = run("decompose", "--input", data, "--order", "2", "--g", g_csv)
        assert code == 0
        result = json.loads(out)["result"]
        assert all(row[2] == "0" for row in result["residual"] if row[1] == "0")
        assert run("verify", "--input", data, "--g", g_csv, "--order", "2")[0] == 0

    def test_decompose_rejects(self, tmp_path):
        pts = [QuadElem(Fraction(i, 6)) for i in range(7)]
        path = tmp_path / "m.csv"
        write_module_csv(path, pts, [-x * x for x in pts])
        code, out = run("decompose", "--input", str(path))
        assert code == 1 and json.loads(out)["rejected"]

    def test_decompose_without_rational_grid(self, tmp_path, capsys):
        path = write(tmp_path / "m.csv", "p,q,value\n0,1/5,1.0\n1/2,1/5,2.0\n")
        assert run("decompose", "--input", path)[0] == 3
        assert "q = 0" in capsys.readouterr().err

    def test_verify_fails_on_added_monomial(self, tmp_path):
        xs = [Fraction(i, 6) for i in range(7)]
        write_real_csv(tmp_path / "f.csv", xs, [x**3 for x in xs])
        write_real_csv(tmp_path / "g.csv", xs, [x**3 + x * x for x in xs])
        code, _ = run("verify", "--input", str(tmp_path / "f.csv"), "--g", str(tmp_path / "g.csv"))
        assert code == 1

    def test_usage_errors(self, square, capsys):
        assert run("certify", "--input", square, "--order", "0")[0] == 3
        assert run("certify", "--input", square, "--tol", "-1")[0] == 3
        assert run("nonsense")[0] == 3
        assert run("certify", "--input", "/nonexistent.csv")[0] == 3
        assert run("gen", "--family", "gaussian", "--out", "x")[0] == 3
        assert "error" in capsys.readouterr().err

    def test_determinism(self, square, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run("certify", "--input", square, "--notion", "wright", "--out", str(a))
        run("certify", "--input", square, "--notion", "wright", "--out", str(b), "--threads", "2")
        strip = lambda p: {k: v for k, v in json.loads(p.read_text()).items() if k != "config"}  # noqa: E731
        assert strip(a) == strip(b)
        run("certify", "--input", square, "--notion", "wright", "--out", str(b))
        assert a.read_bytes() != b"" and json.loads(a.read_text())["report"] == json.loads(b.read_text())["report"]

    def test_byte_identical_reports(self, square, tmp_path):
        outs = []
        for _ in range(2):
            code, out = run("certify", "--input", square, "--notion", "convex", "--order", "1")
            outs.append(out)
        assert outs[0] == outs[1]
