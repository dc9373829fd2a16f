import json
import os

import pytest

from twistshift import __version__
from twistshift.artifacts import csv_text, payload
from twistshift.circlefn import RationalTurns, ShiftedRational
from twistshift.cli import main, run_raw
from twistshift.config import build_config, parse_function, parse_theta
from twistshift.errors import ConfigError

ZM1 = {"kind": "factored", "scalar": [1, 0], "roots": [{"angle": "0/1", "mult": 1}]}
TWO_PLUS_Z = {"kind": "laurent", "coefficients": [[0, 2, 0], [1, 1, 0]]}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    return path.read_text().splitlines()


class TestConfig:
    def test_exact_angles_survive(self, golden):
        f = parse_function(
            {"kind": "factored", "roots": [{"angle": "1/3"}, {"angle": {"r": "1/4", "m": 2}}]}, golden
        )
        (a, _), (b, _) = f.roots
        assert a == RationalTurns(1, 3)
        assert isinstance(b, ShiftedRational) and (b.r.numerator, b.r.denominator, b.m) == (1, 4, 2)

    def test_theta_forms(self):
        assert parse_theta("silver").kind == "silver"
        assert parse_theta({"surd": [-1, 1, 5, 2]}).value == pytest.approx(0.6180339887)
        d = parse_theta({"decimal": "0.41421356", "precision": 8})
        assert d.precision_digits == 8
        with pytest.raises(ConfigError):
            parse_theta({"decimal": 0.5})
        with pytest.raises(ConfigError):
            parse_theta("bronze")

    @pytest.mark.parametrize(
        "raw",
        [
            {"function": TWO_PLUS_Z, "extra": 1},
            {"function": {**TWO_PLUS_Z, "degree": 3}},
            {"function": TWO_PLUS_Z, "params": {"n": 10, "grid": 4}},
            {"function": TWO_PLUS_Z, "params": {"n": 10**6, "grid_size": 10**4}},
            {"function": {"kind": "factored", "roots": [{"value": [1, 0]}]}},
            {"function": {"kind": "spline"}},
            {"function": TWO_PLUS_Z, "params": {"n": "10"}},
        ],
    )
    def test_rejections(self, raw):
        with pytest.raises(ConfigError):
            build_config(raw, "birkhoff")

    def test_operation_mismatch(self):
        with pytest.raises(ConfigError):
            build_config({"function": TWO_PLUS_Z, "operation": "nu"}, "birkhoff")


class TestRun:
    def test_fkdet_example(self, tmp_path, capsys):
        code = main(["fkdet", "--config", write(tmp_path, {"function": ZM1}), "--out", str(tmp_path / "o")])
        assert code == 0
        rec = json.loads(capsys.readouterr().out)
        assert rec["result"]["delta"] == 1.0 and rec["result"]["method"] == "analytic"
        assert rec["tag"] and rec["version"] == __version__
        assert json.loads((tmp_path / "o" / "fkdet.json").read_text()) == rec

    def test_fkdet_trace_csv(self, tmp_path):
        raw = {"function": TWO_PLUS_Z, "params": {"method": "quadrature", "trace": True}}
        code, _ = run_raw(raw, "fkdet", out=tmp_path)
        assert code == 0
        lines = read_csv(tmp_path / "fkdet_trace.csv")
        assert lines[0].startswith("# twistshift") and lines[1] == "level,integral,error_estimate"

    def test_simplicity_empty_zero_set(self, tmp_path):
        code, rec = run_raw({"function": TWO_PLUS_Z}, "simplicity", out=tmp_path)
        assert code == 4 and rec["error"] == "EmptyZeroSet"

    def test_sampled_zero_set_refused(self, tmp_path):
        raw = {"function": {"kind": "laurent", "coefficients": [[0, -1, 0], [1, 1, 0]]}}
        code, rec = run_raw(raw, "simplicity", out=tmp_path)
        assert code == 4 and rec["error"] == "InexactZeroSet"

    def test_model_example(self, tmp_path):
        raw = {"function": {"kind": "laurent", "coefficients": [[1, 1, 0]]}, "params": {"p": 1, "q": 2}}
        code, _ = run_raw(raw, "model", out=tmp_path)
        assert code == 0
        assert read_csv(tmp_path / "eigenvalues.csv")[1:] == ["re,im", "0.0,1.0", "0.0,-1.0"]

    def test_model_by_convergent(self, tmp_path):
        raw = {"function": TWO_PLUS_Z, "params": {"q": 89}}
        code, rec = run_raw(raw, "model", out=tmp_path)
        assert code == 0 and rec["result"]["p"] == 55
        conv = read_csv(tmp_path / "convergents.csv")
        assert conv[1] == "index,p,q,error_bound" and conv[-1].startswith("10,55,89,")

    def test_not_a_convergent(self, tmp_path):
        code, _ = run_raw({"function": TWO_PLUS_Z, "params": {"q": 90}}, "model", out=tmp_path)
        assert code == 2

    def test_inconclusive_exit(self, tmp_path):
        raw = {"function": {"kind": "essential_zero", "p": 1}, "params": {"levels": [4, 5, 6]}}
        code, rec = run_raw(raw, "fkdet", out=tmp_path)
        assert code == 3 and rec["error"] == "Inconclusive"

    def test_precision_exhausted_exit(self, tmp_path):
        raw = {"function": TWO_PLUS_Z, "theta": {"decimal": "0.618", "precision": 3}, "params": {"convergent": 30}}
        code, rec = run_raw(raw, "model", out=tmp_path)
        assert code == 3 and rec["error"] == "PrecisionExhausted"

    def test_config_error_exit(self, tmp_path, capsys):
        code = main(["nu", "--config", write(tmp_path, {"function": TWO_PLUS_Z, "oops": 0})])
        assert code == 2
        assert json.loads(capsys.readouterr().out)["error"] == "ConfigError"
        assert main(["nu", "--config", str(tmp_path / "missing.json")]) == 2

    @pytest.mark.parametrize(
        "op,raw,files",
        [
            ("birkhoff", {"function": TWO_PLUS_Z, "params": {"n": 50, "grid_size": 32}}, ["birkhoff_summary.csv", "birkhoff_trace.csv"]),
            ("radius", {"function": TWO_PLUS_Z, "params": {"schedule": [5, 50]}}, ["radius.csv"]),
            ("nu", {"function": TWO_PLUS_Z, "params": {"n": 64, "grid_size": 128}}, ["nu_samples.csv"]),
            ("pseudospec", {"function": ZM1, "params": {"q": 8, "resolution": [9, 9]}}, ["convergents.csv", "pseudospectrum.csv"]),
            ("harper", {"params": {"q_max": 5}}, ["harper.csv"]),
            ("spectrum", {"function": ZM1}, []),
            ("brown", {"function": {"kind": "essential_zero", "p": 1}}, []),
            ("index", {"function": {"kind": "laurent", "coefficients": [[0, 1, 0], [2, 3, 0]]}}, []),
            ("algebraA", {"function": TWO_PLUS_Z}, []),
        ],
    )
    def test_every_operation_deterministic(self, tmp_path, op, raw, files):
        c1, r1 = run_raw(raw, op, out=tmp_path / "a", seed=5)
        c2, r2 = run_raw(raw, op, out=tmp_path / "b", seed=5)
        assert c1 == c2 == 0
        assert r1 == r2 and r1["files"] == files
        for name in files + [f"{op}.json"]:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        leftovers = [n for n in os.listdir(tmp_path / "a") if n.endswith(".tmp")]
        assert not leftovers

    def test_index_record(self, tmp_path):
        raw = {"function": {"kind": "laurent", "coefficients": [[1, 1, 0]]}}
        code, rec = run_raw(raw, "index", out=tmp_path)
        assert rec["result"]["n"] == "DEGENERATE"

    def test_simplicity_witness(self, tmp_path):
        f = {"kind": "factored", "roots": [{"angle": "0/1"}, {"angle": {"r": "0/1", "m": 1}}]}
        code, rec = run_raw({"function": f}, "simplicity", out=tmp_path)
        assert code == 0 and rec["result"]["simple"] is False
        assert rec["result"]["witness"]["n"] == 1


def test_csv_format():
    text = csv_text(("a", "b"), [(0.1, 1), (1e-300, "x,y")])
    assert text.splitlines()[0] == f"# twistshift {__version__}"
    assert payload(text) == 'a,b\n0.1,1\n1e-300,"x,y"\n'
