"""Acceptance suite: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""

import pytest

from twistshift.acceptance import CRITERIA, reproduce_all, run_criterion
from twistshift.cli import main

from conftest import ACCEPTANCE_LINES

IDS = [cid for cid, _, _ in CRITERIA] + ["C11"]


@pytest.fixture(scope="module")
def report(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    return reproduce_all(out=out), out


@pytest.mark.parametrize("cid", IDS)
def test_criterion(report, cid):
    rep, _ = report
    (r,) = [r for r in rep.results if r.cid == cid]
    line = f"{r.cid:<4} {'PASS' if r.passed else 'FAIL'}  {r.title}: {r.detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert r.passed, line


def test_report_bytes_repeat(report, tmp_path, capsys):
    _, out = report
    code = main(["reproduce-all", "--out", str(tmp_path)])
    capsys.readouterr()
    assert code == 0
    for name in ["report.csv"] + [f"c{i}.csv" for i in range(1, 11)]:
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes(), name


def test_fault_injection_fails_named_criterion():
    r = run_criterion("C1", {"c1.delta": 1e-300})
    assert not r.passed
    r = run_criterion("C3", {"c3.gap": 0.0})
    assert not r.passed


def test_cli_override_exit(tmp_path, capsys, monkeypatch):
    import twistshift.acceptance as acc

    # keep this fast: only the cheap criteria run
    monkeypatch.setattr(acc, "CRITERIA", [c for c in acc.CRITERIA if c[0] in ("C3", "C8")])
    code = main(["reproduce-all", "--out", str(tmp_path), "--override", "c3.gap=0"])
    out = capsys.readouterr().out
    assert code == 1
    assert "C3   FAIL" in out and "C8   PASS" in out
    assert main(["reproduce-all", "--override", "nope=1"]) == 2


if __name__ == "__main__":
    rep = reproduce_all()
    print(rep.table(), end="")
    raise SystemExit(0 if rep.passed else 1)
