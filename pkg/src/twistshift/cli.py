"""Command-line experiment runner.

Each subcommand reads a JSON config (see :mod:`twistshift.config`), writes
``<out>/<operation>.json`` plus any CSV tables, and prints the JSON record.
Exit status: 0 success, 2 bad config, 3 numerically inconclusive,
4 refused (e.g. an exactness requirement is not met), 1 for acceptance
failures in ``reproduce-all``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, artifacts
from .circlefn import RationalTurns, ShiftedRational, zero_set
from .classify import (
    algebra_A,
    brown_measure,
    classify_spectrum,
    simplicity,
    subfactor_index,
)
from .config import OPERATIONS, ExperimentConfig, base_angle, build_config, load_config
from .diophantine import Convergent, convergents
from .errors import ConfigError, TwistShiftError
from .ergodic import birkhoff_product, nu_n_distribution, spectral_radius_estimate
from .fkdet import DEFAULT_LEVELS, fk_determinant
from .matrixmodel import (
    build_model,
    butterfly,
    eigen_residual,
    eigenpairs_closed_form,
    harper_eigenvalues,
    pseudospectrum_grid,
    sigma_min,
)

TAGS = {
    "fkdet": "Fuglede-Kadison determinant: Δ(f(v)) = exp ∫ ln|f|",
    "birkhoff": "power formula: (u f(v))^n = u^n f(α^{n-1}v)...f(v)",
    "radius": "spectral radius: r(u f(v)) = Δ(f(v))",
    "nu": "Brown measure: ν_n → δ_{Δ²} weakly",
    "spectrum": "spectrum: circle Δ·S¹ if f(v) invertible, else disk of radius Δ",
    "brown": "Brown measure: Haar measure on Δ·S¹",
    "model": "finite model: eigenvalues on the circle of radius |∏ d_k|^{1/q}",
    "pseudospec": "non-invertible case: spectrum fills the disk of radius Δ",
    "harper": "Harper matrix (U + U*) + λ(V + V*) at p/q",
    "index": "subfactor index: n = gcd of the Fourier support of |f|",
    "simplicity": "C*-simplicity: orbits of distinct zeros are disjoint",
    "algebraA": "A = C*(v^n) with n the minimal period of |f|",
}


class Outcome:
    """A result record plus named CSV tables."""

    def __init__(self, result: dict, tables: dict | None = None):
        self.result = result
        self.tables = tables or {}


# ---------------------------------------------------------------------------
# helpers


def _convergent_rows(convs):
    return [(i, c.p, c.q, c.error_bound) for i, c in enumerate(convs)]


def _select_convergent(cfg: ExperimentConfig, tables: dict) -> Convergent:
    p = cfg.params
    if p["q"] is not None and p["p"] is not None:
        if math.gcd(p["p"], p["q"]) != 1:
            raise ConfigError("p/q must be in lowest terms")
        return Convergent(p["p"], p["q"], abs(cfg.theta.value - p["p"] / p["q"]))
    if p["q"] is None and p["p"] is not None:
        raise ConfigError("p needs q")
    if p["convergent"] is not None:
        convs = convergents(cfg.theta, p["convergent"] + 1)
    elif p["q"] is not None:
        convs = convergents(cfg.theta, p["count"])
        while convs[-1].q < p["q"] and len(convs) < 80:
            convs = convergents(cfg.theta, len(convs) + 8)
        convs = [c for c in convs if c.q <= p["q"]]
        if convs[-1].q != p["q"]:
            raise ConfigError(f"q={p['q']} is not a convergent denominator of {cfg.theta}")
    else:
        raise ConfigError("choose the rational with 'p' and 'q', 'q' or 'convergent'")
    tables["convergents"] = (("index", "p", "q", "error_bound"), _convergent_rows(convs))
    return convs[-1]


def _angle_text(a) -> str:
    if isinstance(a, RationalTurns):
        return f"{a.numerator}/{a.denominator}"
    if isinstance(a, ShiftedRational):
        return f"{a.r.numerator}/{a.r.denominator} + {a.m}θ"
    return repr(a.turns())


# ---------------------------------------------------------------------------
# operations


def op_fkdet(cfg):
    levels = cfg.params["levels"] or DEFAULT_LEVELS
    det = fk_determinant(cfg.function, levels, cfg.params["method"])
    tables = {}
    if cfg.params["trace"]:
        tables["fkdet_trace"] = (("level", "integral", "error_estimate"), det.trace)
    return Outcome(
        {
            "delta": det.delta,
            "log_delta": det.log_delta,
            "method": det.method,
            "error_estimate": det.error_estimate,
        },
        tables,
    )


def op_birkhoff(cfg):
    p = cfg.params
    tr = birkhoff_product(cfg.function, cfg.theta, p["n"], p["grid_size"], p["offset"])
    tables = {
        "birkhoff_summary": (
            ("n", "sup_root", "inf_root", "gap"),
            [(tr.n, tr.sup_root, tr.inf_root, tr.gap)],
        )
    }
    if p["trace"]:
        tables["birkhoff_trace"] = (("z_index", "value"), list(enumerate(tr.values)))
    return Outcome(
        {
            "n": tr.n,
            "grid_size": tr.grid_size,
            "offset": tr.offset,
            "sup_root": tr.sup_root,
            "inf_root": tr.inf_root,
            "gap": tr.gap,
        },
        tables,
    )


def op_radius(cfg):
    p = cfg.params
    seq = spectral_radius_estimate(cfg.function, cfg.theta, p["schedule"], p["grid_size"], p["offset"])
    det = fk_determinant(cfg.function)
    return Outcome(
        {"schedule": [n for n, _ in seq], "sup_root": [r for _, r in seq], "determinant": det.delta},
        {"radius": (("n", "sup_root"), seq)},
    )


def op_nu(cfg):
    p = cfg.params
    dist = nu_n_distribution(cfg.function, cfg.theta, p["n"], p["grid_size"], p["offset"])
    det = fk_determinant(cfg.function)
    target = det.delta**2
    s = dist.samples
    return Outcome(
        {
            "n": p["n"],
            "grid_size": p["grid_size"],
            "target": target,
            "mean": float(np.mean(s)),
            "median": float(np.median(s)),
            "mass_within_10pct": dist.mass_in(0.9 * target, 1.1 * target),
        },
        {"nu_samples": (("index", "sample"), list(enumerate(s)))},
    )


def op_spectrum(cfg):
    v = classify_spectrum(cfg.function)
    return Outcome(
        {
            "shape": v.shape,
            "radius": v.radius,
            "invertible": v.invertible,
            "evidence": v.evidence,
            "min_abs": v.min_abs,
            "method": v.determinant.method,
        }
    )


def op_brown(cfg):
    b = brown_measure(cfg.function)
    return Outcome({"radius": b.radius, "description": b.description, "point_mass": b.is_point_mass})


def op_model(cfg):
    tables = {}
    conv = _select_convergent(cfg, tables)
    model = build_model(cfg.function, conv, base_angle(cfg.params["base"], conv.q))
    pairs = eigenpairs_closed_form(model)
    tables["eigenvalues"] = (("re", "im"), [(e.value.real, e.value.imag) for e in pairs])
    nilpotent = all(e.value == 0 for e in pairs)
    residual = None if nilpotent else max(eigen_residual(model, e) for e in pairs)
    return Outcome(
        {
            "p": conv.p,
            "q": conv.q,
            "base_angle": _angle_text(model.base_angle),
            "radius": model.radius,
            "degenerate": model.degenerate,
            "min_abs_weight": float(np.min(np.abs(model.weights))),
            "max_residual": residual,
        },
        tables,
    )


def op_pseudospec(cfg, threads=0):
    p = cfg.params
    tables = {}
    conv = _select_convergent(cfg, tables)
    model = build_model(cfg.function, conv, base_angle(p["base"], conv.q))
    field = pseudospectrum_grid(model, p["re"], p["im"], p["resolution"], threads, cfg.seed)
    R, I = np.meshgrid(field.re, field.im)
    tables["pseudospectrum"] = (
        ("re", "im", "sigma_min"),
        list(zip(R.ravel(), I.ravel(), field.sigma.ravel())),
    )
    det = fk_determinant(cfg.function)
    return Outcome(
        {
            "p": conv.p,
            "q": conv.q,
            "epsilon": p["epsilon"],
            "fraction_inside_disk_below_epsilon": field.fraction_below(p["epsilon"], det.delta),
            "sigma_min_at_zero": sigma_min(model, 0),
            "all_converged": bool(field.converged.all()),
            "determinant": det.delta,
        },
        tables,
    )


def op_harper(cfg):
    p = cfg.params
    lam = p["coupling"]
    if p["q_max"] is not None:
        rows = [(pp, q, lam, e) for pp, q, e in butterfly(p["q_max"], lam)]
        result = {"coupling": lam, "q_max": p["q_max"], "rows": len(rows)}
    else:
        tables = {}
        conv = _select_convergent(cfg, tables)
        eig = harper_eigenvalues(lam, conv)
        rows = [(conv.p, conv.q, lam, e) for e in eig]
        result = {"coupling": lam, "p": conv.p, "q": conv.q, "min": float(eig[0]), "max": float(eig[-1])}
        return Outcome(result, {**tables, "harper": (("p", "q", "lambda", "eigenvalue"), rows)})
    return Outcome(result, {"harper": (("p", "q", "lambda", "eigenvalue"), rows)})


def op_index(cfg):
    p = cfg.params
    rep = subfactor_index(cfg.function, p["tol"], p["K"], p["method"])
    return Outcome(
        {
            "n": "DEGENERATE" if rep.degenerate else rep.n,
            "support": list(rep.support),
            "notes": rep.notes,
            "exact": rep.exact,
            "aliasing_error": rep.aliasing_error,
        }
    )


def op_simplicity(cfg):
    v = simplicity(cfg.function, cfg.theta)
    witness = None
    if v.failing_witness is not None:
        i, j, n = v.failing_witness
        witness = {"i": i, "j": j, "n": n}
    zs = zero_set(cfg.function)
    return Outcome(
        {
            "simple": v.simple,
            "witness": witness,
            "conditions_checked": list(v.conditions_checked),
            "note": v.note,
            "zeros": [_angle_text(a) for a in zs.angles()],
        }
    )


def op_algebraA(cfg):
    r = algebra_A(cfg.function, cfg.theta)
    return Outcome(
        {"n": "DEGENERATE" if r.n is None else r.n, "statement": r.statement, "isomorphism": r.isomorphism}
    )


DISPATCH = {
    "fkdet": op_fkdet,
    "birkhoff": op_birkhoff,
    "radius": op_radius,
    "nu": op_nu,
    "spectrum": op_spectrum,
    "brown": op_brown,
    "model": op_model,
    "pseudospec": op_pseudospec,
    "harper": op_harper,
    "index": op_index,
    "simplicity": op_simplicity,
    "algebraA": op_algebraA,
}


# ---------------------------------------------------------------------------
# running


def run(cfg: ExperimentConfig, threads: int = 0, write: bool = True) -> tuple[int, dict]:
    """Execute one experiment; return ``(exit_status, record)``."""
    record = {
        "operation": cfg.operation,
        "tag": TAGS[cfg.operation],
        "version": __version__,
        "theta": str(cfg.theta),
        "seed": cfg.seed,
    }
    if "function" in cfg.raw:
        record["function"] = cfg.raw["function"]
    try:
        fn = DISPATCH[cfg.operation]
        outcome = fn(cfg, threads) if cfg.operation == "pseudospec" else fn(cfg)
    except TwistShiftError as exc:
        record.update(status="error", error=type(exc).__name__, note=str(exc))
        best = getattr(exc, "best_estimate", None)
        if best is not None:
            record["best_estimate"] = best
        code = exc.exit_code
        outcome = None
    else:
        record.update(status="ok", result=outcome.result)
        code = 0
    if write:
        out = cfg.out
        if outcome is not None:
            files = []
            for name, (cols, rows) in outcome.tables.items():
                artifacts.write_csv(out / f"{name}.csv", cols, rows)
                files.append(f"{name}.csv")
            record["files"] = sorted(files)
        artifacts.write_json(out / f"{cfg.operation}.json", record)
    return code, record


def run_raw(raw: dict, operation: str, out=None, seed=None, threads: int = 0, write=True):
    """Build and run from an in-memory config; config errors become exit 2."""
    try:
        cfg = build_config(raw, operation, seed, out)
    except ConfigError as exc:
        return exc.exit_code, {"operation": operation, "status": "error", "error": "ConfigError", "note": str(exc)}
    return run(cfg, threads, write)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twistshift", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"twistshift {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for op in OPERATIONS:
        sp = sub.add_parser(op, help=TAGS[op])
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--seed", type=int, help="seed (overrides the config)")
        sp.add_argument("--threads", type=int, default=0, help="worker threads, 0 = all")
    rp = sub.add_parser("reproduce-all", help="run every acceptance criterion")
    rp.add_argument("--out", default="out/acceptance", help="report directory")
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--threads", type=int, default=0)
    rp.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="replace an acceptance tolerance (fault injection)",
    )
    return ap


def _set_threads(n: int):
    if n > 0:
        from numba import config as nb_config, set_num_threads

        set_num_threads(min(n, nb_config.NUMBA_NUM_THREADS))


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    _set_threads(args.threads)
    if args.command == "reproduce-all":
        from .acceptance import parse_overrides, reproduce_all

        try:
            overrides = parse_overrides(args.override)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return exc.exit_code
        report = reproduce_all(overrides, Path(args.out), seed=args.seed)
        print(report.table(), end="")
        return 0 if report.passed else 1
    try:
        cfg = load_config(args.config, args.command, args.seed, args.out)
    except ConfigError as exc:
        print(json.dumps({"operation": args.command, "status": "error", "error": "ConfigError", "note": str(exc)}))
        return exc.exit_code
    code, record = run(cfg, args.threads)
    print(artifacts.json_text(record), end="")
    return code


if __name__ == "__main__":
    sys.exit(main())
