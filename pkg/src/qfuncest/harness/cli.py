"""Command line: generate, estimate, sweep, bounds, verify."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from ..bounds import bound_report, resource_optima
from ..function_model import GridFunction, SmoothnessClass, sample_target
from ..probe_sim import KitaevConstants
from ..records import records_to_csv
from .config import ExperimentConfig, OutputPaths
from .fit import check_bounds, fit_scaling
from .sweep import _estimate, run_sweep


def _floats(text: str) -> List[float]:
    return [eval_number(t) for t in text.split(",") if t]


def eval_number(text: str) -> float:
    """Parse a number, allowing 'pi' multiples such as '2pi' or 'pi/3'."""
    t = text.strip().lower().replace(" ", "")
    if "pi" in t:
        head, _, tail = t.partition("pi")
        mult = {"": 1.0, "+": 1.0, "-": -1.0}.get(head)
        mult = float(head.rstrip("*")) if mult is None else mult
        div = float(tail[1:]) if tail.startswith("/") else 1.0
        return mult * math.pi / div
    return float(t)


def _ints(text: str) -> List[int]:
    out = []
    for t in text.split(","):
        t = t.strip()
        if t.startswith("2^"):
            out.append(2 ** int(t[2:]))
        elif t:
            out.append(int(t))
    return out


def _write(text: str, path: Optional[str]):
    if path is None or path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text)


def cmd_generate(a) -> int:
    cls = SmoothnessClass(a.q, a.M, a.L)
    f = sample_target(cls, a.G, a.amplitude_cap, seed=a.seed, constraint_fraction=a.constraint_fraction)
    _write(f.to_csv(), a.out)
    return 0


def _config_from_args(a, require_seed: bool) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(Path(a.config).read_text()) if a.config else ExperimentConfig()
    over = dict(method=a.method, regime=a.regime, q=a.q, M=a.M, L=a.L, G=a.G, trials=a.trials,
                seed=a.seed, kernel_order=a.kernel_order, constraint_fraction=a.constraint_fraction,
                target_mode=a.target_mode, heisenberg_prefactor=a.heisenberg_prefactor,
                ws_kappa=a.ws_kappa, workers=a.workers)
    if a.N_list:
        over["N_list"] = _ints(a.N_list)
    if a.amplitude_cap is not None:
        over["amplitude_cap"] = "auto" if a.amplitude_cap == "auto" else (
            None if a.amplitude_cap == "none" else eval_number(a.amplitude_cap))
    if any(v is not None for v in (a.c4, a.c5, a.c6)):
        k = cfg.kitaev
        over["kitaev"] = KitaevConstants(a.c4 or k.c4, a.c5 or k.c5, a.c6 or k.c6)
    if any(v is not None for v in (a.records, a.fits, a.svg)):
        o = cfg.output
        over["output"] = OutputPaths(a.records or o.records, a.fits or o.fits, a.svg or o.svg)
    cfg = cfg.with_overrides(**over)
    if a.amplitude_cap == "none":
        cfg = replace(cfg, amplitude_cap=None)
    if require_seed and a.seed is None:
        raise SystemExit("--seed is required")
    return cfg


def cmd_estimate(a) -> int:
    cfg = _config_from_args(a, require_seed=False)
    seed = 0 if a.seed is None else a.seed
    cls = SmoothnessClass(cfg.q, cfg.M, cfg.L)
    if a.target:
        target = GridFunction.from_csv(Path(a.target).read_text(), cfg.L)
    else:
        target = sample_target(cls, cfg.G, cfg.cap(), seed=seed, constraint_fraction=cfg.constraint_fraction)
    rec = _estimate(cfg, target, a.N, seed)
    _write(rec.to_json(), None)
    return 0


def _svg(records, path: str, title: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    pts = [(r.N, r.delta) for r in records if not r.flagged]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog([p[0] for p in pts], [p[1] for p in pts], ".", alpha=0.3)
    ax.set_xlabel("N")
    ax.set_ylabel("delta")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_sweep(a) -> int:
    cfg = _config_from_args(a, require_seed=True)
    records = run_sweep(cfg)
    _write(records_to_csv(records), cfg.output.records or "-")
    doc = {"config": cfg.to_dict()}
    if cfg.fit_ready:
        fit = fit_scaling(records)
        doc["fit"] = fit.to_dict()
        check = check_bounds(records)
        doc["bounds_passed"] = check.passed
        doc["bounds_table"] = check.table()
        sys.stderr.write(f"exponent {fit.exponent:.4f} +/- {fit.stderr:.4f}; "
                         f"bounds {'pass' if check.passed else 'FAIL'}\n")
    else:
        doc["fit"] = None
        doc["note"] = "fits need at least 30 trials and 4 N values"
    if cfg.output.fits:
        Path(cfg.output.fits).write_text(json.dumps(doc, indent=2))
    if cfg.output.svg:
        _svg(records, cfg.output.svg, f"{cfg.method} {cfg.regime} q={cfg.q:g}")
    return 0


def cmd_bounds(a) -> int:
    cols = ["q", "M", "N", "delta_uub", "delta_wbb", "rho", "sql_lower", "hl_lower", "optimal_K",
            "max_np", "c0", "c1_floor", "c2_floor", "sql_floor", "hl_floor", "n1_sql", "n1_hl", "n_p_hl"]
    lines = [",".join(cols)]
    for q in _floats(a.q):
        for M in _floats(a.M):
            for N in _ints(a.N):
                d = json.loads(bound_report(q, M, N).to_json())
                s = resource_optima(q, M, N, "SQL")
                h = resource_optima(q, M, N, "Heisenberg")
                d.update(n1_sql=s.n1, n1_hl=h.n1, n_p_hl=h.n_p)
                lines.append(",".join(repr(d[c]) for c in cols))
    _write("\n".join(lines) + "\n", a.out)
    return 0


def cmd_verify(a) -> int:
    from ..acceptance import run_acceptance

    results = run_acceptance(quick=a.quick, seed=a.seed, workers=a.workers,
                             only=_ints(a.only) if a.only else None)
    ok = all(r.passed for r in results)
    if a.pytest:
        import pytest
        ok = pytest.main([a.pytest, "-q"]) == 0 and ok
    return 0 if ok else 1


def _experiment_args(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--method", choices=["PS", "WS"])
    p.add_argument("--regime", choices=["SQL", "Heisenberg"])
    p.add_argument("--q", type=eval_number)
    p.add_argument("--M", type=eval_number)
    p.add_argument("--L", type=float)
    p.add_argument("--G", type=int)
    p.add_argument("--N-list", dest="N_list", help="comma list, e.g. 2^10,2^12,4096")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--c4", type=float)
    p.add_argument("--c5", type=float)
    p.add_argument("--c6", type=float)
    p.add_argument("--kernel-order", dest="kernel_order", type=int)
    p.add_argument("--constraint-fraction", dest="constraint_fraction", type=float)
    p.add_argument("--amplitude-cap", dest="amplitude_cap", help="number, 'auto' or 'none'")
    p.add_argument("--target-mode", dest="target_mode", choices=["fresh", "fixed"])
    p.add_argument("--heisenberg-prefactor", dest="heisenberg_prefactor", type=float)
    p.add_argument("--ws-kappa", dest="ws_kappa", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--records", help="records CSV path (default stdout)")
    p.add_argument("--fits", help="fits JSON path")
    p.add_argument("--svg", help="log-log scatter SVG path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qfuncest", description="Quantum function-estimation simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random in-class target as CSV")
    g.add_argument("--q", type=eval_number, default=1.0)
    g.add_argument("--M", type=eval_number, default=2 * math.pi)
    g.add_argument("--L", type=float, default=1.0)
    g.add_argument("--G", type=int, default=4096)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--amplitude-cap", dest="amplitude_cap", type=eval_number)
    g.add_argument("--constraint-fraction", dest="constraint_fraction", type=float, default=0.9)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("estimate", help="run one trial and print its JSON record")
    _experiment_args(e)
    e.add_argument("--N", type=int, required=True)
    e.add_argument("--target", help="target CSV (columns x,value); default draws one")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("sweep", help="run a seeded sweep; records CSV plus fits JSON")
    _experiment_args(s)
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bounds", help="bound table as CSV over (q, M, N) grids")
    b.add_argument("--q", default="0.5,1,2")
    b.add_argument("--M", default="2pi")
    b.add_argument("--N", default="2^10,2^15,2^20")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("verify", help="run the acceptance criteria")
    v.add_argument("--quick", action="store_true", help="smaller sweeps (smoke run)")
    v.add_argument("--seed", type=int, default=2024)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--only", help="comma list of criterion numbers")
    v.add_argument("--pytest", help="also run pytest on this path")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
