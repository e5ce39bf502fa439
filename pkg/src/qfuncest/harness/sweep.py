"""Seeded Monte Carlo sweeps.

Trial (N, t) uses the child seed derive_seed(master, N, t); its target comes from
derive_seed(master, N, t, 0) (or derive_seed(master, 0) for a fixed target).  Every
trial is therefore reproducible on its own and the output does not depend on how the
trials are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import List

from ..bounds import resource_optima
from ..function_model import SmoothnessClass, sample_target
from ..probe_sim import ProbeBudget
from ..ps_estimator import build_kernel, ps_estimate
from ..records import EstimationRecord
from ..seeding import derive_seed
from ..ws_estimator import ws_estimate
from .config import ExperimentConfig


@lru_cache(maxsize=8)
def _kernel(m: int):
    return build_kernel(m)


def smoothness_class(cfg: ExperimentConfig) -> SmoothnessClass:
    return SmoothnessClass(cfg.q, cfg.M, cfg.L)


def trial_target(cfg: ExperimentConfig, N: int, trial: int):
    cls = smoothness_class(cfg)
    key = derive_seed(cfg.seed, 0) if cfg.target_mode == "fixed" else derive_seed(cfg.seed, N, trial, 0)
    return sample_target(cls, cfg.G, cfg.cap(), seed=key, constraint_fraction=cfg.constraint_fraction)


def _estimate(cfg: ExperimentConfig, target, N: int, seed: int) -> EstimationRecord:
    cls = smoothness_class(cfg)
    if cfg.method == "WS":
        budget = ProbeBudget(N, n_c=N, accounting="WS")
        return ws_estimate(target, budget, cls, seed, regime=cfg.regime,
                           constants=cfg.kitaev, kappa=cfg.ws_kappa)
    split = resource_optima(cfg.q, cfg.M, N, cfg.regime,
                            np_prefactor=cfg.heisenberg_prefactor if cfg.regime == "Heisenberg" else None)
    n1 = split.n1
    if n1 >= cfg.G / 4:
        raise ValueError(f"{n1} sites exceed the grid headroom G/4")
    m = cls.m if cfg.kernel_order is None else cfg.kernel_order
    budget = ProbeBudget(N, n1, N // n1)
    return ps_estimate(target, budget, cls, cfg.regime, _kernel(m), seed, cfg.kitaev)


def run_trial(cfg: ExperimentConfig, N: int, trial: int, keep_estimate: bool = False) -> EstimationRecord:
    """One trial; estimator precondition failures become flagged records."""
    seed = derive_seed(cfg.seed, N, trial)
    try:
        rec = _estimate(cfg, trial_target(cfg, N, trial), N, seed)
    except ValueError:
        return EstimationRecord(cfg.method, cfg.regime, cfg.q, cfg.M, N, trial, seed,
                                math.nan, math.nan, math.nan, 0, ("precondition",))
    rec.trial = trial
    rec.seed = seed
    if not keep_estimate:
        rec.estimate = None
    return rec


def _task(args):
    return run_trial(*args)


def run_sweep(cfg: ExperimentConfig) -> List[EstimationRecord]:
    """Records for every (N, trial), ordered by N then trial."""
    tasks = [(cfg, N, t) for N in cfg.N_list for t in range(cfg.trials)]
    if cfg.workers == 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (8 * cfg.workers))))
