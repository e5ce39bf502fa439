"""The ten acceptance criteria, runnable from tests or the ``verify`` CLI command.

Each criterion returns a CriterionResult; ``run_acceptance`` prints one PASS/FAIL line
per criterion.  ``quick=True`` shrinks trial counts and N ranges for smoke runs; the
tolerances are unchanged, so a quick run can fail where the full one passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import bounds
from .function_model import (FourierSpectrum, GridFunction, SmoothnessClass, c0_constant,
                             fourier_constraint, holder_seminorm, inverse_fourier,
                             sample_target)
from .harness.config import ExperimentConfig
from .harness.fit import check_bounds, fit_scaling
from .harness.sweep import run_sweep
from .probe_sim import ProbeBudget
from .ps_estimator import (_window, build_kernel, deterministic_error_bound, distance_sq,
                           kernel_nodes, smoothed_target)
from .ws_estimator import infidelity_chain, output_state, project_low_wavenumber, ws_estimate


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.name} -- {self.detail}"


def _pow2(lo: int, hi: int) -> List[int]:
    return [2 ** e for e in range(lo, hi + 1)]


class _Sweeps:
    """Sweeps shared between the scaling criteria and the bound-consistency check."""

    def __init__(self, quick: bool, seed: int, workers: int):
        self.quick, self.seed, self.workers = quick, seed, workers
        self.cache: Dict[str, list] = {}

    def config(self, name: str) -> ExperimentConfig:
        q = self.quick
        sql_n = _pow2(10, 16) if q else _pow2(10, 20)
        base = dict(seed=self.seed, workers=self.workers, trials=40 if q else 200, N_list=sql_n)
        if name == "ps_sql_q1":
            return ExperimentConfig(method="PS", regime="SQL", q=1.0, M=2 * math.pi, **base)
        if name == "ws_sql_q1":
            return ExperimentConfig(method="WS", regime="SQL", q=1.0, M=2 * math.pi, **base)
        if name == "ps_hl_q1":
            base.update(trials=30 if q else 100, N_list=_pow2(12, 17) if q else _pow2(12, 22))
            return ExperimentConfig(method="PS", regime="Heisenberg", q=1.0, M=2 * math.pi, **base)
        if name == "ps_sql_q05":
            return ExperimentConfig(method="PS", regime="SQL", q=0.5, M=1.0, G=8192, **base)
        if name == "ps_sql_q2":
            return ExperimentConfig(method="PS", regime="SQL", q=2.0, M=2 * math.pi, **base)
        raise KeyError(name)

    def records(self, name: str):
        if name not in self.cache:
            self.cache[name] = run_sweep(self.config(name))
        return self.cache[name]


def _exponent_check(fit, target: float, tol: float) -> bool:
    return abs(fit.exponent - target) <= tol


def crit1(sw: _Sweeps) -> CriterionResult:
    fit = fit_scaling(sw.records("ps_sql_q1"))
    ok = _exponent_check(fit, -1 / 3, 0.05)
    return CriterionResult(1, "PS-SQL scaling, q=1", ok,
                           f"exponent {fit.exponent:.4f} (target -0.3333 +/- 0.05, se {fit.stderr:.4f})",
                           {"fit": fit.to_dict()})


def crit2(sw: _Sweeps) -> CriterionResult:
    recs = sw.records("ps_hl_q1")
    fit = fit_scaling(recs)
    c = sw.config("ps_hl_q1").kitaev
    cap = 2 * c.c4 * c.c5 * c.c6
    worst = max(r.particles_used / r.N for r in recs if not r.flagged)
    ok = _exponent_check(fit, -0.5, 0.07) and worst <= cap
    return CriterionResult(2, "PS-Heisenberg scaling, q=1", ok,
                           f"exponent {fit.exponent:.4f} (target -0.5 +/- 0.07); "
                           f"max particles/N {worst:.3f} <= {cap:g}", {"fit": fit.to_dict()})


def crit3(sw: _Sweeps) -> CriterionResult:
    f05 = fit_scaling(sw.records("ps_sql_q05"))
    f2 = fit_scaling(sw.records("ps_sql_q2"))
    cls2 = SmoothnessClass(2.0, 2 * math.pi)
    target = sample_target(cls2, 1024, seed=0)
    try:
        ws_estimate(target, ProbeBudget(4096, n_c=4096, accounting="WS"), cls2, seed=0)
        refused = False
    except ValueError:
        refused = True
    ok = _exponent_check(f05, -0.25, 0.05) and _exponent_check(f2, -0.4, 0.05) and refused
    return CriterionResult(3, "fractional/higher smoothness", ok,
                           f"q=1/2 exponent {f05.exponent:.4f} (target -0.25), q=2 exponent "
                           f"{f2.exponent:.4f} (target -0.4), WS refuses q=2: {refused}",
                           {"fit_q05": f05.to_dict(), "fit_q2": f2.to_dict()})


def crit4(sw: _Sweeps) -> CriterionResult:
    fp = fit_scaling(sw.records("ps_sql_q1"))
    fw = fit_scaling(sw.records("ws_sql_q1"))
    diff = abs(fp.exponent - fw.exponent)
    return CriterionResult(4, "WS/PS SQL equivalence, q=1", diff <= 0.05,
                           f"PS {fp.exponent:.4f}, WS {fw.exponent:.4f}, |diff| {diff:.4f} <= 0.05",
                           {"fit_ws": fw.to_dict()})


def crit5(sw: _Sweeps) -> CriterionResult:
    moment_res = 0.0
    for m in range(5):
        ker = build_kernel(m, 1024)
        rows = ker.theta < 1.0
        nodes = kernel_nodes(ker.theta[rows], m)
        for k in range(m + 1):
            r = np.sum(nodes ** k * ker.table[rows], axis=-1) - (1.0 if k == 0 else 0.0)
            moment_res = max(moment_res, float(np.max(np.abs(r))))
    k1 = build_kernel(1, 1024)
    y = np.linspace(-1.0, 1.0, 4001, endpoint=False)
    tri = float(np.max(np.abs(k1(y) - (1.0 - np.abs(y)))))
    tri_table = float(np.max(np.abs(k1.table[:, 0] - k1.theta)))
    rng = np.random.default_rng(sw.seed)
    repro = 0.0
    for m in range(5):
        ker = build_kernel(m)
        n1 = 16
        for _ in range(20):
            alpha = rng.uniform()
            x = rng.uniform(0, 1, 50)
            coef = rng.normal(size=m + 1)
            _, yy = _window(x, n1, alpha, m, 1.0)
            xs = x[:, None] - yy * ker.scale(n1)
            got = np.sum(np.polyval(coef, xs) * ker(yy), axis=-1)
            repro = max(repro, float(np.max(np.abs(got - np.polyval(coef, x)))))
    ok = moment_res < 1e-10 and tri < 1e-12 and tri_table < 1e-12 and repro < 1e-8
    return CriterionResult(5, "kernel suite", ok,
                           f"moment residual {moment_res:.2e}, |h1 - triangle| {max(tri, tri_table):.2e}, "
                           f"polynomial reproduction {repro:.2e}")


def crit6(sw: _Sweeps) -> CriterionResult:
    worst = {}
    alphas = (np.arange(32) + 0.5) / 32
    n_targets = 20 if sw.quick else 100
    for m, sigma in ((0, 1.0), (1, 1.0), (0, 0.5)):
        cls = SmoothnessClass(m + sigma, 2 * math.pi)
        ker = build_kernel(m)
        ratio = 0.0
        for s in range(n_targets):
            tgt = sample_target(cls, 2048, seed=[sw.seed, m, int(2 * sigma), s])
            for n1 in (8, 32):
                d = np.mean([distance_sq(tgt, smoothed_target(tgt, ker, n1, a)) for a in alphas])
                ratio = max(ratio, d / deterministic_error_bound(cls, n1, m))
        worst[(m, sigma)] = ratio
    ok = all(v <= 1.0 for v in worst.values())
    detail = ", ".join(f"(m={m}, sigma={s:g}) max ratio {v:.3f}" for (m, s), v in worst.items())
    return CriterionResult(6, "deterministic-error bound", ok, detail)


def _chain_triples(n: int, seed: int):
    rng = np.random.default_rng(seed)
    G = 513
    for t in range(n):
        q = float(rng.choice([0.5, 1.0]))
        cls = SmoothnessClass(q, float(rng.uniform(0.5, 8.0)))
        phi = sample_target(cls, G, seed=[seed, t, 0], k_gen=64)
        n_p = int(rng.integers(1, 9))
        pert = sample_target(SmoothnessClass(1.0, 1.0), G, seed=[seed, t, 1], k_gen=32).values.copy()
        peak = float(np.max(np.abs(pert))) or 1.0
        pert *= rng.uniform(0.0, 0.999) * (math.pi / n_p) / peak
        est = GridFunction(phi.values + pert)
        K = int(rng.integers(1, 64))
        yield phi, est, n_p, K


def crit7(sw: _Sweeps) -> CriterionResult:
    first = second = math.inf
    n = 200 if sw.quick else 1000
    for phi, est, n_p, K in _chain_triples(n, sw.seed):
        post, _ = project_low_wavenumber(output_state(phi, n_p), K)
        d2, middle, ps, qt = infidelity_chain(phi, est, n_p, post)
        first = min(first, middle - d2)
        second = min(second, ps + qt - middle)
    ok = first >= -1e-10 and second >= -1e-10
    return CriterionResult(7, "infidelity chain", ok,
                           f"min slack first {first:.3e}, second {second:.3e} over {n} triples")


def crit8(sw: _Sweeps) -> CriterionResult:
    K, G = 8, 128
    J0 = bounds.qfi_matrix(bounds.PhaseVector(np.zeros(K)), G)
    diag = float(np.max(np.abs(np.diag(J0) - 2.0)))
    off = float(np.max(np.abs(J0 - np.diag(np.diag(J0)))))
    rng = np.random.default_rng(sw.seed)
    jmax = 0.0
    fd = 0.0
    for i in range(100):
        q = float(rng.choice([0.5, 1.0, 2.0]))
        M = float(rng.uniform(0.5, 10.0))
        rho = bounds.rho_radius(q, M, K)
        v = rng.normal(size=K)
        u = bounds.PhaseVector(v / np.linalg.norm(v) * rho * rng.uniform() ** (1 / K), rho)
        J = bounds.qfi_matrix(u, G)
        jmax = max(jmax, float(np.max(np.diag(J))))
        if i < 20:
            fd = max(fd, float(np.max(np.abs(J - bounds.qfi_matrix_fd(u, G)))))
    ok = diag <= 1e-6 and off <= 1e-6 and jmax <= 8 and fd <= 1e-5
    return CriterionResult(8, "quantum Fisher information", ok,
                           f"|J_jj - 2| {diag:.1e}, |J_jk| {off:.1e}, max J_jj {jmax:.4f} <= 8, "
                           f"analytic vs finite difference {fd:.1e}")


def crit9(sw: _Sweeps) -> CriterionResult:
    failures = []
    for name in ("ps_sql_q1", "ws_sql_q1", "ps_hl_q1", "ps_sql_q05", "ps_sql_q2"):
        chk = check_bounds(sw.records(name))
        if not chk.passed:
            failures.append(name)
    w1 = bounds.wbb(1.0, 1.0)
    w2 = bounds.wbb(0.05, 0.1)
    exact = abs(w1 - 0.5) <= 1e-12 and abs(w2 - 1 / 30) <= 1e-12
    ok = not failures and exact
    return CriterionResult(9, "bound consistency", ok,
                           f"sweeps below floor: {failures or 'none'}; wbb(1,1)={w1:.15g}, "
                           f"wbb(0.05,0.1)={w2:.15g}")


def crit10(sw: _Sweeps) -> CriterionResult:
    rng = np.random.default_rng(sw.seed)
    G = 1024
    violations = 0
    for i in range(200):
        q = float(rng.choice([0.25, 0.5, 0.75, 1.0, 1.5, 2.0]))
        cls = SmoothnessClass(q, float(rng.uniform(0.1, 10.0)))
        K = int(rng.integers(1, G // 8))
        k = np.arange(1, K + 1)
        pos = (rng.normal(size=K) + 1j * rng.normal(size=K)) * k ** (-rng.uniform(0.5, q + 2))
        pos *= math.sqrt(rng.uniform(0.01, 1.0) * cls.M ** 2 / (2 * c0_constant(cls) ** 2)
                         / np.sum(k ** (2 * q) * np.abs(pos) ** 2))
        coeffs = np.concatenate([np.conj(pos[::-1]), [rng.normal()], pos])
        spec = FourierSpectrum(coeffs, cls.L)
        _, sat = fourier_constraint(spec, cls)
        if not sat:
            continue
        if holder_seminorm(inverse_fourier(spec, G), cls) > cls.seminorm_budget:
            violations += 1
    c0 = c0_constant(SmoothnessClass(1.0, 1.0))
    ok = violations == 0 and abs(c0 - 2 * math.pi) <= 1e-9
    return CriterionResult(10, "Fourier sufficiency and c0", ok,
                           f"{violations} of 200 spectra violate the discretised constraint; "
                           f"c0(q=1) - 2pi = {c0 - 2 * math.pi:.1e}")


CRITERIA: Dict[int, Callable[[_Sweeps], CriterionResult]] = {
    1: crit1, 2: crit2, 3: crit3, 4: crit4, 5: crit5,
    6: crit6, 7: crit7, 8: crit8, 9: crit9, 10: crit10,
}


def run_acceptance(quick: bool = False, seed: int = 2024, workers: int = 1,
                   only: Optional[List[int]] = None, log=print) -> List[CriterionResult]:
    sw = _Sweeps(quick, seed, workers)
    out = []
    for n, fn in CRITERIA.items():
        if only and n not in only:
            continue
        res = fn(sw)
        if log is not None:
            log(res.line())
        out.append(res)
    return out
