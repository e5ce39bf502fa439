"""Position-state estimation: per-site phases at equispaced sites, then kernel smoothing.

Sites sit at x_j = (j + alpha) L / n1 with a random offset alpha.  The smoothing
function is f(x) = h(x / l), l = (m+1) L / (2 n1), where the order-m kernel h is
supported on [-1, 1) and satisfies, for every 0 <= theta < 1 and k = 0..m,

    sum_j y_j^k h(y_j) = [k == 0],   y_j = 2 (j + theta) / (m + 1) - 1,  j = 0..m,

so that the reconstruction reproduces polynomials of degree <= m exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .function_model import GridFunction, SmoothnessClass, mspe, wrap_phase
from .probe_sim import (KitaevConstants, ProbeBudget, _quadrature_readout,
                        kitaev_multiscale_estimate, kitaev_plan)
from .records import EstimationRecord
from .seeding import seed_sequence, substream

SMALL_PHASE = math.pi / 3


def kernel_nodes(theta, m: int) -> np.ndarray:
    """Nodes 2 (j + theta) / (m + 1) - 1 for j = 0..m (last axis)."""
    theta = np.asarray(theta, dtype=float)
    return 2.0 * (np.arange(m + 1) + theta[..., None]) / (m + 1) - 1.0


@dataclass(frozen=True, eq=False)
class SmoothingKernel:
    """Order-m smoothing kernel.

    ``table[t, j]`` is h at node j for theta = ``theta[t]``, obtained by solving the
    moment system; ``H`` bounds |h|.  Calling the kernel evaluates h exactly through
    the Lagrange form of the same solution, h(y_j) = prod_{i != j} y_i / (y_i - y_j).
    """

    m: int
    theta: np.ndarray
    table: np.ndarray
    H: float

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        m = self.m
        inside = (y >= -1.0) & (y < 1.0)
        if m == 0:
            return inside.astype(float)
        pos = (np.clip(y, -1.0, 1.0) + 1.0) * (m + 1) / 2.0
        j = np.clip(np.floor(pos), 0, m)
        theta = pos - j
        nodes = kernel_nodes(theta, m)
        out = np.ones(y.shape)
        for i in range(m + 1):
            factor = nodes[..., i] * (m + 1) / (2.0 * np.where(j == i, 1.0, i - j))
            out *= np.where(j == i, 1.0, factor)
        return np.where(inside, out, 0.0)

    def scale(self, n1: int, L: float = 1.0) -> float:
        """Smoothing length l = (m + 1) L / (2 n1)."""
        return (self.m + 1) * L / (2.0 * n1)

    def l2_weight(self) -> float:
        """int_{-1}^{1} h(y)^2 dy, by Gauss-Legendre on each node cell."""
        x, w = np.polynomial.legendre.leggauss(max(8, 2 * self.m + 2))
        cells = np.linspace(-1.0, 1.0, self.m + 2)
        total = 0.0
        for a, b in zip(cells[:-1], cells[1:]):
            y = 0.5 * (b - a) * x + 0.5 * (a + b)
            total += 0.5 * (b - a) * float(np.sum(w * self(y) ** 2))
        return total


def build_kernel(m: int, theta_grid_size: int = 1024) -> SmoothingKernel:
    if m < 0:
        raise ValueError("kernel order must be non-negative")
    theta = np.linspace(0.0, 1.0, theta_grid_size + 1)
    nodes = kernel_nodes(theta, m)
    assert np.all(np.diff(nodes, axis=-1) > 0), "coincident kernel nodes"
    # moments[t, k, j] = y_j(theta_t)^k; solve sum_j y_j^k h_j = [k == 0]
    moments = nodes[:, None, :] ** np.arange(m + 1)[None, :, None]
    rhs = np.zeros((theta.size, m + 1))
    rhs[:, 0] = 1.0
    table = np.linalg.solve(moments, rhs[..., None])[..., 0]
    return SmoothingKernel(m, theta, table, float(np.max(np.abs(table))))


def _window(x, n1: int, alpha: float, m: int, L: float):
    """Site indices and kernel arguments y = (x - x_j)/l of the m+1 sites covering x."""
    u = np.asarray(x, dtype=float) * n1 / L - alpha
    top = np.floor(u + (m + 1) / 2.0)
    j = top[..., None] - np.arange(m + 1)
    y = 2.0 * (u[..., None] - j) / (m + 1)
    return j.astype(np.int64) % n1, y


def kernel_sum_rule_check(kernel: SmoothingKernel, n1: int, x, alpha: float,
                          L: float = 1.0) -> np.ndarray:
    """Residuals sum_j (x_j - x)^k f(x - x_j) - [k == 0] for k = 0..m (last axis)."""
    _, y = _window(x, n1, alpha, kernel.m, L)
    l = kernel.scale(n1, L)
    w = kernel(y)
    dist = -y * l
    res = np.stack([np.sum(dist ** k * w, axis=-1) for k in range(kernel.m + 1)], axis=-1)
    res[..., 0] -= 1.0
    return res


def sample_at_sites(f: GridFunction, n1: int, alpha: float) -> np.ndarray:
    """f((j + alpha) L / n1) for j = 0..n1-1, exact for band-limited f.

    Folds the grid spectrum onto the n1 sites and transforms back (O(G + n1 log n1)).
    """
    G = f.grid_size
    c = np.fft.fft(f.values) / G
    k = np.fft.fftfreq(G, d=1.0 / G).astype(np.int64)
    folded = np.zeros(n1, dtype=complex)
    np.add.at(folded, k % n1, c * np.exp(2j * np.pi * k * alpha / n1))
    return (np.fft.ifft(folded) * n1).real


def reconstruct(site_values, alpha: float, kernel: SmoothingKernel, G: int,
                L: float = 1.0, wrap: bool = False) -> GridFunction:
    """sum_j v_j f(x - x_j) on the grid.

    With ``wrap`` the site values are treated as phases: each grid point combines
    v_ref + [v_j - v_ref] (differences taken in [-pi, pi)) around its nearest site.
    Because the weights sum to one this equals the plain sum whenever the values in a
    window lie on one branch.
    """
    v = np.asarray(site_values, dtype=float)
    n1 = v.size
    x = np.arange(G) * (L / G)
    idx, y = _window(x, n1, alpha, kernel.m, L)
    w = kernel(y)
    vals = v[idx]
    if wrap:
        near = np.argmin(np.abs(y), axis=-1)
        ref = np.take_along_axis(vals, near[:, None], axis=-1)
        out = ref[:, 0] + np.sum(w * wrap_phase(vals - ref), axis=-1)
    else:
        out = np.sum(w * vals, axis=-1)
    return GridFunction(out, L)


def smoothed_target(target: GridFunction, kernel: SmoothingKernel, n1: int,
                    alpha: float) -> GridFunction:
    """phi*(x) = sum_j phi(x_j) f(x - x_j): what the estimator converges to as n2 grows."""
    if not 0 <= alpha < 1:
        raise ValueError("site offset alpha must lie in [0, 1)")
    phi_sites = sample_at_sites(target, n1, alpha)
    return reconstruct(phi_sites, alpha, kernel, target.grid_size, target.length)


def smoothing_constant(m: int, sigma: float) -> float:
    """Prefactor c_m of the deterministic-error bound.

    m >= 1: c_m = 2 m (m+1)^2 / (2 (m!)^2 (4 m^2 - 1)).  m = 0 (nearest-site box) is
    not covered by that expression (it vanishes); averaging over the site offset gives
    delta_det^2 = (1/2l) int_{-l}^{l} dt int dx/L |phi(x+t) - phi(x)|^2, hence
    c_0 = 1 / (2 sigma + 1).
    """
    if m == 0:
        return 1.0 / (2 * sigma + 1)
    return 2 * m * (m + 1) ** 2 / (2 * math.factorial(m) ** 2 * (4 * m * m - 1))


def deterministic_error_bound(cls: SmoothnessClass, n1: int, m: Optional[int] = None) -> float:
    """c_m ((m+1)/2)^(2q) n1^(-2q) M^2 (offset-averaged delta_det^2 bound)."""
    m = cls.m if m is None else m
    return smoothing_constant(m, cls.sigma) * ((m + 1) / 2) ** (2 * cls.q) * n1 ** (-2 * cls.q) * cls.M ** 2


def distance_sq(a: GridFunction, b: GridFunction) -> float:
    """D^2(a, b), the periodic mean-square distance."""
    return mspe(a, b)


def site_phase_estimates(phi_sites: np.ndarray, budgets: np.ndarray, regime: str, seed,
                         constants: KitaevConstants = KitaevConstants()):
    """Independent per-site estimates; site j draws only from substream (seed, j).

    Returns (estimates in [0, 2pi), particles used, number of sites below the Kitaev
    level-0 cost that fell back to separable probes).
    """
    est = np.empty(phi_sites.size)
    used = 0
    fallback = 0
    plans = {}
    for j, (phi, b) in enumerate(zip(phi_sites, budgets)):
        b = int(b)
        if regime == "SQL":
            rng = substream(seed, j)
            est[j] = _quadrature_readout(float(phi), b, rng)
            used += b
            continue
        if b not in plans:
            plans[b] = kitaev_plan(b, constants)
        plan = plans[b]
        if plan is None:
            rng = substream(seed, j)
            est[j] = _quadrature_readout(float(phi), b, rng)
            used += b
            fallback += 1
            continue
        res = kitaev_multiscale_estimate(float(phi), plan[0], constants, 1.0,
                                         seed_sequence(seed, j), n_copy=plan[1])
        est[j] = res.estimate
        used += res.particles_used
    return est, used, fallback


def ps_estimate(target: GridFunction, budget: ProbeBudget, cls: SmoothnessClass,
                regime: str = "SQL", kernel: Optional[SmoothingKernel] = None, seed=0,
                constants: KitaevConstants = KitaevConstants(),
                alpha: Optional[float] = None) -> EstimationRecord:
    """One position-state trial.

    The site offset alpha is drawn from substream (seed, 0) unless given; site j uses
    substream (seed, 1, j).  SQL sites use separable quadrature probes with their share
    of particles; Heisenberg sites use the multiscale NOON cascade with the deepest level
    their share affords.  The record carries delta_stat^2 = D^2(estimate, phi*) and
    delta_det^2 = D^2(phi, phi*).
    """
    if regime not in ("SQL", "Heisenberg"):
        raise ValueError(f"unknown regime {regime!r}")
    if budget.accounting != "PS":
        raise ValueError("position-state estimation needs PS accounting")
    if kernel is None:
        kernel = build_kernel(cls.m)
    n1 = budget.n1
    if n1 < kernel.m + 1:
        raise ValueError("need at least m + 1 sites")
    budgets = budget.site_budgets()
    if regime == "SQL" and budgets.min() < 2:
        raise ValueError("SQL sites need at least two particles each")
    seed = int(seed)
    if alpha is None:
        alpha = float(substream(seed, 0).uniform())
    flags = []
    if regime == "SQL" and float(np.max(np.abs(target.values))) > SMALL_PHASE:
        flags.append("amplitude")

    phi_sites = sample_at_sites(target, n1, alpha)
    est, used, fallback = site_phase_estimates(phi_sites, budgets, regime,
                                               seed_sequence(seed, 1), constants)
    G, L = target.grid_size, target.length
    estimate = reconstruct(wrap_phase(est), alpha, kernel, G, L, wrap=True)
    phi_star = reconstruct(phi_sites, alpha, kernel, G, L)
    return EstimationRecord(
        method="PS", regime=regime, q=cls.q, M=cls.M, N=budget.N, trial=0, seed=seed,
        mspe=mspe(estimate, target), err_a_sq=mspe(estimate, phi_star),
        err_b_sq=mspe(target, phi_star), particles_used=int(used), flags=tuple(flags),
        estimate=estimate,
        info={"n1": n1, "n2": budget.n2, "alpha": alpha, "m": kernel.m,
              "kitaev_fallback_sites": fallback},
    )
