"""Measurement statistics of single-site phase probes.

Separable probes give the SQL O(n^-1/2) per-site error; n_p-particle entangled (NOON)
probes accumulate n_p * phi and give O(1/n_p) sensitivity modulo 2 pi / n_p.  The
multiscale (Kitaev-type) cascade removes that ambiguity level by level.

All estimators read out two quadratures in a measurement frame rotated by a uniformly
random reference angle, which makes the error distribution independent of the phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .function_model import TWO_PI, periodic_modulus
from .seeding import substream


@dataclass(frozen=True)
class ProbeBudget:
    """Resource accounting.

    ``accounting="PS"``: N particles over n1 sites, n2 = N // n1 each, the N % n1
    leftover particles go one each to the first sites.  ``accounting="WS"``: N = n_p n_c.
    """

    N: int
    n1: int = 1
    n2: int = 1
    n_p: int = 1
    n_c: int = 1
    K: int = 1
    accounting: str = "PS"

    def __post_init__(self):
        for name in ("N", "n1", "n2", "n_p", "n_c", "K"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        if self.accounting == "PS":
            if self.n2 != self.N // self.n1:
                raise ValueError("PS accounting requires n2 = N // n1")
        elif self.accounting == "WS":
            if self.n_p * self.n_c > self.N:
                raise ValueError("WS accounting requires n_p * n_c <= N")
        else:
            raise ValueError(f"unknown accounting tag {self.accounting!r}")

    def site_budgets(self) -> np.ndarray:
        """Particles per site, summing exactly to N (PS accounting)."""
        b = np.full(self.n1, self.N // self.n1, dtype=np.int64)
        b[: self.N % self.n1] += 1
        return b


@dataclass(frozen=True)
class PhaseEstimate:
    value: float
    modulo: float
    particles_used: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulo:
            raise ValueError("estimate must lie in [0, modulo)")


def quadrature_phase(cos_est, sin_est):
    """Phase in [0, 2 pi) from (possibly noisy) cosine and sine quadratures."""
    return np.mod(np.arctan2(sin_est, cos_est), TWO_PI)


def _quadrature_readout(theta, n_copies: int, rng: np.random.Generator, size=None):
    """Estimate theta mod 2 pi from n_copies two-outcome interferometer runs.

    Half the copies are read in the X quadrature of a frame rotated by a random angle
    beta, the rest in the Y quadrature; both empirical quadratures are unbiased.
    """
    n_x = n_copies // 2
    n_y = n_copies - n_x
    shape = np.shape(theta) if size is None else size
    beta = rng.uniform(0.0, TWO_PI, size=shape)
    rel = np.asarray(theta) - beta
    k_x = rng.binomial(n_x, 0.5 * (1.0 + np.cos(rel)), size=shape)
    k_y = rng.binomial(n_y, 0.5 * (1.0 + np.sin(rel)), size=shape)
    c = 2.0 * k_x / n_x - 1.0
    s = 2.0 * k_y / n_y - 1.0
    return np.mod(beta + np.arctan2(s, c), TWO_PI)


def ramsey_sql_estimate(phi: float, n2: int, seed=None) -> PhaseEstimate:
    """Single-site phase from n2 separable probes (SQL)."""
    if n2 < 2:
        raise ValueError("need at least two particles")
    rng = substream(seed)
    value = float(_quadrature_readout(float(phi), n2, rng))
    return PhaseEstimate(_clean(value, TWO_PI), TWO_PI, n2)


def noon_estimate(phi: float, n_p: int, n_copies: int, seed=None) -> PhaseEstimate:
    """Phase estimate from n_copies copies of an n_p-particle NOON probe.

    The readout determines n_p * phi mod 2 pi, so phi itself is only known modulo 2 pi / n_p.
    """
    if n_copies < 2:
        raise ValueError("need at least two copies")
    if n_p < 1:
        raise ValueError("entanglement size must be positive")
    rng = substream(seed)
    theta = float(_quadrature_readout(n_p * float(phi), n_copies, rng))
    modulo = TWO_PI / n_p
    return PhaseEstimate(_clean(theta / n_p, modulo), modulo, n_p * n_copies)


def _clean(value: float, modulo: float) -> float:
    value = math.fmod(value, modulo)
    if value < 0:
        value += modulo
    return 0.0 if value >= modulo else value


def circular_median(samples: np.ndarray, axis: int = 0) -> np.ndarray:
    """Sample point minimising the summed periodic distance to all samples (first on ties)."""
    s = np.moveaxis(np.asarray(samples, dtype=float), axis, 0)
    cost = periodic_modulus(s[:, None, ...] - s[None, :, ...]).sum(axis=1)
    idx = np.argmin(cost, axis=0)
    return np.take_along_axis(s, idx[None, ...], axis=0)[0]


@dataclass(frozen=True)
class KitaevConstants:
    c4: float = 1.0
    c5: float = 4.0
    c6: float = 3.0


def min_copies(constants: KitaevConstants, alpha: float) -> int:
    """N_copy = ceil(c5^2 / alpha)."""
    return int(math.ceil(constants.c5 ** 2 / alpha - 1e-12))


def level_repeats(constants: KitaevConstants, n: int, n0: int) -> int:
    """N_repeat = ceil(c6 (n0 + 1 - n))."""
    return int(math.ceil(constants.c6 * (n0 + 1 - n) - 1e-12))


def kitaev_particle_count(n0: int, constants: KitaevConstants, alpha: float = 1.0,
                          n_copy: Optional[int] = None) -> int:
    """Exact particle total sum_n 2^n N_copy N_repeat over levels n = 0..n0."""
    n_copy = min_copies(constants, alpha) if n_copy is None else n_copy
    return sum((1 << n) * n_copy * level_repeats(constants, n, n0) for n in range(n0 + 1))


def kitaev_plan(budget: int, constants: KitaevConstants, alpha: float = 1.0):
    """Deepest level n0 affordable within c4 * budget particles, and the copy count.

    Copies per estimate start at ceil(c5^2/alpha) and are then raised uniformly to
    use the remaining budget.  Returns None if even level 0 is unaffordable.
    """
    cap = int(math.floor(constants.c4 * budget + 1e-9))
    base = min_copies(constants, alpha)
    if kitaev_particle_count(0, constants, alpha, base) > cap:
        return None
    n0 = 0
    while kitaev_particle_count(n0 + 1, constants, alpha, base) <= cap:
        n0 += 1
    weight = kitaev_particle_count(n0, constants, alpha, 1)
    return n0, max(base, cap // weight)


def unwrap_cascade(level_phases: Sequence[np.ndarray]):
    """Combine estimates theta_n of 2^n phi (mod 2 pi), n = 0..n0, into one phase.

    Keeps the set of theta with [2^n theta_n - 2^n theta]_{2pi} < pi/3 for every level
    processed so far; it is always a single arc.  Processing stops at the first level
    whose constraint empties the set.  The returned phase is the point of the surviving
    arc closest to the deepest consistent level's own estimate.

    Returns (phase in [0, 2pi), depth m reached) with array shape of the inputs.
    """
    theta0 = np.asarray(level_phases[0], dtype=float)
    lo = theta0 - np.pi / 3
    hi = theta0 + np.pi / 3
    center = theta0.copy()
    depth = np.zeros(theta0.shape, dtype=np.int64)
    active = np.ones(theta0.shape, dtype=bool)
    for n in range(1, len(level_phases)):
        scale = float(1 << n)
        th = np.asarray(level_phases[n], dtype=float)
        w = (np.pi / 3) / scale
        j0 = np.floor(((lo - w) * scale - th) / TWO_PI)
        found = np.zeros(theta0.shape, dtype=bool)
        new_lo, new_hi, new_c = lo.copy(), hi.copy(), center.copy()
        for dj in range(4):
            c = (th + TWO_PI * (j0 + dj)) / scale
            hit = active & ~found & (c + w > lo) & (c - w < hi)
            new_lo = np.where(hit, np.maximum(lo, c - w), new_lo)
            new_hi = np.where(hit, np.minimum(hi, c + w), new_hi)
            new_c = np.where(hit, c, new_c)
            found |= hit
        lo, hi, center = new_lo, new_hi, new_c
        depth = np.where(found, n, depth)
        active &= found
    phase = np.mod(np.clip(center, lo, hi), TWO_PI)
    return phase, depth


@dataclass(frozen=True)
class KitaevResult:
    estimate: float
    particles_used: int
    depth: int
    degraded: bool


def _level_estimates(theta_eff, n_copy: int, repeats: int, rng: np.random.Generator):
    """Circular median over ``repeats`` quadrature readouts of an effective phase."""
    reads = _quadrature_readout(theta_eff, n_copy, rng, size=(repeats,) + np.shape(theta_eff))
    return circular_median(reads, axis=0)


def kitaev_multiscale_estimate(phi_at_site: float, n0: int,
                               constants: KitaevConstants = KitaevConstants(),
                               alpha: float = 1.0, seed=None,
                               n_copy: Optional[int] = None) -> KitaevResult:
    """Multiscale estimate of one phase with 2^n-particle probes, n = 0..n0.

    Level n uses n_copy copies (default ceil(c5^2/alpha)) per readout and combines
    ceil(c6 (n0+1-n)) readouts by circular median.  Level n draws from substream (seed, n).
    ``degraded`` is set when the cascade could not reach n0.
    """
    if n0 < 0:
        raise ValueError("n0 must be non-negative")
    n_copy = min_copies(constants, alpha) if n_copy is None else int(n_copy)
    if n_copy < 2:
        raise ValueError("need at least two copies per readout")
    phases = []
    for n in range(n0 + 1):
        rng = seed if isinstance(seed, np.random.Generator) else substream(seed, n)
        phases.append(_level_estimates((1 << n) * float(phi_at_site), n_copy,
                                       level_repeats(constants, n, n0), rng))
    est, depth = unwrap_cascade(phases)
    used = kitaev_particle_count(n0, constants, alpha, n_copy)
    return KitaevResult(_clean(float(est), TWO_PI), used, int(depth), bool(depth < n0))
