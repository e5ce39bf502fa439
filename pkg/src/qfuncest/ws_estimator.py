"""Wavenumber-state estimation.

The probe (|x;->^n_p + e^{i n_p phi(x)} |x;+>^n_p) / sqrt(2), integrated over x, is
stored in the wavenumber basis: the vacuum branch sits at k = 0, the excited branch
holds the Fourier coefficients of e^{i n_p phi}/sqrt(2).  Estimation projects onto
|k| <= K, reconstructs the projected state from finitely many copies and reads the
phase off the excited branch.

Tomography: a quarter of the copies is measured in the branch basis {|->, |+>}, which
fixes |b|^2, the vacuum weight.  Every other copy is measured in position and, in the
internal degree of freedom, in the basis (|-> +/- e^{i beta}|+>)/sqrt(2) with beta = 0
or pi/2 (equal shares).  The +/- record s = +/-1 satisfies

    E[s e^{-2 pi i k x / L}] = conj(b) e^{-i beta} a_k + b e^{i beta} conj(a_{-k}),

so combining both values of beta yields unbiased estimates of conj(b) a_k for every
|k| <= K from the same copies.  The infidelity then grows like K / n_c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .function_model import (TWO_PI, GridFunction, SmoothnessClass, c0_constant, mspe,
                             wrap_phase)
from .probe_sim import KitaevConstants, ProbeBudget, circular_median, level_repeats, unwrap_cascade
from .records import EstimationRecord
from .seeding import substream

MIN_POSTSELECTION = 1e-6


@dataclass(frozen=True, eq=False)
class WavefunctionState:
    """Two-branch probe amplitudes over wavenumbers k = -K_max..K_max (index k + K_max)."""

    amp_vacuum: np.ndarray
    amp_excited: np.ndarray
    n_p: int = 1
    length: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.amp_vacuum, dtype=complex)
        e = np.asarray(self.amp_excited, dtype=complex)
        if v.ndim != 1 or v.shape != e.shape or v.size % 2 != 1:
            raise ValueError("branch amplitudes must be equal-length odd 1-D arrays")
        object.__setattr__(self, "amp_vacuum", v)
        object.__setattr__(self, "amp_excited", e)

    @property
    def k_max(self) -> int:
        return (self.amp_vacuum.size - 1) // 2

    @property
    def k(self) -> np.ndarray:
        return np.arange(-self.k_max, self.k_max + 1)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amp_vacuum) ** 2) + np.sum(np.abs(self.amp_excited) ** 2))

    def padded(self, k_max: int) -> "WavefunctionState":
        if k_max < self.k_max:
            raise ValueError("cannot pad to a smaller cutoff")
        pad = k_max - self.k_max
        return WavefunctionState(np.pad(self.amp_vacuum, pad), np.pad(self.amp_excited, pad),
                                 self.n_p, self.length)

    def excited_on_grid(self, G: int) -> np.ndarray:
        """Excited-branch wavefunction sum_k a_k e^{2 pi i k x_j / L} at the G grid points."""
        if G <= 2 * self.k_max:
            raise ValueError("grid too coarse for the stored wavenumbers")
        c = np.zeros(G, dtype=complex)
        c[self.k % G] = self.amp_excited
        return np.fft.ifft(c) * G


def overlap(a: WavefunctionState, b: WavefunctionState) -> complex:
    """<a|b>."""
    k = max(a.k_max, b.k_max)
    a, b = a.padded(k), b.padded(k)
    return complex(np.vdot(a.amp_vacuum, b.amp_vacuum) + np.vdot(a.amp_excited, b.amp_excited))


def grid_overlap(phi: GridFunction, phi_tilde: GridFunction, n_p: int) -> float:
    """|<S_phi|S_phi~>| = |1/2 + (1/2) mean_j e^{i n_p (phi~ - phi)(x_j)}|."""
    if not phi.same_grid(phi_tilde):
        raise ValueError("functions live on different grids")
    return abs(0.5 + 0.5 * np.mean(np.exp(1j * n_p * (phi_tilde.values - phi.values))))


def output_state(target: GridFunction, n_p: int = 1, K_max: Optional[int] = None) -> WavefunctionState:
    """Probe state after the phase gate, truncated to |k| <= K_max.

    The default K_max = (G - 1) // 2 keeps every grid wavenumber when G is odd and all
    but the Nyquist component when G is even.
    """
    G = target.grid_size
    K_max = (G - 1) // 2 if K_max is None else int(K_max)
    if not 0 <= K_max < G / 2:
        raise ValueError("K_max must satisfy 0 <= K_max < G/2")
    k = np.arange(-K_max, K_max + 1)
    coeffs = np.fft.fft(np.exp(1j * n_p * target.values)) / G
    vac = np.zeros(k.size, dtype=complex)
    vac[K_max] = 1.0 / math.sqrt(2.0)
    return WavefunctionState(vac, coeffs[k % G] / math.sqrt(2.0), int(n_p), target.length)


def project_low_wavenumber(state: WavefunctionState, K: int):
    """Postselect onto |k| <= K.

    Returns (normalised projected state with cutoff K, delta_PS^2), where
    delta_PS^2 = (pi^2/n_p^2)(1 - |<S|S*>|^2).
    """
    if not 0 <= K <= state.k_max:
        raise ValueError("need 0 <= K <= K_max")
    sl = slice(state.k_max - K, state.k_max + K + 1)
    vac, exc = state.amp_vacuum[sl], state.amp_excited[sl]
    p = float(np.sum(np.abs(vac) ** 2) + np.sum(np.abs(exc) ** 2))
    if p < MIN_POSTSELECTION:
        raise ValueError("postselection probability too small: state nearly orthogonal to |k| <= K")
    post = WavefunctionState(vac / math.sqrt(p), exc / math.sqrt(p), state.n_p, state.length)
    fid = abs(overlap(state, post)) ** 2
    scale = (math.pi / state.n_p) ** 2
    delta_ps_sq = scale * max(0.0, 1.0 - fid)
    # nested-projection bound 1 - |<S|S*>|^2 <= 1 - <S|P_K|S>, equality for a pure state
    assert delta_ps_sq <= scale * (state.norm_sq() - p) + 1e-10
    return post, delta_ps_sq


def _tomography_grid(K: int) -> int:
    return max(16, 1 << int(math.ceil(math.log2(4 * K + 2))))


def simulate_tomography(postselected: WavefunctionState, K: int, n_c: int, seed=None) -> WavefunctionState:
    """Reconstruct a state supported on |k| <= K from n_c measured copies."""
    if postselected.k_max != K:
        postselected = WavefunctionState(
            postselected.amp_vacuum[postselected.k_max - K: postselected.k_max + K + 1],
            postselected.amp_excited[postselected.k_max - K: postselected.k_max + K + 1],
            postselected.n_p, postselected.length)
    if n_c < 8 * (2 * K + 1):
        raise ValueError("tomography needs n_c >= 8 (2K + 1) copies")
    rng = substream(seed)
    b = postselected.amp_vacuum[K]
    Gt = _tomography_grid(K)
    psi = postselected.excited_on_grid(Gt)
    k = np.arange(-K, K + 1)
    n_pop = n_c // 4
    n_int = n_c - n_pop
    vac_weight = float(np.abs(b) ** 2)
    b_sq = rng.binomial(n_pop, min(1.0, vac_weight)) / n_pop
    n_half = (n_int // 2, n_int - n_int // 2)
    means = []
    for beta, n in zip((0.0, 0.5 * math.pi), n_half):
        rot = np.exp(-1j * beta) * psi
        p_plus = np.abs(b + rot) ** 2 / (2 * Gt)
        p_minus = np.abs(b - rot) ** 2 / (2 * Gt)
        probs = np.concatenate([p_plus, p_minus])
        counts = rng.multinomial(n, probs / probs.sum())
        s = (counts[:Gt] - counts[Gt:]) / n
        means.append(np.fft.fft(s)[k % Gt])
    z = 0.5 * (means[0] + 1j * means[1])
    b_hat = math.sqrt(min(max(b_sq, 1.0 / n_pop), 1.0))
    b_sq = b_hat ** 2
    exc = z / b_hat
    vac = np.zeros(k.size, dtype=complex)
    vac[K] = b_hat
    norm = math.sqrt(b_sq + float(np.sum(np.abs(exc) ** 2)))
    return WavefunctionState(vac / norm, exc / norm, postselected.n_p, postselected.length)


def readout_phase(state: WavefunctionState, G: int, floor: float = 0.1) -> np.ndarray:
    """arg of the excited branch relative to the vacuum branch, in [0, 2 pi), on G points.

    Points where the reconstructed magnitude is below ``floor`` times its mean take the
    phase of the nearest point above it.
    """
    psi = state.excited_on_grid(G) * np.conj(state.amp_vacuum[state.k_max])
    theta = np.mod(np.angle(psi), TWO_PI)
    mag = np.abs(psi)
    ok = mag >= floor * mag.mean()
    if ok.all() or not ok.any():
        return theta
    good = np.flatnonzero(ok)
    idx = np.arange(G)
    pos = np.searchsorted(good, idx) % good.size
    right = good[pos]
    left = good[pos - 1]
    d_right = (right - idx) % G
    d_left = (idx - left) % G
    nearest = np.where(d_left <= d_right, left, right)
    return theta[nearest]


def infidelity_chain(target: GridFunction, estimate: GridFunction, n_p: int,
                     postselected: WavefunctionState):
    """Terms of delta^2 <= (pi^2/n_p^2) (1 - |<S|S~>|) <= delta_PS^2 + delta_QT^2.

    Returns (delta^2, middle term, delta_PS^2, delta_QT^2), with S~ the probe state of
    the estimate itself.
    """
    scale = (math.pi / n_p) ** 2
    S = output_state(target, n_p)
    S_est = output_state(estimate, n_p)
    middle = scale * (1.0 - grid_overlap(target, estimate, n_p))
    ps = scale * max(0.0, 1.0 - abs(overlap(S, postselected)) ** 2)
    qt = scale * max(0.0, 1.0 - abs(overlap(postselected, S_est)) ** 2)
    return mspe(estimate, target), middle, ps, qt


def triangle_slack(s: np.ndarray, t: np.ndarray, r: np.ndarray) -> float:
    """1 + |<s|r>| - |<s|t>|^2 - |<t|r>|^2 for unit vectors (non-negative for all t)."""
    return float(1.0 + abs(np.vdot(s, r)) - abs(np.vdot(s, t)) ** 2 - abs(np.vdot(t, r)) ** 2)


def default_cutoff(cls: SmoothnessClass, N: int) -> int:
    """SQL cutoff round((M^2 N)^(1/(2q+1))), capped so that N/2 >= 8 (2K + 1)."""
    K = max(1, int(round((cls.M ** 2 * N) ** (1.0 / (2 * cls.q + 1)))))
    cap = (N // 16 - 1) // 2
    return max(1, min(K, cap))


@dataclass(frozen=True)
class WSCascadePlan:
    n0: int
    K: int
    n_copy: int
    particles: int


def ws_kitaev_plan(N: int, cls: SmoothnessClass, constants: KitaevConstants = KitaevConstants(),
                   kappa: float = 6.0, copies_per_mode: int = 16) -> Optional[WSCascadePlan]:
    """Deepest entanglement level 2^n0 whose cascade fits in N particles.

    Level 2^n needs a cutoff K large enough for e^{i 2^n phi}: K = ceil(kappa (2^n0 M / c0)^(1/q)),
    and each readout uses at least copies_per_mode (2K + 1) copies; the copy count is then
    raised to use the budget.  Returns None when even n0 = 0 does not fit.
    """
    c0 = c0_constant(cls)

    def cutoff(n0):
        return max(1, int(math.ceil(kappa * ((1 << n0) * cls.M / c0) ** (1.0 / cls.q))))

    def weight(n0):
        return sum((1 << n) * level_repeats(constants, n, n0) for n in range(n0 + 1))

    def cost(n0):
        return copies_per_mode * (2 * cutoff(n0) + 1) * weight(n0)

    if cost(0) > N:
        return None
    n0 = 0
    while cost(n0 + 1) <= N and n0 < 30:
        n0 += 1
    n_copy = N // weight(n0)
    return WSCascadePlan(n0, cutoff(n0), n_copy, n_copy * weight(n0))


def _single_readout(target: GridFunction, n_p: int, K: int, n_c: int, rng):
    """One postselect-and-tomograph pass over n_c copies.

    Each copy survives the projection with probability <S|P_K|S>; the survivors are
    measured.  Returns (phase of n_p phi in [0, 2pi), postselected state, delta_PS^2).
    Raises ValueError when too few copies survive for the tomography.
    """
    state = output_state(target, n_p)
    post, dps = project_low_wavenumber(state, K)
    p_keep = min(1.0, max(0.0, 1.0 - dps * (n_p / math.pi) ** 2))
    n_kept = int(rng.binomial(n_c, p_keep))
    rec = simulate_tomography(post, K, n_kept, rng)
    return readout_phase(rec, target.grid_size), post, dps


def ws_estimate(target: GridFunction, budget: ProbeBudget, cls: SmoothnessClass, seed=0,
                regime: str = "SQL", K: Optional[int] = None,
                constants: KitaevConstants = KitaevConstants(),
                kappa: float = 6.0) -> EstimationRecord:
    """One wavenumber-state trial.

    SQL: single-particle probes, n_c = N copies, cutoff K (default round((M^2 N)^(1/(2q+1)))).
    Heisenberg: 2^n-particle probes for n = 0..n0 with the level schedule of the
    multiscale cascade, combined pointwise.  The record carries (delta_PS^2, delta_QT^2)
    for the deepest level, and ``info['chain_slack']`` the per-trial slack of
    delta_eff^2 <= delta_PS^2 + delta_QT^2, where delta_eff^2 = D^2(n_p phi~, n_p phi)/n_p^2
    (equal to the MSPE when n_p = 1).
    """
    if cls.q > 1:
        raise ValueError("wavenumber-state estimation is restricted to q <= 1; "
                         "use the position-state method for smoother classes")
    if regime not in ("SQL", "Heisenberg"):
        raise ValueError(f"unknown regime {regime!r}")
    N = budget.N
    seed = int(seed)
    G, L = target.grid_size, target.length
    flags = []
    info = {}
    plan = ws_kitaev_plan(N, cls, constants, kappa) if regime == "Heisenberg" else None

    if plan is None:
        if regime == "Heisenberg":
            info["cascade_fallback"] = True
        K = default_cutoff(cls, N) if K is None else int(K)
        try:
            theta, post, dps = _single_readout(target, 1, K, N, substream(seed, 0))
        except ValueError:
            flags.append("precondition")
            post, dps = project_low_wavenumber(output_state(target, 1), K)
            theta = readout_phase(post, G)
        est = GridFunction(theta, L)
        n_p, used = 1, N
        info.update(K=K, n_p=1, n_c=N, n0=0)
    else:
        K, n0 = plan.K, plan.n0
        levels = []
        for n in range(n0 + 1):
            reads = []
            for r in range(level_repeats(constants, n, n0)):
                rng = substream(seed, 1, n, r)
                try:
                    theta, post, dps = _single_readout(target, 1 << n, K, plan.n_copy, rng)
                except ValueError:
                    if "precondition" not in flags:
                        flags.append("precondition")
                    post, dps = project_low_wavenumber(output_state(target, 1 << n), K)
                    theta = readout_phase(post, G)
                reads.append(theta)
            levels.append(circular_median(np.array(reads), axis=0))
        phase, depth = unwrap_cascade(levels)
        est = GridFunction(phase, L)
        n_p, used = 1 << n0, plan.particles
        info.update(K=K, n_p=n_p, n_c=plan.n_copy, n0=n0,
                    degraded_fraction=float(np.mean(depth < n0)))

    eff_sq = mspe(GridFunction(wrap_phase(n_p * est.values), L),
                  GridFunction(wrap_phase(n_p * target.values), L)) / n_p ** 2
    delta_sq, middle, dps, dqt = infidelity_chain(target, est, n_p, post)
    info["chain_slack"] = dps + dqt - eff_sq
    info["middle_term"] = middle
    info["effective_mspe"] = eff_sq
    return EstimationRecord(
        method="WS", regime=regime, q=cls.q, M=cls.M, N=N, trial=0, seed=seed,
        mspe=delta_sq, err_a_sq=dps, err_b_sq=dqt, particles_used=int(used),
        flags=tuple(flags), estimate=est, info=info,
    )
