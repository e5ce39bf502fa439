"""Periodic phase functions on a uniform grid, smoothness functionals and target generators."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real periodic function sampled at x_j = j L / G, j = 0..G-1 (no duplicated endpoint)."""

    values: np.ndarray
    length: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("values must be a non-empty 1-D array")
        if not self.length > 0:
            raise ValueError("length must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def grid_size(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.grid_size) * (self.length / self.grid_size)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.grid_size == other.grid_size and math.isclose(self.length, other.length)

    def evaluate(self, x) -> np.ndarray:
        """Trigonometric interpolation at arbitrary points (exact for band-limited functions)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        G = self.grid_size
        c = np.fft.rfft(self.values) / G
        k = np.arange(c.size)
        w = np.full(c.size, 2.0)
        w[0] = 1.0
        if G % 2 == 0:
            w[-1] = 1.0
        phase = np.exp(2j * np.pi * np.outer(x / self.length, k))
        return (phase @ (w * c)).real

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "value"])
        for xi, vi in zip(self.x, self.values):
            writer.writerow([repr(float(xi)), repr(float(vi))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, length: Optional[float] = None) -> "GridFunction":
        rows = list(csv.DictReader(io.StringIO(text)))
        x = np.array([float(r["x"]) for r in rows])
        v = np.array([float(r["value"]) for r in rows])
        if length is None:
            # uniform grid without endpoint: L = G * spacing
            length = float(x[1] - x[0]) * len(x) if len(x) > 1 else 1.0
        return cls(v, length)


@dataclass(frozen=True, eq=False)
class FourierSpectrum:
    """Complex coefficients phi_k for k = -K_max..K_max, stored at index k + K_max."""

    coeffs: np.ndarray
    length: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coeffs must have odd length 2*K_max + 1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def k_max(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def k(self) -> np.ndarray:
        return np.arange(-self.k_max, self.k_max + 1)

    def coeff(self, k: int) -> complex:
        if abs(k) > self.k_max:
            return 0j
        return complex(self.coeffs[k + self.k_max])

    def positive(self) -> np.ndarray:
        """Coefficients for k = 1..K_max."""
        return self.coeffs[self.k_max + 1:]

    def is_conjugate_symmetric(self, rtol: float = 1e-12) -> bool:
        scale = max(float(np.max(np.abs(self.coeffs))), 1.0)
        return bool(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))) <= rtol * scale)

    def to_json(self) -> str:
        return json.dumps({
            "length": self.length,
            "coeffs": [{"k": int(k), "re": float(c.real), "im": float(c.imag)}
                       for k, c in zip(self.k, self.coeffs)],
        })

    @classmethod
    def from_json(cls, text: str) -> "FourierSpectrum":
        doc = json.loads(text)
        entries = sorted(doc["coeffs"], key=lambda e: e["k"])
        return cls(np.array([complex(e["re"], e["im"]) for e in entries]), doc["length"])


@dataclass(frozen=True)
class SmoothnessClass:
    """Hoelder constraint parameters: smoothness q = m + sigma, budget M, epsilon cutoff a, period L.

    ``a`` defaults to L/4.
    """

    q: float
    M: float
    L: float = 1.0
    a: Optional[float] = None

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("q must be positive")
        if self.M < 0:
            raise ValueError("M must be non-negative")
        if self.a is None:
            object.__setattr__(self, "a", self.L / 4)
        if not 0 < self.a <= self.L / 2:
            raise ValueError("cutoff a must lie in (0, L/2]")

    @property
    def m(self) -> int:
        return math.ceil(self.q) - 1

    @property
    def sigma(self) -> float:
        return self.q - self.m

    @property
    def seminorm_budget(self) -> float:
        """Right-hand side M^2 / L^(2q) of the Hoelder constraint."""
        return self.M ** 2 / self.L ** (2 * self.q)


def fourier_transform(f: GridFunction, k_max: int) -> FourierSpectrum:
    G = f.grid_size
    if not 0 <= k_max < G / 2:
        raise ValueError(f"k_max={k_max} aliases on a grid of {G} points (need k_max < G/2)")
    c = np.fft.fft(f.values) / G
    k = np.arange(-k_max, k_max + 1)
    return FourierSpectrum(c[k % G], f.length)


def inverse_fourier(s: FourierSpectrum, G: int) -> GridFunction:
    if not G > 2 * s.k_max:
        raise ValueError("grid too coarse for the spectrum (need G > 2*K_max)")
    if not s.is_conjugate_symmetric():
        raise ValueError("spectrum is not conjugate-symmetric; the function would be complex")
    full = np.zeros(G, dtype=complex)
    full[s.k % G] = s.coeffs
    return GridFunction(np.fft.ifft(full).real * G, s.length)


def periodic_derivative(values: np.ndarray, m: int, h: float) -> np.ndarray:
    """m-th derivative by second-order central differences with periodic wraparound.

    Odd orders take one first-difference step, the rest are repeated second differences,
    so every Fourier multiplier is bounded by the exact (2 pi k / L)^m.
    """
    d = np.asarray(values, dtype=float)
    if m % 2 == 1:
        d = (np.roll(d, -1) - np.roll(d, 1)) / (2 * h)
    for _ in range(m // 2):
        d = (np.roll(d, -1) - 2 * d + np.roll(d, 1)) / h ** 2
    return d


def holder_seminorm(f: GridFunction, cls: SmoothnessClass) -> float:
    """Discretised sup_eps (1/G) sum_j |(phi^(m)(x_j + eps) - phi^(m)(x_j)) / eps^sigma|^2.

    The supremum runs over grid multiples eps = h, 2h, ... <= a.  Compare the result
    with ``cls.seminorm_budget``.
    """
    G = f.grid_size
    m, sigma = cls.m, cls.sigma
    if G < 16 * (m + 1):
        raise ValueError(f"grid of {G} points too coarse for derivative order {m}")
    h = f.length / G
    d = periodic_derivative(f.values, m, h)
    spec = np.fft.rfft(d)
    autocorr = np.fft.irfft(np.abs(spec) ** 2, n=G) / G
    n_shift = int(math.floor(cls.a / h + 1e-9))
    if n_shift < 1:
        raise ValueError("cutoff a is below the grid spacing")
    shifts = np.arange(1, n_shift + 1)
    mean_sq = np.maximum(2 * (autocorr[0] - autocorr[shifts]), 0.0)
    return float(np.max(mean_sq / (shifts * h) ** (2 * sigma)))


def c0_constant(cls: SmoothnessClass) -> float:
    """2 (2 pi)^m pi^sigma sup_{0 < x <= pi} x^(-sigma) sin x."""
    sigma = cls.sigma

    def g(x):
        if sigma == 1.0:
            return np.sinc(x / np.pi)
        return np.sin(x) / x ** sigma

    res = minimize_scalar(lambda x: -g(x), bounds=(0.0, np.pi), method="bounded",
                          options={"xatol": 1e-12})
    best = max(-res.fun, g(1e-9), g(np.pi))
    return 2 * (2 * np.pi) ** cls.m * np.pi ** sigma * float(best)


def fourier_constraint(s: FourierSpectrum, cls: SmoothnessClass) -> tuple[float, bool]:
    """(sum_{k>=1} k^(2q) |phi_k|^2, whether it fits under M^2 / (2 c0^2))."""
    if not s.is_conjugate_symmetric():
        raise ValueError("spectrum must be conjugate-symmetric")
    pos = s.positive()
    k = np.arange(1, pos.size + 1, dtype=float)
    value = float(np.sum(k ** (2 * cls.q) * np.abs(pos) ** 2))
    budget = cls.M ** 2 / (2 * c0_constant(cls) ** 2)
    return value, value <= budget * (1 + 1e-12)


def periodic_modulus(theta):
    """min_n |theta + 2 pi n|, in [0, pi]."""
    t = np.abs(np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi)
    return float(t) if np.ndim(t) == 0 else t


def wrap_phase(theta):
    """Representative of theta in [-pi, pi)."""
    return np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi


def mspe(estimate: GridFunction, target: GridFunction) -> float:
    """One-trial mean-square periodic error (1/G) sum_j [estimate - target]_{2pi}^2."""
    if not estimate.same_grid(target):
        raise ValueError("estimate and target live on different grids")
    return float(np.mean(periodic_modulus(estimate.values - target.values) ** 2))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def default_band(G: int) -> int:
    """Generator band limit used when none is given: G/8 (well inside G/4)."""
    return max(1, G // 8)


def sample_target(cls: SmoothnessClass, G: int = 4096, amplitude_cap: Optional[float] = None,
                  seed=None, constraint_fraction: float = 0.9,
                  k_gen: Optional[int] = None) -> GridFunction:
    """Random member of the smoothness class.

    Coefficients are complex Gaussians with scale k^-(q+1) for 1 <= k <= k_gen, rescaled
    so that the Fourier sufficient condition is met at ``constraint_fraction`` of its
    budget.  With ``amplitude_cap`` the function is shrunk further until max |phi| <= cap;
    ``meta['cap_limited']`` records whether that happened.
    """
    k_gen = default_band(G) if k_gen is None else k_gen
    if not G > 4 * k_gen:
        raise ValueError(f"band limit {k_gen} too large for a grid of {G} points")
    if not 0 < constraint_fraction <= 1:
        raise ValueError("constraint_fraction must lie in (0, 1]")
    rng = _as_rng(seed)
    k = np.arange(1, k_gen + 1, dtype=float)
    z = rng.standard_normal((k_gen, 2))
    pos = (z[:, 0] + 1j * z[:, 1]) * k ** -(cls.q + 1)
    meta = {"q": cls.q, "M": cls.M, "k_gen": k_gen, "cap_limited": False}
    if cls.M == 0:
        return GridFunction(np.zeros(G), cls.L, meta)
    value = float(np.sum(k ** (2 * cls.q) * np.abs(pos) ** 2))
    budget = cls.M ** 2 / (2 * c0_constant(cls) ** 2)
    pos *= math.sqrt(constraint_fraction * budget / value)
    full = np.zeros(G, dtype=complex)
    full[1:k_gen + 1] = pos
    full[-k_gen:] = np.conj(pos[::-1])
    values = np.fft.ifft(full).real * G
    if amplitude_cap is not None:
        peak = float(np.max(np.abs(values)))
        if peak > amplitude_cap:
            values *= amplitude_cap / peak
            meta["cap_limited"] = True
    return GridFunction(values, cls.L, meta)


def sample_gaussian_process(p: float, flux_scale: float, G: int = 4096, seed=None,
                            length: float = 1.0, k_max: Optional[int] = None) -> GridFunction:
    """Stationary Gaussian sample with E|phi_k|^2 = flux_scale^2 |k|^-p for 1 <= |k| <= k_max.

    The implied smoothness q = (p - 1) / 2 is stored in ``meta``.
    """
    if not p > 1:
        raise ValueError("spectral exponent p must exceed 1")
    k_max = G // 4 if k_max is None else k_max
    if not 0 < k_max < G / 2:
        raise ValueError("k_max must lie in (0, G/2)")
    rng = _as_rng(seed)
    k = np.arange(1, k_max + 1, dtype=float)
    z = rng.standard_normal((k_max, 2)) / math.sqrt(2)
    pos = flux_scale * (z[:, 0] + 1j * z[:, 1]) * k ** (-p / 2)
    full = np.zeros(G, dtype=complex)
    full[1:k_max + 1] = pos
    full[-k_max:] = np.conj(pos[::-1])
    values = np.fft.ifft(full).real * G
    return GridFunction(values, length, {"p": p, "q": (p - 1) / 2, "k_max": k_max})
