"""Error bounds: quantum Fisher information, Cramer-Rao floors and resource optima.

A band-limited test family phi_u(x) = sum_k sqrt(2) u_k sin(2 pi k x / L), k = 1..K,
lies in the smoothness class whenever |u| <= rho = M K^-q / c0.  Any estimator of u
then has worst-case error at least delta_WBB with 1/delta_WBB = 1/delta_UUB + 1/rho
and delta_UUB = (K / 8N)^(1/2).  Maximising over K yields the SQL floor; replacing phi
by n_p phi for n_p-particle entanglement yields the Heisenberg floor.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np

from .function_model import SmoothnessClass, c0_constant


def _c0(q: float) -> float:
    return c0_constant(SmoothnessClass(q, 1.0))


def rho_radius(q: float, M: float, K: int) -> float:
    """Radius c0^-1 M K^-q of the in-class ball of sine coefficients."""
    return M * K ** (-q) / _c0(q)


@dataclass(frozen=True, eq=False)
class PhaseVector:
    u: np.ndarray
    rho: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float).ravel())

    @property
    def K(self) -> int:
        return self.u.size

    def in_class(self) -> bool:
        return float(np.linalg.norm(self.u)) <= self.rho

    def basis(self, G: int, L: float = 1.0) -> np.ndarray:
        """sqrt(2) sin(2 pi k x_j / L), shape (K, G)."""
        x = np.arange(G) * (L / G)
        k = np.arange(1, self.K + 1)
        return math.sqrt(2.0) * np.sin(2 * np.pi * k[:, None] * x[None, :] / L)

    def function(self, G: int, L: float = 1.0) -> np.ndarray:
        return self.u @ self.basis(G, L)


def _probe_state(phi: np.ndarray) -> np.ndarray:
    """Single-particle output state on the grid: [vacuum branch, excited branch] / sqrt(2G)."""
    G = phi.size
    return np.concatenate([np.ones(G), np.exp(1j * phi)]) / math.sqrt(2 * G)


def _qfi_from_derivatives(psi: np.ndarray, dpsi: np.ndarray) -> np.ndarray:
    """4 Re <d_j psi| (1 - |psi><psi|) |d_k psi> for the rows of dpsi."""
    gram = dpsi.conj() @ dpsi.T
    proj = dpsi.conj() @ psi
    return 4.0 * np.real(gram - np.outer(proj, proj.conj()))


def qfi_matrix(u: PhaseVector, G: int, L: float = 1.0) -> np.ndarray:
    """Fisher information matrix of the single-particle probe at u (analytic derivatives)."""
    if G < 8 * u.K:
        raise ValueError("grid must have G >= 8K points")
    B = u.basis(G, L)
    psi = _probe_state(u.u @ B)
    G2 = psi.size // 2
    dpsi = np.zeros((u.K, psi.size), dtype=complex)
    dpsi[:, G2:] = 1j * B * psi[None, G2:]
    return _qfi_from_derivatives(psi, dpsi)


def qfi_matrix_fd(u: PhaseVector, G: int, L: float = 1.0, step: float = 1e-5) -> np.ndarray:
    """Same matrix with central finite-difference derivatives of the state vector."""
    B = u.basis(G, L)
    psi = _probe_state(u.u @ B)
    dpsi = np.empty((u.K, psi.size), dtype=complex)
    for j in range(u.K):
        e = np.zeros(u.K)
        e[j] = step
        dpsi[j] = (_probe_state((u.u + e) @ B) - _probe_state((u.u - e) @ B)) / (2 * step)
    return _qfi_from_derivatives(psi, dpsi)


def uub(K: int, N: int) -> float:
    """Uniform unbiased bound (K / 8N)^(1/2)."""
    if K < 1 or N < 1:
        raise ValueError("K and N must be at least 1")
    return math.sqrt(K / (8.0 * N))


def wbb(delta_uub: float, rho: float) -> float:
    """Worst-case biased bound: 1/delta = 1/delta_uub + 1/rho."""
    if delta_uub <= 0 or rho <= 0:
        raise ValueError("both arguments must be positive")
    return 1.0 / (1.0 / delta_uub + 1.0 / rho)


def c1_floor(q: float) -> float:
    """q / (2 (2q+1)^2) (q / c0)^(2q/(2q+1))."""
    return q / (2 * (2 * q + 1) ** 2) * (q / _c0(q)) ** (2 * q / (2 * q + 1))


def c2_floor(q: float) -> float:
    """(c1 / pi)^((2q+1)/(q+1))."""
    return (c1_floor(q) / math.pi) ** ((2 * q + 1) / (q + 1))


def sql_floor(q: float, M: float, N: float) -> float:
    """Closed form c1 (M^(1/q) / N)^(q/(2q+1))."""
    return c1_floor(q) * (M ** (1.0 / q) / N) ** (q / (2 * q + 1))


def analytic_cutoff(q: float, M: float, N: float) -> float:
    return (M * M * N) ** (1.0 / (2 * q + 1))


def sql_lower(q: float, M: float, N: int):
    """max over integer K of delta_WBB(K), scanned over [K_a/4, 4 K_a]; returns (bound, K_star)."""
    if q <= 0 or M <= 0 or N <= 0:
        raise ValueError("q, M and N must be positive")
    ka = analytic_cutoff(q, M, N)
    lo = max(1, int(math.floor(ka / 4)))
    hi = max(lo, int(math.ceil(4 * ka)))
    K = np.arange(lo, hi + 1, dtype=float)
    rho = M * K ** (-q) / _c0(q)
    vals = 1.0 / (np.sqrt(8.0 * N / K) + 1.0 / rho)
    i = int(np.argmax(vals))
    return float(vals[i]), int(K[i])


def max_entanglement(q: float, M: float, N: float) -> float:
    """[(pi/c1)^((2q+1)/2) M^-1 N^q]^(1/(q+1)), the largest useful n_p."""
    return ((math.pi / c1_floor(q)) ** ((2 * q + 1) / 2) * N ** q / M) ** (1.0 / (q + 1))


def reduced_sql(q: float, M: float, N: float, n_p: float) -> float:
    """delta floor with n_p-particle entanglement: c1 (M n_p^(q+1) N^-q)^(1/(2q+1)) / n_p."""
    return c1_floor(q) * (M * n_p ** (q + 1) * N ** (-q)) ** (1.0 / (2 * q + 1)) / n_p


def heisenberg_floor(q: float, M: float, N: float) -> float:
    """Closed form c2 (M^(1/q) / N)^(q/(q+1))."""
    return c2_floor(q) * (M ** (1.0 / q) / N) ** (q / (q + 1))


def heisenberg_lower(q: float, M: float, N: int):
    """(bound, np_star); falls back to the SQL closed form when np_star < 1."""
    if q <= 0 or M <= 0 or N <= 0:
        raise ValueError("q, M and N must be positive")
    np_star = int(math.floor(max_entanglement(q, M, N)))
    if np_star < 1:
        return sql_floor(q, M, N), 1
    return heisenberg_floor(q, M, N), np_star


class ResourceSplit(NamedTuple):
    """SQL: n1 = K sites (or cutoff), n2 = N // n1, n_p = 1.
    Heisenberg: n1 = n_c = N // n_p sites (or copies), n2 = n_p."""

    n1: int
    n2: int
    n_p: int


def resource_optima(q: float, M: float, N: int, regime: str,
                    np_prefactor: Optional[float] = None) -> ResourceSplit:
    """Integer-rounded analytic resource split.

    Heisenberg uses n_p = floor of the maximal useful entanglement, or, with
    ``np_prefactor`` given, round(np_prefactor (N^q / M)^(1/(q+1))); n_p is clipped to [1, N].
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be positive")
    if regime == "SQL":
        K = max(1, int(round(analytic_cutoff(q, M, N))))
        K = min(K, N)
        return ResourceSplit(K, N // K, 1)
    if regime == "Heisenberg":
        if np_prefactor is None:
            n_p = math.floor(max_entanglement(q, M, N))
        else:
            n_p = round(np_prefactor * (N ** q / M) ** (1.0 / (q + 1)))
        n_p = int(min(max(n_p, 1), N))
        n_c = N // n_p
        return ResourceSplit(n_c, n_p, n_p)
    raise ValueError(f"unknown regime {regime!r}")


@dataclass(frozen=True)
class BoundReport:
    q: float
    M: float
    N: int
    delta_uub: float
    delta_wbb: float
    rho: float
    sql_lower: float
    hl_lower: float
    optimal_K: int
    max_np: int
    c0: float
    c1_floor: float
    c2_floor: float
    sql_floor: float
    hl_floor: float

    def floor(self, regime: str) -> float:
        return self.sql_floor if regime == "SQL" else self.hl_lower

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "BoundReport":
        return cls(**json.loads(text))


def bound_report(q: float, M: float, N: int) -> BoundReport:
    best, K = sql_lower(q, M, N)
    hl, n_p = heisenberg_lower(q, M, N)
    d = uub(K, N)
    rho = rho_radius(q, M, K)
    return BoundReport(q=float(q), M=float(M), N=int(N), delta_uub=d, delta_wbb=wbb(d, rho),
                       rho=rho, sql_lower=best, hl_lower=hl, optimal_K=K, max_np=n_p,
                       c0=_c0(q), c1_floor=c1_floor(q), c2_floor=c2_floor(q),
                       sql_floor=sql_floor(q, M, N), hl_floor=heisenberg_floor(q, M, N))
