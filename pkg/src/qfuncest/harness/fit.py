"""Scaling-exponent fits and bound-consistency checks over sweep records."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from ..bounds import BoundReport, bound_report
from ..records import EstimationRecord

MAX_FLAGGED_FRACTION = 0.05
Group = Union[None, Mapping[str, object], Callable[[EstimationRecord], bool]]


def _select(records: Sequence[EstimationRecord], group: Group) -> List[EstimationRecord]:
    if group is None:
        return list(records)
    if callable(group):
        return [r for r in records if group(r)]
    return [r for r in records if all(getattr(r, k) == v for k, v in group.items())]


def _by_N(records: Sequence[EstimationRecord]) -> Dict[int, List[EstimationRecord]]:
    out = defaultdict(list)
    for r in records:
        out[int(r.N)].append(r)
    return dict(sorted(out.items()))


@dataclass
class ScalingFit:
    exponent: float
    intercept: float
    stderr: float
    exponent_sq: float
    N_window: List[int]
    mean_delta: List[float]
    ci_low: List[float]
    ci_high: List[float]
    trials: List[int]
    excluded_N: List[int]
    flagged: int

    def to_dict(self) -> dict:
        return asdict(self)


def _line(logN: np.ndarray, logy: np.ndarray):
    slope, intercept = np.polyfit(logN, logy, 1)
    return float(slope), float(intercept)


def fit_scaling(records: Sequence[EstimationRecord], group: Group = None,
                n_boot: int = 200, seed: int = 0) -> ScalingFit:
    """Least-squares slope of log(mean delta) against log N.

    Flagged records are dropped; N values with more than 5% flagged trials leave the
    window.  The standard error comes from resampling trials within each N.  The slope
    of log(mean delta^2) is reported alongside as ``exponent_sq``.
    """
    groups = _by_N(_select(records, group))
    window, samples, excluded, flagged = [], [], [], 0
    for N, recs in groups.items():
        bad = sum(r.flagged for r in recs)
        flagged += bad
        if bad > MAX_FLAGGED_FRACTION * len(recs):
            excluded.append(N)
            continue
        d = np.array([r.delta for r in recs if not r.flagged])
        if d.size == 0:
            excluded.append(N)
            continue
        window.append(N)
        samples.append(d)
    if len(window) < 4:
        raise ValueError(f"need at least 4 distinct N in the fit window, got {len(window)}")
    logN = np.log(np.array(window, dtype=float))
    means = np.array([d.mean() for d in samples])
    slope, intercept = _line(logN, np.log(means))
    slope_sq, _ = _line(logN, np.log([np.mean(d ** 2) for d in samples]))

    rng = np.random.default_rng(seed)
    boot = np.empty(n_boot)
    for b in range(n_boot):
        mb = [d[rng.integers(0, d.size, d.size)].mean() for d in samples]
        boot[b] = _line(logN, np.log(mb))[0]
    sd = np.array([d.std(ddof=1) if d.size > 1 else 0.0 for d in samples])
    half = 1.96 * sd / np.sqrt([d.size for d in samples])
    return ScalingFit(slope, intercept, float(boot.std(ddof=1)), slope_sq, window,
                      means.tolist(), (means - half).tolist(), (means + half).tolist(),
                      [int(d.size) for d in samples], excluded, int(flagged))


@dataclass
class BoundRow:
    N: int
    regime: str
    mean_delta: float
    stderr: float
    floor: float
    passed: bool


@dataclass
class BoundCheck:
    rows: List[BoundRow]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def table(self) -> str:
        lines = ["N,regime,mean_delta,stderr,floor,status"]
        for r in self.rows:
            lines.append(f"{r.N},{r.regime},{r.mean_delta:.6g},{r.stderr:.3g},{r.floor:.6g},"
                         f"{'pass' if r.passed else 'FAIL'}")
        return "\n".join(lines)


def check_bounds(records: Sequence[EstimationRecord],
                 reports: Optional[Mapping[int, BoundReport]] = None,
                 sigmas: float = 3.0) -> BoundCheck:
    """mean delta + sigmas * stderr >= the closed-form floor of the record's regime, per N."""
    rows = []
    for N, recs in _by_N([r for r in records if not r.flagged]).items():
        regimes = {r.regime for r in recs}
        for regime in sorted(regimes):
            sub = [r for r in recs if r.regime == regime]
            d = np.array([r.delta for r in sub])
            se = float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else 0.0
            if reports is not None:
                floor = reports[N].floor(regime)
            elif sub[0].M > 0:
                floor = bound_report(sub[0].q, sub[0].M, N).floor(regime)
            else:
                floor = 0.0
            mean = float(d.mean())
            rows.append(BoundRow(N, regime, mean, se, floor, mean + sigmas * se >= floor))
    return BoundCheck(rows)
