"""Experiment configuration (JSON, nested groups for Kitaev constants and outputs)."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import List, Optional, Union

from ..probe_sim import KitaevConstants

DEFAULT_N_LIST = [2 ** e for e in range(10, 21)]
SMALL_PHASE_CAP = math.pi / 3


@dataclass(frozen=True)
class OutputPaths:
    records: Optional[str] = None
    fits: Optional[str] = None
    svg: Optional[str] = None


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep.

    ``amplitude_cap="auto"`` caps targets at pi/3 in the SQL regime (both methods, so
    their sweeps see the same targets) and leaves them uncapped otherwise.
    ``target_mode="fixed"`` reuses one target for every trial and N instead of drawing a
    fresh one per trial.  ``heisenberg_prefactor`` scales the entanglement size
    n_p = prefactor (N^q / M)^(1/(q+1)) used by the position-state Heisenberg runs;
    ``None`` uses the maximal useful entanglement from the lower bound.
    """

    method: str = "PS"
    regime: str = "SQL"
    q: float = 1.0
    M: float = 2 * math.pi
    L: float = 1.0
    G: int = 4096
    N_list: List[int] = field(default_factory=lambda: list(DEFAULT_N_LIST))
    trials: int = 200
    seed: int = 0
    kitaev: KitaevConstants = KitaevConstants()
    kernel_order: Optional[int] = None
    output: OutputPaths = OutputPaths()
    constraint_fraction: float = 0.9
    amplitude_cap: Union[float, str, None] = "auto"
    target_mode: str = "fresh"
    heisenberg_prefactor: Optional[float] = 12.0
    ws_kappa: float = 6.0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "N_list", [int(n) for n in self.N_list])
        self.validate()

    def validate(self):
        if self.method not in ("PS", "WS"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.regime not in ("SQL", "Heisenberg"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.method == "WS" and self.q > 1:
            raise ValueError("WS sweeps require q <= 1")
        if not self.N_list or any(b <= a for a, b in zip(self.N_list, self.N_list[1:])):
            raise ValueError("N_list must be non-empty and strictly increasing")
        if self.N_list[0] < 1 or self.trials < 1:
            raise ValueError("N and trials must be positive")
        if self.target_mode not in ("fresh", "fixed"):
            raise ValueError("target_mode must be 'fresh' or 'fixed'")
        if isinstance(self.amplitude_cap, str) and self.amplitude_cap != "auto":
            raise ValueError("amplitude_cap must be a number, null or 'auto'")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    @property
    def fit_ready(self) -> bool:
        """Fits need at least 30 trials per N and at least four N values."""
        return self.trials >= 30 and len(self.N_list) >= 4

    def cap(self) -> Optional[float]:
        if self.amplitude_cap == "auto":
            return SMALL_PHASE_CAP if self.regime == "SQL" else None
        return None if self.amplitude_cap is None else float(self.amplitude_cap)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        doc = dict(doc)
        if "kitaev" in doc:
            doc["kitaev"] = KitaevConstants(**doc["kitaev"])
        if "output" in doc:
            doc["output"] = OutputPaths(**doc["output"])
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))
