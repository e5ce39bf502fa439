"""Per-trial estimation records and their CSV/JSON forms."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

from .function_model import GridFunction

CSV_COLUMNS = ("method", "regime", "q", "M", "N", "trial", "seed", "mspe",
               "err_a_sq", "err_b_sq", "particles_used", "flags")


@dataclass
class EstimationRecord:
    """One trial.

    ``err_a_sq``/``err_b_sq`` hold (delta_stat^2, delta_det^2) for the PS method and
    (delta_PS^2, delta_QT^2) for the WS method.
    """

    method: str
    regime: str
    q: float
    M: float
    N: int
    trial: int
    seed: int
    mspe: float
    err_a_sq: float
    err_b_sq: float
    particles_used: int
    flags: tuple = ()
    estimate: Optional[GridFunction] = field(default=None, repr=False, compare=False)
    info: dict = field(default_factory=dict, compare=False)

    @property
    def delta(self) -> float:
        return self.mspe ** 0.5

    @property
    def flagged(self) -> bool:
        return bool(self.flags)

    def row(self) -> list:
        return [self.method, self.regime, repr(float(self.q)), repr(float(self.M)), str(int(self.N)),
                str(int(self.trial)), str(int(self.seed)), repr(float(self.mspe)),
                repr(float(self.err_a_sq)), repr(float(self.err_b_sq)),
                str(int(self.particles_used)), ";".join(self.flags)]

    def to_json(self) -> str:
        doc = dict(zip(CSV_COLUMNS, self.row()))
        for key in ("q", "M", "mspe", "err_a_sq", "err_b_sq"):
            doc[key] = float(doc[key])
        for key in ("N", "trial", "seed", "particles_used"):
            doc[key] = int(doc[key])
        doc["flags"] = list(self.flags)
        doc["info"] = {k: v for k, v in self.info.items() if isinstance(v, (int, float, str, bool))}
        return json.dumps(doc)


def records_to_csv(records: Iterable[EstimationRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


def records_from_csv(text: str) -> List[EstimationRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    out = []
    for row in reader:
        out.append(EstimationRecord(
            method=row["method"], regime=row["regime"], q=float(row["q"]), M=float(row["M"]),
            N=int(row["N"]), trial=int(row["trial"]), seed=int(row["seed"]),
            mspe=float(row["mspe"]), err_a_sq=float(row["err_a_sq"]),
            err_b_sq=float(row["err_b_sq"]), particles_used=int(row["particles_used"]),
            flags=tuple(f for f in row["flags"].split(";") if f),
        ))
    return out
