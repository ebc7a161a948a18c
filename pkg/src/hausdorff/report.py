"""Machine-readable reports: ``key = value`` lines, optional CSV."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

__all__ = ["Report", "fmt", "DOMINANCE_OK", "DOMINANCE_VIOLATED", "BOUND_DIVERGENT"]

DOMINANCE_OK = "DOMINANCE_OK"
DOMINANCE_VIOLATED = "DOMINANCE_VIOLATED"
BOUND_DIVERGENT = "BOUND_DIVERGENT"


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(fmt(x) for x in v) + "]"
    if v is None:
        return "none"
    return str(v)


@dataclass
class Report:
    """Ordered key/value pairs plus optional CSV rows.

    ``wall_time`` is printed last and is the only field allowed to differ
    between two runs with the same inputs.
    """

    kind: str
    fields: List[Tuple[str, object]] = field(default_factory=list)
    csv_header: Tuple[str, ...] = ()
    csv_rows: List[tuple] = field(default_factory=list)
    exit_code: int = 0
    wall_time: Optional[float] = None

    def add(self, key, value):
        self.fields.append((key, value))

    def get(self, key, default=None):
        for k, v in self.fields:
            if k == key:
                return v
        return default

    def body(self) -> str:
        lines = [f"report = {self.kind}"]
        lines += [f"{k} = {fmt(v)}" for k, v in self.fields]
        return "\n".join(lines) + "\n"

    def text(self) -> str:
        out = self.body()
        if self.wall_time is not None:
            out += f"wall_time = {self.wall_time:.3f}\n"
        return out

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.csv_rows:
            w.writerow(self.csv_header)
            w.writerows([[fmt(c) for c in row] for row in self.csv_rows])
        else:
            w.writerow(("key", "value"))
            w.writerows([(k, fmt(v)) for k, v in self.fields])
        return buf.getvalue()
