"""Run reports and their CSV / JSON serialization.

Floats are written with 17 significant digits so every 64-bit value
round-trips exactly.  CSV headers read ``name [unit; tol=...]``; the JSON
document carries the same metadata per column.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__

__all__ = ["SCHEMA_VERSION", "Column", "Table", "RunReport", "emit", "render"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Column:
    name: str
    unit: str = ""
    tol: Optional[float] = None

    def header(self) -> str:
        meta = [self.unit] if self.unit else []
        if self.tol is not None:
            meta.append(f"tol={self.tol:g}")
        return f"{self.name} [{'; '.join(meta)}]" if meta else self.name

    def as_dict(self) -> dict:
        return {"name": self.name, "unit": self.unit, "tol": self.tol}


@dataclass
class Table:
    columns: List[Column]
    rows: List[List[Any]] = field(default_factory=list)

    def add(self, **values) -> None:
        names = [c.name for c in self.columns]
        unknown = set(values) - set(names)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append([values.get(n) for n in names])

    def column(self, name: str) -> list:
        i = [c.name for c in self.columns].index(name)
        return [r[i] for r in self.rows]


@dataclass
class RunReport:
    kind: str
    config: Dict[str, Any]
    tables: Dict[str, Table]
    primary: str
    seed: Optional[int] = None
    timestamp: Optional[str] = None
    convergence: Dict[str, Any] = field(default_factory=dict)

    @property
    def table(self) -> Table:
        return self.tables[self.primary]

    def provenance(self) -> dict:
        return {"engine": "noonsim", "version": __version__, "seed": self.seed, "timestamp": self.timestamp}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def render(report: RunReport, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([c.header() for c in report.table.columns])
        for row in report.table.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": report.kind,
            "config": report.config,
            "primary_table": report.primary,
            "tables": {
                name: {
                    "columns": [c.as_dict() for c in t.columns],
                    "rows": [[_json_value(v) for v in r] for r in t.rows],
                }
                for name, t in report.tables.items()
            },
            "convergence": report.convergence,
            "provenance": report.provenance(),
        }
        # repr-based float output is already the shortest exact round-trip form
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit(report: RunReport, fmt: str, path=None) -> str:
    """Serialize ``report``; write to ``path`` when given.  Returns the text."""
    text = render(report, fmt)
    if path is not None:
        p = Path(path)
        try:
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {p}: {exc}") from exc
    return text
