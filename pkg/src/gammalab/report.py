"""Report records and their JSON / CSV / text renderings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

SCHEMA_VERSION = "1.0"
STATUSES = ("pass", "fail", "finding", "skipped")


def jsonable(x: Any) -> Any:
    """Plain JSON types only, with a stable key order."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(jsonable(v) for v in x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, Fraction):
        return str(x)
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return str(x)


@dataclass
class Record:
    name: str
    anchor: str
    status: str
    payload: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "name": self.name,
            "anchor": self.anchor,
            "status": self.status,
            "payload": jsonable(self.payload),
        }
        if timing:
            out["wall_time"] = round(self.wall_time, 4)
        return out


@dataclass
class Report:
    command: str
    instance: dict
    records: list

    def sorted_records(self) -> list:
        return sorted(self.records, key=lambda r: r.name)

    @property
    def failed(self) -> bool:
        return any(r.status == "fail" for r in self.records)

    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "instance": jsonable(self.instance),
            "records": [r.to_dict(timing) for r in self.sorted_records()],
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "status", "anchor", "wall_time"])
        for r in self.sorted_records():
            w.writerow([r.name, r.status, r.anchor, f"{r.wall_time:.4f}"])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"{self.command} {json.dumps(jsonable(self.instance), sort_keys=True)}"]
        for r in self.sorted_records():
            lines.append(f"[{r.status.upper():7}] {r.name}: {summary_line(r.payload)}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        if fmt == "text":
            return self.to_text()
        raise ValueError(f"unknown format {fmt!r}")


def summary_line(payload: dict, limit: int = 160) -> str:
    text = json.dumps(jsonable(payload), sort_keys=True)
    return text if len(text) <= limit else text[: limit - 3] + "..."
