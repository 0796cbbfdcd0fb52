"""Rectangular numeric tables with a provenance header, written as CSV."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence


class NonFiniteValue(ValueError):
    pass


def _fmt(v: float) -> str:
    # shortest repr that round-trips; stable across runs
    return repr(float(v))


@dataclass
class SweepTable:
    columns: list[str]
    rows: list[tuple[float, ...]] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    trailer: dict = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row has {len(row)} values, expected {len(self.columns)}")

    def append(self, row: Sequence[float]) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} values, expected {len(self.columns)}")
        self.rows.append(tuple(float(v) for v in row))

    def column(self, name: str) -> list[float]:
        try:
            i = self.columns.index(name)
        except ValueError:
            raise KeyError(f"unknown column {name!r}; have {', '.join(self.columns)}") from None
        return [row[i] for row in self.rows]

    def check_finite(self) -> None:
        for k, row in enumerate(self.rows):
            for name, v in zip(self.columns, row):
                if not math.isfinite(v):
                    raise NonFiniteValue(f"non-finite {name} = {v} in row {k}")

    def to_csv(self) -> str:
        out = io.StringIO()
        for key, value in self.provenance.items():
            out.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
        out.write(",".join(self.columns) + "\n")
        for row in self.rows:
            out.write(",".join(_fmt(v) for v in row) + "\n")
        for key, value in self.trailer.items():
            out.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SweepTable":
        columns = None
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if columns is None:
                columns = [c.strip() for c in line.split(",")]
                continue
            rows.append(tuple(float(v) for v in line.split(",")))
        if columns is None:
            raise ValueError("no header row found")
        return cls(columns, rows)
