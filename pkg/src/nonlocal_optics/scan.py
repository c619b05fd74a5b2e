"""Labeled tabular sweep output shared by every module."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def format_number(x) -> str:
    """Shortest round-trip decimal representation; '.' separator, no locale."""
    x = float(x)
    if x == 0.0:
        return "0.0"  # folds -0.0 so reruns cannot differ by sign of zero
    return repr(x)


@dataclass
class ScanResult:
    """A named numeric table plus free-form metadata.

    ``rows`` is a 2-D float array with one column per entry of ``columns``.
    """

    name: str
    columns: list[str]
    rows: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.size == 0:
            rows = rows.reshape(0, len(self.columns))
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValueError(
                f"row length {rows.shape[-1] if rows.ndim else 0} does not match "
                f"{len(self.columns)} columns"
            )
        self.rows = rows

    def __len__(self) -> int:
        return self.rows.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(format_number(v) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, name: str, text: str, metadata: dict | None = None) -> "ScanResult":
        lines = text.rstrip("\n").split("\n")
        columns = lines[0].split(",")
        rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
        return cls(name, columns, np.array(rows, dtype=np.float64), dict(metadata or {}))
