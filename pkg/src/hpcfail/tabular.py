"""Sweep grids and CSV emission shared by the sweep commands."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, TextIO

import numpy as np

from hpcfail.errors import EmptyGrid, InputError
from hpcfail.rate_algebra import Real, decimal_exact


@dataclass(frozen=True)
class Grid:
    """Inclusive arithmetic progression ``start, start+step, ..., <= stop``."""

    start: float
    stop: float
    step: float

    def __post_init__(self) -> None:
        for name in ("start", "stop", "step"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InputError(f"grid {name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.start < 0 or self.stop < 0:
            raise InputError("grid bounds must be non-negative")
        if self.step <= 0:
            raise InputError(f"grid step must be positive, got {self.step!r}")
        if self.stop < self.start:
            raise EmptyGrid(f"grid {self} has no points")

    @classmethod
    def parse(cls, text: str) -> Grid:
        """Parse ``A:B:STEP``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"range must look like A:B:STEP, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError as exc:
            raise InputError(f"range {text!r} is not numeric") from exc
        return cls(start, stop, step)

    def exact_values(self) -> list[Fraction]:
        start, stop, step = (decimal_exact(v) for v in (self.start, self.stop, self.step))
        count = math.floor((stop - start) / step) + 1
        return [start + i * step for i in range(count)]

    def values(self) -> list[float]:
        return [float(v) for v in self.exact_values()]

    def __len__(self) -> int:
        return len(self.exact_values())

    def __str__(self) -> str:
        return f"{format_decimal(self.start)}:{format_decimal(self.stop)}:{format_decimal(self.step)}"


def format_decimal(value: Real | None) -> str:
    """Shortest round-tripping positional notation; never scientific."""
    if value is None:
        return ""
    return np.format_float_positional(float(value), trim="-")


def write_csv(header: Sequence[str], rows: Iterable[Sequence[object]], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([cell if isinstance(cell, str) else format_decimal(cell) for cell in row])


def csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    write_csv(header, rows, buf)
    return buf.getvalue()
