"""Hierarchy-aware system failure model.

Off-node hardware (cards, cables, cooling, power) fails at chassis or
cabinet level and takes every node below it down, so the system rate picks
up one term per level:

    sys = a' * node * N_nodes + b' * chassis_off * N_chassis + g' * cabinet_off * N_cabinets

with ``N_*`` the system-wide element counts and ``a', b', g'`` the per-level
significance indices.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, TextIO

from hpcfail.budget import SNAP_TOLERANCE, LinearConstraint
from hpcfail.errors import BadShare, Degenerate, Infeasible, InputError, UnmappedComponent
from hpcfail.rate_algebra import FailureRate, Real, SignificanceIndex, as_rate, as_si, decimal_exact
from hpcfail.tabular import Grid
from hpcfail.topology import SystemTopology, totals

REFINED_VARIABLES = ("node", "chassis_offnode", "cabinet_offnode")
SWEEP_HEADER = ("chassis_offnode_fit", "cabinet_offnode_fit", "node_rate_fit", "status")
CATEGORY_HEADER = ("component", "share", "location")


@dataclass(frozen=True)
class RefinedSi:
    node_si: SignificanceIndex
    chassis_si: SignificanceIndex
    cabinet_si: SignificanceIndex

    def __post_init__(self) -> None:
        for name in ("node_si", "chassis_si", "cabinet_si"):
            object.__setattr__(self, name, as_si(getattr(self, name)))


@dataclass(frozen=True)
class RefinedRates:
    node: FailureRate
    chassis_off_node: FailureRate
    cabinet_off_node: FailureRate

    def __post_init__(self) -> None:
        for name in ("node", "chassis_off_node", "cabinet_off_node"):
            object.__setattr__(self, name, as_rate(getattr(self, name)))


def _weights(si: RefinedSi, topo: SystemTopology) -> tuple[Fraction, Fraction, Fraction]:
    n_node, n_chassis, n_cabinet = totals(topo)
    return (
        decimal_exact(si.node_si.value) * n_node,
        decimal_exact(si.chassis_si.value) * n_chassis,
        decimal_exact(si.cabinet_si.value) * n_cabinet,
    )


def refined_system_rate(rates: RefinedRates, si: RefinedSi, topo: SystemTopology) -> FailureRate:
    w_node, w_chassis, w_cabinet = _weights(si, topo)
    total = (
        w_node * decimal_exact(rates.node.fit)
        + w_chassis * decimal_exact(rates.chassis_off_node.fit)
        + w_cabinet * decimal_exact(rates.cabinet_off_node.fit)
    )
    return FailureRate(float(total))


def refined_constraint(si: RefinedSi, topo: SystemTopology, sys_cap: FailureRate | Real) -> LinearConstraint:
    """Constraint over (node, chassis_offnode, cabinet_offnode), smallest coefficient 1."""
    sys_cap = as_rate(sys_cap)
    weights = dict(zip(REFINED_VARIABLES, _weights(si, topo)))
    live = {k: w for k, w in weights.items() if w != 0}
    if not live:
        raise Degenerate("all significance indices are zero; no rate can reach the cap")
    return LinearConstraint.from_exact(live, decimal_exact(sys_cap.fit)).normalize("smallest")


def _node_rate_exact(
    weights: tuple[Fraction, Fraction, Fraction], cap: Fraction, chassis: Fraction, cabinet: Fraction
) -> Fraction | None:
    w_node, w_chassis, w_cabinet = weights
    off_node = w_chassis * chassis + w_cabinet * cabinet
    residual = cap - off_node
    if residual < 0 and -residual <= SNAP_TOLERANCE * max(cap, off_node):
        residual = Fraction(0)
    if residual < 0:
        return None
    return residual / w_node


def solve_node_rate(
    si: RefinedSi,
    topo: SystemTopology,
    sys_cap: FailureRate | Real,
    chassis_off_node: FailureRate | Real,
    cabinet_off_node: FailureRate | Real,
) -> FailureRate:
    """Per-node rate left over once off-node contributions take their share."""
    weights = _weights(si, topo)
    if weights[0] == 0:
        raise Degenerate("node significance index is zero; node rate is unconstrained")
    value = _node_rate_exact(
        weights,
        decimal_exact(as_rate(sys_cap).fit),
        decimal_exact(as_rate(chassis_off_node).fit),
        decimal_exact(as_rate(cabinet_off_node).fit),
    )
    if value is None:
        raise Infeasible("off-node failures alone exceed the system cap")
    return FailureRate(float(value))


class NodeSweepRow(NamedTuple):
    chassis_off_node: float
    cabinet_off_node: float
    node_rate: float | None
    status: str


def sweep_node_rate(
    si: RefinedSi,
    topo: SystemTopology,
    sys_cap: FailureRate | Real,
    chassis_range: Grid,
    cabinet_range: Grid,
) -> list[NodeSweepRow]:
    """Node rate over a chassis x cabinet grid, chassis-major.

    Points where off-node failures already exceed the cap are kept with
    ``node_rate=None`` and ``status="infeasible"``.
    """
    weights = _weights(si, topo)
    if weights[0] == 0:
        raise Degenerate("node significance index is zero; node rate is unconstrained")
    cap = decimal_exact(as_rate(sys_cap).fit)
    cabinets = cabinet_range.exact_values()
    rows = []
    for chassis in chassis_range.exact_values():
        for cabinet in cabinets:
            value = _node_rate_exact(weights, cap, chassis, cabinet)
            if value is None:
                rows.append(NodeSweepRow(float(chassis), float(cabinet), None, "infeasible"))
            else:
                rows.append(NodeSweepRow(float(chassis), float(cabinet), float(value), "ok"))
    return rows


class Location(str, enum.Enum):
    ON_NODE = "on_node"
    OFF_NODE = "off_node"
    UNATTRIBUTED = "unattributed"


class Level(str, enum.Enum):
    NODE = "node"
    CHASSIS = "chassis"
    CABINET = "cabinet"
    UNATTRIBUTED = "unattributed"


# Off-node hardware that sits in a chassis goes to chassis level; anything
# spanning cabinets (cabling, cooling) to cabinet level.
DEFAULT_MAPPING: dict[str, Level] = {
    "compute unit": Level.NODE,
    "card": Level.CHASSIS,
    "link module": Level.CHASSIS,
    "process/daemon": Level.CHASSIS,
    "cable": Level.CABINET,
    "coolant monitor": Level.CABINET,
    "other": Level.UNATTRIBUTED,
}


@dataclass(frozen=True)
class FailureCategoryRecord:
    component: str
    share: float
    location: Location

    def __post_init__(self) -> None:
        share = float(self.share)
        if not (math.isfinite(share) and 0.0 <= share <= 1.0):
            raise BadShare(f"share for {self.component!r} must be in [0, 1], got {self.share!r}")
        object.__setattr__(self, "share", share)
        try:
            object.__setattr__(self, "location", Location(self.location))
        except ValueError as exc:
            raise InputError(f"unknown location {self.location!r} for {self.component!r}") from exc


@dataclass(frozen=True)
class CategoryGrouping:
    node_share: float = 0.0
    chassis_share: float = 0.0
    cabinet_share: float = 0.0
    unattributed_share: float = 0.0

    def __post_init__(self) -> None:
        for name in ("node_share", "chassis_share", "cabinet_share", "unattributed_share"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0 + 1e-9:
                raise BadShare(f"{name} must be in [0, 1], got {value!r}")

    @property
    def off_node_share(self) -> float:
        return math.fsum((self.chassis_share, self.cabinet_share))

    @property
    def total(self) -> float:
        return math.fsum((self.node_share, self.chassis_share, self.cabinet_share, self.unattributed_share))

    def to_dict(self) -> dict[str, float]:
        return {
            "node_share": self.node_share,
            "chassis_share": self.chassis_share,
            "cabinet_share": self.cabinet_share,
            "unattributed_share": self.unattributed_share,
            "off_node_share": self.off_node_share,
        }


def _normalize_name(name: str) -> str:
    return " ".join(name.strip().lower().split())


def _as_level(value: Level | str) -> Level:
    try:
        return Level(value)
    except ValueError as exc:
        choices = ", ".join(level.value for level in Level)
        raise InputError(f"unknown level {value!r}; expected one of {choices}") from exc


def ingest_category_table(
    records: Iterable[FailureCategoryRecord],
    mapping: Mapping[str, Level | str] | None = None,
    default_level: Level | str | None = None,
) -> CategoryGrouping:
    """Sum category shares per hierarchy level.

    Component names match case- and whitespace-insensitively.  Components
    missing from ``mapping`` fall back to ``default_level``; with no default
    they raise :class:`UnmappedComponent`.
    """
    if mapping is None:
        mapping = DEFAULT_MAPPING
    lookup = {_normalize_name(k): _as_level(v) for k, v in mapping.items()}
    fallback = _as_level(default_level) if default_level is not None else None
    buckets: dict[Level, list[float]] = {level: [] for level in Level}
    for record in records:
        level = lookup.get(_normalize_name(record.component), fallback)
        if level is None:
            raise UnmappedComponent(f"no level mapping for component {record.component!r}")
        buckets[level].append(record.share)
    return CategoryGrouping(
        node_share=math.fsum(buckets[Level.NODE]),
        chassis_share=math.fsum(buckets[Level.CHASSIS]),
        cabinet_share=math.fsum(buckets[Level.CABINET]),
        unattributed_share=math.fsum(buckets[Level.UNATTRIBUTED]),
    )


def apportion_rates(grouping: CategoryGrouping, observed_sys_rate: FailureRate | Real, topo: SystemTopology) -> RefinedRates:
    """Split a measured system rate into per-element rates at each level.

    The rates are raw (unweighted); apply significance indices only when
    they go back through :func:`refined_system_rate`.
    """
    if grouping.total > 1.0 + 1e-9:
        raise BadShare(f"shares sum to {grouping.total}, more than 1")
    rate = decimal_exact(as_rate(observed_sys_rate).fit)
    n_node, n_chassis, n_cabinet = totals(topo)
    return RefinedRates(
        node=float(decimal_exact(grouping.node_share) * rate / n_node),
        chassis_off_node=float(decimal_exact(grouping.chassis_share) * rate / n_chassis),
        cabinet_off_node=float(decimal_exact(grouping.cabinet_share) * rate / n_cabinet),
    )


_LOCATION_ALIASES = {"on node": "on_node", "off node": "off_node", "n/a": "unattributed", "na": "unattributed"}


def read_category_csv(source: str | Path | TextIO) -> list[FailureCategoryRecord]:
    """Read a ``component,share,location`` table (shares as fractions)."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_category_csv(fh)
    reader = csv.DictReader(source)
    if reader.fieldnames is None or tuple(f.strip() for f in reader.fieldnames) != CATEGORY_HEADER:
        raise InputError(f"category table header must be {','.join(CATEGORY_HEADER)}, got {reader.fieldnames}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        row = {k.strip(): (v or "").strip() for k, v in row.items()}
        try:
            share = float(row["share"])
        except ValueError as exc:
            raise BadShare(f"line {lineno}: share {row['share']!r} is not a number") from exc
        location = row["location"].lower()
        records.append(FailureCategoryRecord(row["component"], share, _LOCATION_ALIASES.get(location, location)))
    return records
