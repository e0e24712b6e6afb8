"""Node / chassis / cabinet hierarchy.

Nodes are homogeneous and every node is active, so a level's rate is the
rate of one element below it times the fan-out:

    sys = cabinet * cabinets = chassis * chassis_per_cabinet * cabinets = ...
"""

from __future__ import annotations

from dataclasses import dataclass

from hpcfail.errors import OutOfRange, Overflow
from hpcfail.rate_algebra import FailureRate, Real, as_rate

INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class SystemTopology:
    nodes_per_chassis: int
    chassis_per_cabinet: int
    cabinets: int

    def __post_init__(self) -> None:
        for name in ("nodes_per_chassis", "chassis_per_cabinet", "cabinets"):
            count = getattr(self, name)
            if isinstance(count, bool) or not isinstance(count, int):
                raise OutOfRange(f"{name} must be an integer, got {count!r}")
            if not 1 <= count <= INT64_MAX:
                raise OutOfRange(f"{name} must be in [1, 2^63-1], got {count}")

    @property
    def total_nodes(self) -> int:
        return totals(self)[0]

    @property
    def total_chassis(self) -> int:
        return totals(self)[1]

    @property
    def total_cabinets(self) -> int:
        return self.cabinets


def totals(topo: SystemTopology) -> tuple[int, int, int]:
    """System-wide (nodes, chassis, cabinets)."""
    total_chassis = topo.chassis_per_cabinet * topo.cabinets
    total_nodes = topo.nodes_per_chassis * total_chassis
    if total_nodes > INT64_MAX:
        raise Overflow(f"total node count {total_nodes} exceeds the 64-bit range")
    return total_nodes, total_chassis, topo.cabinets


@dataclass(frozen=True)
class LevelRates:
    chassis: FailureRate
    cabinet: FailureRate
    system: FailureRate


def aggregate_levels(node_rate: FailureRate | Real, topo: SystemTopology) -> LevelRates:
    node_rate = as_rate(node_rate)
    totals(topo)
    chassis = FailureRate(node_rate.fit * topo.nodes_per_chassis)
    cabinet = FailureRate(chassis.fit * topo.chassis_per_cabinet)
    system = FailureRate(cabinet.fit * topo.cabinets)
    return LevelRates(chassis, cabinet, system)
