"""System time usage and resilience efficiency.

Operation time ``T_o`` contains production time ``T_p``, which contains run
time ``T_u``; run time splits into solve time ``T_s`` (useful work) and
resilience time ``T_r = T_u - T_s``.  Resilience efficiency is the share of
operation time spent on resilience, ``T_r / T_o``.

Arithmetic here is plain ``+ - /`` on whatever numeric type is passed in, so
:class:`fractions.Fraction` inputs give exact results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from hpcfail.errors import InputError, InvariantViolation, RecoveryExceedsOperation, ZeroOperationTime
from hpcfail.rate_algebra import Real, decimal_exact


@dataclass(frozen=True)
class TimeUsage:
    operation_hours: Real
    production_hours: Real
    run_hours: Real
    solve_hours: Real

    def __post_init__(self) -> None:
        chain = (0, self.solve_hours, self.run_hours, self.production_hours, self.operation_hours)
        for value in chain[1:]:
            if not math.isfinite(value):
                raise InvariantViolation(f"time usage must be finite, got {value!r}")
        if not all(lo <= hi for lo, hi in zip(chain, chain[1:])):
            raise InvariantViolation(
                "time usage must satisfy 0 <= solve <= run <= production <= operation, got "
                f"T_s={self.solve_hours}, T_u={self.run_hours}, T_p={self.production_hours}, T_o={self.operation_hours}"
            )

    @property
    def resilience_hours(self) -> Real:
        return self.run_hours - self.solve_hours


def resilience_efficiency(usage: TimeUsage) -> Real:
    if usage.operation_hours == 0:
        raise ZeroOperationTime("operation time is zero")
    return usage.resilience_hours / usage.operation_hours


def efficiency_factors(usage: TimeUsage) -> tuple[Real, Real, Real]:
    """(T_r/T_u, T_u/T_p, T_p/T_o); their product is the resilience efficiency."""
    if usage.operation_hours == 0:
        raise ZeroOperationTime("operation time is zero")
    if usage.run_hours == 0 or usage.production_hours == 0:
        raise ZeroOperationTime("run and production time must be positive to factor the efficiency")
    return (
        usage.resilience_hours / usage.run_hours,
        usage.run_hours / usage.production_hours,
        usage.production_hours / usage.operation_hours,
    )


@dataclass(frozen=True)
class CrScenario:
    """Failures arriving once per ``mtbf_hours``, each recovered at a fixed cost."""

    operation_hours: float
    mtbf_hours: float
    hard_fraction: float
    soft_fraction: float
    hard_recovery_hours: float
    soft_recovery_hours: float

    def __post_init__(self) -> None:
        for name in (
            "operation_hours",
            "mtbf_hours",
            "hard_fraction",
            "soft_fraction",
            "hard_recovery_hours",
            "soft_recovery_hours",
        ):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise InputError(f"{name} must be a finite non-negative number, got {value!r}")
            object.__setattr__(self, name, value)
        if self.mtbf_hours <= 0:
            raise InputError("mtbf_hours must be positive")
        if self.operation_hours <= 0:
            raise ZeroOperationTime("operation time is zero")
        if abs(self.hard_fraction + self.soft_fraction - 1.0) > 1e-9:
            raise InputError(
                f"hard_fraction + soft_fraction must be 1, got {self.hard_fraction} + {self.soft_fraction}"
            )

    @property
    def expected_failures(self) -> Fraction:
        return decimal_exact(self.operation_hours) / decimal_exact(self.mtbf_hours)


def project_cr_efficiency(scenario: CrScenario) -> float:
    """Resilience efficiency when every failure costs its class's recovery time."""
    failures = scenario.expected_failures
    resilience = (
        decimal_exact(scenario.hard_recovery_hours) * decimal_exact(scenario.hard_fraction) * failures
        + decimal_exact(scenario.soft_recovery_hours) * decimal_exact(scenario.soft_fraction) * failures
    )
    operation = decimal_exact(scenario.operation_hours)
    if resilience > operation:
        raise RecoveryExceedsOperation(
            f"recovery needs {float(resilience):g} h but the system only operates {scenario.operation_hours:g} h"
        )
    return float(resilience / operation)
