"""Failure-rate arithmetic in FIT.

A FIT is one failure per 10^9 device-hours.  FIT values add across
independent components, which is why every rate in this package is carried
in FIT and converted to hours only at the edges (:func:`fit_to_mttf`,
:func:`mttf_to_fit`).

Node rates are composed from a soft channel (processor, SRAM, DRAM) and a
hard channel (storage, network), each weighted by a significance index: the
fraction of failures that get past the deployed resilience mechanisms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from hpcfail.errors import OutOfRange, ZeroRate

HOURS_PER_FIT_UNIT = 1e9

Real = Union[int, float, Fraction]


def decimal_exact(x: Real) -> Fraction:
    """Rational value of ``x`` as written in decimal.

    ``0.2`` maps to ``1/5`` rather than to the nearest binary double, so
    budget arithmetic on values typed by a person stays exact.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


def _check_finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise OutOfRange(f"{what} must be finite, got {value!r}")
    return value


@dataclass(frozen=True, order=True)
class FailureRate:
    """A non-negative failure rate in FIT."""

    fit: float

    def __post_init__(self) -> None:
        value = _check_finite(self.fit, "failure rate")
        if value < 0:
            raise OutOfRange(f"failure rate must be >= 0 FIT, got {value!r}")
        object.__setattr__(self, "fit", value)

    def __add__(self, other: FailureRate) -> FailureRate:
        if not isinstance(other, FailureRate):
            return NotImplemented
        return FailureRate(self.fit + other.fit)

    def __mul__(self, factor: Real) -> FailureRate:
        if isinstance(factor, FailureRate):
            return NotImplemented
        return FailureRate(self.fit * float(factor))

    __rmul__ = __mul__

    def __float__(self) -> float:
        return self.fit

    def per_hour(self) -> float:
        return self.fit / HOURS_PER_FIT_UNIT


@dataclass(frozen=True, order=True)
class Mttf:
    """Mean time to failure in hours."""

    hours: float

    def __post_init__(self) -> None:
        value = _check_finite(self.hours, "MTTF")
        if value <= 0:
            raise OutOfRange(f"MTTF must be > 0 hours, got {value!r}")
        object.__setattr__(self, "hours", value)


@dataclass(frozen=True, order=True)
class SignificanceIndex:
    """Residual (unmasked) failure fraction in [0, 1]."""

    value: float

    def __post_init__(self) -> None:
        value = _check_finite(self.value, "significance index")
        if not 0.0 <= value <= 1.0:
            raise OutOfRange(f"significance index must be in [0, 1], got {value!r}")
        object.__setattr__(self, "value", value)

    def __float__(self) -> float:
        return self.value


def as_rate(value: FailureRate | Real) -> FailureRate:
    return value if isinstance(value, FailureRate) else FailureRate(value)


def as_si(value: SignificanceIndex | Real) -> SignificanceIndex:
    return value if isinstance(value, SignificanceIndex) else SignificanceIndex(value)


@dataclass(frozen=True)
class NodeComponentRates:
    """Per-node component rates feeding the soft and hard channels."""

    processor: FailureRate
    sram: FailureRate
    dram: FailureRate
    storage: FailureRate
    network: FailureRate

    def __post_init__(self) -> None:
        for name in ("processor", "sram", "dram", "storage", "network"):
            object.__setattr__(self, name, as_rate(getattr(self, name)))


@dataclass(frozen=True)
class NodeRateModel:
    soft: FailureRate
    hard: FailureRate
    alpha: SignificanceIndex
    beta: SignificanceIndex

    def __post_init__(self) -> None:
        object.__setattr__(self, "soft", as_rate(self.soft))
        object.__setattr__(self, "hard", as_rate(self.hard))
        object.__setattr__(self, "alpha", as_si(self.alpha))
        object.__setattr__(self, "beta", as_si(self.beta))


def fit_to_mttf(rate: FailureRate | Real) -> Mttf:
    rate = as_rate(rate)
    if rate.fit == 0:
        raise ZeroRate("MTTF is unbounded for a zero failure rate")
    return Mttf(HOURS_PER_FIT_UNIT / rate.fit)


def mttf_to_fit(mttf: Mttf | Real) -> FailureRate:
    if not isinstance(mttf, Mttf):
        mttf = Mttf(mttf)
    return FailureRate(HOURS_PER_FIT_UNIT / mttf.hours)


def soft_rate(components: NodeComponentRates) -> FailureRate:
    return components.processor + components.sram + components.dram


def hard_rate(components: NodeComponentRates) -> FailureRate:
    return components.storage + components.network


def weighted_sum(alpha: SignificanceIndex, soft: FailureRate, beta: SignificanceIndex, hard: FailureRate) -> FailureRate:
    """Default combiner for the soft and hard channels."""
    return FailureRate(alpha.value * soft.fit + beta.value * hard.fit)


def node_rate(model: NodeRateModel, combine=weighted_sum) -> FailureRate:
    """Residual per-node failure rate.

    ``combine`` receives ``(alpha, soft, beta, hard)``; the default is the
    weighted sum ``alpha*soft + beta*hard``.
    """
    return combine(model.alpha, model.soft, model.beta, model.hard)


def si_from_mask_fraction(masked: Real) -> SignificanceIndex:
    """Significance index left over when ``masked`` of the failures are caught."""
    masked = _check_finite(masked, "mask fraction")
    if not 0.0 <= masked <= 1.0:
        raise OutOfRange(f"mask fraction must be in [0, 1], got {masked!r}")
    return SignificanceIndex(float(1 - decimal_exact(masked)))
