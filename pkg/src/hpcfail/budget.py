"""Failure-rate caps under a bounded system failure rate.

The system cap is shared out per node:

    sys_cap / total_nodes = alpha * soft + beta * hard

where the soft channel is either the aggregate ``soft_cap`` or the sum of
``processor + sram + dram``, and the hard channel is either ``hard_cap`` or
``storage + network``.  Fixing all but one variable gives a unique cap;
fixing fewer leaves a linear constraint among the unknowns.

Arithmetic runs on decimal-exact rationals (see
:func:`hpcfail.rate_algebra.decimal_exact`) and is rounded to float once at
the end, so inputs such as ``alpha=0.2`` reproduce hand-worked results to
the last digit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple

from hpcfail.errors import Degenerate, Infeasible, InputError, Overdetermined, Underdetermined
from hpcfail.rate_algebra import (
    FailureRate,
    Real,
    SignificanceIndex,
    as_rate,
    as_si,
    decimal_exact,
)
from hpcfail.tabular import Grid, format_decimal
from hpcfail.topology import SystemTopology, totals

SOFT_COMPONENTS = ("processor", "sram", "dram")
HARD_COMPONENTS = ("storage", "network")
VARIABLES = SOFT_COMPONENTS + HARD_COMPONENTS + ("soft_cap", "hard_cap")

# Relative slack under which a negative residual counts as zero.
SNAP_TOLERANCE = 1e-9

SWEEP_HEADER = ("soft_cap_fit", "hard_cap_fit", "sys_rate_fit")


def _snap(value: Fraction, scale: Fraction) -> Fraction:
    if value < 0 and -value <= SNAP_TOLERANCE * abs(scale):
        return Fraction(0)
    return value


def _fmt_coef(value: float) -> str:
    return format_decimal(value)


@dataclass(frozen=True)
class LinearConstraint:
    """``sum(coefficients[v] * v) == rhs`` over named rate variables."""

    coefficients: dict[str, float]
    rhs: float
    normalized: bool = False
    _exact: tuple[dict[str, Fraction], Fraction] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", {k: float(v) for k, v in self.coefficients.items()})
        object.__setattr__(self, "rhs", float(self.rhs))
        if not any(c != 0 for c in self.coefficients.values()):
            raise Degenerate("a constraint needs at least one nonzero coefficient")
        if self._exact is None:
            exact = ({k: decimal_exact(v) for k, v in self.coefficients.items()}, decimal_exact(self.rhs))
            object.__setattr__(self, "_exact", exact)

    @classmethod
    def from_exact(cls, coefficients: Mapping[str, Fraction], rhs: Fraction, normalized: bool = False) -> LinearConstraint:
        coefficients = dict(coefficients)
        return cls(
            {k: float(v) for k, v in coefficients.items()},
            float(rhs),
            normalized,
            (coefficients, rhs),
        )

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.coefficients)

    def normalize(self, by: str = "first") -> LinearConstraint:
        """Scale so one coefficient becomes 1.

        ``by="first"`` picks the first variable in insertion order,
        ``by="smallest"`` the smallest-magnitude nonzero coefficient.
        """
        coefs, rhs = self._exact
        nonzero = {k: v for k, v in coefs.items() if v != 0}
        if by == "first":
            pivot = next(iter(nonzero.values()))
        elif by == "smallest":
            pivot = min(nonzero.values(), key=abs)
        else:
            raise ValueError(f"unknown normalization {by!r}")
        if next(iter(nonzero.values())) / pivot < 0:
            pivot = -pivot
        return LinearConstraint.from_exact({k: v / pivot for k, v in nonzero.items()}, rhs / pivot, True)

    def evaluate(self, assignment: Mapping[str, FailureRate | Real]) -> float:
        return sum(c * float(as_rate(assignment[k]).fit) for k, c in self.coefficients.items())

    def solve_for(self, variable: str, assignment: Mapping[str, FailureRate | Real] | None = None) -> FailureRate:
        """Eliminate ``variable`` given values for every other variable."""
        assignment = dict(assignment or {})
        coefs, rhs = self._exact
        if variable not in coefs:
            raise Underdetermined(f"{variable} does not appear in {self}")
        missing = [k for k in coefs if k != variable and k not in assignment]
        if missing:
            raise Underdetermined(f"values needed for {', '.join(missing)}")
        if coefs[variable] == 0:
            raise Degenerate(f"{variable} has a zero coefficient")
        residual = rhs
        scale = abs(rhs)
        for k, c in coefs.items():
            if k == variable:
                continue
            term = c * decimal_exact(as_rate(assignment[k]).fit)
            residual -= term
            scale += abs(term)
        value = _snap(residual / coefs[variable], scale / abs(coefs[variable]))
        if value < 0:
            raise Infeasible(f"{variable} would need to be {float(value):g} FIT")
        return FailureRate(float(value))

    def __str__(self) -> str:
        terms = []
        for name, coef in self.coefficients.items():
            if coef == 0:
                continue
            magnitude = abs(coef)
            body = name if magnitude == 1 else f"{_fmt_coef(magnitude)}*{name}"
            if not terms:
                terms.append(body if coef > 0 else f"-{body}")
            else:
                terms.append(("+ " if coef > 0 else "- ") + body)
        return f"{' '.join(terms)} = {_fmt_coef(self.rhs)}"

    def to_dict(self) -> dict[str, object]:
        return {"coefficients": dict(self.coefficients), "rhs": self.rhs, "normalized": self.normalized}


@dataclass(frozen=True)
class CapProblem:
    topo: SystemTopology
    alpha: SignificanceIndex
    beta: SignificanceIndex
    sys_cap: FailureRate
    knowns: dict[str, FailureRate] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", as_si(self.alpha))
        object.__setattr__(self, "beta", as_si(self.beta))
        object.__setattr__(self, "sys_cap", as_rate(self.sys_cap))
        unknown_names = sorted(set(self.knowns) - set(VARIABLES))
        if unknown_names:
            raise InputError(f"unknown cap variable(s): {', '.join(unknown_names)}")
        ordered = {k: as_rate(self.knowns[k]) for k in VARIABLES if k in self.knowns}
        object.__setattr__(self, "knowns", ordered)


def _channel_terms(problem: CapProblem, target: str | None) -> list[tuple[str, Fraction]]:
    alpha = decimal_exact(problem.alpha.value)
    beta = decimal_exact(problem.beta.value)
    terms: list[tuple[str, Fraction]] = []
    for aggregate, parts, weight in (
        ("soft_cap", SOFT_COMPONENTS, alpha),
        ("hard_cap", HARD_COMPONENTS, beta),
    ):
        use_aggregate = aggregate in problem.knowns or target == aggregate
        known_parts = [p for p in parts if p in problem.knowns]
        if use_aggregate and known_parts:
            raise InputError(f"{aggregate} cannot be combined with {', '.join(known_parts)}")
        if use_aggregate:
            terms.append((aggregate, weight))
        else:
            terms.extend((p, weight) for p in parts)
    order = {name: i for i, name in enumerate(VARIABLES)}
    terms.sort(key=lambda t: order[t[0]])
    return terms


def _raw_constraint(problem: CapProblem, target: str | None) -> tuple[dict[str, Fraction], Fraction, Fraction]:
    total_nodes = totals(problem.topo)[0]
    per_node = decimal_exact(problem.sys_cap.fit) / total_nodes
    rhs = per_node
    unknowns: dict[str, Fraction] = {}
    for name, weight in _channel_terms(problem, target):
        if name in problem.knowns:
            rhs -= weight * decimal_exact(problem.knowns[name].fit)
        else:
            unknowns[name] = weight
    return unknowns, _snap(rhs, per_node), per_node


def derive_constraint(problem: CapProblem) -> LinearConstraint:
    """Linear relation the unknown caps must satisfy, normalized on the first one."""
    unknowns, rhs, _ = _raw_constraint(problem, None)
    if rhs < 0:
        raise Infeasible(f"known rates exceed the per-node budget by {float(-rhs):g} FIT")
    if not unknowns:
        raise Degenerate("every variable is known; nothing left to constrain")
    live = {k: v for k, v in unknowns.items() if v != 0}
    if not live:
        raise Degenerate("all unknowns carry a zero significance index")
    return LinearConstraint.from_exact(live, rhs).normalize("first")


def solve_single_unknown(problem: CapProblem, unknown: str) -> FailureRate:
    """Cap for ``unknown`` when every other variable in the equation is known."""
    if unknown not in VARIABLES:
        raise InputError(f"unknown cap variable {unknown!r}")
    if unknown in problem.knowns:
        raise Overdetermined(f"{unknown} is already given")
    unknowns, rhs, _ = _raw_constraint(problem, unknown)
    others = [k for k in unknowns if k != unknown]
    if others:
        raise Underdetermined(f"{unknown} cannot be isolated; also unknown: {', '.join(others)}")
    if unknowns[unknown] == 0:
        raise Degenerate(f"{unknown} has a zero significance index")
    if rhs < 0:
        raise Infeasible(f"known rates exceed the per-node budget by {float(-rhs):g} FIT")
    return LinearConstraint.from_exact(unknowns, rhs).solve_for(unknown)


class SweepRow(NamedTuple):
    soft: float
    hard: float
    sys_rate: float


def sweep_system_rate(
    topo: SystemTopology,
    alpha: SignificanceIndex | Real,
    beta: SignificanceIndex | Real,
    soft_range: Grid,
    hard_range: Grid,
) -> list[SweepRow]:
    """System rate over a soft x hard grid, soft-major order."""
    a = decimal_exact(as_si(alpha).value)
    b = decimal_exact(as_si(beta).value)
    total_nodes = totals(topo)[0]
    hard_values = hard_range.exact_values()
    rows = []
    for soft in soft_range.exact_values():
        for hard in hard_values:
            rows.append(SweepRow(float(soft), float(hard), float((a * soft + b * hard) * total_nodes)))
    return rows


def default_grid() -> Grid:
    return Grid(0, 500, 10)

