"""Seeded Monte Carlo checks for the analytic rate and efficiency models.

Failures are constant-rate Poisson processes.  Because nodes are
homogeneous, each hierarchy level is simulated as one aggregate process
whose rate is ``si * per_element_rate * element_count``; a significance
index thins the raw process down to the failures that get through.

Every trial draws from its own PCG64 stream, derived from
``SeedSequence(seed, spawn_key=(trial,))``.  Trials are reduced in trial
order, so a given seed produces bit-identical output for any ``workers``
count.  Stream contents depend on NumPy's ``Generator`` implementation,
which is why ``numpy`` is pinned to a major version.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from hpcfail.efficiency import CrScenario
from hpcfail.errors import InputError
from hpcfail.rate_algebra import HOURS_PER_FIT_UNIT, FailureRate, decimal_exact
from hpcfail.refined_model import RefinedRates, RefinedSi
from hpcfail.topology import SystemTopology, totals

ARRIVAL_MODELS = ("deterministic", "exponential")
_BLOCK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    rates: RefinedRates
    si: RefinedSi
    topo: SystemTopology
    horizon_hours: float
    trials: int
    seed: int

    def __post_init__(self) -> None:
        horizon = float(self.horizon_hours)
        if not (math.isfinite(horizon) and horizon > 0):
            raise InputError(f"horizon_hours must be positive, got {self.horizon_hours!r}")
        object.__setattr__(self, "horizon_hours", horizon)
        _check_trials_seed(self.trials, self.seed)


def _check_trials_seed(trials: int, seed: int) -> None:
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        raise InputError(f"trials must be a positive integer, got {trials!r}")
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise InputError(f"seed must be an unsigned 64-bit integer, got {seed!r}")


@dataclass(frozen=True)
class SimResult:
    """Outcome of :func:`simulate_failure_counts`.

    ``standard_error`` is the standard error of ``empirical_sys_rate``, in FIT.
    """

    mean_failures_per_trial: float
    empirical_sys_rate: FailureRate
    standard_error: float
    trials: int
    horizon_hours: float

    def report(self, analytic: FailureRate | float | None = None) -> dict[str, float | int | None]:
        mean = self.empirical_sys_rate.fit
        expected = None if analytic is None else float(analytic)
        relative_error = None
        if expected:
            relative_error = abs(mean - expected) / expected
        elif expected == 0:
            relative_error = 0.0 if mean == 0 else math.inf
        return {
            "trials": self.trials,
            "mean": mean,
            "stderr": self.standard_error,
            "analytic": expected,
            "relative_error": relative_error,
        }


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def _run_trials(trials: int, workers: int, body: Callable[[int], float], dtype) -> np.ndarray:
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise InputError(f"workers must be a positive integer, got {workers!r}")
    out = np.empty(trials, dtype=dtype)

    def run_chunk(bounds: tuple[int, int]) -> None:
        for i in range(*bounds):
            out[i] = body(i)

    if workers == 1:
        run_chunk((0, trials))
        return out
    step = math.ceil(trials / workers)
    chunks = [(lo, min(lo + step, trials)) for lo in range(0, trials, step)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run_chunk, chunks))
    return out


def level_event_means(config: SimConfig) -> np.ndarray:
    """Expected events per trial for the node, chassis and cabinet processes."""
    counts = totals(config.topo)
    si = (config.si.node_si, config.si.chassis_si, config.si.cabinet_si)
    rates = (config.rates.node, config.rates.chassis_off_node, config.rates.cabinet_off_node)
    return np.array(
        [s.value * r.fit * n / HOURS_PER_FIT_UNIT * config.horizon_hours for s, r, n in zip(si, rates, counts)],
        dtype=float,
    )


def simulate_failure_counts(config: SimConfig, workers: int = 1) -> SimResult:
    means = level_event_means(config)
    live = means > 0

    def one_trial(index: int) -> int:
        rng = trial_generator(config.seed, index)
        # zero-rate processes are skipped outright so they cannot emit events
        return int(rng.poisson(means[live]).sum()) if live.any() else 0

    counts = _run_trials(config.trials, workers, one_trial, np.int64)
    mean = float(counts.mean())
    spread = float(counts.std(ddof=1)) / math.sqrt(config.trials) if config.trials > 1 else 0.0
    to_fit = HOURS_PER_FIT_UNIT / config.horizon_hours
    return SimResult(
        mean_failures_per_trial=mean,
        empirical_sys_rate=FailureRate(mean * to_fit),
        standard_error=spread * to_fit,
        trials=config.trials,
        horizon_hours=config.horizon_hours,
    )


class CrSimResult(NamedTuple):
    mean_efficiency: float
    standard_error: float
    trials: int

    def report(self, analytic: float | None = None) -> dict[str, float | int | None]:
        relative_error = None
        if analytic:
            relative_error = abs(self.mean_efficiency - analytic) / analytic
        elif analytic == 0:
            relative_error = 0.0 if self.mean_efficiency == 0 else math.inf
        return {
            "trials": self.trials,
            "mean": self.mean_efficiency,
            "stderr": self.standard_error,
            "analytic": analytic,
            "relative_error": relative_error,
        }


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def deterministic_split(scenario: CrScenario) -> tuple[int, int]:
    """(failures, hard failures) for arrivals at mtbf, 2*mtbf, ... <= T_o.

    The hard count is the integer whose total recovery time is nearest the
    expected total; when T_o is a multiple of mtbf this is
    ``round(failures * hard_fraction)``.
    """
    operation = decimal_exact(scenario.operation_hours)
    failures = math.floor(operation / decimal_exact(scenario.mtbf_hours))
    hard_cost = decimal_exact(scenario.hard_recovery_hours)
    soft_cost = decimal_exact(scenario.soft_recovery_hours)
    if hard_cost == soft_cost:
        hard = _round_half_up(failures * decimal_exact(scenario.hard_fraction))
    else:
        expected = scenario.expected_failures * (
            hard_cost * decimal_exact(scenario.hard_fraction) + soft_cost * decimal_exact(scenario.soft_fraction)
        )
        hard = _round_half_up((expected - failures * soft_cost) / (hard_cost - soft_cost))
    return failures, min(max(hard, 0), failures)


def _count_arrivals(rng: np.random.Generator, mean_gap: float, horizon: float) -> int:
    expected = horizon / mean_gap
    block = min(_BLOCK, int(expected + 6 * math.sqrt(expected)) + 16)
    count = 0
    clock = 0.0
    while True:
        times = clock + np.cumsum(rng.exponential(mean_gap, block))
        inside = int(np.searchsorted(times, horizon, side="right"))
        count += inside
        if inside < block:
            return count
        clock = float(times[-1])


def _count_hard(rng: np.random.Generator, failures: int, hard_fraction: float) -> int:
    hard = 0
    remaining = failures
    while remaining:
        size = min(remaining, _BLOCK)
        hard += int(np.count_nonzero(rng.random(size) < hard_fraction))
        remaining -= size
    return hard


def simulate_cr_timeline(
    scenario: CrScenario,
    arrival_model: str,
    trials: int,
    seed: int,
    workers: int = 1,
) -> CrSimResult:
    """Simulate failure arrivals over T_o and the recovery time they cost.

    ``"deterministic"`` places failures every mtbf hours and involves no
    randomness.  ``"exponential"`` draws inter-arrival gaps with mean mtbf
    and marks each failure hard with probability ``hard_fraction``.
    """
    if arrival_model not in ARRIVAL_MODELS:
        raise InputError(f"arrival model must be one of {', '.join(ARRIVAL_MODELS)}, got {arrival_model!r}")
    _check_trials_seed(trials, seed)
    operation = decimal_exact(scenario.operation_hours)
    hard_cost = decimal_exact(scenario.hard_recovery_hours)
    soft_cost = decimal_exact(scenario.soft_recovery_hours)

    if arrival_model == "deterministic":
        failures, hard = deterministic_split(scenario)
        value = float((hard * hard_cost + (failures - hard) * soft_cost) / operation)
        return CrSimResult(value, 0.0, trials)

    def one_trial(index: int) -> float:
        rng = trial_generator(seed, index)
        failures = _count_arrivals(rng, scenario.mtbf_hours, scenario.operation_hours)
        hard = _count_hard(rng, failures, scenario.hard_fraction)
        resilience = hard * scenario.hard_recovery_hours + (failures - hard) * scenario.soft_recovery_hours
        return resilience / scenario.operation_hours

    values = _run_trials(trials, workers, one_trial, np.float64)
    spread = float(values.std(ddof=1)) / math.sqrt(trials) if trials > 1 else 0.0
    return CrSimResult(float(values.mean()), spread, trials)
