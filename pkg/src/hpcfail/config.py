"""JSON model configuration.

A config is one JSON object with any of these blocks::

    {
      "topology":   {"nodes_per_chassis": 100, "chassis_per_cabinet": 10, "cabinets": 100},
      "si":         {"alpha": 0.2, "beta": 0.4},
      "refined_si": {"node": 0.2, "chassis": 0.6, "cabinet": 0.5},
      "rates":      {"processor": 90, "node": 250, ...},
      "caps":       {"sys_cap": 5000000, "soft_cap": 200, ...},
      "efficiency": {<case>} | {"cases": {"name": <case>, ...}},
      "categories": {"table": "mira.csv", "mapping": {...}, "default_level": "...",
                     "observed_sys_rate": 1000000}
    }

Parsing is strict: unknown keys anywhere are errors.  An efficiency case is
either a time-usage record (``operation_hours, production_hours,
run_hours, solve_hours``) or a checkpoint/restart scenario
(``operation_hours, mtbf_hours, hard_fraction, soft_fraction,
hard_recovery_hours, soft_recovery_hours``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from hpcfail.budget import VARIABLES
from hpcfail.efficiency import CrScenario, TimeUsage
from hpcfail.errors import ConfigError, FailureModelError
from hpcfail.rate_algebra import FailureRate, SignificanceIndex
from hpcfail.refined_model import Level, RefinedSi
from hpcfail.topology import SystemTopology

DATA_DIR = Path(__file__).parent / "data"

RATE_KEYS = (
    "processor",
    "sram",
    "dram",
    "storage",
    "network",
    "soft",
    "hard",
    "node",
    "chassis_offnode",
    "cabinet_offnode",
)
CAP_KEYS = ("sys_cap",) + VARIABLES
TOPOLOGY_KEYS = ("nodes_per_chassis", "chassis_per_cabinet", "cabinets")
TIME_USAGE_KEYS = tuple(f.name for f in fields(TimeUsage))
CR_KEYS = tuple(f.name for f in fields(CrScenario))
BLOCKS = ("topology", "si", "refined_si", "rates", "caps", "efficiency", "categories")


def _require_mapping(value: Any, where: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise ConfigError(f"{where} must be an object, got {type(value).__name__}")
    return value


def _check_keys(block: Mapping[str, Any], allowed: tuple[str, ...], where: str, required: tuple[str, ...] = ()) -> None:
    extra = [k for k in block if k not in allowed]
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)} (allowed: {', '.join(allowed)})")
    missing = [k for k in required if k not in block]
    if missing:
        raise ConfigError(f"missing key(s) in {where}: {', '.join(missing)}")


def _number(value: Any, where: str) -> float | int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return value


def _build(where: str, factory, *args):
    try:
        return factory(*args)
    except FailureModelError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass(frozen=True)
class CategorySource:
    table: str | None = None
    mapping: dict[str, Level] | None = None
    default_level: Level | None = None
    observed_sys_rate: FailureRate | None = None
    base_dir: Path = field(default=Path("."), compare=False)

    @property
    def table_path(self) -> Path | None:
        if self.table is None:
            return None
        path = Path(self.table)
        return path if path.is_absolute() else self.base_dir / path


@dataclass(frozen=True)
class ModelConfig:
    topology: SystemTopology | None = None
    si: tuple[SignificanceIndex, SignificanceIndex] | None = None
    refined_si: RefinedSi | None = None
    rates: dict[str, FailureRate] = field(default_factory=dict)
    caps: dict[str, FailureRate] = field(default_factory=dict)
    efficiency: dict[str, TimeUsage | CrScenario] = field(default_factory=dict)
    categories: CategorySource | None = None

    @classmethod
    def from_dict(cls, data: Any, base_dir: Path | str = ".") -> ModelConfig:
        data = _require_mapping(data, "config")
        _check_keys(data, BLOCKS, "config")
        kwargs: dict[str, Any] = {}

        if "topology" in data:
            block = _require_mapping(data["topology"], "topology")
            _check_keys(block, TOPOLOGY_KEYS, "topology", TOPOLOGY_KEYS)
            counts = []
            for key in TOPOLOGY_KEYS:
                value = block[key]
                if isinstance(value, float) and value.is_integer():
                    value = int(value)
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(f"topology.{key} must be an integer, got {value!r}")
                counts.append(value)
            kwargs["topology"] = _build("topology", SystemTopology, *counts)

        if "si" in data:
            block = _require_mapping(data["si"], "si")
            _check_keys(block, ("alpha", "beta"), "si", ("alpha", "beta"))
            kwargs["si"] = tuple(
                _build(f"si.{k}", SignificanceIndex, _number(block[k], f"si.{k}")) for k in ("alpha", "beta")
            )

        if "refined_si" in data:
            block = _require_mapping(data["refined_si"], "refined_si")
            keys = ("node", "chassis", "cabinet")
            _check_keys(block, keys, "refined_si", keys)
            kwargs["refined_si"] = _build(
                "refined_si", RefinedSi, *(_number(block[k], f"refined_si.{k}") for k in keys)
            )

        for name, allowed in (("rates", RATE_KEYS), ("caps", CAP_KEYS)):
            if name in data:
                block = _require_mapping(data[name], name)
                _check_keys(block, allowed, name)
                kwargs[name] = {
                    k: _build(f"{name}.{k}", FailureRate, _number(block[k], f"{name}.{k}"))
                    for k in allowed
                    if k in block
                }

        if "efficiency" in data:
            kwargs["efficiency"] = _parse_efficiency(_require_mapping(data["efficiency"], "efficiency"))

        if "categories" in data:
            kwargs["categories"] = _parse_categories(_require_mapping(data["categories"], "categories"), Path(base_dir))

        return cls(**kwargs)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.topology is not None:
            out["topology"] = {k: getattr(self.topology, k) for k in TOPOLOGY_KEYS}
        if self.si is not None:
            out["si"] = {"alpha": self.si[0].value, "beta": self.si[1].value}
        if self.refined_si is not None:
            out["refined_si"] = {
                "node": self.refined_si.node_si.value,
                "chassis": self.refined_si.chassis_si.value,
                "cabinet": self.refined_si.cabinet_si.value,
            }
        if self.rates:
            out["rates"] = {k: v.fit for k, v in self.rates.items()}
        if self.caps:
            out["caps"] = {k: v.fit for k, v in self.caps.items()}
        if self.efficiency:
            out["efficiency"] = {
                "cases": {
                    name: {f.name: getattr(case, f.name) for f in fields(case)} for name, case in self.efficiency.items()
                }
            }
        if self.categories is not None:
            cat = self.categories
            block: dict[str, Any] = {}
            if cat.table is not None:
                block["table"] = cat.table
            if cat.mapping is not None:
                block["mapping"] = {k: v.value for k, v in cat.mapping.items()}
            if cat.default_level is not None:
                block["default_level"] = cat.default_level.value
            if cat.observed_sys_rate is not None:
                block["observed_sys_rate"] = cat.observed_sys_rate.fit
            out["categories"] = block
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def require(self, *blocks: str) -> None:
        missing = [b for b in blocks if not getattr(self, b)]
        if missing:
            raise ConfigError(f"config is missing required block(s): {', '.join(missing)}")


def _parse_case(case: Mapping[str, Any], where: str) -> TimeUsage | CrScenario:
    keys = set(case)
    if keys == set(TIME_USAGE_KEYS):
        return _build(where, TimeUsage, *(_number(case[k], f"{where}.{k}") for k in TIME_USAGE_KEYS))
    if keys == set(CR_KEYS):
        return _build(where, CrScenario, *(_number(case[k], f"{where}.{k}") for k in CR_KEYS))
    raise ConfigError(
        f"{where} must have exactly the time-usage keys ({', '.join(TIME_USAGE_KEYS)}) "
        f"or the C/R keys ({', '.join(CR_KEYS)}); got {', '.join(sorted(keys))}"
    )


def _parse_efficiency(block: Mapping[str, Any]) -> dict[str, TimeUsage | CrScenario]:
    if "cases" in block:
        _check_keys(block, ("cases",), "efficiency")
        cases = _require_mapping(block["cases"], "efficiency.cases")
        if not cases:
            raise ConfigError("efficiency.cases is empty")
        return {
            str(name): _parse_case(_require_mapping(case, f"efficiency.cases.{name}"), f"efficiency.cases.{name}")
            for name, case in cases.items()
        }
    return {"default": _parse_case(block, "efficiency")}


def _parse_categories(block: Mapping[str, Any], base_dir: Path) -> CategorySource:
    _check_keys(block, ("table", "mapping", "default_level", "observed_sys_rate"), "categories")
    table = block.get("table")
    if table is not None and not isinstance(table, str):
        raise ConfigError("categories.table must be a path string")
    mapping = None
    if "mapping" in block:
        raw = _require_mapping(block["mapping"], "categories.mapping")
        mapping = {str(k): _level(v, f"categories.mapping.{k}") for k, v in raw.items()}
    default_level = _level(block["default_level"], "categories.default_level") if "default_level" in block else None
    observed = None
    if "observed_sys_rate" in block:
        observed = _build(
            "categories.observed_sys_rate",
            FailureRate,
            _number(block["observed_sys_rate"], "categories.observed_sys_rate"),
        )
    return CategorySource(table, mapping, default_level, observed, base_dir)


def _level(value: Any, where: str) -> Level:
    try:
        return Level(value)
    except ValueError as exc:
        raise ConfigError(f"{where}: unknown level {value!r}") from exc


def bundled_fixtures() -> list[str]:
    return sorted(p.stem for p in DATA_DIR.glob("*.json"))


def resolve_config_path(name: str | Path) -> Path:
    """A filesystem path, or the name of a bundled fixture (``scenario1``)."""
    path = Path(name)
    if path.exists():
        return path
    bundled = DATA_DIR / (path.name if path.suffix == ".json" else f"{path.name}.json")
    if bundled.exists() and path.parent == Path("."):
        return bundled
    raise ConfigError(f"config {str(name)!r} not found (bundled fixtures: {', '.join(bundled_fixtures())})")


def load_config(name: str | Path) -> ModelConfig:
    path = resolve_config_path(name)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return ModelConfig.from_dict(data, base_dir=path.parent)
