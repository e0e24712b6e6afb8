import json

import pytest

from hpcfail.config import ModelConfig, bundled_fixtures, load_config, resolve_config_path
from hpcfail.efficiency import CrScenario, TimeUsage
from hpcfail.errors import ConfigError
from hpcfail.rate_algebra import FailureRate
from hpcfail.refined_model import Level

REFERENCE_FIXTURES = ["scenario1", "scenario2", "scenario3", "mira_table1", "efficiency_13_14", "exascale_15"]


def test_reference_fixtures_bundled():
    assert set(REFERENCE_FIXTURES) <= set(bundled_fixtures())


@pytest.mark.parametrize("name", sorted(bundled_fixtures()))
def test_fixture_round_trip(name):
    cfg = load_config(name)
    again = ModelConfig.from_dict(json.loads(cfg.dumps()), base_dir=resolve_config_path(name).parent)
    assert again == cfg


def test_scenario1_contents():
    cfg = load_config("scenario1")
    assert cfg.topology.total_nodes == 100_000
    assert [s.value for s in cfg.si] == [0.2, 0.4]
    assert cfg.caps == {"sys_cap": FailureRate(5e6), "soft_cap": FailureRate(200)}


def test_efficiency_cases():
    cases = load_config("efficiency_13_14").efficiency
    assert set(cases) == {"without_failures", "with_failures"}
    assert all(isinstance(c, TimeUsage) for c in cases.values())
    assert isinstance(load_config("exascale_15").efficiency["default"], CrScenario)


def test_categories_table_relative_to_config():
    source = load_config("mira_table1").categories
    assert source.table_path.is_file()
    assert source.observed_sys_rate == FailureRate(1e6)


def test_resolve_prefers_filesystem(tmp_path):
    path = tmp_path / "scenario1.json"
    path.write_text('{"si": {"alpha": 1, "beta": 1}}')
    assert load_config(path).topology is None
    assert load_config("scenario1.json").topology is not None


def test_missing_config():
    with pytest.raises(ConfigError, match="not found"):
        resolve_config_path("no_such_fixture")


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(path)


@pytest.mark.parametrize(
    "data, pattern",
    [
        ({"topologyy": {}}, "unknown key"),
        ({"rates": {"procesor": 1}}, "unknown key"),
        ({"si": {"alpha": 0.2}}, "missing key"),
        ({"si": {"alpha": "0.2", "beta": 1}}, "must be a number"),
        ({"si": {"alpha": True, "beta": 1}}, "must be a number"),
        ({"si": {"alpha": 1.5, "beta": 1}}, "si.alpha"),
        ({"topology": {"nodes_per_chassis": 1.5, "chassis_per_cabinet": 1, "cabinets": 1}}, "integer"),
        ({"topology": {"nodes_per_chassis": 0, "chassis_per_cabinet": 1, "cabinets": 1}}, "topology"),
        ({"caps": {"sys_cap": -1}}, "caps.sys_cap"),
        ({"efficiency": {"operation_hours": 1}}, "time-usage keys"),
        ({"efficiency": {"cases": {}}}, "empty"),
        ({"efficiency": {"operation_hours": 10, "production_hours": 10, "run_hours": 5, "solve_hours": 6}}, "solve"),
        ({"categories": {"default_level": "rack"}}, "unknown level"),
        ({"categories": {"table": 3}}, "path string"),
        ([], "must be an object"),
    ],
)
def test_strict_parsing(data, pattern):
    with pytest.raises(ConfigError, match=pattern):
        ModelConfig.from_dict(data)


def test_integral_float_topology_accepted():
    cfg = ModelConfig.from_dict({"topology": {"nodes_per_chassis": 2.0, "chassis_per_cabinet": 3, "cabinets": 4}})
    assert cfg.topology.total_nodes == 24


def test_categories_round_trip():
    data = {
        "categories": {
            "mapping": {"compute unit": "node", "other": "cabinet"},
            "default_level": "unattributed",
            "observed_sys_rate": 10,
        }
    }
    cfg = ModelConfig.from_dict(data)
    assert cfg.categories.mapping["other"] is Level.CABINET
    assert ModelConfig.from_dict(cfg.to_dict()) == cfg


def test_require():
    with pytest.raises(ConfigError, match="topology, si"):
        ModelConfig().require("topology", "si")
