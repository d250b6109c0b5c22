import dataclasses

import pytest

from flatcircle.config import ExperimentConfig, load_config
from flatcircle.errors import ConfigError


def test_defaults_validate():
    ExperimentConfig().validate()


def test_preset_target():
    cf = ExperimentConfig(target="silver").continued_fraction()
    assert cf.partial_quotients[:3] == (2, 2, 2)


def test_explicit_quotients():
    cfg = ExperimentConfig(target="1,2,1,2,1,2,1,2,1,2,1,2,1,2,1,2",
                           n_max=5, depth=8)
    assert cfg.continued_fraction().partial_quotients[:4] == (1, 2, 1, 2)


@pytest.mark.parametrize("field,value", [
    ("precision", 16),
    ("n_max", 1),
    ("depth", 3),
    ("ells", ()),
    ("ells", ("0.5",)),
    ("ells", ("abc",)),
    ("target", "bronze"),
])
def test_invalid_configs_rejected(field, value):
    cfg = dataclasses.replace(ExperimentConfig(), **{field: value})
    with pytest.raises(ConfigError):
        cfg.validate()


def test_depth_must_exceed_levels():
    with pytest.raises(ConfigError):
        ExperimentConfig(n_max=10, depth=11).validate()


def test_hash_tracks_map_fields_only():
    base = ExperimentConfig()
    assert base.hash() == dataclasses.replace(base, out_dir="x").hash()
    assert base.hash() != dataclasses.replace(base, n_max=11).hash()


def test_load_config(tmp_path):
    path = tmp_path / "e.ini"
    path.write_text("""
[map]
b = 0.2
[run]
ells = 2, 3
target = golden
n_max = 5
depth = 8
precision = 128
[output]
dir = results
""")
    cfg = load_config(str(path))
    assert cfg.b == "0.2"
    assert cfg.ells == ("2", "3")
    assert cfg.precision == 128
    assert cfg.out_dir == "results"


def test_load_config_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent.ini")


def test_load_config_bad_value(tmp_path):
    path = tmp_path / "e.ini"
    path.write_text("[run]\nn_max = many\n")
    with pytest.raises(ConfigError):
        load_config(str(path))
