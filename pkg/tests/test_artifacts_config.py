import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minsurf_index import artifacts as art
from minsurf_index.config import RunConfig
from minsurf_index.errors import DomainError
from minsurf_index.geometry import plane_grid, solve_profile


def test_json_format_and_determinism():
    obj = {"b": 0.1, "a": [1, 2.5, math.inf, -math.inf], "f": Fraction(1, 6), (1, 2): np.float64(1 / 3),
           "nested": [{"x": np.int64(3), "y": np.bool_(True)}], "nan": math.nan}
    text = art.dumps(obj)
    assert text == art.dumps(obj)
    back = json.loads(text)
    assert back["b"] == 0.1 and back["a"][2] == "inf" and back["a"][3] == "-inf"
    assert back["f"] == "1/6" and back["1,2"] == 1 / 3 and back["nan"] == "nan"
    assert "0.33333333333333331" in text  # 17 significant digits
    assert back["nested"][0] == {"x": 3, "y": True}


@settings(max_examples=100)
@given(x=st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert float(art.format_float(x)) == x


def test_atomic_write_leaves_no_temp(tmp_path):
    art.write_json(tmp_path / "a.json", {"x": 1})
    assert sorted(p.name for p in tmp_path.iterdir()) == ["a.json"]


@pytest.mark.parametrize("grid", [solve_profile(4, 1.5, 3.0, 60), plane_grid(5, 3.0, 30)])
def test_grid_round_trip(tmp_path, grid):
    path = art.save_grid(grid, tmp_path / "g.csv")
    header, _ = art.read_csv(path)
    assert tuple(header) == ("s", "r", "z", "rp", "zp")
    meta = art.read_key_values(str(path) + ".meta")
    assert meta["format_version"] == "1" and int(meta["n"]) == grid.n
    back = art.load_grid(path)
    for name in ("s", "r", "z", "rp", "zp"):
        assert np.array_equal(getattr(back, name), getattr(grid, name))
    assert back.kind == grid.kind and back.N == grid.N and back.h == grid.h


def test_cache_hit_and_key(tmp_path, monkeypatch):
    monkeypatch.delenv(art.CACHE_ENV, raising=False)
    a = art.cached_grid(4, 1.0, 5.0, 100, cache_dir=tmp_path)
    files = list(tmp_path.glob("grid-*.csv"))
    assert len(files) == 1
    b = art.cached_grid(4, 1.0, 5.0, 100, cache_dir=tmp_path)
    assert np.array_equal(a.r, b.r)
    assert art.cache_key(4, 1.0, 5.0, 100) != art.cache_key(4, 1.0, 5.0, 101)
    assert art.cache_key(4, 1.0, 5.0, 100) != art.cache_key(4, 1.0, 5.0, 100, "plane")


def test_cache_env_override_and_corruption(tmp_path, monkeypatch):
    env = tmp_path / "env"
    monkeypatch.setenv(art.CACHE_ENV, str(env))
    art.cached_grid(4, 1.0, 5.0, 100, cache_dir=tmp_path / "ignored")
    assert not (tmp_path / "ignored").exists()
    (entry,) = env.glob("grid-*.csv")
    entry.write_text("garbage\n")
    g = art.cached_grid(4, 1.0, 5.0, 100)
    assert g.check_invariants()["first_integral"] < 1e-8
    assert art.load_grid(entry).size == g.size


def test_config_defaults_valid():
    cfg = RunConfig().validate()
    assert cfg.S_sweep == [20.0, 40.0, 80.0] and cfg.floor_value is None


configs = st.builds(
    lambda n, r0, N, seed, floor: RunConfig(n=n, r0=r0, N=N, seed=seed, spectral_floor=floor),
    st.integers(3, 9), st.floats(0.01, 100.0), st.integers(1, 10**6), st.integers(0, 10**6),
    st.one_of(st.just("auto"), st.floats(1e-12, 1.0).map(art.format_float)),
)


@settings(max_examples=50)
@given(cfg=configs)
def test_config_round_trip(cfg):
    text = cfg.to_text()
    back = RunConfig.from_text(text)
    assert back == cfg and back.to_text() == text


def test_config_errors():
    with pytest.raises(DomainError):
        RunConfig.from_text("bogus=1\n")
    with pytest.raises(DomainError):
        RunConfig.from_text("n 4\n")
    with pytest.raises(DomainError):
        RunConfig.from_text("n=four\n")
    for bad in ({"S_sweep": "40,20"}, {"S_sweep": "20,40,800"}, {"n": "2"}, {"N": "0"},
                {"r0": "-1"}, {"spectral_floor": "-1"}, {"kind": "torus"}):
        with pytest.raises(DomainError):
            RunConfig().updated(bad).validate()


def test_config_comments_and_overrides():
    cfg = RunConfig.from_text("# comment\n\nn = 5\nS_sweep=10, 20\n")
    assert cfg.n == 5 and cfg.S_sweep == [10.0, 20.0]
    assert cfg.updated({"n": "6"}).n == 6


def test_cache_dir_env(monkeypatch):
    monkeypatch.setenv(art.CACHE_ENV, "/tmp/x")
    assert RunConfig(cache_dir="/tmp/y").resolved_cache_dir == "/tmp/x"
    monkeypatch.delenv(art.CACHE_ENV)
    assert RunConfig(cache_dir="/tmp/y").resolved_cache_dir == "/tmp/y"
    assert RunConfig().resolved_cache_dir is None
