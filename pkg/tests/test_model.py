import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xrelay.linalg import numerical_rank
from xrelay.model import (ChannelMode, NoiseModel, check_feasibility, config_from_dict,
                          config_to_dict, derive_seed, draw_channels, draw_symbols, load_config,
                          make_config)

from conftest import ACCEPTANCE_CONFIGS, MODES, cfg_of


def test_make_config_derived_sizes():
    cfg = make_config(2, 2, 1, [1], "varying", 3)
    assert (cfg.num_slots, cfg.num_unknowns) == (3, 1)
    cfg = make_config(3, 3, 1, [2], "constant", 3)
    assert (cfg.num_slots, cfg.num_unknowns) == (5, 4)
    assert cfg.channel_mode is ChannelMode.CONSTANT
    cfg = make_config(1, 1, 0, [], "varying", 3)
    assert (cfg.num_slots, cfg.num_unknowns, cfg.num_relays) == (1, 0, 0)


@pytest.mark.parametrize("args", [
    (0, 2, 1, [1]),
    (2, 0, 1, [1]),
    (2, 2, 2, [1]),
    (2, 2, 1, []),
    (2, 2, 1, [0]),
    (2, 2, -1, []),
])
def test_make_config_rejects(args):
    with pytest.raises(ValueError):
        make_config(*args)


@pytest.mark.parametrize("m, n, antennas, feasible, margin", [
    (2, 2, [1], True, 0),
    (3, 3, [1], False, -3),
    (1, 4, [], True, 0),
    (1, 1, [], True, 0),
    (3, 3, [1, 1, 1, 1], True, 0),
    (3, 3, [2], True, 0),
    (2, 3, [1], False, -1),
    (4, 2, [1, 2], True, 2),
])
def test_check_feasibility(m, n, antennas, feasible, margin):
    verdict = check_feasibility(cfg_of(m, n, antennas))
    assert verdict.feasible is feasible
    assert verdict.margin == margin


@given(st.integers(1, 5), st.integers(1, 5), st.lists(st.integers(1, 3), max_size=4),
       st.sampled_from(MODES), st.integers(0, 2**64 - 1))
def test_feasibility_ignores_seed_and_mode(m, n, antennas, mode, seed):
    base = check_feasibility(cfg_of(m, n, antennas))
    assert check_feasibility(cfg_of(m, n, antennas, mode, seed)) == base
    assert base.feasible == (sum(l * l for l in antennas) >= (m - 1) * (n - 1))


def _channels_equal(a, b):
    return (np.array_equal(a.direct, b.direct)
            and all(np.array_equal(x, y) for x, y in zip(a.tx_to_relay, b.tx_to_relay))
            and all(np.array_equal(x, y) for x, y in zip(a.relay_to_rx, b.relay_to_rx)))


def test_draw_channels_deterministic_and_seed_sensitive():
    cfg = cfg_of(3, 2, [1, 2], seed=11)
    assert _channels_equal(draw_channels(cfg), draw_channels(cfg))
    assert not np.array_equal(draw_channels(cfg).direct, draw_channels(cfg.with_seed(12)).direct)


def test_draw_channels_shapes():
    cfg = cfg_of(4, 2, [1, 2])
    ch = draw_channels(cfg)
    assert ch.direct.shape == (5, 2, 4)
    assert [f.shape for f in ch.tx_to_relay] == [(5, 1, 4), (5, 2, 4)]
    assert [g.shape for g in ch.relay_to_rx] == [(5, 2, 1), (5, 2, 2)]


def test_constant_mode_repeats_one_draw():
    ch = draw_channels(cfg_of(3, 3, [2], "constant", seed=5))
    assert np.array_equal(ch.direct[0], ch.direct[-1])
    for f, g in zip(ch.tx_to_relay, ch.relay_to_rx):
        assert all(np.array_equal(f[0], f[t]) for t in range(5))
        assert all(np.array_equal(g[0], g[t]) for t in range(5))


def test_varying_mode_changes_per_slot():
    ch = draw_channels(cfg_of(2, 2, [1], seed=5))
    assert not np.array_equal(ch.direct[0], ch.direct[1])


def test_channels_are_read_only():
    ch = draw_channels(cfg_of(2, 2, [1]))
    with pytest.raises(ValueError):
        ch.direct[0, 0, 0] = 0


def test_direct_channel_full_rank_100_seeds():
    for seed in range(100):
        ch = draw_channels(cfg_of(2, 2, [1], seed=seed))
        assert numerical_rank(ch.direct[0], 1e-10) == 2


@pytest.mark.parametrize("m, n, antennas", ACCEPTANCE_CONFIGS)
@pytest.mark.parametrize("mode", MODES)
def test_every_channel_matrix_full_rank(m, n, antennas, mode):
    for seed in range(100):
        assert draw_channels(cfg_of(m, n, antennas, mode, seed)).is_full_rank(1e-10)


def test_channel_statistics_unit_variance():
    cfg = cfg_of(4, 4, [3])
    samples = np.concatenate([draw_channels(cfg.with_seed(s)).direct.ravel() for s in range(200)])
    assert abs(np.mean(np.abs(samples) ** 2) - 1) < 0.03
    assert abs(np.mean(samples)) < 0.03
    # circular symmetry: E[h^2] vanishes
    assert abs(np.mean(samples ** 2)) < 0.03


def test_qpsk_symbols_unit_modulus():
    d = draw_symbols(cfg_of(3, 4, [2], constellation="qpsk", seed=2))
    assert d.shape == (4, 3)
    np.testing.assert_allclose(np.abs(d), 1.0, atol=1e-15)
    np.testing.assert_allclose(np.abs(d.real), np.sqrt(0.5), atol=1e-15)


def test_symbols_deterministic():
    cfg = cfg_of(3, 2, [2], seed=9)
    np.testing.assert_array_equal(draw_symbols(cfg), draw_symbols(cfg))


def test_gaussian_symbols_unit_power():
    cfg = cfg_of(10, 10, [9])
    power = np.mean([np.mean(np.abs(draw_symbols(cfg.with_seed(s))) ** 2) for s in range(100)])
    assert abs(power - 1) < 0.05


def test_symbol_and_channel_streams_independent():
    cfg = cfg_of(2, 2, [1], seed=1)
    ch = draw_channels(cfg)
    d = draw_symbols(cfg)
    assert not np.allclose(ch.direct[0], d)


def test_noise_model():
    nm = NoiseModel(True, 1.0, 30.0)
    assert nm.power == pytest.approx(1000.0)
    assert nm.amplitude == pytest.approx(np.sqrt(1000.0))
    with pytest.raises(ValueError):
        NoiseModel(True, -1.0)
    z = NoiseModel(False).sample(np.random.default_rng(0), (3,))
    np.testing.assert_array_equal(z, 0)


def test_derive_seed_deterministic_and_distinct():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert len({derive_seed(1, i) for i in range(1000)}) == 1000
    assert 0 <= derive_seed(2**64 - 1, 5) < 2**64


def test_config_json_roundtrip(tmp_path):
    cfg = cfg_of(3, 3, [1, 1, 1, 1], "constant", 42, "qpsk")
    doc = config_to_dict(cfg)
    assert set(doc) == {"m", "n", "relay_antennas", "channel_mode", "seed", "constellation"}
    assert config_from_dict(doc) == cfg
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    assert load_config(path) == cfg


def test_config_from_dict_errors():
    with pytest.raises(ValueError, match="unknown"):
        config_from_dict({"m": 2, "n": 2, "relays": 1})
    with pytest.raises(ValueError, match="missing"):
        config_from_dict({"m": 2})
    with pytest.raises(ValueError):
        config_from_dict({"m": 2, "n": 2, "channel_mode": "fast"})
