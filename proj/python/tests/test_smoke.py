import math

import numpy as np
import pytest

import risec


def toy_scene(seed=2):
    s = risec.default_scene(1, 1, placement_seed=seed)
    s["arrays"].update(n_bs_antennas=2, n_user_antennas=1, n_eve_antennas=1, ris_jx=2, ris_jz=1)
    return s


def test_scene_defaults():
    s = risec.default_scene(3, 2)
    assert len(s["geometry"]["users"]) == 3
    assert len(s["geometry"]["eves"]) == 2


def test_steering_vector_unit_modulus():
    a = risec.steering_ula(4, 0.05, 0.1, 0.3)
    assert a.shape == (4,)
    assert np.allclose(np.abs(a), 1.0)
    assert a[0] == pytest.approx(1.0)


def test_cascade_identity():
    s = risec.default_scene(2, 1)
    phases = np.linspace(0.0, 6.0, 16)
    assert risec.cascade_error(s, 3, phases) < 1e-10


def test_solve_is_deterministic_and_within_budget():
    s = risec.default_scene(2, 1)
    a = risec.solve(s, channel_seed=4)
    b = risec.solve(s, channel_seed=4)
    assert a["sum_secrecy"] == b["sum_secrecy"]
    assert a["iters"] >= 1
    power = sum(sum(x * x for x in w["data"]) for w in a["design"]["w"])
    assert power <= s["system"]["power_budget_w"] * (1 + 1e-9)


def test_oracle_on_toy():
    r = risec.oracle(toy_scene(), channel_seed=5, phase_levels=4, power_steps=4)
    assert r["visited"] == 4**2 * 3 * 5
    assert math.isfinite(r["objective"])


def test_errors_map_to_python():
    with pytest.raises(risec.RisecError):
        risec.oracle(risec.default_scene(3, 1), phase_levels=2)
    with pytest.raises(ValueError):
        risec.solve(risec.default_scene(2, 1), ao={"no_such_knob": 1})


def test_wilson():
    lo, hi = risec.wilson_interval(0, 100)
    assert lo == 0.0 and 0.0 < hi < 0.05


def test_small_sweep():
    cfg = risec.default_experiment("threshold_sweep")
    cfg.update(trials=1, grid=[1.5, 3.0])
    cfg["ao"]["max_iters"] = 10
    out = risec.run_sweep(cfg)
    assert len(out["points"]) == 2
    assert out["config_hash"] == risec.config_hash(cfg)
