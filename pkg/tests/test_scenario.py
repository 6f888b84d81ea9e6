import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cersim.params import PhysicalParams
from cersim.scenario import (CONFIG_KEYS, ConfigError, ScenarioConfig, SolverError,
                             fit_fringe, parse_config, read_csv, run_scenario, seed_sweep)


def test_parse_full_config():
    text = """
    # reference set
    delta = 1.2e9
    rabi_p1 = 2.5e8
    gamma = 2*pi*5.746e6   # expression
    apply_delay_decay = yes
    delay_time = 1e-6
    scenario = sweep-phase
    sweep_points = 64
    n_z = 32
    n_t = 48
    out = result.csv
    """
    cfg = parse_config(text)
    assert cfg.scenario == "sweep-phase" and cfg.sweep_points == 64
    assert cfg.params.excited_decay == pytest.approx(2 * math.pi * 5.746e6)
    assert cfg.params.apply_delay_decay is True
    assert (cfg.n_z, cfg.n_t, cfg.out) == (32, 48, "result.csv")
    assert "rabi_p2" in cfg.defaulted and "delta" not in cfg.defaulted
    assert cfg.grid.n_t == 48


def test_empty_config_is_reference_defaults():
    cfg = parse_config("")
    assert cfg.params == PhysicalParams()
    assert set(cfg.defaulted) == set(CONFIG_KEYS)


@pytest.mark.parametrize("text, fragment", [
    ("delta = 1\nbogus = 3", "line 2: unknown key 'bogus'"),
    ("delta 3", "line 1"),
    ("delta = abc", "bad value for 'delta'"),
    ("n_z = 3.5", "bad value for 'n_z'"),
    ("delta = 1\ndelta = 2", "duplicate key 'delta'"),
    ("apply_delay_decay = maybe", "apply_delay_decay"),
    ("scenario = bogus", "scenario"),
    ("sweep_points = 4", "sweep_points"),
    ("w0 = 2", "w0"),
    ("delta = __import__('os')", "delta"),
])
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment.replace("(", r"\(").replace(")", r"\)")):
        parse_config(text)


def test_fringe_synthetic_cosine():
    phi = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    f = fit_fringe(np.column_stack([phi, 3 + 2 * np.cos(phi + 0.7)]))
    assert f.mean == pytest.approx(3)
    assert f.amplitude == pytest.approx(2)
    assert f.offset == pytest.approx(0.7)
    assert f.visibility == pytest.approx(2 / 3)
    assert f.residual < 1e-12
    assert not f.flat


def test_fringe_flat():
    phi = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    f = fit_fringe([(p, 5.0) for p in phi])
    assert f.flat and f.visibility == 0.0


def test_fringe_preconditions():
    phi = np.linspace(0, 2 * np.pi, 7, endpoint=False)
    with pytest.raises(ValueError):
        fit_fringe(np.column_stack([phi, np.ones(7)]))
    half = np.linspace(0, np.pi, 16)
    with pytest.raises(ValueError):
        fit_fringe(np.column_stack([half, np.cos(half)]))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 10), st.floats(0, 1), st.floats(-np.pi + 1e-3, np.pi - 1e-3),
       st.integers(8, 64))
def test_fringe_recovers_parameters(c, v, phi0, n):
    phi = 2 * np.pi * np.arange(n) / n
    d = v * c
    f = fit_fringe(np.column_stack([phi, c + d * np.cos(phi + phi0)]))
    assert f.mean == pytest.approx(c, rel=1e-10)
    assert f.visibility == pytest.approx(v, abs=1e-10)
    if v > 1e-6:
        assert np.cos(f.offset - phi0) == pytest.approx(1.0, abs=1e-8)
    assert f.sample_visibility <= f.visibility + 1e-10


def small(scenario, sweep_points=16):
    return replace(parse_config(""), n_z=32, n_t=32, scenario=scenario, sweep_points=sweep_points)


@pytest.mark.parametrize("scenario, columns", [
    ("srs", ["t_tilde", "i_spon"]),
    ("cers", ["t_tilde", "i_spon", "i_seed", "i_spin_wave", "i_light_atom", "i_total",
              "i_uncorrelated_sum"]),
    ("sweep-phase", ["delta_phi", "i_total", "i_light_atom"]),
    ("sweep-seed", ["attenuation_eta", "i_seed", "i_spin_wave", "visibility"]),
    ("validate", ["t_tilde", "i_analytic", "i_green", "rel_discrepancy"]),
])
def test_scenario_columns_and_metadata(scenario, columns):
    out = run_scenario(small(scenario))
    meta, cols, data = read_csv(out.text)
    assert cols == columns
    assert meta["scenario"] == scenario
    assert meta["n_z"] == "32"
    assert meta["delta"].endswith("(default)")
    assert np.all(np.isfinite(data))
    assert "\r" not in out.text


def test_cers_simple_sum_column():
    _, cols, data = read_csv(run_scenario(small("cers")).text)
    d = dict(zip(cols, data.T))
    np.testing.assert_allclose(d["i_uncorrelated_sum"], d["i_spon"] + d["i_seed"] + d["i_spin_wave"],
                               rtol=1e-12)
    np.testing.assert_allclose(d["i_total"], d["i_uncorrelated_sum"] + d["i_light_atom"], rtol=1e-12)


def test_cers_optimal_phase_dominates():
    _, cols, plain = read_csv(run_scenario(small("cers")).text)
    _, _, best = read_csv(run_scenario(small("cers"), optimal_phase=True).text)
    k = cols.index("i_total")
    assert np.all(best[:, k] >= plain[:, k] - 1e-12 * best[:, k])


def test_csv_round_trip_is_bit_identical(tmp_path):
    first = run_scenario(small("cers"))
    # rebuild the config from the metadata header and run again
    meta, _, data = read_csv(first.text)
    lines = []
    for key in CONFIG_KEYS:
        if key in meta:
            lines.append(f"{key} = {meta[key].replace(' (default)', '')}")
    cfg = parse_config("\n".join(lines))
    second = run_scenario(cfg)
    _, _, data2 = read_csv(second.text)
    assert np.array_equal(data, data2)
    assert first.text.split("\n", 1)[1] != ""


def test_sweep_phase_summary():
    out = run_scenario(small("sweep-phase", sweep_points=32))
    meta, _, data = read_csv(out.text)
    assert float(meta["fringe residual"]) < 1e-9
    assert out.summary["visibility"] > 0.5
    np.testing.assert_allclose(data[:, 0], 2 * np.pi * np.arange(32) / 32)


def test_validate_verdict_and_failure_path(monkeypatch):
    out = run_scenario(small("validate"))
    assert out.passed
    import cersim.scenario as sc
    monkeypatch.setattr(sc, "VALIDATION_RTOL", 1e-12)
    assert not run_scenario(small("validate")).passed


def test_solver_errors_carry_context():
    cfg = ScenarioConfig(n_z=4, n_t=4, scenario="validate")
    with pytest.raises(SolverError, match="validate"):
        run_scenario(cfg)


def test_seed_sweep_balancing(two_stage_64):
    etas = np.linspace(0, 2, 33)
    rows = seed_sweep(two_stage_64, etas)
    assert rows[0, 1] == 0 and rows[0, 3] == pytest.approx(0, abs=1e-12)
    np.testing.assert_allclose(rows[:, 2], rows[0, 2])
    np.testing.assert_allclose(rows[:, 1], etas ** 2 * rows[-1, 1] / 4, rtol=1e-12)
