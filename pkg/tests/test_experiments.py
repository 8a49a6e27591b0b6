import numpy as np
import pytest

from pinchest.config import ExperimentConfig
from pinchest.errors import ConfigError
from pinchest.estimation import mse_closed_form
from pinchest.experiments import (
    DOWNLINK_SERIES,
    UPLINK_SERIES,
    EstimationScenario,
    draw_trials,
    evaluate_point,
    monte_carlo_nmse,
    run_downlink_nmse_vs_snr,
    run_nmse_vs_beta,
    run_power_profile,
    run_uplink_nmse_vs_snr,
    uplink_transfers,
)

SMALL = ExperimentConfig(n_pas=4, trials=64, seed=7)


# ---------------------------------------------------------------- seeding / draws


def test_trial_draws_deterministic():
    a = draw_trials(SMALL, 32, master_seed=5)
    b = draw_trials(SMALL, 32, master_seed=5)
    np.testing.assert_array_equal(a.channels, b.channels)
    np.testing.assert_array_equal(a.unit_noise, b.unit_noise)
    c = draw_trials(SMALL, 32, master_seed=6)
    assert not np.array_equal(a.channels, c.channels)


def test_trial_draws_worker_count_invariant():
    base = draw_trials(SMALL, 50, master_seed=3, workers=1)
    for workers in (2, 4, 8):
        other = draw_trials(SMALL, 50, master_seed=3, workers=workers)
        np.testing.assert_array_equal(base.channels, other.channels)
        np.testing.assert_array_equal(base.unit_noise, other.unit_noise)


def test_trial_stream_independent_of_batch_size():
    # trial t is the same draw whether 10 or 100 trials are materialized
    few = draw_trials(SMALL, 10, master_seed=11)
    many = draw_trials(SMALL, 100, master_seed=11)
    np.testing.assert_array_equal(few.channels, many.channels[:10])
    np.testing.assert_array_equal(few.unit_noise, many.unit_noise[:10])


def test_unit_noise_is_standard_complex():
    draws = draw_trials(ExperimentConfig(n_pas=8, trials=1), 4000, master_seed=1)
    power = np.mean(np.abs(draws.unit_noise) ** 2)
    assert power == pytest.approx(1.0, rel=0.05)


# ---------------------------------------------------------------- scenarios


def test_scenario_validation():
    with pytest.raises(ConfigError):
        EstimationScenario(SMALL, 1.0, "warp-drive")
    with pytest.raises(ConfigError):
        EstimationScenario(SMALL, -1.0, "serial")


def test_scenario_direction_and_power():
    up = EstimationScenario(SMALL, 1.0, "parallel_equal")
    assert up.direction == "uplink" and up.radiation == "equal-power"
    down = EstimationScenario(SMALL, 1.0, "downlink_parallel")
    assert down.direction == "downlink"
    assert down.pilot_power == SMALL.total_power


def test_smatrix_requires_power_of_two():
    cfg = ExperimentConfig(n_pas=12, trials=4)
    with pytest.raises(ConfigError):
        EstimationScenario(cfg, 1.0, "parallel_proportional").observation()
    with pytest.raises(ConfigError):
        EstimationScenario(cfg, 1.0, "ideal_parallel").observation()
    # serial protocols have no such restriction
    EstimationScenario(cfg, 1.0, "serial").observation()


def test_serial_observation_is_beta_independent():
    a = EstimationScenario(SMALL, 1.0, "serial", beta=0.5).observation()
    b = EstimationScenario(SMALL, 1.0, "serial", beta=0.99).observation()
    np.testing.assert_array_equal(a.matrix, b.matrix)


def test_downlink_parallel_is_power_diluted_serial():
    g = SMALL.downlink_group_size
    a_serial = EstimationScenario(SMALL, 1.0, "downlink_serial").observation()
    a_par = EstimationScenario(SMALL, 1.0, "downlink_parallel").observation()
    np.testing.assert_allclose(
        a_par.matrix, a_serial.matrix / np.sqrt(g), rtol=1e-15
    )


def test_equal_power_model_conserves_captured_energy():
    for beta in (0.5, 0.9, 0.99):
        transfers = uplink_transfers(ExperimentConfig(n_pas=16), beta=beta)
        total_prop = np.sum(np.abs(transfers["proportional"]) ** 2)
        total_eq = np.sum(np.abs(transfers["equal"]) ** 2)
        assert total_eq == pytest.approx(total_prop, rel=1e-12)


# ---------------------------------------------------------------- monte carlo


def test_noise_free_nmse_is_numerically_zero():
    scenario = EstimationScenario(SMALL, 0.0, "ideal_serial")
    stats = monte_carlo_nmse(scenario, trials=32, seed=2)
    assert stats.nmse_mean < 1e-20
    assert stats.excluded == 0


def test_monte_carlo_deterministic_across_workers():
    scenario = EstimationScenario(SMALL, 0.01, "parallel_proportional")
    base = monte_carlo_nmse(scenario, trials=64, seed=9, workers=1)
    for workers in (4, 8):
        again = monte_carlo_nmse(scenario, trials=64, seed=9, workers=workers)
        assert again.nmse_mean == base.nmse_mean
        assert again.nmse_stderr == base.nmse_stderr


def test_monte_carlo_closed_form_oracle():
    # serial protocol: empirical mean squared error against the trace formula
    cfg = ExperimentConfig(n_pas=16, trials=10_000, seed=42)
    noise_var = 0.1
    scenario = EstimationScenario(cfg, noise_var, "serial")
    a = scenario.observation()
    draws = draw_trials(cfg, cfg.trials, cfg.seed)
    stats = evaluate_point(a, noise_var, draws)
    predicted = mse_closed_form(a, noise_var)
    assert stats.mse_empirical == pytest.approx(predicted, rel=0.05)
    # ratio-of-means NMSE prediction
    predicted_nmse = predicted / np.mean(draws.channel_norm2)
    empirical_nmse = stats.mse_empirical / np.mean(draws.channel_norm2)
    assert empirical_nmse == pytest.approx(predicted_nmse, rel=0.05)


def test_singular_point_flagged_and_excluded():
    # a zero transfer entry makes the diagonal observation singular
    from pinchest.activation import ObservationMatrix

    a = ObservationMatrix(np.diag([1.0, 0.0, 1.0, 1.0]).astype(complex))
    draws = draw_trials(SMALL, 16, master_seed=1)
    stats = evaluate_point(a, 0.01, draws)
    assert stats.excluded == 16
    assert stats.exclusion_rate == 1.0
    assert stats.unreliable
    assert np.isnan(stats.nmse_mean) and np.isnan(stats.nmse_db)


def test_mc_point_db_conversion():
    scenario = EstimationScenario(SMALL, 0.01, "serial")
    stats = monte_carlo_nmse(scenario, trials=128, seed=3)
    assert stats.nmse_db == pytest.approx(10 * np.log10(stats.nmse_mean))
    assert stats.nmse_stderr_db > 0


# ---------------------------------------------------------------- sweep runners


def test_uplink_sweep_structure():
    cfg = ExperimentConfig(n_pas=4, trials=32, seed=5, snr_db_grid=(0.0, 10.0))
    res = run_uplink_nmse_vs_snr(cfg)
    assert res.axis == [0.0, 10.0]
    assert res.series_names == UPLINK_SERIES
    for name in res.series_names:
        assert len(res.series[name]) == 2
        assert len(res.stderr_db[name]) == 2
    assert res.trials == 32 and res.seed == 5


def test_uplink_sweep_protocol_filter():
    cfg = ExperimentConfig(n_pas=4, trials=8, snr_db_grid=(0.0,),
                           protocols=("serial", "ideal_serial"))
    res = run_uplink_nmse_vs_snr(cfg)
    assert set(res.series_names) == {"serial", "ideal_serial"}
    bad = ExperimentConfig(n_pas=4, trials=8, protocols=("nothing",))
    with pytest.raises(ConfigError):
        run_uplink_nmse_vs_snr(bad)


def test_downlink_sweep_structure_and_exact_gap():
    cfg = ExperimentConfig(n_pas=8, trials=64, seed=21, snr_db_grid=(0.0, 20.0))
    res = run_downlink_nmse_vs_snr(cfg)
    assert res.series_names == DOWNLINK_SERIES
    gap = np.array(res.series["downlink_parallel"]) - np.array(res.series["downlink_serial"])
    np.testing.assert_allclose(gap, 10 * np.log10(cfg.downlink_group_size), rtol=1e-9)


def test_downlink_curves_coincide_for_unit_group():
    cfg = ExperimentConfig(n_pas=8, trials=32, seed=2, snr_db_grid=(0.0, 10.0),
                           group_size=1)
    res = run_downlink_nmse_vs_snr(cfg)
    np.testing.assert_allclose(
        res.series["downlink_parallel"], res.series["downlink_serial"], rtol=1e-12
    )


def test_beta_sweep_serial_exactly_flat():
    cfg = ExperimentConfig(n_pas=8, trials=64, seed=13,
                           beta_grid=(0.5, 0.7, 0.9, 0.99))
    res = run_nmse_vs_beta(cfg)
    serial = res.series["serial"]
    assert max(serial) - min(serial) == 0.0


def test_power_profile_structure():
    cfg = ExperimentConfig(n_pas=8)
    res = run_power_profile(cfg)
    assert res.axis == [float(i) for i in range(1, 9)]
    np.testing.assert_allclose(res.series["ideal"], 0.0, atol=1e-9)
    # equal-power profile is flat and conserves the proportional total
    eq = np.array(res.series["equal"])
    prop = np.array(res.series["proportional"])
    np.testing.assert_allclose(eq, eq[0], rtol=1e-12)
    total_eq = np.sum(10 ** (eq / 10))
    total_prop = np.sum(10 ** (prop / 10))
    assert total_eq == pytest.approx(total_prop, rel=1e-12)


def test_experiment_reproducible_results():
    cfg = ExperimentConfig(n_pas=4, trials=32, seed=77, snr_db_grid=(5.0,))
    a = run_uplink_nmse_vs_snr(cfg)
    b = run_uplink_nmse_vs_snr(cfg)
    assert a.series == b.series
    assert a.stderr_db == b.stderr_db
