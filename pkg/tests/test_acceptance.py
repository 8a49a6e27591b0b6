"""Acceptance suite: one test per exit criterion, at its stated tolerance.

Each test prints a single pass/fail line (run with ``pytest -s -v`` to see
them live). Criteria either hold in exact arithmetic, match an independent
closed-form or Monte Carlo oracle, or check the structural claims of the
four bundled experiments at the reference configuration.
"""

import contextlib
import time

import numpy as np
import pytest

from pinchest.activation import hadamard, observation_matrix, s_matrix
from pinchest.cli import main as cli_main
from pinchest.config import ExperimentConfig
from pinchest.estimation import condition_bound_check, condition_number, downlink_snr
from pinchest.experiments import (
    EstimationScenario,
    draw_trials,
    run_downlink_nmse_vs_snr,
    run_nmse_vs_beta,
    run_power_profile,
    run_uplink_nmse_vs_snr,
)
from pinchest.waveguide import (
    CouplingSpec,
    WaveguideLayout,
    downlink_transfer,
    parallel_transfer,
)

REFERENCE = ExperimentConfig()  # N=16, 60 GHz, eps=0.1, gamma=0.5, eta=0.9, beta=0.9


@contextlib.contextmanager
def criterion(num, description, budget_s=None):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"FAIL criterion {num}: {description}")
        raise
    elapsed = time.monotonic() - start
    if budget_s is not None:
        assert elapsed < budget_s, f"criterion {num} took {elapsed:.1f}s > {budget_s}s"
    print(f"PASS criterion {num}: {description} ({elapsed:.2f}s)")


def db(x):
    return 10.0 * np.log10(x)


def ordered_below(res, low, high, i):
    """Series ``low`` below series ``high`` at point i, with 3x stderr slack."""
    slack = 3.0 * (res.stderr_db[low][i] + res.stderr_db[high][i])
    return res.series[low][i] < res.series[high][i] + slack


def test_criterion_1_activation_gram_exactness():
    with criterion(1, "Hadamard and S-matrix gram identities exact for N up to 32",
                   budget_s=1.0):
        for n in (2, 4, 8, 16, 32):
            h = hadamard(n).matrix
            assert np.array_equal(h.T @ h, n * np.eye(n, dtype=np.int64))
            s = s_matrix(n).matrix
            j = np.ones((n, n), dtype=np.int64)
            rhs = n * np.eye(n, dtype=np.int64) + h @ j + j @ h + n * j
            assert np.array_equal(4 * (s.T @ s), rhs)


def test_criterion_2_serial_mse_closed_form():
    with criterion(2, "serial MSE over 1e4 noise draws matches the per-PA sum "
                   "within 5%", budget_s=10.0):
        cfg = REFERENCE
        noise_var = 10.0 ** (-10.0 / 10.0)  # 10 dB, unit pilot power
        a = EstimationScenario(cfg, noise_var, "serial").observation()
        # independent oracle: the per-PA sum written from the model parameters
        # (single-pinch coupling is unity)
        d = 0.5 * np.arange(1, 17)
        predicted = noise_var * np.sum(1.0 / (cfg.gamma * np.exp(-2 * cfg.attenuation * d)))

        h = draw_trials(cfg, 1, master_seed=cfg.seed).channels[0]  # fixed channel
        rng = np.random.default_rng(20_240_601)
        draws = 10_000
        noise = np.sqrt(noise_var / 2.0) * (
            rng.standard_normal((draws, 16)) + 1j * rng.standard_normal((draws, 16))
        )
        y = (a.matrix @ h)[np.newaxis, :] + noise
        estimates = y @ a.pseudo_inverse().T
        empirical = float(np.mean(np.sum(np.abs(estimates - h) ** 2, axis=1)))
        assert empirical == pytest.approx(predicted, rel=0.05)


def test_criterion_3_conditioning_exactness_and_bound():
    with criterion(3, "kappa of the pass-through decay is beta^-(N-1); "
                   "kappa(A) >= kappa(G)/kappa(W) on 100 random instances"):
        for n in (4, 8, 16):
            for beta in (0.5, 0.9):
                layout = WaveguideLayout.uniform(n, attenuation=0.0)
                spec = CouplingSpec(alphas=(0.8,) * n, betas=(beta,) * n)
                g = parallel_transfer(layout, spec)
                kappa = condition_number(np.diag(g))
                assert kappa == pytest.approx(beta ** (-(n - 1)), rel=1e-12)

        rng = np.random.default_rng(314159)
        for _ in range(100):
            n = int(rng.choice([4, 8, 16]))
            mags = 10.0 ** rng.uniform(-3, 0, n)
            g = mags * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
            w = s_matrix(n)
            a = observation_matrix(w, g)
            assert condition_bound_check(a, w, np.diag(g))


def test_criterion_4_uplink_snr_sweep_structure():
    with criterion(4, "uplink NMSE ordering at every SNR and the 12 dB ideal "
                   "array-gain gap", budget_s=60.0):
        res = run_uplink_nmse_vs_snr(REFERENCE)
        chain = ("ideal_parallel", "ideal_serial", "serial",
                 "parallel_equal", "parallel_proportional")
        for i in range(len(res.axis)):
            for low, high in zip(chain, chain[1:]):
                assert ordered_below(res, low, high, i), (
                    f"{low} not below {high} at snr={res.axis[i]}"
                )
            gap = res.series["ideal_serial"][i] - res.series["ideal_parallel"][i]
            assert gap == pytest.approx(db(16.0), abs=1.0)


def test_criterion_5_beta_sweep_structure():
    with criterion(5, "beta sweep: flat serial, leakage-driven proportional "
                   "collapse, equal-power coupling collapse", budget_s=60.0):
        res = run_nmse_vs_beta(REFERENCE)
        beta = res.axis

        serial = res.series["serial"]
        assert max(serial) - min(serial) < 0.1

        # proportional: monotone nonincreasing while leakage dominates
        # (beta <= 0.95); above that the vanishing coupling alpha =
        # sqrt(1 - beta^2) dominates every parallel curve, checked below
        # through the equal-power series
        prop = res.series["parallel_proportional"]
        for i in range(1, len(beta)):
            if beta[i] > 0.95:
                break
            slack = 3.0 * (res.stderr_db["parallel_proportional"][i - 1]
                           + res.stderr_db["parallel_proportional"][i])
            assert prop[i] <= prop[i - 1] + slack, f"not monotone at beta={beta[i]}"

        i09, i05 = beta.index(0.9), beta.index(0.5)
        assert prop[i05] - prop[i09] > 20.0

        eq = res.series["parallel_equal"]
        i95, i99, i999 = beta.index(0.95), beta.index(0.99), beta.index(0.999)
        assert eq[i99] > eq[i95] and eq[i999] > eq[i99]
        assert eq[i999] > eq[i09]


def test_criterion_6_power_profile_closed_forms():
    with criterion(6, "serial decay slope -0.4343 dB/PA, proportional below "
                   "serial, equal-power flat and energy conserving", budget_s=1.0):
        res = run_power_profile(REFERENCE)
        serial = np.array(res.series["serial"])
        slope = -20.0 * REFERENCE.attenuation * REFERENCE.pa_spacing_m / np.log(10.0)
        np.testing.assert_allclose(np.diff(serial), slope, atol=1e-9)

        prop = np.array(res.series["proportional"])
        assert np.all(np.diff(prop) < 0)
        assert np.all(prop[1:] < serial[1:])

        eq = np.array(res.series["equal"])
        np.testing.assert_allclose(eq, eq[0], rtol=1e-12)
        total_eq = np.sum(10.0 ** (eq / 10.0))
        total_prop = np.sum(10.0 ** (prop / 10.0))
        assert total_eq == pytest.approx(total_prop, rel=1e-12)


def test_criterion_7_downlink_power_dilution():
    with criterion(7, "downlink parallel SNR is exactly serial/G and the NMSE "
                   "gap is 10 log10(G)", budget_s=30.0):
        g = REFERENCE.downlink_group_size
        assert g == 8
        rng = np.random.default_rng(8)
        gains = rng.uniform(0.3, 1.0, 16) * np.exp(1j * rng.uniform(0, 2 * np.pi, 16))
        h = rng.normal(size=16) + 1j * rng.normal(size=16)
        for pa in range(1, 17):
            serial = downlink_snr(gains, h, 0.2, pa, 1.0, "serial", group_size=g)
            parallel = downlink_snr(gains, h, 0.2, pa, 1.0, "parallel", group_size=g)
            assert parallel == serial / g  # exact float identity

        res = run_downlink_nmse_vs_snr(REFERENCE)
        high = len(res.axis) - 1
        gap = res.series["downlink_parallel"][high] - res.series["downlink_serial"][high]
        assert gap == pytest.approx(db(g), abs=1.0)


def test_criterion_8_uplink_downlink_nonreciprocity():
    with criterion(8, "downlink transfer equals sqrt(1.8) times the uplink "
                   "parallel transfer elementwise"):
        layout = WaveguideLayout.uniform(16, attenuation=0.1)
        coupling = CouplingSpec.uniform_beta(16, 0.9, gamma=0.5, eta=0.9)
        up = parallel_transfer(layout, coupling)
        down = downlink_transfer(layout, coupling)
        np.testing.assert_allclose(down, np.sqrt(1.8) * up, rtol=1e-12, atol=0.0)
        # reciprocity would need eta == gamma, which the hardware violates
        assert not np.allclose(down, up, rtol=1e-3)


def test_criterion_9_worker_count_determinism(tmp_path):
    with criterion(9, "byte-identical CSV across 1, 4, and 8 workers"):
        artifacts = []
        for workers in (1, 4, 8):
            out = tmp_path / f"w{workers}"
            code = cli_main([
                "uplink-snr", "--set", "trials=200", "--seed", "12345",
                "--workers", str(workers), "--out", str(out),
            ])
            assert code == 0
            artifacts.append((out / "uplink-snr.csv").read_bytes())
        assert artifacts[0] == artifacts[1] == artifacts[2]
