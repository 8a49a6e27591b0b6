"""Seeded Monte Carlo sweeps over the estimation protocols.

Reproducibility scheme
----------------------
Each trial owns an independent random stream derived as
``SeedSequence(entropy=master_seed, spawn_key=(trial_index,))``, so a trial
is identical no matter which worker runs it or which sweep point consumes
it. All sweep points and protocol series of one experiment share the same
per-trial draws (common random numbers): differences between curves then
reflect the protocols, not sampling noise, and a series whose observation
matrix does not depend on the swept parameter comes out exactly flat.
Reductions run over arrays ordered by trial index, so the worker count can
never change a result.

Per trial the draw order is fixed: UE position, visibility mask (only when
blocking is enabled), scatterer positions, scatterer gains, then the unit
noise vector. Noise for a sweep point is the unit draw scaled by that
point's noise standard deviation.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import waveguide
from .activation import ObservationMatrix, hadamard, observation_matrix, s_matrix, serial_activation
from .channel import (
    DeploymentRegion,
    ScattererSet,
    UePlacement,
    free_space_reference,
    los_component,
    nlos_component,
    visibility_vector,
)
from .config import ExperimentConfig, config_dict
from .errors import ConfigError, SingularSystemError
from .estimation import condition_number
from .waveguide import CouplingSpec, WaveguideLayout, equalize_radiation

UPLINK_SERIES = (
    "ideal_serial",
    "ideal_parallel",
    "serial",
    "parallel_proportional",
    "parallel_equal",
)
DOWNLINK_SERIES = ("downlink_serial", "downlink_parallel")
PROFILE_SERIES = ("ideal", "serial", "proportional", "equal")


def build_layout(cfg: ExperimentConfig) -> WaveguideLayout:
    return WaveguideLayout.uniform(
        cfg.n_pas,
        spacing=cfg.pa_spacing_m,
        first_distance=cfg.first_pa_distance_m,
        carrier_freq_hz=cfg.carrier_freq_hz,
        effective_index=cfg.effective_index,
        attenuation=cfg.attenuation,
    )


def build_region(cfg: ExperimentConfig, layout: WaveguideLayout) -> DeploymentRegion:
    return DeploymentRegion.from_waveguide(
        layout.pa_positions,
        width=cfg.region_x_m,
        depth=cfg.region_y_m,
        height=cfg.height_m,
    )


def _require_power_of_two(cfg: ExperimentConfig, what: str):
    n = cfg.n_pas
    if n & (n - 1):
        raise ConfigError(f"{what} needs n_pas to be a power of 2, got {n}")


# --------------------------------------------------------------- transfer vectors


def serial_pinch_coupling(cfg: ExperimentConfig) -> CouplingSpec:
    """Coupling for one-pinch-per-slot operation: the active PA couples fully.

    With a single isolated pinch the guide behaves as a plain transmission
    line, so the serial transfer carries the bidirectional split and the
    attenuation but is independent of the pass-through knob beta.
    """
    return CouplingSpec.full_coupling(cfg.n_pas, gamma=cfg.gamma, eta=cfg.eta)


def parallel_pinch_coupling(cfg: ExperimentConfig, beta=None) -> CouplingSpec:
    """Coupling with all PAs pinched: alpha = sqrt(1 - beta^2) per PA."""
    return CouplingSpec.uniform_beta(
        cfg.n_pas, cfg.beta if beta is None else beta, gamma=cfg.gamma, eta=cfg.eta
    )


def uplink_transfers(cfg: ExperimentConfig, beta=None) -> dict[str, np.ndarray]:
    """The four uplink transfer vectors behind the protocol series."""
    layout = build_layout(cfg)
    ideal = waveguide.ideal_transfer(layout, CouplingSpec.full_coupling(cfg.n_pas))
    serial = waveguide.serial_transfer(layout, serial_pinch_coupling(cfg))
    proportional = waveguide.parallel_transfer(layout, parallel_pinch_coupling(cfg, beta))
    return {
        "ideal": ideal,
        "serial": serial,
        "proportional": proportional,
        "equal": equalize_radiation(proportional),
    }


def downlink_serial_transfer(cfg: ExperimentConfig) -> np.ndarray:
    """Feed-to-PA gain for one-pinch-per-slot probing.

    Same form as the uplink serial transfer with the feed coupling
    efficiency eta in place of the bidirectional split gamma; a single
    pinch leaves no intermediate PAs to radiate from, so no cumulative
    loss term appears.
    """
    layout = build_layout(cfg)
    probe = CouplingSpec.full_coupling(cfg.n_pas, gamma=cfg.eta, eta=cfg.eta)
    return waveguide.serial_transfer(layout, probe)


# --------------------------------------------------------------- scenarios


@dataclass(frozen=True)
class EstimationScenario:
    """One protocol series at one noise level, ready for Monte Carlo trials."""

    config: ExperimentConfig
    noise_var: float
    protocol: str = "serial"
    beta: float | None = None  # overrides config.beta for sweeps

    def __post_init__(self):
        known = UPLINK_SERIES + DOWNLINK_SERIES
        if self.protocol not in known:
            raise ConfigError(f"unknown protocol series {self.protocol!r}")
        if self.noise_var < 0:
            raise ConfigError("noise variance must be nonnegative")

    @property
    def direction(self) -> str:
        return "downlink" if self.protocol.startswith("downlink") else "uplink"

    @property
    def radiation(self) -> str:
        return "equal-power" if self.protocol.endswith("equal") else "proportional"

    @property
    def pilot_power(self) -> float:
        cfg = self.config
        return cfg.total_power if self.direction == "downlink" else cfg.ue_power

    def observation(self) -> ObservationMatrix:
        cfg = self.config
        name = self.protocol
        amplitude = np.sqrt(self.pilot_power)
        if name in ("downlink_serial", "downlink_parallel"):
            g = downlink_serial_transfer(cfg)
            if name == "downlink_parallel":
                # total budget split across simultaneously probed components
                amplitude /= np.sqrt(cfg.downlink_group_size)
            return ObservationMatrix(amplitude * np.diag(g))
        transfers = uplink_transfers(cfg, self.beta)
        if name == "ideal_serial":
            return observation_matrix(serial_activation(cfg.n_pas), amplitude * transfers["ideal"])
        if name == "ideal_parallel":
            _require_power_of_two(cfg, "the Hadamard baseline")
            return observation_matrix(hadamard(cfg.n_pas), amplitude * transfers["ideal"])
        if name == "serial":
            return observation_matrix(serial_activation(cfg.n_pas), amplitude * transfers["serial"])
        _require_power_of_two(cfg, "the S-matrix protocol")
        g = transfers["proportional"] if name == "parallel_proportional" else transfers["equal"]
        return observation_matrix(s_matrix(cfg.n_pas), amplitude * g)


# --------------------------------------------------------------- trial draws


@dataclass(frozen=True, eq=False)
class TrialDraws:
    """Per-trial channel realizations and unit noise, ordered by trial index."""

    channels: np.ndarray  # (trials, N) complex
    unit_noise: np.ndarray  # (trials, N) complex, CN(0, 1) per element
    channel_norm2: np.ndarray  # (trials,)

    @property
    def trials(self) -> int:
        return self.channels.shape[0]


def _trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial,)))


def _draw_one(cfg, region, b0, wavelength, rng):
    ue = UePlacement.draw(region, rng)
    if cfg.los_block_prob > 0:
        vis = visibility_vector(cfg.n_pas, cfg.los_block_prob, rng)
    else:
        vis = visibility_vector(cfg.n_pas)
    scat = ScattererSet.draw(
        cfg.scatterer_count, region, rng,
        gain_variance=cfg.scatterer_gain_var,
        path_loss_const=b0, wavelength=wavelength,
    )
    h = los_component(ue, region, vis, b0, wavelength) + nlos_component(ue, scat, region)
    n = cfg.n_pas
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    return h, z


def draw_trials(cfg: ExperimentConfig, trials: int, master_seed: int,
                workers: int = 1) -> TrialDraws:
    """Materialize all per-trial draws; identical for any worker count."""
    n = cfg.n_pas
    wavelength = cfg.wavelength
    b0 = free_space_reference(wavelength)
    layout = build_layout(cfg)
    region = build_region(cfg, layout)
    channels = np.empty((trials, n), dtype=complex)
    noise = np.empty((trials, n), dtype=complex)

    def fill(lo, hi):
        for t in range(lo, hi):
            h, z = _draw_one(cfg, region, b0, wavelength, _trial_rng(master_seed, t))
            channels[t] = h
            noise[t] = z

    if workers <= 1 or trials < 2 * workers:
        fill(0, trials)
    else:
        bounds = np.linspace(0, trials, workers + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda i: fill(bounds[i], bounds[i + 1]), range(workers)))
    return TrialDraws(
        channels=channels,
        unit_noise=noise,
        channel_norm2=np.sum(np.abs(channels) ** 2, axis=1),
    )


# --------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class McPoint:
    """Monte Carlo summary of one (protocol, sweep point) pair."""

    nmse_mean: float
    nmse_stderr: float
    mse_empirical: float
    condition_number: float
    trials: int
    excluded: int = 0

    @property
    def exclusion_rate(self) -> float:
        return self.excluded / self.trials if self.trials else 0.0

    @property
    def unreliable(self) -> bool:
        return self.exclusion_rate > 0.01

    @property
    def nmse_db(self) -> float:
        if not np.isfinite(self.nmse_mean) or self.nmse_mean <= 0:
            return float("nan")
        return float(10.0 * np.log10(self.nmse_mean))

    @property
    def nmse_stderr_db(self) -> float:
        if not np.isfinite(self.nmse_mean) or self.nmse_mean <= 0:
            return float("nan")
        return float(10.0 / np.log(10.0) * self.nmse_stderr / self.nmse_mean)


def evaluate_point(a: ObservationMatrix, noise_var: float, draws: TrialDraws,
                   rel_cutoff: float = 0.0) -> McPoint:
    """Vectorized LS estimation of every trial against one observation matrix."""
    kappa = condition_number(a)
    try:
        pinv = a.pseudo_inverse(rel_cutoff)
    except SingularSystemError:
        # the observation does not depend on the channel draw, so a singular
        # system fails every trial at this sweep point
        return McPoint(
            nmse_mean=float("nan"), nmse_stderr=float("nan"),
            mse_empirical=float("nan"), condition_number=kappa,
            trials=draws.trials, excluded=draws.trials,
        )
    y = draws.channels @ a.matrix.T + np.sqrt(noise_var) * draws.unit_noise
    estimates = y @ pinv.T
    err2 = np.sum(np.abs(estimates - draws.channels) ** 2, axis=1)
    per_trial = err2 / draws.channel_norm2
    mean = float(per_trial.mean())
    stderr = (
        float(per_trial.std(ddof=1) / np.sqrt(draws.trials))
        if draws.trials > 1 else float("nan")
    )
    return McPoint(
        nmse_mean=mean, nmse_stderr=stderr, mse_empirical=float(err2.mean()),
        condition_number=kappa, trials=draws.trials,
    )


def monte_carlo_nmse(scenario: EstimationScenario, trials=None, seed=None,
                     workers=None) -> McPoint:
    """Mean per-trial NMSE for one scenario, deterministic given the seed."""
    cfg = scenario.config
    trials = cfg.trials if trials is None else int(trials)
    seed = cfg.seed if seed is None else int(seed)
    workers = cfg.workers if workers is None else int(workers)
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    draws = draw_trials(cfg, trials, seed, workers)
    return evaluate_point(scenario.observation(), scenario.noise_var, draws,
                          cfg.rel_cutoff)


# --------------------------------------------------------------- results


@dataclass
class ExperimentResult:
    """Tabular sweep output: one axis, one dB series per protocol."""

    experiment: str
    axis_name: str
    axis: list[float]
    series: dict[str, list[float]]  # dB values
    stderr_db: dict[str, list[float]] = field(default_factory=dict)
    exclusion: dict[str, list[float]] = field(default_factory=dict)
    kappa: dict[str, list[float]] = field(default_factory=dict)
    trials: int = 0
    seed: int = 0
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, vals in self.series.items():
            if len(vals) != len(self.axis):
                raise ValueError(f"series {name!r} length does not match axis")

    @property
    def series_names(self) -> tuple[str, ...]:
        return tuple(self.series)


def _noise_var(snr_db: float, power: float) -> float:
    """Transmit-referenced SNR: snr = power / noise_var."""
    return power * 10.0 ** (-snr_db / 10.0)


def _selected(cfg: ExperimentConfig, names) -> tuple[str, ...]:
    if not cfg.protocols:
        return tuple(names)
    chosen = tuple(n for n in names if n in cfg.protocols)
    if not chosen:
        raise ConfigError(
            f"protocol filter {cfg.protocols} matches none of {tuple(names)}"
        )
    return chosen


def _sweep(cfg, experiment, axis_name, axis, scenario_table):
    """Shared sweep loop: one draw set, vectorized evaluation per point."""
    draws = draw_trials(cfg, cfg.trials, cfg.seed, cfg.workers)
    names = tuple(scenario_table)
    series = {n: [] for n in names}
    stderr = {n: [] for n in names}
    exclusion = {n: [] for n in names}
    kappa = {n: [] for n in names}
    for point_index, _ in enumerate(axis):
        for name in names:
            a, noise_var = scenario_table[name](point_index)
            stats = evaluate_point(a, noise_var, draws, cfg.rel_cutoff)
            series[name].append(stats.nmse_db)
            stderr[name].append(stats.nmse_stderr_db)
            exclusion[name].append(stats.exclusion_rate)
            kappa[name].append(stats.condition_number)
    return ExperimentResult(
        experiment=experiment, axis_name=axis_name, axis=[float(x) for x in axis],
        series=series, stderr_db=stderr, exclusion=exclusion, kappa=kappa,
        trials=cfg.trials, seed=cfg.seed, config=config_dict(cfg),
    )


def run_uplink_nmse_vs_snr(cfg: ExperimentConfig) -> ExperimentResult:
    """NMSE vs transmit SNR for the five uplink protocol series."""
    names = _selected(cfg, UPLINK_SERIES)
    observations = {
        name: EstimationScenario(cfg, 0.0, name).observation() for name in names
    }
    table = {
        name: (lambda i, a=observations[name]:
               (a, _noise_var(cfg.snr_db_grid[i], cfg.ue_power)))
        for name in names
    }
    return _sweep(cfg, "uplink_nmse_vs_snr", "snr_db", cfg.snr_db_grid, table)


def run_downlink_nmse_vs_snr(cfg: ExperimentConfig) -> ExperimentResult:
    """NMSE vs transmit SNR for power-budgeted downlink probing."""
    names = _selected(cfg, DOWNLINK_SERIES)
    observations = {
        name: EstimationScenario(cfg, 0.0, name).observation() for name in names
    }
    table = {
        name: (lambda i, a=observations[name]:
               (a, _noise_var(cfg.snr_db_grid[i], cfg.total_power)))
        for name in names
    }
    return _sweep(cfg, "downlink_nmse_vs_snr", "snr_db", cfg.snr_db_grid, table)


def run_nmse_vs_beta(cfg: ExperimentConfig) -> ExperimentResult:
    """NMSE vs pass-through coefficient at a fixed transmit SNR."""
    noise_var = _noise_var(cfg.beta_sweep_snr_db, cfg.ue_power)
    names = _selected(cfg, ("serial", "parallel_proportional", "parallel_equal"))
    serial_obs = (
        EstimationScenario(cfg, noise_var, "serial").observation()
        if "serial" in names else None
    )

    def make(name):
        if name == "serial":
            # single-pinch operation never sees the pass-through knob
            return lambda i: (serial_obs, noise_var)
        return lambda i: (
            EstimationScenario(cfg, noise_var, name, beta=cfg.beta_grid[i]).observation(),
            noise_var,
        )

    table = {name: make(name) for name in names}
    return _sweep(cfg, "nmse_vs_beta", "beta", cfg.beta_grid, table)


def run_power_profile(cfg: ExperimentConfig) -> ExperimentResult:
    """Per-PA received power in dB against the lossless 0 dB reference."""
    transfers = uplink_transfers(cfg)
    names = _selected(cfg, PROFILE_SERIES)
    reference = 1.0  # lossless full-coupling power
    series = {
        name: [float(x) for x in waveguide.pa_power_profile(transfers[name], reference)]
        for name in names
    }
    kappa = {
        name: [float(condition_number(np.diag(transfers[name])))] * cfg.n_pas
        for name in names
    }
    return ExperimentResult(
        experiment="power_profile",
        axis_name="pa_index",
        axis=[float(i) for i in range(1, cfg.n_pas + 1)],
        series=series,
        kappa=kappa,
        trials=0,
        seed=cfg.seed,
        config=config_dict(cfg),
    )


EXPERIMENTS = {
    "uplink-snr": run_uplink_nmse_vs_snr,
    "beta-sweep": run_nmse_vs_beta,
    "power-profile": run_power_profile,
    "downlink-snr": run_downlink_nmse_vs_snr,
}
