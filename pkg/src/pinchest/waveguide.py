"""In-waveguide transfer vectors for pinching-antenna arrays.

Models the complex gain between each pinching antenna (PA) coupling point
and the waveguide feed under four hardware assumptions:

- ideal: lossless guide, per-PA coupling and guided phase only
- serial: one PA pinched at a time; bidirectional power split plus
  intrinsic attenuation, no inter-PA leakage
- parallel: all PAs pinched; signals crossing earlier PAs lose amplitude
  by the cumulative pass-through product
- downlink: feed-side coupling efficiency plus cumulative radiation loss
  on the way out to each PA

Also implements the two radiation power models used for the parallel
protocol (proportional pass-through vs. equalized redistribution) and the
per-PA power profile in dB.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# dB value emitted for exactly-zero power entries instead of -inf
ZERO_POWER_DB = -300.0


@dataclass(frozen=True)
class WaveguideLayout:
    """Geometry of one waveguide: feed point, PA coordinates, propagation constants.

    Positions are 1-D coordinates in meters along the waveguide axis. PA
    distances from the feed must be strictly increasing. ``attenuation`` is
    the intrinsic amplitude decay in nepers per meter.
    """

    feed_position: float
    pa_positions: tuple[float, ...]
    guided_wavelength: float
    attenuation: float = 0.0
    carrier_wavelength: float = 0.005

    def __post_init__(self):
        object.__setattr__(self, "pa_positions", tuple(float(p) for p in self.pa_positions))
        if len(self.pa_positions) < 1:
            raise ValueError("layout needs at least one PA")
        if self.guided_wavelength <= 0:
            raise ValueError("guided wavelength must be positive")
        if self.carrier_wavelength <= 0:
            raise ValueError("carrier wavelength must be positive")
        if self.attenuation < 0:
            raise ValueError("attenuation must be nonnegative")
        d = self.distances
        if np.any(d < 0):
            raise ValueError("PA distances must be nonnegative")
        if np.any(np.diff(d) <= 0):
            raise ValueError("PA distances from the feed must be strictly increasing")

    @property
    def n_pas(self) -> int:
        return len(self.pa_positions)

    @property
    def distances(self) -> np.ndarray:
        """Feed-to-PA distances |feed - pa_n| in meters."""
        return np.abs(np.asarray(self.pa_positions) - self.feed_position)

    @classmethod
    def uniform(cls, n_pas, spacing=0.5, first_distance=0.5,
                carrier_freq_hz=60e9, effective_index=1.4, attenuation=0.1):
        """Evenly spaced PAs starting ``first_distance`` meters from the feed at 0.

        The guided wavelength is the free-space wavelength divided by the
        effective index of the guide.
        """
        wavelength = SPEED_OF_LIGHT / carrier_freq_hz
        positions = first_distance + spacing * np.arange(n_pas)
        return cls(
            feed_position=0.0,
            pa_positions=tuple(positions),
            guided_wavelength=wavelength / effective_index,
            attenuation=attenuation,
            carrier_wavelength=wavelength,
        )


@dataclass(frozen=True)
class CouplingSpec:
    """Per-PA coupling coefficients and the two feed-side power factors.

    ``alphas`` are the amplitude coupling coefficients in (0, 1]. The
    pass-through coefficients default to sqrt(1 - alpha^2) so that
    alpha^2 + beta^2 = 1 (power exchange at each pinch). ``betas`` may be
    given explicitly for leakage diagnostics where pass-through is measured
    independently of coupling.

    gamma: fraction of uplink-coupled power that travels toward the feed.
    eta: downlink feed coupling efficiency.
    """

    alphas: tuple[float, ...]
    gamma: float = 0.5
    eta: float = 0.9
    betas: tuple[float, ...] | None = field(default=None)

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        if len(alphas) < 1:
            raise ValueError("coupling spec needs at least one PA")
        if any(a <= 0 or a > 1 for a in alphas):
            raise ValueError("coupling coefficients must lie in (0, 1]")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.betas is None:
            betas = tuple(np.sqrt(max(0.0, 1.0 - a * a)) for a in alphas)
        else:
            betas = tuple(float(b) for b in self.betas)
            if len(betas) != len(alphas):
                raise ValueError("betas must match alphas in length")
            if any(b < 0 or b > 1 for b in betas):
                raise ValueError("pass-through coefficients must lie in [0, 1]")
        object.__setattr__(self, "betas", betas)

    @property
    def n_pas(self) -> int:
        return len(self.alphas)

    @classmethod
    def uniform_beta(cls, n_pas, beta, gamma=0.5, eta=0.9):
        """Uniform coupling derived from a single pass-through knob beta."""
        if not 0 <= beta < 1:
            raise ValueError("beta must lie in [0, 1) to leave nonzero coupling")
        alpha = float(np.sqrt(1.0 - beta * beta))
        return cls(alphas=(alpha,) * n_pas, gamma=gamma, eta=eta)

    @classmethod
    def full_coupling(cls, n_pas, gamma=0.5, eta=0.9):
        """Unit coupling at every PA, as when a single pinch is applied per slot."""
        return cls(alphas=(1.0,) * n_pas, gamma=gamma, eta=eta)

    @classmethod
    def from_coupling_lengths(cls, strengths, lengths, gamma=0.5, eta=0.9):
        """Coupling alpha_n = sin(strength_n * length_n) from physical pinch geometry."""
        strengths = np.asarray(strengths, dtype=float)
        lengths = np.asarray(lengths, dtype=float)
        if strengths.shape != lengths.shape:
            raise ValueError("strengths and lengths must have equal length")
        alphas = np.sin(strengths * lengths)
        return cls(alphas=tuple(alphas), gamma=gamma, eta=eta)


def _check_dims(layout: WaveguideLayout, coupling: CouplingSpec):
    if layout.n_pas != coupling.n_pas:
        raise ValueError(
            f"layout has {layout.n_pas} PAs but coupling spec has {coupling.n_pas}"
        )


def _guided_phase(layout: WaveguideLayout) -> np.ndarray:
    return np.exp(-2j * np.pi * layout.distances / layout.guided_wavelength)


def _cumulative_passthrough(factors) -> np.ndarray:
    """prod_{i<n} factor_i with the empty product for n=1 defined as 1."""
    f = np.asarray(factors, dtype=float)
    return np.concatenate(([1.0], np.cumprod(f[:-1])))


def ideal_transfer(layout: WaveguideLayout, coupling: CouplingSpec) -> np.ndarray:
    """Lossless transfer vector: alpha_n times the guided phase."""
    _check_dims(layout, coupling)
    return np.asarray(coupling.alphas) * _guided_phase(layout)


def serial_transfer(layout: WaveguideLayout, coupling: CouplingSpec) -> np.ndarray:
    """Single-pinch transfer: sqrt(gamma) * alpha_n * exp(-eps d_n) * phase.

    No cumulative leakage term; with one PA pinched per slot there are no
    intermediate pinches for the signal to pass under.
    """
    _check_dims(layout, coupling)
    d = layout.distances
    return (
        np.sqrt(coupling.gamma)
        * np.asarray(coupling.alphas)
        * np.exp(-layout.attenuation * d)
        * _guided_phase(layout)
    )


def parallel_transfer(layout: WaveguideLayout, coupling: CouplingSpec) -> np.ndarray:
    """All-pinched transfer: serial element times prod_{i<n} beta_i.

    The cumulative pass-through product models the amplitude surviving the
    crossings under PAs 1..n-1 on the way to the feed.
    """
    serial = serial_transfer(layout, coupling)
    return serial * _cumulative_passthrough(coupling.betas)


def downlink_transfer(layout: WaveguideLayout, coupling: CouplingSpec) -> np.ndarray:
    """Feed-to-PA transfer: sqrt(eta) * alpha_n * exp(-eps d_n) * phase * prod sqrt(1-alpha_i^2).

    Mirrors the uplink parallel structure with the feed coupling efficiency
    eta in place of the bidirectional split gamma; the radiation loss term
    uses sqrt(1 - alpha_i^2) directly, which coincides with beta_i whenever
    the pass-through is derived from the coupling.
    """
    _check_dims(layout, coupling)
    d = layout.distances
    alphas = np.asarray(coupling.alphas)
    radiation_loss = _cumulative_passthrough(np.sqrt(1.0 - alphas**2))
    return (
        np.sqrt(coupling.eta)
        * alphas
        * np.exp(-layout.attenuation * d)
        * _guided_phase(layout)
        * radiation_loss
    )


def equalize_radiation(g: np.ndarray) -> np.ndarray:
    """Redistribute total captured power equally across all PA channels.

    Every output magnitude becomes sqrt(sum |g_n|^2 / N); phases are kept,
    so the total power is conserved. Entries that are exactly zero keep
    zero phase. Idempotent.
    """
    g = np.asarray(g, dtype=complex)
    total = float(np.sum(np.abs(g) ** 2))
    if total == 0.0:
        raise ValueError("cannot equalize an all-zero transfer vector")
    target = np.sqrt(total / g.size)
    return target * np.exp(1j * np.angle(g))


def pa_power_profile(g: np.ndarray, reference_power: float) -> np.ndarray:
    """Per-PA received power 10*log10(|g_n|^2 / reference_power) in dB.

    Exactly-zero entries are emitted as the -300 dB sentinel rather than -inf.
    """
    if reference_power <= 0:
        raise ValueError("reference power must be positive")
    p = np.abs(np.asarray(g, dtype=complex)) ** 2 / reference_power
    out = np.full(p.shape, ZERO_POWER_DB)
    nonzero = p > 0
    out[nonzero] = 10.0 * np.log10(p[nonzero])
    return out
