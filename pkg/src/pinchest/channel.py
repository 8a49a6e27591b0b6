"""Stochastic wireless channel between a user terminal and the PA array.

The channel is the sum of a line-of-sight part (spherical spreading with a
binary per-PA visibility mask) and a non-line-of-sight part built from a
handful of point scatterers under the spherical wave model. All sampling
is driven by explicit numpy Generators so trials are reproducible and safe
to draw on any number of workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def free_space_reference(wavelength: float) -> float:
    """Path loss constant (lambda / 4 pi)^2, the 1 m free-space reference."""
    return (wavelength / (4.0 * np.pi)) ** 2


@dataclass(frozen=True, eq=False)
class DeploymentRegion:
    """Rectangular service area with the waveguide mounted above it.

    The guide runs parallel to the x-axis at height ``height``; users live
    on the floor (z = 0) inside [0, width] x [0, depth].
    """

    width: float  # m, x extent
    depth: float  # m, y extent
    height: float  # m, waveguide mounting height
    pa_positions: np.ndarray  # (N, 3)

    def __post_init__(self):
        if min(self.width, self.depth, self.height) <= 0:
            raise ValueError("region dimensions must be positive")
        pa = np.asarray(self.pa_positions, dtype=float)
        if pa.ndim != 2 or pa.shape[1] != 3:
            raise ValueError("PA positions must be an (N, 3) array")
        if not np.allclose(pa[:, 1], pa[0, 1]):
            raise ValueError("waveguide must be parallel to the x-axis (equal PA y)")
        pa = pa.copy()
        pa.flags.writeable = False
        object.__setattr__(self, "pa_positions", pa)

    @property
    def n_pas(self) -> int:
        return self.pa_positions.shape[0]

    @classmethod
    def from_waveguide(cls, pa_axis_positions, width=10.0, depth=6.0, height=3.0,
                       guide_y=None):
        """Place the guide across the middle of the room by default."""
        x = np.asarray(pa_axis_positions, dtype=float)
        y = depth / 2.0 if guide_y is None else float(guide_y)
        pa = np.column_stack([x, np.full_like(x, y), np.full_like(x, height)])
        return cls(width=width, depth=depth, height=height, pa_positions=pa)


@dataclass(frozen=True)
class UePlacement:
    """User terminal position on the floor; z is identically 0."""

    x: float
    y: float

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, 0.0])

    @classmethod
    def draw(cls, region: DeploymentRegion, rng: np.random.Generator):
        return cls(x=rng.uniform(0.0, region.width), y=rng.uniform(0.0, region.depth))


@dataclass(frozen=True, eq=False)
class ScattererSet:
    """Realized scatterers: 3-D positions plus circular Gaussian gains."""

    positions: np.ndarray  # (S, 3)
    gains: np.ndarray  # (S,) complex
    path_loss_const: float
    wavelength: float

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        if pos.size == 0:
            pos = pos.reshape(0, 3)
        if pos.shape[0] != gains.shape[0]:
            raise ValueError("one gain per scatterer required")
        if self.path_loss_const <= 0 or self.wavelength <= 0:
            raise ValueError("path loss constant and wavelength must be positive")
        pos = pos.copy()
        gains = gains.copy()
        pos.flags.writeable = False
        gains.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "gains", gains)

    @property
    def count(self) -> int:
        return self.gains.shape[0]

    @classmethod
    def draw(cls, count, region, rng, gain_variance=1.0, path_loss_const=None,
             wavelength=0.005):
        """Scatterers uniform over the room volume, gains CN(0, gain_variance).

        The draw order (positions then gains) is fixed so equal seeds give
        equal sets.
        """
        if count < 0:
            raise ValueError("scatterer count must be nonnegative")
        if count > 0 and gain_variance <= 0:
            raise ValueError("gain variance must be positive")
        if path_loss_const is None:
            path_loss_const = free_space_reference(wavelength)
        pos = np.column_stack([
            rng.uniform(0.0, region.width, count),
            rng.uniform(0.0, region.depth, count),
            rng.uniform(0.0, region.height, count),
        ])
        scale = np.sqrt(gain_variance / 2.0)
        gains = scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
        return cls(positions=pos, gains=gains, path_loss_const=path_loss_const,
                   wavelength=wavelength)


def visibility_vector(n_pas, block_prob=0.0, rng=None) -> np.ndarray:
    """Binary LoS mask; all-ones unless independent blocking is requested."""
    if block_prob == 0.0 or rng is None:
        return np.ones(n_pas, dtype=np.int64)
    return (rng.uniform(size=n_pas) >= block_prob).astype(np.int64)


def _check_visibility(vis, n_pas):
    vis = np.asarray(vis)
    if vis.shape != (n_pas,):
        raise ValueError("visibility vector length must match the PA count")
    if not np.isin(vis, (0, 1)).all():
        raise ValueError("visibility entries must be binary")
    return vis.astype(float)


def los_component(ue: UePlacement, region: DeploymentRegion, visibility,
                  path_loss_const: float, wavelength: float) -> np.ndarray:
    """Masked spherical-wave LoS: v_n * sqrt(b0) * exp(-j 2 pi r_n / lambda) / r_n."""
    vis = _check_visibility(visibility, region.n_pas)
    r = np.linalg.norm(region.pa_positions - ue.position, axis=1)
    if np.any(r == 0.0):
        raise ValueError("UE coincides with a PA position")
    return vis * np.sqrt(path_loss_const) * np.exp(-2j * np.pi * r / wavelength) / r


def nlos_component(ue: UePlacement, scatterers: ScattererSet,
                   region: DeploymentRegion) -> np.ndarray:
    """Scattered sum sqrt(b0 / S) * sum_s gain_s * a_s over spherical responses.

    An empty scatterer set contributes exactly zero.
    """
    n = region.n_pas
    if scatterers.count == 0:
        return np.zeros(n, dtype=complex)
    d = np.linalg.norm(
        scatterers.positions[:, np.newaxis, :] - region.pa_positions[np.newaxis, :, :],
        axis=2,
    )  # (S, N)
    if np.any(d == 0.0):
        raise ValueError("scatterer coincides with a PA position")
    responses = np.exp(-2j * np.pi * d / scatterers.wavelength) / d
    weighted = scatterers.gains[:, np.newaxis] * responses
    return np.sqrt(scatterers.path_loss_const / scatterers.count) * weighted.sum(axis=0)


def sample_channel(region: DeploymentRegion, ue: UePlacement, scatterer_count,
                   visibility, rng, *, gain_variance=1.0, path_loss_const=None,
                   wavelength=0.005) -> np.ndarray:
    """One channel realization: LoS plus a freshly drawn scattered component.

    ``rng`` may be an integer seed or a numpy Generator; equal seeds yield
    identical vectors.
    """
    rng = np.random.default_rng(rng)
    if path_loss_const is None:
        path_loss_const = free_space_reference(wavelength)
    scat = ScattererSet.draw(scatterer_count, region, rng,
                             gain_variance=gain_variance,
                             path_loss_const=path_loss_const,
                             wavelength=wavelength)
    return (
        los_component(ue, region, visibility, path_loss_const, wavelength)
        + nlos_component(ue, scat, region)
    )
