"""Least-squares channel estimation and its error/conditioning diagnostics.

The estimator minimizes ||y - A h||_2 through the SVD of the observation
matrix. The normal equations are never formed: squaring A would square its
condition number and misstate the noise amplification that the conditioning
diagnostics are meant to expose.

Closed forms implemented here:

- MSE of the LS estimate: noise_var * sum_i 1 / s_i^2 over singular values
- condition number: s_max / s_min (ratio of channel magnitudes for the
  diagonal single-pinch case)
- per-slot measurement SNR for uplink serial/parallel listening and for
  power-budgeted downlink probing
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activation import ActivationMatrix, ObservationMatrix
from .errors import SingularSystemError

DOWNLINK_SERIAL = "serial"
DOWNLINK_PARALLEL = "parallel"


def _as_observation(a) -> ObservationMatrix:
    return a if isinstance(a, ObservationMatrix) else ObservationMatrix(a)


def ls_estimate(a, y: np.ndarray, rel_cutoff: float = 0.0) -> np.ndarray:
    """Least-squares solve of y = A h + n via the SVD of A.

    Diagonal observations reduce to elementwise division. Rank deficiency
    raises SingularSystemError carrying the smallest singular value; a
    positive ``rel_cutoff`` truncates instead (off by default so that
    ill-conditioning shows up as noise amplification, not silent masking).
    """
    a = _as_observation(a)
    y = np.asarray(y, dtype=complex)
    if y.shape != (a.order,):
        raise ValueError(f"observation vector must have length {a.order}")
    return a.pseudo_inverse(rel_cutoff) @ y


def mse_closed_form(a, noise_var: float) -> float:
    """Trace of the LS error covariance: noise_var * sum_i 1 / s_i^2."""
    if noise_var < 0:
        raise ValueError("noise variance must be nonnegative")
    a = _as_observation(a)
    s = a.singular_values
    if s[-1] == 0.0:
        raise SingularSystemError(float(s[-1]))
    return float(noise_var * np.sum(1.0 / s**2))


def _is_diagonal(m: np.ndarray) -> bool:
    return not np.any(m[~np.eye(m.shape[0], dtype=bool)])


def condition_number(a) -> float:
    """s_max / s_min; for a diagonal matrix this is max|g| / min|g|.

    The diagonal case is computed from the magnitudes directly so that
    analytic ratios (pure pass-through decay, for instance) are preserved
    to machine precision. A singular matrix reports inf.
    """
    if isinstance(a, ActivationMatrix):
        a = a.matrix.astype(float)
    if not isinstance(a, ObservationMatrix):
        m = np.asarray(a, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or not np.any(m):
            raise ValueError("condition number needs a nonzero square matrix")
        if _is_diagonal(m):
            mags = np.abs(np.diag(m))
            lo = mags.min()
            return float(mags.max() / lo) if lo > 0 else np.inf
        a = ObservationMatrix(m)
    else:
        m = a.matrix
        if _is_diagonal(m):
            mags = np.abs(np.diag(m))
            lo = mags.min()
            return float(mags.max() / lo) if lo > 0 else np.inf
    s = a.singular_values
    return float(s[0] / s[-1]) if s[-1] > 0 else np.inf


def condition_bound_check(a, w, g, rel_slack: float = 1e-9) -> bool:
    """Verify kappa(A) >= kappa(G) / kappa(W) for A = W G.

    ``rel_slack`` absorbs floating-point rounding in the three factors.
    """
    ka = condition_number(a)
    kw = condition_number(w)
    kg = condition_number(g)
    if np.isinf(ka):
        return True
    return ka * (1.0 + rel_slack) >= kg / kw


def uplink_serial_snr(g_serial, h, noise_var, slot, ue_power=1.0) -> float:
    """Measurement SNR of the single active PA in a pilot slot (1-based)."""
    g_serial = np.asarray(g_serial)
    h = np.asarray(h)
    if not 1 <= slot <= g_serial.size:
        raise ValueError(f"slot {slot} out of range 1..{g_serial.size}")
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    i = slot - 1
    return float(ue_power * np.abs(g_serial[i]) ** 2 * np.abs(h[i]) ** 2 / noise_var)


def uplink_parallel_snr(g_parallel, h, noise_var, active_pas, ue_power=1.0) -> float:
    """Summed measurement SNR over the active set of a parallel slot.

    Uses the uncorrelated-path approximation: the expected slot power is the
    sum of the individual composite-channel powers of the active PAs
    (indices 1-based).
    """
    g_parallel = np.asarray(g_parallel)
    h = np.asarray(h)
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    idx = np.asarray(sorted(active_pas), dtype=int)
    if idx.size == 0 or idx.min() < 1 or idx.max() > g_parallel.size:
        raise ValueError("active set must contain 1-based PA indices")
    idx = idx - 1
    powers = np.abs(g_parallel[idx]) ** 2 * np.abs(h[idx]) ** 2
    return float(ue_power * powers.sum() / noise_var)


def downlink_snr(g_downlink, h, noise_var, pa, total_power, mode,
                 group_size=1) -> float:
    """Per-component downlink measurement SNR under a total power budget.

    Serial probing spends the whole budget on one component; parallel
    probing of ``group_size`` components dilutes it to total_power / G,
    so the parallel value is exactly the serial one divided by G.
    """
    if mode not in (DOWNLINK_SERIAL, DOWNLINK_PARALLEL):
        raise ValueError(f"mode must be '{DOWNLINK_SERIAL}' or '{DOWNLINK_PARALLEL}'")
    g_downlink = np.asarray(g_downlink)
    h = np.asarray(h)
    if not 1 <= pa <= g_downlink.size:
        raise ValueError(f"PA index {pa} out of range 1..{g_downlink.size}")
    if not 1 <= group_size <= g_downlink.size:
        raise ValueError("group size must lie in 1..N")
    if noise_var <= 0 or total_power <= 0:
        raise ValueError("noise variance and power budget must be positive")
    i = pa - 1
    serial = float(total_power * np.abs(g_downlink[i]) ** 2 * np.abs(h[i]) ** 2 / noise_var)
    if mode == DOWNLINK_SERIAL:
        return serial
    return serial / group_size


def nmse(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Normalized squared error ||estimate - truth||^2 / ||truth||^2."""
    estimate = np.asarray(estimate, dtype=complex)
    truth = np.asarray(truth, dtype=complex)
    if estimate.shape != truth.shape:
        raise ValueError("estimate and truth must have equal shape")
    denom = float(np.sum(np.abs(truth) ** 2))
    if denom == 0.0:
        raise ValueError("truth vector must be nonzero")
    return float(np.sum(np.abs(estimate - truth) ** 2) / denom)


@dataclass(frozen=True, eq=False)
class EstimationReport:
    """One estimation run: estimate, errors, prediction, and diagnostics."""

    estimate: np.ndarray
    squared_error: float
    predicted_mse: float
    condition_number: float
    smallest_singular_value: float
    slot_snrs: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.condition_number < 1.0:
            raise ValueError("condition number below 1 is impossible")


def estimation_report(a, y, truth, noise_var, slot_snrs=None) -> EstimationReport:
    """Run the LS estimator and bundle empirical and closed-form diagnostics."""
    a = _as_observation(a)
    estimate = ls_estimate(a, y)
    err = float(np.sum(np.abs(estimate - np.asarray(truth, dtype=complex)) ** 2))
    return EstimationReport(
        estimate=estimate,
        squared_error=err,
        predicted_mse=mse_closed_form(a, noise_var),
        condition_number=condition_number(a),
        smallest_singular_value=float(a.singular_values[-1]),
        slot_snrs=None if slot_snrs is None else tuple(float(x) for x in slot_snrs),
    )
