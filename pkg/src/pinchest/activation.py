"""PA activation matrices and the resulting observation matrices.

Three activation families:

- serial: identity, one PA per pilot slot
- s_matrix: binary (H + J) / 2 built from a Sylvester Hadamard matrix;
  invertible but not orthogonal, so its Gram matrix carries crosstalk
  between simultaneously active paths
- hadamard_ideal: the +/-1 Sylvester matrix itself, the textbook orthogonal
  baseline that binary on/off switching cannot realize

Matrices are kept in exact integer arithmetic until they are multiplied
into a complex observation matrix, so the Gram identities hold bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystemError

SERIAL = "serial"
S_MATRIX = "s_matrix"
HADAMARD_IDEAL = "hadamard_ideal"


def _require_power_of_two(n: int):
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"unsupported order {n}: construction needs a power of 2")


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ActivationMatrix:
    """N x N activation pattern with a declared entry alphabet and protocol tag."""

    matrix: np.ndarray  # int64, exact entries
    protocol: str
    alphabet: tuple[int, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.int64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("activation matrix must be square")
        if not np.isin(m, self.alphabet).all():
            raise ValueError(f"entries outside declared alphabet {self.alphabet}")
        if self.protocol == SERIAL and not np.array_equal(m, np.eye(m.shape[0], dtype=np.int64)):
            raise ValueError("serial activation must be the identity matrix")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def order(self) -> int:
        return self.matrix.shape[0]


def hadamard(n: int) -> ActivationMatrix:
    """Sylvester Hadamard matrix of order n (n a power of 2), entries +/-1."""
    _require_power_of_two(n)
    h = np.array([[1]], dtype=np.int64)
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]])
    return ActivationMatrix(h, HADAMARD_IDEAL, (-1, 1))


def s_matrix(n: int) -> ActivationMatrix:
    """Binary activation (H + J) / 2; invertible for every supported order."""
    _require_power_of_two(n)
    h = hadamard(n).matrix
    s = (h + np.ones((n, n), dtype=np.int64)) // 2
    return ActivationMatrix(s, S_MATRIX, (0, 1))


def serial_activation(n: int) -> ActivationMatrix:
    """Identity activation: one PA per slot."""
    if n < 1:
        raise ValueError("order must be at least 1")
    return ActivationMatrix(np.eye(n, dtype=np.int64), SERIAL, (0, 1))


def gram_crosstalk(w: ActivationMatrix) -> np.ndarray:
    """Exact integer Gram matrix W^T W.

    Off-diagonal entries quantify crosstalk between measurement paths that
    share active PAs; the serial identity and the +/-1 Hadamard are the
    only crosstalk-free cases.
    """
    m = w.matrix
    return m.T @ m


def active_set(w: ActivationMatrix, slot: int) -> tuple[int, ...]:
    """PAs active in a pilot slot; slot and PA indices are 1-based."""
    if not 1 <= slot <= w.order:
        raise ValueError(f"slot {slot} out of range 1..{w.order}")
    row = w.matrix[slot - 1]
    return tuple(int(j) + 1 for j in np.nonzero(row)[0])


class ObservationMatrix:
    """Complex observation A = W diag(g), with its SVD cached.

    The cached factorization backs least-squares solves, closed-form MSE,
    and conditioning diagnostics without refactorizing per noise draw.
    """

    def __init__(self, matrix: np.ndarray):
        m = np.ascontiguousarray(np.asarray(matrix, dtype=complex))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("observation matrix must be square")
        if not np.all(np.isfinite(m)):
            raise ValueError("observation matrix entries must be finite")
        u, s, vh = np.linalg.svd(m)
        self.matrix = _freeze(m)
        self.singular_values = _freeze(s)  # descending
        self._u = _freeze(u)
        self._vh = _freeze(vh)

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    def pseudo_inverse(self, rel_cutoff: float = 0.0) -> np.ndarray:
        """V diag(1/s) U^H from the cached SVD.

        With the default zero cutoff a rank-deficient matrix raises; a
        positive relative cutoff instead truncates the small singular
        values (explicit regularization, off by default).
        """
        s = self.singular_values
        if s[0] == 0.0:
            raise SingularSystemError(0.0)
        keep = s > rel_cutoff * s[0]
        if rel_cutoff == 0.0 and not keep.all():
            raise SingularSystemError(s[-1])
        inv_s = np.zeros_like(s)
        inv_s[keep] = 1.0 / s[keep]
        return (self._vh.conj().T * inv_s) @ self._u.conj().T


def observation_matrix(w: ActivationMatrix, g: np.ndarray) -> ObservationMatrix:
    """A = W diag(g): right-multiplying scales column j of W by g_j."""
    g = np.asarray(g, dtype=complex)
    if g.ndim != 1 or g.size != w.order:
        raise ValueError(f"transfer vector length {g.size} does not match order {w.order}")
    return ObservationMatrix(w.matrix * g[np.newaxis, :])
