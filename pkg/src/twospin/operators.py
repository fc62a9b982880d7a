"""Two-spin operator algebra in the spin-1/2 product basis.

Operators on the two-qubit space are stored as real coefficients of

    w I + sum_i x_i S_i (x) I + sum_i y_i I (x) S_i + sum_ij z_ij S_i (x) S_j

where ``S_i = sigma_i / 2`` are the spin-1/2 operators (eigenvalues +-1/2).
Dense matrices use the computational basis ``|uu>, |ud>, |du>, |dd>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-9

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
SPIN = PAULI / 2
I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)

# S_i (x) I, I (x) S_i and S_i (x) S_j as dense 4x4 matrices
_FIRST = np.array([np.kron(s, I2) for s in SPIN])
_SECOND = np.array([np.kron(I2, s) for s in SPIN])
_PRODUCT = np.array([[np.kron(a, b) for b in SPIN] for a in SPIN])


def unit_vector(v) -> np.ndarray:
    """Return ``v`` as a float 3-vector of unit norm.

    Vectors whose norm is within ``UNIT_TOL`` of one are renormalized; anything
    further away raises ``ValueError``.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValueError(f"expected a finite 3-vector, got {v!r}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"expected a unit vector, got norm {norm!r}")
    return v / norm


def _frozen(a, shape) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.shape != shape:
        raise ValueError(f"expected shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("operator coefficients must be finite")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TwoSpinOperator:
    """Hermitian two-spin operator held as real product-basis coefficients."""

    scalar: float
    first_local: np.ndarray
    second_local: np.ndarray
    correlation: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.scalar):
            raise ValueError("operator coefficients must be finite")
        object.__setattr__(self, "scalar", float(self.scalar))
        object.__setattr__(self, "first_local", _frozen(self.first_local, (3,)))
        object.__setattr__(self, "second_local", _frozen(self.second_local, (3,)))
        object.__setattr__(self, "correlation", _frozen(self.correlation, (3, 3)))

    def coefficients(self) -> np.ndarray:
        """All 16 coefficients as a flat vector (w, x, y, z row-major)."""
        return np.concatenate(
            [[self.scalar], self.first_local, self.second_local, self.correlation.ravel()]
        )

    def __add__(self, other: TwoSpinOperator) -> TwoSpinOperator:
        return TwoSpinOperator(
            self.scalar + other.scalar,
            self.first_local + other.first_local,
            self.second_local + other.second_local,
            self.correlation + other.correlation,
        )

    def __mul__(self, c: float) -> TwoSpinOperator:
        return TwoSpinOperator(
            c * self.scalar, c * self.first_local, c * self.second_local, c * self.correlation
        )

    __rmul__ = __mul__

    def allclose(self, other: TwoSpinOperator, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.coefficients(), other.coefficients(), rtol=0, atol=atol))

    def __repr__(self):
        return (
            f"TwoSpinOperator(scalar={self.scalar!r}, first_local={self.first_local.tolist()}, "
            f"second_local={self.second_local.tolist()}, correlation={self.correlation.tolist()})"
        )


def make_operator(scalar, first_local=(0, 0, 0), second_local=(0, 0, 0), correlation=None):
    if correlation is None:
        correlation = np.zeros((3, 3))
    return TwoSpinOperator(scalar, first_local, second_local, correlation)


def identity() -> TwoSpinOperator:
    return make_operator(1.0)


def to_dense(op: TwoSpinOperator) -> np.ndarray:
    return (
        op.scalar * I4
        + np.einsum("i,ijk->jk", op.first_local, _FIRST)
        + np.einsum("i,ijk->jk", op.second_local, _SECOND)
        + np.einsum("ab,abjk->jk", op.correlation, _PRODUCT)
    )


def from_dense(mat, atol: float = 1e-12) -> TwoSpinOperator:
    """Inverse of :func:`to_dense` for Hermitian 4x4 matrices."""
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {mat.shape}")
    if not np.allclose(mat, mat.conj().T, rtol=0, atol=atol):
        raise ValueError("matrix is not Hermitian")
    # Tr(S_i S_j) = delta_ij / 2 fixes the dual-basis normalizations below
    w = np.trace(mat).real / 4
    x = np.einsum("jk,ikj->i", mat, _FIRST).real
    y = np.einsum("jk,ikj->i", mat, _SECOND).real
    z = 4 * np.einsum("jk,abkj->ab", mat, _PRODUCT).real
    return TwoSpinOperator(w, x, y, z)


def partial_spin_flip(op: TwoSpinOperator) -> TwoSpinOperator:
    """Flip the second spin: S_i -> -S_i on the second factor only."""
    return TwoSpinOperator(op.scalar, op.first_local, -op.second_local, -op.correlation)


def partial_transpose(mat) -> np.ndarray:
    """Transpose the second tensor factor of a dense 4x4 matrix."""
    t = np.asarray(mat).reshape(2, 2, 2, 2)
    return t.transpose(0, 3, 2, 1).reshape(4, 4)


# pi rotation about y on the second qubit: exp(-i pi sigma_y / 2) = -i sigma_y
_FLIP_UNITARY = np.kron(I2, -1j * PAULI[1])


def spin_flip_via_transpose(mat) -> np.ndarray:
    """Partial spin flip realized as partial transpose plus a local y rotation."""
    return _FLIP_UNITARY @ partial_transpose(mat) @ _FLIP_UNITARY.conj().T


def parallel_state(m) -> TwoSpinOperator:
    """Density operator of two spins both pointing along ``m``."""
    m = unit_vector(m)
    return TwoSpinOperator(0.25, m / 2, m / 2, np.outer(m, m))


def antiparallel_state(m) -> TwoSpinOperator:
    """Density operator with the first spin along ``m`` and the second along ``-m``."""
    m = unit_vector(m)
    return TwoSpinOperator(0.25, m / 2, -m / 2, -np.outer(m, m))


def eigenvalues(op: TwoSpinOperator) -> np.ndarray:
    """Ascending spectrum from a dense Hermitian eigensolve."""
    return np.linalg.eigvalsh(to_dense(op))


def trace_pair(a: TwoSpinOperator, b: TwoSpinOperator) -> float:
    return float(np.trace(to_dense(a) @ to_dense(b)).real)


def product_expectation(op: TwoSpinOperator, m1, m2):
    """Tr[(rho(m1) (x) rho(m2)) op] for pure single-spin states, in coefficient form.

    ``m1`` and ``m2`` may be stacked with a leading batch shape ``(..., 3)``.
    """
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    return (
        op.scalar
        + 0.5 * (m1 @ op.first_local)
        + 0.5 * (m2 @ op.second_local)
        + 0.25 * np.einsum("...i,ij,...j->...", m1, op.correlation, m2)
    )


@dataclass(frozen=True)
class Rotation:
    """Rotation by ``angle`` radians about the unit vector ``axis``."""

    axis: tuple
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "axis", tuple(unit_vector(self.axis).tolist()))
        object.__setattr__(self, "angle", float(self.angle))

    @property
    def su2(self) -> np.ndarray:
        n = np.asarray(self.axis)
        half = self.angle / 2
        return np.cos(half) * I2 - 1j * np.sin(half) * np.einsum("i,ijk->jk", n, PAULI)

    @property
    def so3(self) -> np.ndarray:
        n = np.asarray(self.axis)
        k = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
        return np.eye(3) + np.sin(self.angle) * k + (1 - np.cos(self.angle)) * (k @ k)


def rotation_between(u, v) -> Rotation:
    """Some rotation taking unit vector ``u`` to unit vector ``v``."""
    u = unit_vector(u)
    v = unit_vector(v)
    cross = np.cross(u, v)
    s = np.linalg.norm(cross)
    c = float(np.clip(u @ v, -1.0, 1.0))
    if s > 1e-12:
        return Rotation(cross / s, np.arctan2(s, c))
    if c > 0:
        return Rotation((0.0, 0.0, 1.0), 0.0)
    # antipodal: any axis orthogonal to u
    trial = np.eye(3)[np.argmin(np.abs(u))]
    axis = np.cross(u, trial)
    return Rotation(axis / np.linalg.norm(axis), np.pi)


def rotate_operator(op: TwoSpinOperator, r: Rotation) -> TwoSpinOperator:
    """Conjugate by ``U (x) U`` where ``U`` is the SU(2) image of ``r``."""
    R = r.so3
    return TwoSpinOperator(
        op.scalar, R @ op.first_local, R @ op.second_local, R @ op.correlation @ R.T
    )
