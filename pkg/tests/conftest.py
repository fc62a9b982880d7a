import numpy as np
import pytest

# Independent dense construction from explicit Pauli matrices, used as an
# oracle against twospin.operators.to_dense.
SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
ID = np.eye(2, dtype=complex)
SPINS = (SX, SY, SZ)
PAULI_X = 2 * SX

ACCEPTANCE_LINES = []


def dense_oracle(w, x, y, z):
    mat = w * np.kron(ID, ID)
    for i, s in enumerate(SPINS):
        mat = mat + x[i] * np.kron(s, ID) + y[i] * np.kron(ID, s)
        for j, t in enumerate(SPINS):
            mat = mat + z[i][j] * np.kron(s, t)
    return mat


def pure_projector(m):
    return ID / 2 + m[0] * SX + m[1] * SY + m[2] * SZ


def random_unit(rng, size=None):
    v = rng.normal(size=(3,) if size is None else (size, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
