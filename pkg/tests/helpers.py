"""Random operators for tests, drawn from an explicit numpy Generator."""
import numpy as np

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def ginibre(rng, rows, cols=None):
    cols = rows if cols is None else cols
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_hermitian(rng, d, scale=1.0):
    G = ginibre(rng, d)
    return scale * (G + G.conj().T) / 2


def random_density(rng, d, rank=None):
    G = ginibre(rng, d, d if rank is None else rank)
    R = G @ G.conj().T
    return R / np.trace(R).real


def random_unit_vector(rng, d):
    v = ginibre(rng, d, 1)[:, 0]
    return v / np.linalg.norm(v)


def random_unitary(rng, d):
    Q, R = np.linalg.qr(ginibre(rng, d))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_projector(rng, d, rank):
    Q = random_unitary(rng, d)[:, :rank]
    return Q @ Q.conj().T


def random_kraus(rng, d, k):
    """``k`` blocks cut from a random isometry, so sum V^* V = I."""
    W = random_unitary(rng, k * d)[:, :d]
    return [W[i * d:(i + 1) * d, :] for i in range(k)]


def depolarizing(p):
    return [np.sqrt(1 - 3 * p / 4) * np.eye(2)] + [np.sqrt(p / 4) * P for P in (PAULI_X, PAULI_Y, PAULI_Z)]


def dephasing():
    return [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
