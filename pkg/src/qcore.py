"""Dense state-vector and density-matrix primitives for up to eight qubits.

Basis-index convention: qubit 1 is the most significant bit of the index, so
the ket |q1 q2 q3 q4> has index int("q1q2q3q4", 2). Qubit positions in every
public function are 1-based, as in the kets they describe.
"""

import logging
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import reduce

import numpy as np
import scipy.linalg

from config import MAX_QUBITS, TOLERANCE, as_generator, resolve_tol
from errors import ArgumentError, NormalizationError, SizeError

log = logging.getLogger(__name__)


class Wing(Enum):
    ALL = "all"
    ALICE = "alice"
    BOB = "bob"


class Outcome(IntEnum):
    MINUS = -1
    NULL = 0
    PLUS = 1

    @property
    def label(self):
        return {-1: "-1", 0: "null", 1: "+1"}[int(self)]


def _qubit_count(dim):
    n = int(dim).bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise ArgumentError(f"dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise SizeError(f"{n} qubits exceed the supported maximum of {MAX_QUBITS}")
    return n


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Normalized pure state; the amplitude array is stored read-only."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        _qubit_count(amps.size)
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > TOLERANCE:
            raise NormalizationError(f"state norm is {norm!r}, expected 1")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize=False):
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise NormalizationError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(amps)

    @property
    def n_qubits(self):
        return _qubit_count(self.amplitudes.size)

    @property
    def dim(self):
        return self.amplitudes.size

    def overlap(self, other):
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, _vector(other)))

    def distance(self, other):
        return float(np.linalg.norm(self.amplitudes - _vector(other)))

    def density(self):
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self):
        return f"QuantumState(n_qubits={self.n_qubits})"


@dataclass(frozen=True, eq=False)
class Unitary2:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (2, 2):
            raise ArgumentError(f"expected a 2x2 matrix, got shape {m.shape}")
        if not np.allclose(m.conj().T @ m, np.eye(2), atol=TOLERANCE, rtol=0):
            raise NormalizationError("matrix is not unitary")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ArgumentError(f"density matrix must be square, got shape {m.shape}")
        _qubit_count(m.shape[0])
        if not np.allclose(m, m.conj().T, atol=TOLERANCE, rtol=0):
            raise NormalizationError("density matrix is not Hermitian")
        trace = np.trace(m).real
        if abs(trace - 1) > TOLERANCE:
            raise NormalizationError(f"density matrix trace is {trace!r}, expected 1")
        if np.linalg.eigvalsh(m).min() < -TOLERANCE:
            raise NormalizationError("density matrix has a negative eigenvalue")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def n_qubits(self):
        return _qubit_count(self.matrix.shape[0])

    def spectrum(self):
        """Eigenvalues in decreasing order and the matching eigenvectors (as columns)."""
        values, vectors = np.linalg.eigh(self.matrix)
        order = np.argsort(values)[::-1]
        return values[order], vectors[:, order]

    def is_pure(self, tol=None):
        return abs(np.trace(self.matrix @ self.matrix).real - 1) < resolve_tol(tol)


def _vector(state):
    return state.amplitudes if isinstance(state, QuantumState) else np.asarray(state, dtype=complex)


def _matrix(u):
    return u.entries if isinstance(u, Unitary2) else np.asarray(u, dtype=complex)


####################################
# Construction
####################################
def basis_state(bits):
    """Computational-basis ket from a bit string such as "0101"."""
    bits = bits.replace(" ", "")
    if not bits or set(bits) - {"0", "1"}:
        raise ArgumentError(f"invalid bit string {bits!r}")
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2)] = 1
    return QuantumState(amps)


def state_from_kets(terms, scale=1.0):
    """Superposition of basis kets, given as {bit string: coefficient}, times ``scale``."""
    n = {len(bits) for bits in terms}
    if len(n) != 1:
        raise ArgumentError("all kets must have the same number of qubits")
    amps = np.zeros(2 ** n.pop(), dtype=complex)
    for bits, coefficient in terms.items():
        amps[int(bits, 2)] += coefficient
    return QuantumState(scale * amps)


def identity2():
    return Unitary2(np.eye(2))


def pauli(axis):
    return {
        "x": np.array([[0, 1], [1, 0]], dtype=complex),
        "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "z": np.array([[1, 0], [0, -1]], dtype=complex),
    }[axis]


def kron_power(m, k):
    return reduce(np.kron, [np.asarray(m, dtype=complex)] * k)


def kron_power_batch(ms, k):
    """Batched kron_power: ``ms`` has shape (batch, d, d)."""
    ms = np.asarray(ms, dtype=complex)
    out = ms
    for _ in range(k - 1):
        b, r, c = out.shape
        out = np.einsum("bij,bkl->bikjl", out, ms).reshape(b, r * ms.shape[1], c * ms.shape[2])
    return out


def collective_operator(op, n):
    """Sum over qubits of ``op`` acting on one qubit, identity elsewhere."""
    total = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for k in range(n):
        total += reduce(np.kron, [op if j == k else np.eye(2) for j in range(n)])
    return total


####################################
# Operations
####################################
def tensor(a, b):
    n = a.n_qubits + b.n_qubits
    if n > MAX_QUBITS:
        raise SizeError(f"tensor product of {n} qubits exceeds dimension 2^{MAX_QUBITS}")
    return QuantumState(np.kron(a.amplitudes, b.amplitudes))


def _check_permutation(perm, n):
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(1, n + 1)):
        raise ArgumentError(f"{perm} is not a permutation of 1..{n}")
    return perm


def permute_qubits(s, perm):
    """Reorder qubits: qubit k of the result is qubit ``perm[k-1]`` of ``s``."""
    n = s.n_qubits
    perm = _check_permutation(perm, n)
    t = s.amplitudes.reshape([2] * n).transpose([p - 1 for p in perm])
    return QuantumState(t.reshape(-1))


def inverse_permutation(perm):
    return [int(i) + 1 for i in np.argsort([p - 1 for p in perm])]


def swap(i, j, n=4):
    perm = list(range(1, n + 1))
    perm[i - 1], perm[j - 1] = perm[j - 1], perm[i - 1]
    return perm


def apply_collective(s, u, wing=Wing.ALL):
    """Apply U to every qubit of the chosen wing (qubits 1-4 or 5-8 of an 8-qubit state)."""
    n = s.n_qubits
    u = _matrix(u)
    if wing is Wing.ALL:
        if n == 8:
            u4 = kron_power(u, 4)
            m = s.amplitudes.reshape(16, 16)
            return QuantumState((u4 @ m @ u4.T).reshape(-1))
        return QuantumState(kron_power(u, n) @ s.amplitudes)
    if n != 8:
        raise ArgumentError(f"wing {wing.value} needs an 8-qubit state, got {n} qubits")
    u4 = kron_power(u, 4)
    m = s.amplitudes.reshape(16, 16)
    m = u4 @ m if wing is Wing.ALICE else m @ u4.T
    return QuantumState(m.reshape(-1))


def haar_su2(rng):
    """Haar-random element of SU(2).

    Hurwitz parametrization: a standard normal 4-vector normalized to the unit
    3-sphere is a uniform unit quaternion (a, b, c, d), mapped to
    [[a + ib, c + id], [-c + id, a - ib]]. ``rng`` is a seed or a Generator;
    the same seed always gives the same matrix.
    """
    return Unitary2(haar_su2_batch(rng, 1)[0])


def haar_su2_batch(rng, size):
    rng = as_generator(rng)
    q = rng.standard_normal((size, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    a, b, c, d = q.T
    out = np.empty((size, 2, 2), dtype=complex)
    out[:, 0, 0] = a + 1j * b
    out[:, 0, 1] = c + 1j * d
    out[:, 1, 0] = -c + 1j * d
    out[:, 1, 1] = a - 1j * b
    return out


def partial_trace(rho_or_state, keep):
    """Reduced density operator on the qubits in ``keep`` (1-based, kept in increasing order)."""
    keep = sorted({int(k) for k in keep})
    if not keep:
        raise ArgumentError("keep set is empty")
    n = rho_or_state.n_qubits
    if keep[0] < 1 or keep[-1] > n:
        raise ArgumentError(f"keep set {keep} is not a subset of 1..{n}")
    rest = [q for q in range(1, n + 1) if q not in keep]
    dk, dr = 2 ** len(keep), 2 ** len(rest)
    order = [q - 1 for q in keep + rest]

    if isinstance(rho_or_state, QuantumState):
        m = rho_or_state.amplitudes.reshape([2] * n).transpose(order).reshape(dk, dr)
        return DensityOperator(m @ m.conj().T)

    t = rho_or_state.matrix.reshape([2] * (2 * n))
    t = t.transpose(order + [n + i for i in order]).reshape(dk, dr, dk, dr)
    return DensityOperator(np.einsum("ajbj->ab", t))


def measure_projective(s, projectors, tol=None):
    """Born-rule distribution for a set of orthogonal projectors.

    ``projectors`` maps outcome labels to dense projectors. Each must be a
    Hermitian idempotent, pairwise orthogonal, with their sum at most the
    identity. The complement of their sum is reported under ``Outcome.NULL``.
    """
    tol = resolve_tol(tol)
    mats = {label: np.asarray(p, dtype=complex) for label, p in projectors.items()}
    dim = len(s.amplitudes)
    for label, p in mats.items():
        if p.shape != (dim, dim):
            raise ArgumentError(f"projector {label} has shape {p.shape}, state dimension is {dim}")
        if not np.allclose(p, p.conj().T, atol=tol, rtol=0) or not np.allclose(p @ p, p, atol=tol, rtol=0):
            raise ArgumentError(f"{label} is not a Hermitian idempotent")
    items = list(mats.items())
    for i, (la, pa) in enumerate(items):
        for lb, pb in items[i + 1:]:
            if np.abs(pa @ pb).max() > tol:
                raise ArgumentError(f"projectors {la} and {lb} are not orthogonal")
    total = sum(mats.values(), np.zeros((dim, dim), dtype=complex))
    if np.linalg.eigvalsh(total).max() > 1 + tol:
        raise ArgumentError("projectors sum to more than the identity")

    v = s.amplitudes
    dist = {label: max(0.0, float(np.vdot(v, p @ v).real)) for label, p in mats.items()}
    dist[Outcome.NULL] = max(0.0, 1.0 - sum(dist.values()))
    return dist


def fidelity(a, b):
    """Fidelity between pure states and/or density operators.

    Squared overlap for two pure states, <psi|rho|psi> when one is pure, and
    (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 for two mixed states.
    """
    if isinstance(a, QuantumState) and isinstance(b, QuantumState):
        return abs(a.overlap(b)) ** 2
    if isinstance(a, QuantumState):
        return float(np.vdot(a.amplitudes, b.matrix @ a.amplitudes).real)
    if isinstance(b, QuantumState):
        return fidelity(b, a)
    root = _psd_sqrt(a.matrix)
    inner = root @ b.matrix @ root
    values = scipy.linalg.eigvalsh((inner + inner.conj().T) / 2)
    return float(np.sum(np.sqrt(values[values > EIGEN_FLOOR])) ** 2)


# eigenvalues below this are rounding noise of a rank-deficient operator
EIGEN_FLOOR = 1e-12


def _psd_sqrt(m):
    values, vectors = scipy.linalg.eigh(m)
    values = np.where(values > EIGEN_FLOOR, values, 0.0)
    return (vectors * np.sqrt(values)) @ vectors.conj().T
