"""The four-qubit singlet states, their permuted partners, |eta> and the observables F and G.

All states are built from their closed-form coefficients; nothing here is the
output of a numerical eigensolver.
"""

import logging
from dataclasses import dataclass

import numpy as np

from config import SUBSPACE_TOLERANCE, TOLERANCE, resolve_tol
from errors import ArgumentError, NormalizationError, SubspaceError
from qcore import (
    Outcome,
    QuantumState,
    apply_collective,
    permute_qubits,
    state_from_kets,
    swap,
    tensor,
)

log = logging.getLogger(__name__)

SQRT3 = np.sqrt(3)

# Qubit permutations producing the three distinct measurement pairs.
PAIR_PERMUTATIONS = {
    "F": [1, 2, 3, 4],
    "G": swap(2, 3),
    "H": swap(2, 4),
}


####################################
# States
####################################
def make_phi0():
    return state_from_kets({"0101": 1, "0110": -1, "1001": -1, "1010": 1}, scale=1 / 2)


def make_phi1():
    return state_from_kets(
        {"0011": 2, "0101": -1, "0110": -1, "1001": -1, "1010": -1, "1100": 2},
        scale=1 / (2 * SQRT3),
    )


def make_psi0():
    return permute_qubits(make_phi0(), swap(2, 3))


def make_psi1():
    return permute_qubits(make_phi1(), swap(2, 3))


def make_permuted_pair(perm):
    """(|phi0>, |phi1>) with their qubits reordered by ``perm``."""
    return permute_qubits(make_phi0(), perm), permute_qubits(make_phi1(), perm)


def make_singlet():
    return state_from_kets({"01": 1, "10": -1}, scale=1 / np.sqrt(2))


def make_eta():
    phi0, phi1 = make_phi0(), make_phi1()
    amps = (
        tensor(phi0, phi0).amplitudes
        + SQRT3 * tensor(phi0, phi1).amplitudes
        + SQRT3 * tensor(phi1, phi0).amplitudes
    ) / np.sqrt(7)
    return QuantumState(amps)


def make_chi(sign):
    """Eigenvectors of the reduced state of |eta>; ``sign`` is +1 or -1."""
    root = sign * np.sqrt(13)
    v = DfsVector((1 + root) / np.sqrt(26 + 2 * root), 2 * SQRT3 / np.sqrt(26 + 2 * root))
    return dfs_embed(v)


def expand_in_product_basis(state, left_pair, right_pair):
    """Coefficients c[i, j] of an 8-qubit state on |left_i right_j>."""
    c = np.empty((2, 2), dtype=complex)
    for i, a in enumerate(left_pair):
        for j, b in enumerate(right_pair):
            c[i, j] = tensor(a, b).overlap(state)
    return c


####################################
# Decoherence-free subspace coordinates
####################################
@dataclass(frozen=True)
class DfsVector:
    """Coefficients of |phi0> and |phi1>."""

    c0: complex
    c1: complex

    @classmethod
    def from_omega(cls, omega):
        return cls(np.cos(omega), np.sin(omega))

    @property
    def norm(self):
        return float(np.hypot(abs(self.c0), abs(self.c1)))


def dfs_embed(v):
    if abs(v.norm - 1) > TOLERANCE:
        raise NormalizationError(f"DFS vector norm is {v.norm!r}, expected 1")
    amps = v.c0 * make_phi0().amplitudes + v.c1 * make_phi1().amplitudes
    return QuantumState(amps)


def dfs_project(s, tol=SUBSPACE_TOLERANCE):
    if s.n_qubits != 4:
        raise ArgumentError(f"dfs_project needs a 4-qubit state, got {s.n_qubits}")
    phi0, phi1 = make_phi0(), make_phi1()
    c0, c1 = phi0.overlap(s), phi1.overlap(s)
    residual = np.linalg.norm(s.amplitudes - c0 * phi0.amplitudes - c1 * phi1.amplitudes)
    if residual > tol:
        raise SubspaceError(residual)
    return DfsVector(c0, c1)


####################################
# Observables
####################################
@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator kept as (eigenvalue, eigenvector) pairs.

    Eigenvalues are -1/+1; whatever the eigenvectors do not span is the null
    outcome.
    """

    eigenpairs: tuple
    label: str = "custom"

    def __post_init__(self):
        vectors = np.array([v.amplitudes for _, v in self.eigenpairs])
        gram = vectors.conj() @ vectors.T
        if not np.allclose(gram, np.eye(len(self.eigenpairs)), atol=TOLERANCE, rtol=0):
            raise ArgumentError(f"eigenvectors of {self.label} are not orthonormal")

    @property
    def n_qubits(self):
        return self.eigenpairs[0][1].n_qubits

    def eigenvector(self, outcome):
        for value, vector in self.eigenpairs:
            if value == int(outcome):
                return vector
        raise ArgumentError(f"{self.label} has no eigenvalue {int(outcome)}")

    def projector(self, outcome):
        dim = 2 ** self.n_qubits
        if outcome == Outcome.NULL:
            return np.eye(dim) - sum(self.projector(Outcome(int(v))) for v, _ in self.eigenpairs)
        v = self.eigenvector(outcome).amplitudes
        return np.outer(v, v.conj())

    def projectors(self):
        """Dense projectors of the +/-1 outcomes, keyed by Outcome."""
        return {Outcome(int(value)): np.outer(v.amplitudes, v.amplitudes.conj()) for value, v in self.eigenpairs}

    def matrix(self):
        return sum(value * np.outer(v.amplitudes, v.amplitudes.conj()) for value, v in self.eigenpairs)

    def rotated(self, u):
        """The observable measured by a setup rotated by U (U on each qubit of every eigenvector)."""
        pairs = tuple((value, apply_collective(v, u)) for value, v in self.eigenpairs)
        return Observable(pairs, self.label)


def make_observable(minus, plus, label="custom"):
    return Observable(((-1, minus), (1, plus)), label)


def make_F():
    return make_observable(make_phi0(), make_phi1(), "F")


def make_G():
    return make_observable(make_psi0(), make_psi1(), "G")


def make_H():
    phi0, phi1 = make_permuted_pair(PAIR_PERMUTATIONS["H"])
    return make_observable(phi0, phi1, "H")


def make_dfs_observable(alpha, label=None):
    """Observable with eigenvectors cos(a)|phi0> + sin(a)|phi1> (-1) and sin(a)|phi0> - cos(a)|phi1> (+1).

    alpha = pi/3 gives G exactly; alpha = 0 gives F with the sign of |phi1> flipped.
    """
    minus = dfs_embed(DfsVector(np.cos(alpha), np.sin(alpha)))
    plus = dfs_embed(DfsVector(np.sin(alpha), -np.cos(alpha)))
    return make_observable(minus, plus, label or f"dfs({alpha:.6g})")


OBSERVABLES = {"F": make_F, "G": make_G, "H": make_H}


def observable(label):
    try:
        return OBSERVABLES[label]()
    except KeyError:
        raise ArgumentError(f"unknown observable {label!r}; expected one of {sorted(OBSERVABLES)}") from None


def omega_of(state, tol=None):
    """Angle omega in [0, pi) with state = +-(cos w |phi0> + sin w |phi1>) for a real DFS state."""
    v = dfs_project(state)
    if abs(np.imag(v.c0)) > resolve_tol(tol) or abs(np.imag(v.c1)) > resolve_tol(tol):
        # strip a global phase first
        phase = np.exp(-1j * np.angle(v.c0 if abs(v.c0) > abs(v.c1) else v.c1))
        v = DfsVector(v.c0 * phase, v.c1 * phase)
    return float(np.arctan2(np.real(v.c1), np.real(v.c0)) % np.pi)
