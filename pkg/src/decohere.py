"""Collective decoherence as a random collective unitary, and the immunity checks built on it."""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import pandas as pd

from config import DEFAULT_DECOHERENCE_SAMPLES, IMMUNITY_TOLERANCE, REDUCED_EIGENVALUES, as_generator
from dfs_states import make_chi, make_eta, make_phi0, make_phi1
from errors import ArgumentError
from hardy import GOLDEN_ANGLE, symmetric_optimum
from qcore import (
    DensityOperator,
    QuantumState,
    basis_state,
    fidelity,
    haar_su2_batch,
    kron_power_batch,
    partial_trace,
    state_from_kets,
)

log = logging.getLogger(__name__)

CHUNK = 50


class Scope(Enum):
    GLOBAL = "global"
    PER_WING = "per-wing"


@dataclass(frozen=True)
class CollectiveChannel:
    """Average of U^{(x)k} rho U^{(x)k}+ over ``n_samples`` Haar draws of U.

    Per-wing scope draws independent U for the first and second half of the
    qubits (Alice's and Bob's environments).
    """

    n_samples: int = DEFAULT_DECOHERENCE_SAMPLES
    scope: Scope = Scope.GLOBAL

    def __post_init__(self):
        if self.n_samples < 1:
            raise ArgumentError(f"need at least one sample, got {self.n_samples}")
        object.__setattr__(self, "scope", Scope(self.scope))

    def check(self, n_qubits):
        if self.scope is Scope.PER_WING and (n_qubits < 2 or n_qubits % 2):
            raise ArgumentError(f"per-wing scope needs an even number of qubits, got {n_qubits}")


def _as_density(rho):
    return rho.density() if isinstance(rho, QuantumState) else rho


def _sample_unitaries(ch, n_qubits, rng):
    """Yield chunks of full-register unitaries, shape (chunk, d, d)."""
    remaining = ch.n_samples
    while remaining:
        size = min(CHUNK, remaining)
        remaining -= size
        if ch.scope is Scope.GLOBAL:
            yield kron_power_batch(haar_su2_batch(rng, size), n_qubits)
        else:
            half = n_qubits // 2
            left = kron_power_batch(haar_su2_batch(rng, size), half)
            right = kron_power_batch(haar_su2_batch(rng, size), half)
            d = left.shape[1]
            yield np.einsum("cij,ckl->cikjl", left, right).reshape(size, d * d, d * d)


def _conjugate(chunk, m):
    """V m V+ for every V in the chunk."""
    return chunk @ m @ chunk.conj().transpose(0, 2, 1)


def _hermitian(m):
    return DensityOperator((m + m.conj().T) / 2)


def apply_channel(rho, ch, seed):
    rho = _as_density(rho)
    ch.check(rho.n_qubits)
    rng = as_generator(seed)
    total = np.zeros_like(rho.matrix)
    for chunk in _sample_unitaries(ch, rho.n_qubits, rng):
        total += _conjugate(chunk, rho.matrix).sum(axis=0)
    return _hermitian(total / ch.n_samples)


@dataclass
class ImmunityReport:
    label: str
    n_samples: int
    scope: Scope
    min_fidelity: float
    mean_fidelity: float
    channel_fidelity: float

    @property
    def immune(self):
        return self.min_fidelity > 1 - IMMUNITY_TOLERANCE

    def as_row(self):
        return {
            "state": self.label,
            "scope": self.scope.value,
            "samples": self.n_samples,
            "min_fidelity": self.min_fidelity,
            "mean_fidelity": self.mean_fidelity,
            "immune": self.immune,
        }


def _chunk_statistics(target, chunk):
    """Per-sample fidelities and the summed channel output for one chunk."""
    if isinstance(target, QuantumState):
        v = target.amplitudes
        rotated = chunk @ v
        # |<psi|V|psi>|^2 and sum_c V|psi><psi|V+
        return np.abs(rotated @ v.conj()) ** 2, rotated.T @ rotated.conj()
    rotated = _conjugate(chunk, target.matrix)
    return np.array([fidelity(target, _hermitian(r)) for r in rotated]), rotated.sum(axis=0)


def immunity_report(target, ch, seed, label="state"):
    """Per-sample fidelity F(rho, V rho V+) statistics and the fidelity of the averaged channel output."""
    n_qubits = target.n_qubits
    ch.check(n_qubits)
    rng = as_generator(seed)
    fidelities = []
    total = 0
    for i, chunk in enumerate(_sample_unitaries(ch, n_qubits, rng)):
        values, summed = _chunk_statistics(target, chunk)
        fidelities.append(values)
        total = total + summed
        log.debug("%s: %d samples done", label, min((i + 1) * CHUNK, ch.n_samples))
    fidelities = np.concatenate(fidelities)
    report = ImmunityReport(
        label=label,
        n_samples=ch.n_samples,
        scope=ch.scope,
        min_fidelity=float(fidelities.min()),
        mean_fidelity=float(fidelities.mean()),
        channel_fidelity=fidelity(target, _hermitian(total / ch.n_samples)),
    )
    log.info("%s under %s collective noise: min fidelity %.12f", label, ch.scope.value, report.min_fidelity)
    return report


def immunity_table(reports):
    return pd.DataFrame([r.as_row() for r in reports])


####################################
# States under test
####################################
def mixed_dfs_state():
    """Equal incoherent mixture of |phi0> and |phi1>."""
    return DensityOperator((make_phi0().density().matrix + make_phi1().density().matrix) / 2)


def reduced_state():
    """One wing's state rho = tr_B |eta><eta|."""
    return partial_trace(make_eta(), keep=[1, 2, 3, 4])


@dataclass
class ReducedSpectrum:
    eigenvalues: np.ndarray
    expected: tuple
    eigenvalue_error: float
    eigenvector_error: float
    reconstruction_error: float


def reduced_spectrum(rho=None):
    """Two nonzero eigenvalues of rho with eigenvectors matched against |chi+>, |chi->.

    Eigenvectors are compared up to phase through 1 - |<chi|v>|.
    """
    rho = reduced_state() if rho is None else rho
    values, vectors = rho.spectrum()
    top = values[:2]
    chis = (make_chi(+1), make_chi(-1))
    vector_error = max(1 - abs(np.vdot(chi.amplitudes, vectors[:, k])) for k, chi in enumerate(chis))
    rebuilt = sum(lam * chi.density().matrix for lam, chi in zip(REDUCED_EIGENVALUES, chis))
    return ReducedSpectrum(
        eigenvalues=top,
        expected=REDUCED_EIGENVALUES,
        eigenvalue_error=float(np.max(np.abs(top - np.array(REDUCED_EIGENVALUES)))),
        eigenvector_error=float(vector_error),
        reconstruction_error=float(np.max(np.abs(rebuilt - rho.matrix))),
    )


def ghz_state(n=4):
    return state_from_kets({"0" * n: 1, "1" * n: 1}, scale=1 / np.sqrt(2))


def product_reference_state():
    return basis_state("0101")


def hardy_reduced_state():
    """One qubit of the two-qubit state reaching the optimal Hardy probability."""
    c = symmetric_optimum(GOLDEN_ANGLE).c
    return partial_trace(QuantumState(c.reshape(-1)), keep=[1])


def reference_states():
    """Label -> (state, channel) for the immune states and the fragile references."""
    per_wing = CollectiveChannel(scope=Scope.PER_WING)
    glob = CollectiveChannel()
    return {
        "phi0": (make_phi0(), glob),
        "phi1": (make_phi1(), glob),
        "rho_mixed": (mixed_dfs_state(), glob),
        "rho_reduced": (reduced_state(), glob),
        "eta": (make_eta(), per_wing),
        "ghz4": (ghz_state(4), glob),
        "product_0101": (product_reference_state(), glob),
        "hardy_2q_reduced": (hardy_reduced_state(), glob),
    }
