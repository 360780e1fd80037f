"""F and G measured by spin measurements on the individual qubits.

A wing measures F by measuring qubits 1 and 2 along one direction (sigma_z)
and qubits 3 and 4 along a perpendicular one (sigma_x). Of the 16 outcome
words, 4 only occur for |phi0> (outcome -1) and 12 only for |phi1> (outcome
+1). G is the same protocol with qubits 2 and 3 exchanged; H with qubits 2
and 4 exchanged.

Directions are angles theta in the x-z plane with single-qubit basis
|0_theta> = cos(theta)|0> + sin(theta)|1>, |1_theta> = sin(theta)|0> - cos(theta)|1>,
so sigma_z is theta = 0 and sigma_x is theta = pi/4 (|0_pi/4> is |0bar>).
"""

import logging
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import pandas as pd

from config import (
    DEFAULT_BATCH,
    HARDY_PROBABILITY,
    SIGMA_BAND,
    TOLERANCE,
    as_generator,
    seed_info,
    spawn_generators,
)
from dfs_states import PAIR_PERMUTATIONS, make_eta
from errors import ArgumentError
from qcore import Outcome, QuantumState, haar_su2_batch, kron_power, kron_power_batch

log = logging.getLogger(__name__)

BAR = "\u0304"  # combining macron
PROTOCOL_THETAS = {
    "F": (0.0, 0.0, np.pi / 4, np.pi / 4),
    "G": (0.0, np.pi / 4, 0.0, np.pi / 4),
    "H": (0.0, np.pi / 4, np.pi / 4, 0.0),
}
SETTING_LABELS = ("F", "G")


def qubit_basis(theta):
    """Columns are |0_theta> and |1_theta>."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [s, -c]])


def product_basis(thetas):
    """16x16 matrix whose column w is the product basis vector of outcome word w."""
    return reduce(np.kron, [qubit_basis(t) for t in thetas])


@dataclass(frozen=True)
class ProductBasisSpec:
    thetas: tuple
    protocol: str = "custom"

    @classmethod
    def for_protocol(cls, protocol):
        if protocol not in PROTOCOL_THETAS:
            raise ArgumentError(f"unknown protocol {protocol!r}")
        return cls(PROTOCOL_THETAS[protocol], protocol)

    def __post_init__(self):
        if len(self.thetas) != 4:
            raise ArgumentError("a product basis needs one angle per qubit")

    def matrix(self):
        return product_basis(self.thetas)

    def shared_pairs(self):
        """Qubit pairs (1-based) measured along the same direction."""
        t = np.mod(self.thetas, np.pi)
        return [(i + 1, j + 1) for i in range(4) for j in range(i + 1, 4) if np.isclose(t[i], t[j])]

    def is_orthonormal(self, tol=TOLERANCE):
        m = self.matrix()
        return np.allclose(m.T @ m, np.eye(16), atol=tol)


@dataclass(frozen=True)
class OutcomeWord:
    bits: tuple

    def __post_init__(self):
        if len(self.bits) != 4 or set(self.bits) - {0, 1}:
            raise ArgumentError(f"invalid outcome word {self.bits}")

    @classmethod
    def from_index(cls, index):
        return cls(tuple(int(b) for b in format(int(index), "04b")))

    @classmethod
    def parse(cls, text):
        return cls(tuple(int(ch) for ch in text if ch in "01"))

    @property
    def index(self):
        return int("".join(map(str, self.bits)), 2)

    def label(self, protocol="F"):
        """Bits of qubits measured along sigma_x carry a bar, e.g. 01 0̄1̄."""
        thetas = PROTOCOL_THETAS[protocol]
        return "".join(f"{b}{BAR}" if np.isclose(t, np.pi / 4) else str(b) for b, t in zip(self.bits, thetas))


ALL_WORDS = tuple(OutcomeWord.from_index(i) for i in range(16))


def classify_outcome(word, protocol):
    """-1 for the 4 words of the |phi0>-type state of the protocol, +1 for the other 12."""
    if protocol not in PAIR_PERMUTATIONS:
        raise ArgumentError(f"unknown protocol {protocol!r}")
    perm = PAIR_PERMUTATIONS[protocol]
    b = [word.bits[p - 1] for p in perm]
    return Outcome.MINUS if b[0] != b[1] and b[2] != b[3] else Outcome.PLUS


def classification_table(protocol):
    """Outcome (+1/-1) of each word index as an int array of length 16."""
    return np.array([int(classify_outcome(w, protocol)) for w in ALL_WORDS])


def _rotated_basis(protocol, rotation):
    b = product_basis(PROTOCOL_THETAS[protocol])
    if rotation is None:
        return b
    u = rotation.entries if hasattr(rotation, "entries") else np.asarray(rotation)
    return kron_power(u, 4) @ b


def word_distribution(state, protocol, rotation=None):
    """Exact probability of each of the 16 words for a 4-qubit state and a rotated setup."""
    if state.n_qubits != 4:
        raise ArgumentError(f"a wing has 4 qubits, got {state.n_qubits}")
    amps = _rotated_basis(protocol, rotation).conj().T @ state.amplitudes
    return np.abs(amps) ** 2


def protocol_distribution(state, protocol, rotation=None):
    """Distribution of the classified outcome, to compare with the projective F/G distribution."""
    probs = word_distribution(state, protocol, rotation)
    table = classification_table(protocol)
    return {o: float(probs[table == int(o)].sum()) for o in (Outcome.MINUS, Outcome.PLUS)}


def sample_wing(state, protocol, rotation, rng):
    probs = word_distribution(state, protocol, rotation)
    return ALL_WORDS[as_generator(rng).choice(16, p=probs / probs.sum())]


def sample_wing_counts(state, protocol, rotation, shots, rng):
    probs = word_distribution(state, protocol, rotation)
    return as_generator(rng).multinomial(shots, probs / probs.sum())


####################################
# Two-wing experiment
####################################
@dataclass
class ExperimentRecord:
    """Tallies of a simulated run.

    ``counts[sa, sb, oa, ob]`` counts rounds with settings sa/sb (0 = F, 1 = G)
    and outcomes oa/ob (0 = -1, 1 = +1); ``word_counts[sa, sb, wa, wb]`` keeps
    the raw outcome words.
    """

    n_rounds: int
    seed: object
    settings_policy: str
    rotations_policy: str
    batch_size: int
    counts: np.ndarray
    word_counts: np.ndarray
    fixed_settings: tuple = None
    extra: dict = field(default_factory=dict)

    def counts_frame(self):
        rows = [
            {
                "setting_a": SETTING_LABELS[sa],
                "setting_b": SETTING_LABELS[sb],
                "outcome_a": (-1, 1)[oa],
                "outcome_b": (-1, 1)[ob],
                "count": int(self.counts[sa, sb, oa, ob]),
            }
            for sa in range(2)
            for sb in range(2)
            for oa in range(2)
            for ob in range(2)
        ]
        return pd.DataFrame(rows)

    def frequencies(self):
        """Per-setting-pair outcome frequencies, one row per setting pair."""
        df = self.counts_frame()
        df["pair"] = df["setting_a"] + df["setting_b"]
        df["outcomes"] = df["outcome_a"].map("{:+d}".format) + "," + df["outcome_b"].map("{:+d}".format)
        table = df.pivot_table(index="pair", columns="outcomes", values="count", aggfunc="sum")
        return table.div(table.sum(axis=1).where(lambda s: s > 0), axis=0)

    @property
    def ff_coincidences(self):
        return int(self.counts[0, 0, 1, 1])

    @property
    def alice_f_counterexamples(self):
        """Rounds with G_B = +1 and F_A = -1."""
        return int(self.counts[0, 1, 0, 1])

    @property
    def bob_f_counterexamples(self):
        """Rounds with G_A = +1 and F_B = -1."""
        return int(self.counts[1, 0, 1, 0])

    def gg_statistic(self, expected=HARDY_PROBABILITY):
        n = int(self.counts[1, 1].sum())
        k = int(self.counts[1, 1, 1, 1])
        if n == 0:
            return {"rounds": 0, "hits": 0, "frequency": float("nan"), "standard_error": float("nan"), "z": 0.0}
        se = np.sqrt(expected * (1 - expected) / n)
        freq = k / n
        return {"rounds": n, "hits": k, "frequency": freq, "standard_error": float(se), "z": float((freq - expected) / se)}

    def passed(self, band=SIGMA_BAND):
        gg = self.gg_statistic()
        return (
            self.ff_coincidences == 0
            and self.alice_f_counterexamples == 0
            and self.bob_f_counterexamples == 0
            and abs(gg["z"]) <= band
        )

    def summary(self):
        return {
            "rounds": self.n_rounds,
            "seed": self.seed,
            "settings_policy": self.settings_policy,
            "rotations_policy": self.rotations_policy,
            "batch_size": self.batch_size,
            "ff_coincidences": self.ff_coincidences,
            "alice_f_counterexamples": self.alice_f_counterexamples,
            "bob_f_counterexamples": self.bob_f_counterexamples,
            "gg": self.gg_statistic(),
            "counts": self.counts_frame().to_dict(orient="records"),
        }


def _joint_distributions(state):
    """(2, 2, 256) table of outcome-pair probabilities for unrotated F/G settings."""
    m = state.amplitudes.reshape(16, 16)
    bases = [product_basis(PROTOCOL_THETAS[p]) for p in SETTING_LABELS]
    out = np.empty((2, 2, 256))
    for sa in range(2):
        for sb in range(2):
            out[sa, sb] = (np.abs(bases[sa].T @ m @ bases[sb]) ** 2).ravel()
    return out


def _rotated_distributions(state, sa, sb, ua, ub):
    m = state.amplitudes.reshape(16, 16)
    bases = np.stack([product_basis(PROTOCOL_THETAS[p]) for p in SETTING_LABELS])
    wa = kron_power_batch(ua, 4) @ bases[sa]
    wb = kron_power_batch(ub, 4) @ bases[sb]
    amps = wa.conj().transpose(0, 2, 1) @ m @ wb.conj()
    return (np.abs(amps) ** 2).reshape(len(sa), 256)


def _draw(probs, rng):
    cdf = np.cumsum(probs, axis=1)
    r = rng.random(len(probs))[:, None] * cdf[:, -1:]
    return np.minimum((cdf <= r).sum(axis=1), probs.shape[1] - 1)


def run_experiment(
    n_rounds,
    settings_policy="random",
    rotations_policy="identity",
    seed=0,
    fixed_settings=("G", "G"),
    batch_size=DEFAULT_BATCH,
    state=None,
):
    """Simulate rounds of: prepare |eta>, pick settings, measure all eight qubits, classify.

    Both wings are sampled jointly from the 256-outcome distribution. Rounds
    are processed in batches; batch k draws everything from the k-th child of
    ``SeedSequence(seed)``, so results do not depend on how batches are
    scheduled.
    """
    if n_rounds < 1:
        raise ArgumentError("n_rounds must be at least 1")
    if settings_policy not in ("random", "fixed"):
        raise ArgumentError(f"unknown settings policy {settings_policy!r}")
    if rotations_policy not in ("identity", "fresh-random-per-round"):
        raise ArgumentError(f"unknown rotations policy {rotations_policy!r}")
    if any(s not in SETTING_LABELS for s in fixed_settings):
        raise ArgumentError(f"fixed settings must be F or G, got {fixed_settings}")
    fixed = tuple(SETTING_LABELS.index(s) for s in fixed_settings)
    state = make_eta() if state is None else state
    if not isinstance(state, QuantumState) or state.n_qubits != 8:
        raise ArgumentError("the experiment needs an 8-qubit state")

    unrotated = _joint_distributions(state)
    classes = np.stack([(classification_table(p) + 1) // 2 for p in SETTING_LABELS])
    counts = np.zeros((2, 2, 2, 2), dtype=np.int64)
    word_counts = np.zeros((2, 2, 16, 16), dtype=np.int64)

    n_batches = -(-n_rounds // batch_size)
    for k, rng in enumerate(spawn_generators(seed, n_batches)):
        size = min(batch_size, n_rounds - k * batch_size)
        if settings_policy == "random":
            sa, sb = rng.integers(0, 2, size=(2, size))
        else:
            sa, sb = np.full(size, fixed[0]), np.full(size, fixed[1])
        if rotations_policy == "identity":
            probs = unrotated[sa, sb]
        else:
            ua, ub = haar_su2_batch(rng, size), haar_su2_batch(rng, size)
            probs = _rotated_distributions(state, sa, sb, ua, ub)
        idx = _draw(probs, rng)
        wa, wb = idx // 16, idx % 16
        oa, ob = classes[sa, wa], classes[sb, wb]
        np.add.at(counts, (sa, sb, oa, ob), 1)
        np.add.at(word_counts, (sa, sb, wa, wb), 1)
        log.debug("batch %d/%d: %d rounds", k + 1, n_batches, size)

    record = ExperimentRecord(
        n_rounds=n_rounds,
        seed=seed_info(seed),
        settings_policy=settings_policy,
        rotations_policy=rotations_policy,
        batch_size=batch_size,
        counts=counts,
        word_counts=word_counts,
        fixed_settings=tuple(fixed_settings) if settings_policy == "fixed" else None,
    )
    log.info("experiment: %d rounds, GG statistic %s", n_rounds, record.gg_statistic())
    return record
