"""Exact joint and conditional outcome probabilities of (rotated) F and G on the two wings."""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np
import pandas as pd

from config import HARDY_PROBABILITY, ROTATION_TOLERANCE, TOLERANCE, spawn_generators
from dfs_states import Observable, make_eta, observable
from errors import ArgumentError, UndefinedConditionalError
from qcore import Outcome, Unitary2, Wing, haar_su2

log = logging.getLogger(__name__)

OUTCOMES = (Outcome.MINUS, Outcome.PLUS, Outcome.NULL)

HARDY_EXPECTED = {
    "P(F_A=1,F_B=1)": 0.0,
    "P(F_A=1|G_B=1)": 1.0,
    "P(F_B=1|G_A=1)": 1.0,
    "P(G_A=1,G_B=1)": HARDY_PROBABILITY,
}


@dataclass(frozen=True)
class LocalRotation:
    """A rotation U of one wing's setup; acts on an observable as U on each of its four qubits."""

    u: Unitary2
    wing: Wing

    def __post_init__(self):
        if self.wing is Wing.ALL:
            raise ArgumentError("a local rotation belongs to Alice or Bob")

    def act(self, obs):
        return obs.rotated(self.u)


@dataclass(frozen=True, eq=False)
class Setting:
    observable: Observable
    rotation: Unitary2 = None

    @classmethod
    def of(cls, label, rotation=None):
        return cls(observable(label), rotation)

    @property
    def label(self):
        return self.observable.label

    def effective(self):
        """The observable actually measured, after the setup rotation."""
        return self._rotated

    @cached_property
    def _rotated(self):
        if self.rotation is None:
            return self.observable
        return self.observable.rotated(self.rotation)


@dataclass(frozen=True)
class Event:
    wing: Wing
    setting: Setting
    outcome: Outcome

    def __str__(self):
        side = "A" if self.wing is Wing.ALICE else "B"
        return f"{self.setting.label}_{side}={self.outcome.label}"


def _wing_matrix(state):
    if state.n_qubits != 8:
        raise ArgumentError(f"two-wing probabilities need an 8-qubit state, got {state.n_qubits}")
    return state.amplitudes.reshape(16, 16)


def _projector(setting, outcome):
    return setting.effective().projector(outcome)


def event_probability(state, *events):
    """Probability that all events occur; at most one event per wing."""
    per_wing = {}
    for event in events:
        if event.wing in per_wing:
            raise ArgumentError(f"two events on the {event.wing.value} wing")
        if event.wing is Wing.ALL:
            raise ArgumentError("events belong to Alice or Bob")
        per_wing[event.wing] = event
    m = _wing_matrix(state)
    pa, pb = (
        _projector(per_wing[w].setting, per_wing[w].outcome) if w in per_wing else np.eye(16)
        for w in (Wing.ALICE, Wing.BOB)
    )
    # (Pa (x) Pb) vec(M) = vec(Pa M Pb^T) for row-major vec
    return float(np.linalg.norm(pa @ m @ pb.T) ** 2)


def joint_probability(state, a, b, outcome_a, outcome_b):
    return event_probability(
        state,
        Event(Wing.ALICE, a, Outcome(outcome_a)),
        Event(Wing.BOB, b, Outcome(outcome_b)),
    )


def joint_table(state, a, b):
    """All nine outcome combinations, Alice's outcome as rows and Bob's as columns."""
    m = _wing_matrix(state)
    ea, eb = a.effective(), b.effective()
    pa = {o: ea.projector(o) for o in OUTCOMES}
    pb = {o: eb.projector(o) for o in OUTCOMES}
    rows = [
        {"alice": oa.label, "bob": ob.label, "p": float(np.linalg.norm(pa[oa] @ m @ pb[ob].T) ** 2)}
        for oa, ob in product(OUTCOMES, OUTCOMES)
    ]
    return pd.DataFrame(rows).pivot_table(index="alice", columns="bob", values="p", aggfunc="sum")


def marginal(state, wing, setting):
    return {o: event_probability(state, Event(wing, setting, o)) for o in OUTCOMES}


def conditional_probability(state, target, given, tol=TOLERANCE):
    """P(target | given) for events on opposite wings."""
    p_given = event_probability(state, given)
    if p_given <= tol:
        raise UndefinedConditionalError(p_given, str(given))
    return event_probability(state, target, given) / p_given


def hardy_quantities(state, f_a, g_a, f_b, g_b):
    """The four probabilities of the argument, keyed like HARDY_EXPECTED."""
    plus = Outcome.PLUS
    return {
        "P(F_A=1,F_B=1)": joint_probability(state, f_a, f_b, plus, plus),
        "P(F_A=1|G_B=1)": conditional_probability(
            state, Event(Wing.ALICE, f_a, plus), Event(Wing.BOB, g_b, plus)
        ),
        "P(F_B=1|G_A=1)": conditional_probability(
            state, Event(Wing.BOB, f_b, plus), Event(Wing.ALICE, g_a, plus)
        ),
        "P(G_A=1,G_B=1)": joint_probability(state, g_a, g_b, plus, plus),
    }


####################################
# Rotation suite
####################################
@dataclass
class CorrelationReport:
    n_samples: int
    identity_values: dict
    samples: pd.DataFrame
    max_deviation: dict = field(default_factory=dict)
    spread: dict = field(default_factory=dict)
    max_null_probability: float = 0.0
    max_completeness_error: float = 0.0
    max_signalling: float = 0.0

    def identity_deviation(self):
        return {k: abs(v - HARDY_EXPECTED[k]) for k, v in self.identity_values.items()}

    def passed(self, tol=ROTATION_TOLERANCE, completeness_tol=TOLERANCE):
        worst = max([*self.max_deviation.values(), *self.identity_deviation().values()])
        spread = max(self.spread.values(), default=0.0)
        return (
            worst <= tol
            and spread < tol
            and self.max_null_probability <= tol
            and self.max_signalling <= tol
            and self.max_completeness_error <= completeness_tol
        )


def _sample_checks(state, settings):
    """Null probability, completeness and no-signalling errors for one settings tuple."""
    f_a, g_a, f_b, g_b = settings
    null = 0.0
    completeness = 0.0
    for a, b in product((f_a, g_a), (f_b, g_b)):
        table = joint_table(state, a, b)
        completeness = max(completeness, abs(table.to_numpy().sum() - 1))
        null = max(null, table.loc["null"].sum(), table["null"].sum())
    signalling = 0.0
    sides = ((Wing.ALICE, (f_a, g_a), Wing.BOB, (f_b, g_b)), (Wing.BOB, (f_b, g_b), Wing.ALICE, (f_a, g_a)))
    for wing, own_settings, other_wing, other_settings in sides:
        for own, o in product(own_settings, (Outcome.MINUS, Outcome.PLUS)):
            # marginal of `own` computed while the other wing measures each of its settings
            values = [
                sum(event_probability(state, Event(wing, own, o), Event(other_wing, x, ob)) for ob in OUTCOMES)
                for x in other_settings
            ]
            signalling = max(signalling, abs(values[0] - values[1]))
    return null, completeness, signalling


def verify_correlation_suite(n_rotation_samples, seed, state=None):
    """Recompute the four probabilities under independent Haar rotations of all four setups."""
    state = make_eta() if state is None else state
    f, g = observable("F"), observable("G")
    identity = hardy_quantities(state, Setting(f), Setting(g), Setting(f), Setting(g))
    null, completeness, signalling = _sample_checks(state, (Setting(f), Setting(g), Setting(f), Setting(g)))

    rows = []
    for i, rng in enumerate(spawn_generators(seed, n_rotation_samples)):
        r_a, rr_a, r_b, rr_b = (haar_su2(rng) for _ in range(4))
        settings = (Setting(f, r_a), Setting(g, rr_a), Setting(f, r_b), Setting(g, rr_b))
        values = hardy_quantities(state, *settings)
        n, c, s = _sample_checks(state, settings)
        null, completeness, signalling = max(null, n), max(completeness, c), max(signalling, s)
        rows.append({"sample": i, **values})
        log.debug("rotation sample %d: %s", i, values)

    samples = pd.DataFrame(rows, columns=["sample", *HARDY_EXPECTED])
    report = CorrelationReport(
        n_samples=n_rotation_samples,
        identity_values=identity,
        samples=samples,
        max_null_probability=null,
        max_completeness_error=completeness,
        max_signalling=signalling,
    )
    for key, expected in HARDY_EXPECTED.items():
        column = samples[key]
        report.max_deviation[key] = float((column - expected).abs().max()) if len(column) else 0.0
        report.spread[key] = float(column.std(ddof=0)) if len(column) else 0.0
    log.info("correlation suite: %d rotation samples, max deviation %s", n_rotation_samples, report.max_deviation)
    return report
