import numpy as np
import pytest

from config import HARDY_PROBABILITY
from correlations import (
    HARDY_EXPECTED,
    Event,
    LocalRotation,
    Setting,
    conditional_probability,
    event_probability,
    hardy_quantities,
    joint_probability,
    joint_table,
    marginal,
    verify_correlation_suite,
)
from errors import ArgumentError, UndefinedConditionalError
from qcore import Outcome, Wing, basis_state, haar_su2, identity2


def test_hardy_quantities_without_rotation(eta, hardy_settings):
    values = hardy_quantities(eta, *hardy_settings)
    for key, expected in HARDY_EXPECTED.items():
        assert values[key] == pytest.approx(expected, abs=1e-10)


def test_hardy_quantities_with_fixed_rotations(eta, rng):
    f, g = Setting.of("F"), Setting.of("G")
    rotations = [haar_su2(rng) for _ in range(4)]
    settings = (Setting(f.observable, rotations[0]), Setting(g.observable, rotations[1]),
                Setting(f.observable, rotations[2]), Setting(g.observable, rotations[3]))
    values = hardy_quantities(eta, *settings)
    assert values["P(G_A=1,G_B=1)"] == pytest.approx(HARDY_PROBABILITY, abs=1e-9)
    assert values["P(F_A=1,F_B=1)"] == pytest.approx(0.0, abs=1e-9)


def test_joint_table_is_a_distribution_without_null(eta, hardy_settings):
    f_a, g_a, f_b, g_b = hardy_settings
    table = joint_table(eta, g_a, g_b)
    assert table.shape == (3, 3)
    assert table.to_numpy().sum() == pytest.approx(1.0)
    assert table.loc["null"].sum() < 1e-12
    assert table.loc["+1", "+1"] == pytest.approx(9 / 112)


def test_marginal_of_f(eta):
    m = marginal(eta, Wing.ALICE, Setting.of("F"))
    assert m[Outcome.PLUS] == pytest.approx(3 / 7)
    assert m[Outcome.MINUS] == pytest.approx(4 / 7)
    assert m[Outcome.NULL] < 1e-12


def test_conditioning_on_an_impossible_event(eta):
    f = Setting.of("F")
    with pytest.raises(UndefinedConditionalError) as info:
        conditional_probability(eta, Event(Wing.BOB, f, Outcome.PLUS), Event(Wing.ALICE, f, Outcome.NULL))
    assert info.value.probability < 1e-12


def test_event_argument_checks(eta):
    f = Setting.of("F")
    with pytest.raises(ArgumentError):
        event_probability(eta, Event(Wing.ALICE, f, Outcome.PLUS), Event(Wing.ALICE, f, Outcome.MINUS))
    with pytest.raises(ArgumentError):
        joint_probability(basis_state("0101"), f, f, 1, 1)
    with pytest.raises(ArgumentError):
        LocalRotation(haar_su2(1), Wing.ALL)


def test_local_rotation_acts_on_the_observable(rng):
    u = haar_su2(rng)
    rotated = LocalRotation(u, Wing.ALICE).act(Setting.of("F").observable)
    # DFS eigenvectors are invariant, so the rotated observable is F itself
    np.testing.assert_allclose(rotated.matrix(), Setting.of("F").observable.matrix(), atol=1e-12)


def test_rotation_suite_passes_and_is_reproducible():
    first = verify_correlation_suite(5, seed=11)
    second = verify_correlation_suite(5, seed=11)
    assert first.passed()
    assert len(first.samples) == 5
    assert first.samples.equals(second.samples)
    assert first.max_signalling < 1e-9
    assert first.max_completeness_error < 1e-9


def test_rotation_suite_with_no_rotations():
    report = verify_correlation_suite(0, seed=1)
    assert report.samples.empty
    assert report.passed()
    assert max(report.identity_deviation().values()) < 1e-10


@pytest.mark.slow
def test_rotation_suite_default_size():
    report = verify_correlation_suite(100, seed=2)
    assert report.passed()
    assert all(v < 1e-9 for v in report.max_deviation.values())


def test_g_correlation_and_the_symmetric_conditionals(eta, hardy_settings):
    f_a, g_a, f_b, g_b = hardy_settings
    plus = Outcome.PLUS
    assert event_probability(eta, Event(Wing.ALICE, g_a, plus)) == pytest.approx(9 / 28, abs=1e-12)
    p = conditional_probability(eta, Event(Wing.BOB, g_b, plus), Event(Wing.ALICE, g_a, plus))
    assert p == pytest.approx(1 / 4, abs=1e-12)
    alice_f = conditional_probability(eta, Event(Wing.ALICE, f_a, plus), Event(Wing.BOB, g_b, plus))
    bob_f = conditional_probability(eta, Event(Wing.BOB, f_b, plus), Event(Wing.ALICE, g_a, plus))
    assert alice_f == pytest.approx(bob_f, abs=1e-14)


def test_identity_rotation_setting_matches_the_bare_observable():
    f = Setting.of("F")
    rotated = Setting.of("F", identity2())
    np.testing.assert_allclose(rotated.effective().matrix(), f.effective().matrix(), atol=1e-15)
    assert LocalRotation(identity2(), Wing.ALICE).act(f.observable).label == "F"


def test_report_fails_on_an_unnormalized_table():
    report = verify_correlation_suite(0, seed=1)
    assert report.passed()
    report.max_completeness_error = 1e-3
    assert not report.passed()


def test_report_fails_when_values_vary_with_rotation():
    report = verify_correlation_suite(3, seed=1)
    assert report.passed()
    report.spread["P(G_A=1,G_B=1)"] = 1e-6
    assert not report.passed()
