import numpy as np
import pytest

from config import HARDY_PROBABILITY
from dfs_states import make_permuted_pair, make_psi0, make_psi1, PAIR_PERMUTATIONS
from errors import ArgumentError
from localmeas import (
    BAR,
    OutcomeWord,
    ProductBasisSpec,
    classification_table,
    classify_outcome,
    protocol_distribution,
    run_experiment,
    sample_wing,
    sample_wing_counts,
    word_distribution,
)
from qcore import Outcome, haar_su2


@pytest.mark.parametrize("protocol", ["F", "G", "H"])
def test_protocol_bases_are_orthonormal(protocol):
    assert ProductBasisSpec.for_protocol(protocol).is_orthonormal()


def test_shared_directions():
    assert ProductBasisSpec.for_protocol("F").shared_pairs() == [(1, 2), (3, 4)]
    assert ProductBasisSpec.for_protocol("H").shared_pairs() == [(1, 4), (2, 3)]


def test_word_split_for_phi_states(dfs_pair):
    phi0, phi1 = dfs_pair
    p0, p1 = word_distribution(phi0, "F"), word_distribution(phi1, "F")
    support0, support1 = np.flatnonzero(p0 > 1e-12), np.flatnonzero(p1 > 1e-12)
    assert len(support0) == 4 and len(support1) == 12
    np.testing.assert_allclose(p0[support0], 1 / 4, atol=1e-10)
    np.testing.assert_allclose(p1[support1], 1 / 12, atol=1e-10)
    assert set(support0).isdisjoint(support1)
    table = classification_table("F")
    assert (table[support0] == -1).all() and (table[support1] == 1).all()


@pytest.mark.parametrize("protocol", ["F", "G", "H"])
def test_classified_protocol_reproduces_projective_outcomes(protocol, rng):
    minus, plus = make_permuted_pair(PAIR_PERMUTATIONS[protocol])
    u = haar_su2(rng)
    assert protocol_distribution(minus, protocol)[Outcome.MINUS] == pytest.approx(1.0, abs=1e-10)
    assert protocol_distribution(plus, protocol, u)[Outcome.PLUS] == pytest.approx(1.0, abs=1e-10)


def test_g_protocol_on_superpositions(dfs_pair):
    phi0, _ = dfs_pair
    # |phi0> = (|psi0> + sqrt3 |psi1>)/2 in the G eigenbasis
    dist = protocol_distribution(phi0, "G")
    assert dist[Outcome.MINUS] == pytest.approx(1 / 4, abs=1e-10)
    assert dist[Outcome.PLUS] == pytest.approx(3 / 4, abs=1e-10)
    assert abs(make_psi0().overlap(make_psi1())) < 1e-15


def test_classification_counts():
    for protocol in ("F", "G", "H"):
        table = classification_table(protocol)
        assert (table == -1).sum() == 4
        assert (table == 1).sum() == 12
    assert classify_outcome(OutcomeWord.parse("0101"), "F") is Outcome.MINUS
    assert classify_outcome(OutcomeWord.parse("0011"), "F") is Outcome.PLUS


def test_outcome_word_labels():
    word = OutcomeWord.from_index(5)
    assert word.bits == (0, 1, 0, 1)
    assert word.index == 5
    assert word.label("F") == f"010{BAR}1{BAR}"
    with pytest.raises(ArgumentError):
        OutcomeWord((0, 1, 2, 0))


def test_sampled_words_match_the_exact_distribution(dfs_pair, rng):
    phi0, _ = dfs_pair
    shots = 100_000
    counts = sample_wing_counts(phi0, "F", None, shots, rng)
    support = np.flatnonzero(counts)
    assert len(support) == 4
    band = 5 * np.sqrt(shots * 0.25 * 0.75)
    assert np.all(np.abs(counts[support] - shots / 4) < band)
    assert sample_wing(phi0, "F", None, rng).index in support


def test_experiment_reproduces_the_argument():
    record = run_experiment(40_000, seed=3)
    assert record.ff_coincidences == 0
    assert record.alice_f_counterexamples == 0
    assert record.bob_f_counterexamples == 0
    assert record.passed()
    assert record.counts.sum() == 40_000
    assert record.word_counts.sum() == 40_000


def test_experiment_is_deterministic_given_the_seed():
    a = run_experiment(5_000, seed=9, batch_size=1_000)
    b = run_experiment(5_000, seed=9, batch_size=1_000)
    np.testing.assert_array_equal(a.counts, b.counts)
    assert a.summary() == b.summary()


def test_fixed_settings_policy():
    record = run_experiment(2_000, settings_policy="fixed", fixed_settings=("G", "G"), seed=4)
    assert record.counts[1, 1].sum() == 2_000
    freq = record.frequencies()
    assert freq.loc["GG"].sum() == pytest.approx(1.0)
    assert freq.loc["FF"].isna().all()


def test_single_round_record():
    record = run_experiment(1, seed=0)
    assert record.counts.sum() == 1
    assert record.summary()["rounds"] == 1


def test_experiment_argument_checks():
    with pytest.raises(ArgumentError):
        run_experiment(0)
    with pytest.raises(ArgumentError):
        run_experiment(10, settings_policy="adaptive")
    with pytest.raises(ArgumentError):
        run_experiment(10, rotations_policy="sometimes")
    with pytest.raises(ArgumentError):
        run_experiment(10, settings_policy="fixed", fixed_settings=("H", "G"))


def test_rotated_rounds_keep_the_perfect_correlations():
    record = run_experiment(5_000, rotations_policy="fresh-random-per-round", seed=5, batch_size=1_000)
    assert record.ff_coincidences == 0
    assert record.alice_f_counterexamples == 0
    assert record.bob_f_counterexamples == 0
    assert record.passed()


@pytest.mark.slow
def test_million_rounds():
    record = run_experiment(1_000_000, seed=20031107)
    gg = record.gg_statistic()
    assert abs(gg["frequency"] - HARDY_PROBABILITY) <= 5 * gg["standard_error"]
    assert record.ff_coincidences == 0
    assert record.alice_f_counterexamples == 0
    assert record.bob_f_counterexamples == 0


def test_phi1_words_do_not_depend_on_the_setup_rotation(dfs_pair, rng):
    _, phi1 = dfs_pair
    exact = word_distribution(phi1, "F")
    support = set(np.flatnonzero(exact > 1e-12))
    u = haar_su2(rng)
    np.testing.assert_allclose(word_distribution(phi1, "F", u), exact, atol=1e-12)
    shots = 6_000
    counts = sample_wing_counts(phi1, "F", u, shots, rng)
    assert set(np.flatnonzero(counts)) == support
    band = 5 * np.sqrt(shots * (1 / 12) * (11 / 12))
    assert np.all(np.abs(counts[sorted(support)] - shots / 12) < band)
    words = {sample_wing(phi1, "F", haar_su2(rng), rng).index for _ in range(200)}
    assert words <= support
