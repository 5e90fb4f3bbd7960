import warnings
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genprob.builtin import builtin_scenario
from genprob.calculus import (
    MixedOutcomeWarning,
    ResultRef,
    Scenario,
    ScenarioError,
    Situation,
    monte_carlo_check,
    outcome_probabilities,
    resolve_outcomes,
    situation_result_probability,
    validate_scenario,
)


def replicator(sizes, h=3):
    results, outcomes = [], []
    for k, n in enumerate(sizes):
        ids = [f"o{k}-r{j}" for j in range(n)]
        results += [ResultRef(r, "m") for r in ids]
        outcomes.append((f"o{k}", ids))
    return Scenario("gen-replicator", ["m"], [Situation("s", h, results)], outcomes)


def sleeping_beauty(n, h=3):
    tails = [ResultRef(f"T{j}", f"T{j}") for j in range(n)]
    return Scenario(
        "gen-sb",
        ["H0"] + [f"T{j}" for j in range(n)],
        [Situation("H", h, [ResultRef("H0", "H0")]), Situation("T", h, tails)],
        [("H", ["H0"]), ("T", [r.id for r in tails])],
    )


def codes(s):
    return {v.code for v in validate_scenario(s)}


def test_builtins_validate():
    assert validate_scenario(builtin_scenario("replicator")) == []
    assert validate_scenario(builtin_scenario("sleeping-beauty")) == []


def test_violations():
    s = builtin_scenario("replicator")
    short = Scenario(s.id, s.prestates, s.situations, [("cat-dead", ["cat-dead-1", "cat-dead-2"])])
    assert codes(short) == {"NON_TOTAL_PARTITION"}

    bad_pre = Scenario("x", ["m"], [Situation("s", 3, [ResultRef("r", "x")])], [("o", ["r"])])
    assert codes(bad_pre) == {"UNKNOWN_PRESTATE"}

    dup = Scenario(
        "x", ["m", "m"],
        [Situation("s", 3, [ResultRef("r", "m")]), Situation("s", 3, [ResultRef("r", "m")])],
        [("o", ["r"]), ("o", ["r", "zzz"])],
    )
    assert codes(dup) == {"DUPLICATE_ID", "UNKNOWN_RESULT", "OVERLAPPING_PARTITION"}

    empty = Scenario("x", [], [Situation("s", 0, [])], [("o", [])])
    assert codes(empty) == {"EMPTY_PRESTATES", "EMPTY_RESULTS", "NON_POSITIVE_ENTROPY", "EMPTY_OUTCOME"}
    assert codes(Scenario("x", ["m"], [], [])) == {"NO_SITUATIONS"}


def test_invalid_scenario_is_refused():
    s = Scenario("x", ["m"], [Situation("s", 3, [ResultRef("r", "x")])], [("o", ["r"])])
    with pytest.raises(ScenarioError) as exc:
        outcome_probabilities(s)
    assert exc.value.code == "UNKNOWN_PRESTATE"


def test_resolve_replicator():
    out = {o.id: o for o in resolve_outcomes(builtin_scenario("replicator"))}
    assert (out["cat-dead"].n_compression, out["cat-dead"].n_generators, out["cat-dead"].branch_factor) == (2, 1, 2)
    assert (out["cat-alive"].n_compression, out["cat-alive"].n_generators, out["cat-alive"].branch_factor) == (1, 1, 1)


def test_resolve_sleeping_beauty():
    out = {o.id: o for o in resolve_outcomes(builtin_scenario("sleeping-beauty"))}
    assert (out["T"].n_compression, out["T"].n_generators, out["T"].branch_factor) == (2, 2, 1)
    assert (out["H"].n_compression, out["H"].n_generators, out["H"].branch_factor) == (1, 1, 1)


def test_resolve_single():
    s = Scenario("one", ["m"], [Situation("s", 5, [ResultRef("r", "m")])], [("o", ["r"])])
    (o,) = resolve_outcomes(s)
    assert o.branch_factor == 1
    assert outcome_probabilities(s).outcome_probs == {"o": 1}


def test_situation_result_probability():
    sb = builtin_scenario("sleeping-beauty")
    assert situation_result_probability("H_Mon", sb.situation("H")) == 1
    assert situation_result_probability(ResultRef("T_Mon", "T_Mon"), sb.situation("T")) == F(1, 2)
    five = Situation("s", 3, [ResultRef(f"r{k}", "m") for k in range(5)])
    assert all(situation_result_probability(r, five) == F(1, 5) for r in five.results)
    with pytest.raises(ScenarioError) as exc:
        situation_result_probability("H_Mon", sb.situation("T"))
    assert exc.value.code == "RESULT_NOT_IN_SITUATION"


def test_replicator_table():
    t = outcome_probabilities(builtin_scenario("replicator"))
    assert t.outcome_probs == {"cat-dead": F(2, 3), "cat-alive": F(1, 3)}
    assert t.result_given_outcome == {"cat-dead-1": F(1, 3), "cat-dead-2": F(1, 3), "cat-alive": F(1, 3)}
    # weights 2*2^0 + 1*2^0 measured from the minimum entropy
    assert t.Z == 3


def test_sleeping_beauty_table():
    t = outcome_probabilities(builtin_scenario("sleeping-beauty"))
    assert t.outcome_probs == {"H": F(1, 2), "T": F(1, 2)}
    assert t.result_given_outcome == {"H_Mon": F(1, 2), "T_Mon": F(1, 4), "T_Tue": F(1, 4)}
    assert t.result_given_situation == {("H_Mon", "H"): 1, ("T_Mon", "T"): F(1, 2), ("T_Tue", "T"): F(1, 2)}


def test_unequal_entropies():
    s = Scenario(
        "two", ["m"],
        [Situation("a", 3, [ResultRef("ra", "m")]), Situation("b", 4, [ResultRef("rb", "m")])],
        [("oa", ["ra"]), ("ob", ["rb"])],
    )
    t = outcome_probabilities(s)
    assert t.outcome_probs == {"oa": F(2, 3), "ob": F(1, 3)}
    # the same ratio as the raw weights 2^-3 / (2^-3 + 2^-4)
    assert t.outcome_probs["oa"] == F(1, 8) / (F(1, 8) + F(1, 16))


def test_non_integral_entropy():
    s = Scenario("q", ["m"], [Situation("s", F(7, 2), [ResultRef("r", "m")])], [("o", ["r"])])
    with pytest.raises(ScenarioError) as exc:
        outcome_probabilities(s)
    assert exc.value.code == "NON_INTEGRAL_ENTROPY"


def test_mixed_outcome_uses_minimal_entropy_situation():
    s = Scenario(
        "mix", ["m"],
        [Situation("b", 5, [ResultRef("r2", "m"), ResultRef("r3", "m")]),
         Situation("a", 3, [ResultRef("r1", "m")])],
        [("o", ["r1", "r2"]), ("p", ["r3"])],
    )
    with pytest.warns(MixedOutcomeWarning):
        (o, p) = resolve_outcomes(s)
    assert (o.compression_situation, o.n_compression, o.entropy_bits) == ("a", 1, 3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MixedOutcomeWarning)
        t = outcome_probabilities(s)
    # weights 1*2^0 and 1*2^-2
    assert t.outcome_probs == {"o": F(4, 5), "p": F(1, 5)}
    assert "r2" not in t.result_given_outcome
    assert t.result_given_situation[("r2", "b")] == F(1, 2)


def test_equal_entropy_tie_breaks_on_situation_id():
    s = Scenario(
        "tie", ["m"],
        [Situation("z", 3, [ResultRef("r1", "m")]), Situation("a", 3, [ResultRef("r2", "m")])],
        [("o", ["r1", "r2"])],
    )
    with pytest.warns(MixedOutcomeWarning):
        (o,) = resolve_outcomes(s)
    assert o.compression_situation == "a"


def _table_invariants(s, t):
    assert sum(t.outcome_probs.values()) == 1
    for o in resolve_outcomes(s):
        assert sum(t.result_given_outcome[r.id] for r in o.compression_results) == t.outcome_probs[o.id]
    for sit in s.situations:
        assert sum(t.result_given_situation[(r.id, sit.id)] for r in sit.results) == 1


def brute_force_formula(sizes):
    """Direct evaluation of the outcome and result formulas for one situation, one prestate."""
    h = 3
    weight = [F(n, 1) * F(1, 2**h) for n in sizes]  # B = n / 1
    z = sum(weight)
    p_o = [w / z for w in weight]
    return p_o, [p / n for p, n in zip(p_o, sizes)]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 10), min_size=1, max_size=6), st.integers(1, 40))
def test_generalized_replicator(sizes, h):
    s = replicator(sizes, h)
    t = outcome_probabilities(s)
    p_o, p_r = brute_force_formula(sizes)
    total = sum(sizes)
    for k, n in enumerate(sizes):
        assert t.outcome_probs[f"o{k}"] == F(n, total) == p_o[k]
        for j in range(n):
            assert t.result_given_outcome[f"o{k}-r{j}"] == F(1, total) == p_r[k]
    _table_invariants(s, t)


@pytest.mark.parametrize("n", range(1, 9))
def test_generalized_sleeping_beauty(n):
    s = sleeping_beauty(n)
    t = outcome_probabilities(s)
    assert t.outcome_probs["H"] == F(1, 2)
    assert all(t.result_given_outcome[f"T{j}"] == F(1, 2 * n) for j in range(n))
    _table_invariants(s, t)


@pytest.mark.parametrize("c", [1, 5, 14])
@pytest.mark.parametrize("name", ["replicator", "sleeping-beauty"])
def test_offset_invariance(name, c):
    s = builtin_scenario(name)
    assert outcome_probabilities(s.with_offset(c)) == outcome_probabilities(s)


def test_monte_carlo_converges():
    for name in ("replicator", "sleeping-beauty"):
        s = builtin_scenario(name)
        exact = outcome_probabilities(s).result_given_outcome
        freq = monte_carlo_check(s, 100_000, seed=7)
        assert max(abs(freq[r] - float(p)) for r, p in exact.items()) < 0.01


def test_monte_carlo_single_sample_and_determinism():
    s = builtin_scenario("sleeping-beauty")
    freq = monte_carlo_check(s, 1, seed=3)
    assert sorted(freq.values()) == [0.0, 0.0, 1.0]
    assert monte_carlo_check(s, 5000, seed=11) == monte_carlo_check(s, 5000, seed=11)
    with pytest.raises(ValueError):
        monte_carlo_check(s, 0, seed=1)
