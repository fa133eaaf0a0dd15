import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autorel.automata import (EPSILON, AutomatonError, BudgetExceeded, Class, Concat, Empty, Lit,
                              Nfa, Power, Star, Union, accepts, bisimulation_quotient, complement,
                              concat, contains_lazy, determinize, enumerate_upto, find_uncovered,
                              intersect, inverse_hom, is_empty, plus, random_nfa, regex_matches,
                              regex_to_nfa, relabel_hom, shortest_accepted, trim, union,
                              universal_preimage_member, universal_states, with_alphabet)
from oracles import language_upto, nfa_accepts, universal_preimage_bruteforce, words_upto

SIGMA = ("a", "b")


def regexes(sigma=SIGMA):
    leaves = st.one_of(st.sampled_from([Lit(a) for a in sigma]),
                       st.just(EPSILON), st.just(Empty()),
                       st.lists(st.sampled_from(sigma), min_size=1, max_size=2).map(Class))
    return st.recursive(leaves, lambda kids: st.one_of(
        st.lists(kids, min_size=2, max_size=3).map(Concat),
        st.lists(kids, min_size=2, max_size=3).map(Union),
        kids.map(Star),
        st.tuples(kids, st.integers(0, 2)).map(lambda t: Power(*t)),
    ), max_leaves=6)


def nfas(max_states=3, sigma=SIGMA):
    return st.builds(lambda seed, n: random_nfa(random.Random(seed), n, sigma),
                     st.integers(0, 10 ** 6), st.integers(1, max_states))


@settings(max_examples=150, deadline=None)
@given(regexes(), st.lists(st.sampled_from(SIGMA), max_size=5))
def test_position_automaton_matches_direct_matcher(e, word):
    assert accepts(regex_to_nfa(e, SIGMA), word) == regex_matches(e, word)


def test_position_automaton_has_one_state_per_occurrence():
    e = Concat((Lit("a"), Star(Union((Lit("a"), Lit("b"))))))
    assert regex_to_nfa(e, SIGMA).n_states == 4


def test_regex_over_unknown_symbol_is_rejected():
    with pytest.raises(AutomatonError):
        regex_to_nfa(Lit("z"), SIGMA)


def test_epsilon_and_empty():
    assert accepts(regex_to_nfa(EPSILON, SIGMA), ())
    assert is_empty(regex_to_nfa(Empty(), SIGMA))
    assert language_upto(regex_to_nfa(plus(Lit("a")), SIGMA), SIGMA, 3) == {("a",), ("a",) * 2, ("a",) * 3}


@settings(max_examples=80, deadline=None)
@given(nfas(), nfas())
def test_boolean_operations_against_enumeration(a, b):
    la, lb = language_upto(a, SIGMA, 4), language_upto(b, SIGMA, 4)
    all_words = set(words_upto(SIGMA, 4))
    assert language_upto(union(a, b), SIGMA, 4) == la | lb
    assert language_upto(intersect(a, b), SIGMA, 4) == la & lb
    assert language_upto(complement(a), SIGMA, 4) == all_words - la
    cat = {u + v for u in language_upto(a, SIGMA, 4) for v in language_upto(b, SIGMA, 4)}
    assert language_upto(concat(a, b), SIGMA, 4) == {w for w in cat if len(w) <= 4}


@settings(max_examples=80, deadline=None)
@given(nfas(4))
def test_complement_is_a_complete_dfa(a):
    c = complement(a)
    assert len(c.initial) == 1
    for q in range(c.n_states):
        for s in SIGMA:
            assert len(c.successors(q, s)) == 1


def test_determinize_includes_dead_state():
    a = Nfa(2, SIGMA, [(0, "a", 1)], {0}, {1})
    subsets, delta = determinize(a)
    assert frozenset() in subsets
    assert len(subsets) == 3


@settings(max_examples=80, deadline=None)
@given(nfas(4))
def test_shortest_witness_is_length_then_lex_least(a):
    lang = sorted(language_upto(a, SIGMA, 6), key=lambda w: (len(w), w))
    w = shortest_accepted(a)
    if lang:
        assert w == lang[0]
    elif w is not None:
        assert len(w) > 6


@settings(max_examples=60, deadline=None)
@given(nfas(3), nfas(3))
def test_lazy_containment_finds_shortest_counterexample(a, b):
    diff = sorted(language_upto(b, SIGMA, 6) - language_upto(a, SIGMA, 6),
                  key=lambda w: (len(w), w))
    w = find_uncovered(a, b)
    if diff:
        assert w is not None and len(w) == len(diff[0])
        assert nfa_accepts(b, w) and not nfa_accepts(a, w)
    if w is None:
        assert contains_lazy(a, b)


@settings(max_examples=60, deadline=None)
@given(nfas(4))
def test_trim_and_quotient_preserve_language(a):
    lang = language_upto(a, SIGMA, 5)
    assert language_upto(trim(a), SIGMA, 5) == lang
    q = bisimulation_quotient(a)
    assert language_upto(q, SIGMA, 5) == lang
    assert q.n_states <= a.n_states


def test_quotient_merges_equivalent_branches():
    # two identical branches after the first letter collapse into one
    a = Nfa(5, SIGMA, [(0, "a", 1), (0, "a", 2), (1, "b", 3), (2, "b", 4)], {0}, {3, 4})
    assert bisimulation_quotient(a).n_states == 3


def test_enumerate_upto_order():
    a = regex_to_nfa(Star(Class(SIGMA)), SIGMA)
    words = enumerate_upto(a, 2)
    assert words == sorted(words, key=lambda w: (len(w), w))
    assert len(words) == 7


def test_homomorphisms():
    a = regex_to_nfa(Concat((Lit("a"), Lit("b"))), SIGMA)
    inv = inverse_hom(a, {"x": "a", "y": "b", "z": "a"})
    assert language_upto(inv, ("x", "y", "z"), 2) == {("x", "y"), ("z", "y")}
    img = relabel_hom(a, {"a": "b", "b": "b"})
    assert language_upto(img, ("b",), 3) == {("b", "b")}
    with pytest.raises(AutomatonError):
        inverse_hom(a, {"x": "q"})


def test_with_alphabet_rejects_shrinking():
    a = regex_to_nfa(Lit("a"), SIGMA)
    assert with_alphabet(a, SIGMA + ("c",)).alphabet == ("a", "b", "c")
    with pytest.raises(AutomatonError):
        with_alphabet(a, ("a",))


def test_budget_is_enforced():
    rng = random.Random(7)
    a = random_nfa(rng, 8, SIGMA, density=0.4)
    with pytest.raises(BudgetExceeded):
        complement(a, budget=1)


def test_malformed_automata():
    with pytest.raises(AutomatonError):
        Nfa(1, SIGMA, [(0, "a", 3)], {0}, {0})
    with pytest.raises(AutomatonError):
        Nfa(1, ("a", "a"), [], {0}, {0})
    with pytest.raises(AutomatonError):
        Nfa(1, SIGMA, [(0, "c", 0)], {0}, {0})


def test_universal_states():
    a = Nfa(3, SIGMA, [(0, "a", 1), (1, "a", 1), (1, "b", 2), (2, "a", 1), (2, "b", 2)],
            {0}, {1, 2})
    assert universal_states(a) == frozenset({1, 2})


TAGS = (0, 1)
PAIRS = tuple((a, t) for a in SIGMA for t in TAGS)


@settings(max_examples=120, deadline=None)
@given(nfas(4, PAIRS), st.lists(st.sampled_from(SIGMA), max_size=5))
def test_universal_preimage_against_enumeration(a, word):
    assert universal_preimage_member(word, a, TAGS) == universal_preimage_bruteforce(a, word, TAGS)
