import itertools
import random

import pytest

from autorel.automata import (Lit, Nfa, enumerate_upto, intersect, random_nfa, regex_matches,
                              regex_to_nfa)
from autorel.reduction import (MIN_N, ConditionChecker, allsuf, annotated_alphabet,
                               build_reduction, comb_automaton, comb_regexes, cond_check,
                               erase_annotation, in_LI, lift, rho_forall_member)
from autorel.tiling import (FORALL, comb, encode_tiling, is_valid_tiling, monochrome_instance,
                            toy_instance)
from oracles import all_proper_suffixes_bruteforce, language_upto, words_upto


def comb_intersection(n):
    digits = tuple(range(n + 1))
    autos = [regex_to_nfa(e, digits) for e in comb_regexes(n)]
    a = autos[0]
    for b in autos[1:]:
        a = intersect(a, b)
    return a


@pytest.mark.parametrize("n", [2, 3, 4])
def test_comb_is_the_only_word_of_the_intersection(n):
    assert enumerate_upto(comb_intersection(n), 2 ** n + 2) == [comb(n)]


def test_comb_regexes_by_direct_matching():
    exprs = comb_regexes(2)
    hits = [w for w in words_upto((0, 1, 2), 6) if all(regex_matches(e, w) for e in exprs)]
    assert hits == [comb(2)]


def test_comb_regexes_need_positive_n():
    with pytest.raises(ValueError):
        comb_regexes(0)


def mutations(word, alphabet, count, seed=0):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        i = rng.randrange(len(word))
        a = rng.choice([x for x in alphabet if x != word[i]])
        out.append(word[:i] + (a,) + word[i + 1:])
    return out


@pytest.mark.parametrize("n", [2, 3, 6])
def test_comb_automaton_accepts_only_the_comb(n):
    c = comb_automaton(n)
    w = comb(n) + (FORALL,)
    assert rho_forall_member(w, c)
    for bad in mutations(comb(n), range(n + 1), 10, seed=n):
        assert not rho_forall_member(bad + (FORALL,), c)
    assert not rho_forall_member(comb(n), c)


def test_lift_and_erase():
    sigma = ("a", "b")
    a = regex_to_nfa(Lit("a"), sigma)
    lifted = lift(a, sigma, 1)
    assert language_upto(lifted, annotated_alphabet(sigma, 1), 1) == {(("a", 0),), (("a", 1),)}
    assert erase_annotation(sigma, 1)[("b", 1)] == "b"


def grids(inst, width, max_height):
    for h in range(1, max_height + 1):
        for cells in itertools.product(range(len(inst.tiles)), repeat=width * h):
            yield tuple(tuple(cells[i * width:(i + 1) * width]) for i in range(h))


def test_conditions_characterise_valid_tilings_on_toy():
    inst = toy_instance()
    ck = ConditionChecker(inst)
    for rows in grids(inst, inst.width, 3):
        assert ck.in_language(encode_tiling(inst, rows)) == bool(is_valid_tiling(inst, rows))


def test_conditions_on_valid_encoding():
    inst = toy_instance()
    w = encode_tiling(inst, ((0, 1), (2, 3)))
    assert all(cond_check(i, inst, w) for i in range(1, 7))
    assert in_LI(inst, w)
    assert not in_LI(inst, w[1:])
    with pytest.raises(ValueError):
        cond_check(7, inst, w)


def test_condition_violations_are_localised():
    inst = toy_instance()
    ck = ConditionChecker(inst)
    horiz = encode_tiling(inst, ((0, 0), (2, 3)))
    vert = encode_tiling(inst, ((0, 1), (3, 2)))
    assert not all(ck.check(i, horiz) for i in range(1, 7))
    assert not all(ck.check(i, vert) for i in range(1, 7))
    # a truncated comb inside one cell breaks the addressing conditions only
    w = list(encode_tiling(inst, ((0, 1), (2, 3))))
    w.remove(0)
    assert ck.check(1, w) and ck.check(2, w)
    assert not all(ck.check(i, w) for i in (4, 5, 6))


SIGMA = ("a", "b")
TAGS = (0, 1)


@pytest.mark.parametrize("seed", range(100))
def test_allsuf_against_suffix_definition(seed):
    rng = random.Random(seed)
    a = random_nfa(rng, rng.randint(1, 3), annotated_alphabet(SIGMA, 1))
    b = allsuf(a, 1)
    assert b.n_states == a.n_states + 1
    for w in words_upto(SIGMA, 4):
        assert rho_forall_member(w, b) == all_proper_suffixes_bruteforce(a, w, TAGS)


def test_allsuf_on_empty_automaton_accepts_only_epsilon():
    a = Nfa(1, annotated_alphabet(SIGMA, 1), [], {0}, set())
    b = allsuf(a, 1)
    assert rho_forall_member((), b)
    assert not rho_forall_member(("a",), b)


def test_reduction_needs_six_digit_levels():
    with pytest.raises(ValueError):
        build_reduction(monochrome_instance(MIN_N - 1))


@pytest.fixture(scope="module")
def reduction6():
    return build_reduction(monochrome_instance(6))


def test_reduction_sizes(reduction6):
    sizes = reduction6.sizes
    assert sizes["full"] == reduction6.full.n_states
    assert sizes["comb"] == reduction6.comb.n_states
    assert all(sizes[f"cond{i}"] >= 1 for i in range(1, 7))


def test_reduction_rejects_wrong_start(reduction6):
    inst = reduction6.inst
    w = encode_tiling(inst, ((0,) * inst.width,))
    # a word not starting with A is rejected by some annotation
    assert not rho_forall_member(w[1:], reduction6.annotated)
    # a short non-encoding is rejected by both deciders
    junk = (FORALL, "[", "]")
    assert not in_LI(inst, junk)
    assert not rho_forall_member(junk, reduction6.annotated)
