import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autorel.automata import Nfa, random_nfa, regex_matches
from autorel.convolution import bad_pad_nfa, padded_alphabet
from autorel.textio import (ParseError, parse_instance, parse_nfa, parse_regex, parse_symbol,
                            parse_tiling, parse_word, serialize_instance, serialize_nfa,
                            symbol_text, tiling_text, word_text)
from autorel.tiling import counter_instance, toy_instance
from oracles import language_upto, words_upto

SIGMA = ("a", "b")


def test_relation_automaton_roundtrip_is_byte_identical():
    a = bad_pad_nfa(2, SIGMA)
    text = serialize_nfa(a)
    assert text.startswith("arity 2\nalphabet a b #\nalphabet a b #\n")
    b = parse_nfa(text)
    assert serialize_nfa(b) == text
    alphabet = padded_alphabet(SIGMA, 2)
    assert language_upto(a, alphabet, 2) == language_upto(b, alphabet, 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_random_roundtrip(seed, n):
    a = random_nfa(random.Random(seed), n, SIGMA)
    text = serialize_nfa(a)
    assert serialize_nfa(parse_nfa(text)) == text


HEADER = "arity 2\nalphabet a #\nalphabet a #\nstate 0\nstate 1\ninitial 0\nfinal 1\n"


def test_tuple_symbols_parse_to_tuples():
    a = parse_nfa(HEADER + "trans 0 a|# 1\n")
    assert a.transitions == frozenset({(0, ("a", "#"), 1)})


def test_state_ids_are_compacted_in_order():
    a = parse_nfa("arity 1\nalphabet a\nstate 7\nstate 3\ninitial 7\nfinal 3\ntrans 7 a 3\n")
    assert a.n_states == 2
    assert set(a.transitions) == {(1, "a", 0)}
    assert a.initial == {1} and a.final == {0}


@pytest.mark.parametrize("body,line", [
    ("trans 0 a|# 5\n", 8),
    ("trans 0 a 1\n", 8),
    ("trans 0 a|z 1\n", 8),
    ("state 0\n", 8),
    ("frobnicate\n", 8),
])
def test_malformed_nfa_reports_line(body, line):
    with pytest.raises(ParseError) as err:
        parse_nfa(HEADER + body)
    assert err.value.line == line


def test_missing_header():
    with pytest.raises(ParseError):
        parse_nfa("state 0\n")
    with pytest.raises(ParseError):
        parse_nfa("arity 2\nalphabet a\n")


def test_symbols_and_words():
    assert parse_symbol("a|b|#") == ("a", "b", "#")
    assert symbol_text(("a", "#")) == "a|#"
    assert parse_word("a|b b|#") == (("a", "b"), ("b", "#"))
    assert word_text([("a", "b"), "c"]) == "a|b c"
    with pytest.raises(ValueError):
        parse_symbol("a||b")
    with pytest.raises(ValueError):
        symbol_text("a b")


def test_instance_roundtrip():
    for inst in (toy_instance(), counter_instance(5)):
        text = serialize_instance(inst)
        assert parse_instance(text) == inst
        assert serialize_instance(parse_instance(text)) == text


@pytest.mark.parametrize("text", [
    "n 1\ntile 0 0 0 0\ntopleft 0\nbottomright 0\n",
    "n 1\ntile 1 0 0 0 0\ntopleft 0\nbottomright 0\n",
    "n 1\ntile 0 0 0 0 0\ntopleft 2\nbottomright 0\n",
    "n x\n",
    "tile 0 0 0 0 0\n",
])
def test_malformed_instances(text):
    with pytest.raises(ParseError):
        parse_instance(text)


def test_tiling_text():
    t = ((0, 1), (2, 3))
    assert parse_tiling(tiling_text(t)) == t
    with pytest.raises(ParseError):
        parse_tiling("0 x\n")


def test_regex_syntax():
    e = parse_regex("a ( a + b )* b^2 [a b] %e")
    for w in words_upto(SIGMA, 6):
        s = "".join(w)
        expected = len(s) >= 4 and s[0] == "a" and s[-3:-1] == "bb"
        assert regex_matches(e, w) == expected
    assert not any(regex_matches(parse_regex("%0"), w) for w in words_upto(SIGMA, 2))
    assert regex_matches(parse_regex("a|# b|b"), (("a", "#"), ("b", "b")))


@pytest.mark.parametrize("text", ["", "( a", "a + ", "[a", "*", "a )", "a ^"])
def test_malformed_regexes(text):
    with pytest.raises(ParseError):
        parse_regex(text)


def test_empty_automaton_serializes():
    a = Nfa(1, SIGMA, [], {0}, set())
    assert "final" not in serialize_nfa(a)
    assert parse_nfa(serialize_nfa(a)).final == frozenset()
