"""Convolutions of word tuples, padding languages and projections of automatic relations."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .automata import (PAD, AutomatonError, BudgetExceeded, Nfa, complement, contains_lazy,
                       intersect, relabel_hom, shortest_accepted)


class InvalidConvolution(ValueError):
    def __init__(self, row: int, position: int, reason: str):
        super().__init__(f"row {row}, position {position}: {reason}")
        self.row = row
        self.position = position


def make_symbol(parts: Sequence):
    """Arity-1 symbols are bare atoms; wider ones are tuples."""
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else parts


def components(symbol, k: int) -> tuple:
    return (symbol,) if k == 1 else tuple(symbol)


def padded_alphabet(sigma: Sequence, k: int) -> tuple:
    if PAD in sigma:
        raise AutomatonError("the pad atom is reserved")
    atoms = tuple(sigma) + (PAD,)
    return tuple(make_symbol(p) for p in itertools.product(atoms, repeat=k))


def all_pad(k: int):
    return make_symbol((PAD,) * k)


def convolve(words: Sequence[Sequence]) -> tuple:
    words = [tuple(w) for w in words]
    for row, w in enumerate(words, 1):
        if PAD in w:
            raise InvalidConvolution(row, w.index(PAD) + 1, "pad atom inside an input word")
    length = max((len(w) for w in words), default=0)
    return tuple(make_symbol(w[i] if i < len(w) else PAD for w in words)
                 for i in range(length))


def check_convolution(letters: Sequence, k: int) -> None:
    ended = [False] * k
    for pos, letter in enumerate(letters, 1):
        parts = components(letter, k)
        if all(a == PAD for a in parts):
            raise InvalidConvolution(1, pos, "all-pad letter")
        for row, a in enumerate(parts):
            if a == PAD:
                ended[row] = True
            elif ended[row]:
                raise InvalidConvolution(row + 1, pos, "pad followed by a letter")


def deconvolve(letters: Sequence, k: int) -> list[tuple]:
    check_convolution(letters, k)
    rows = [[] for _ in range(k)]
    for letter in letters:
        for row, a in zip(rows, components(letter, k)):
            if a != PAD:
                row.append(a)
    return [tuple(r) for r in rows]


def is_valid_convolution(letters: Sequence, k: int) -> bool:
    try:
        check_convolution(letters, k)
    except InvalidConvolution:
        return False
    return True


def bad_pad_nfa(k: int, sigma: Sequence) -> Nfa:
    """The k+2 state NFA for words that are not convolutions.

    State 0 guesses the violating spot, state i (1..k) has just seen a pad
    in row i, and state k+1 is the accepting sink.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    alphabet = padded_alphabet(sigma, k)
    sink = k + 1
    trans = []
    for sym in alphabet:
        parts = components(sym, k)
        trans.append((0, sym, 0))
        trans.append((sink, sym, sink))
        if all(a == PAD for a in parts):
            trans.append((0, sym, sink))
        for i, a in enumerate(parts, 1):
            if a == PAD:
                trans.append((0, sym, i))
            else:
                trans.append((i, sym, sink))
    return Nfa(k + 2, alphabet, trans, {0}, {sink})


_GOOD_CACHE: dict = {}


def good_pad_nfa(k: int, sigma: Sequence) -> Nfa:
    """Deterministic automaton for the valid convolutions (complement of bad_pad_nfa)."""
    key = (k, tuple(sigma))
    if key not in _GOOD_CACHE:
        _GOOD_CACHE[key] = complement(bad_pad_nfa(k, sigma))
    return _GOOD_CACHE[key]


@dataclass(frozen=True)
class RelationAutomaton:
    """An NFA over the (d+k)-fold padded alphabet; the first d rows are kept."""

    nfa: Nfa
    d: int
    k: int
    sigma: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(self.sigma))
        if self.d < 1 or self.k < 1:
            raise ValueError("d and k must be positive")
        if set(self.nfa.alphabet) != set(padded_alphabet(self.sigma, self.d + self.k)):
            raise AutomatonError("relation automaton must use the full padded alphabet")

    @property
    def arity(self) -> int:
        return self.d + self.k

    def kept_alphabet(self) -> tuple:
        return padded_alphabet(self.sigma, self.d)

    def head(self, symbol):
        return make_symbol(components(symbol, self.arity)[:self.d])


def strip(a: Nfa, d: int) -> Nfa:
    """Also accept every word that reaches acceptance through all-pad letters."""
    pad = all_pad(d)
    final = set(a.final)
    changed = True
    while changed:
        changed = False
        for p, sym, q in a.transitions:
            if sym == pad and q in final and p not in final:
                final.add(p)
                changed = True
    return Nfa(a.n_states, a.alphabet, a.transitions, a.initial, final)


def head_image(r: RelationAutomaton, a: Nfa | None = None) -> Nfa:
    a = r.nfa if a is None else a
    return relabel_hom(a, r.head, gamma=r.kept_alphabet())


def project_exists(r: RelationAutomaton) -> Nfa:
    valid = intersect(r.nfa, good_pad_nfa(r.arity, r.sigma))
    return intersect(strip(head_image(r, valid), r.d), good_pad_nfa(r.d, r.sigma))


def complement_stage(r: RelationAutomaton, budget: int | None = None) -> Nfa:
    """NFA for STRIP(h(complement of R)) restricted to valid convolutions.

    The complement is cut down to valid (d+k)-convolutions before h is
    applied: an invalid word can have a valid image and would otherwise
    remove genuine members from the universal projection.
    """
    comp = complement(r.nfa, budget)
    comp = intersect(comp, good_pad_nfa(r.arity, r.sigma), budget)
    return intersect(strip(head_image(r, comp), r.d), good_pad_nfa(r.d, r.sigma), budget)


def project_forall(r: RelationAutomaton, budget: int | None = None) -> Nfa:
    first = complement_stage(r, budget)
    return intersect(complement(first, budget), good_pad_nfa(r.d, r.sigma), budget)


def forall_bound_exponent(n_states: int, d: int) -> int:
    """log2 of the state bound 2^(2^(|Q|+d+2)+d+2) for the universal projection."""
    return 2 ** (n_states + d + 2) + d + 2


@dataclass(frozen=True)
class Verdict:
    empty: bool
    witness: tuple | None = None
    stats: dict = field(default_factory=dict, compare=False)

    def words(self, d: int) -> list[tuple] | None:
        return None if self.witness is None else deconvolve(self.witness, d)


def decide_forall_nonempty(r: RelationAutomaton, mode: str = "onthefly",
                           budget: int | None = None, node_budget: int | None = None) -> Verdict:
    """Decide whether the universal projection of ``r`` is non-empty.

    Both modes return the length-minimal, lexicographically least witness.
    """
    if mode == "naive":
        first = complement_stage(r, budget)
        result = intersect(complement(first, budget), good_pad_nfa(r.d, r.sigma), budget)
        witness = shortest_accepted(result, node_budget)
        stats = {"relation": r.nfa.n_states, "first_stage": first.n_states,
                 "projection": result.n_states}
    elif mode == "onthefly":
        first = complement_stage(r, budget)
        witness, explored = _search_uncovered(first, good_pad_nfa(r.d, r.sigma), node_budget)
        stats = {"relation": r.nfa.n_states, "first_stage": first.n_states,
                 "configurations": explored}
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if witness is not None:
        assert len(witness).bit_length() <= forall_bound_exponent(r.nfa.n_states, r.d) + 1
    return Verdict(witness is None, witness, stats)


def _search_uncovered(b: Nfa, good: Nfa, node_budget: int | None):
    # breadth-first over (subset of b, state of the deterministic good automaton)
    (g0,) = good.initial
    start = (frozenset(b.initial), g0)
    parent = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        sub, g = cur
        if g in good.final and not (sub & b.final):
            word = []
            node = cur
            while parent[node] is not None:
                node, sym = parent[node]
                word.append(sym)
            return tuple(reversed(word)), len(parent)
        for sym in good.alphabet:
            (g2,) = good.successors(g, sym)
            nxt = (b.step(sub, sym), g2)
            if nxt not in parent:
                parent[nxt] = (cur, sym)
                if node_budget is not None and len(parent) > node_budget:
                    raise BudgetExceeded(f"configuration search exceeded {node_budget} nodes")
                queue.append(nxt)
    return None, len(parent)


def extension_spine(u: Sequence[Sequence], r: RelationAutomaton) -> Nfa:
    """NFA for { u (x) v : v any k-tuple of words } over the relation alphabet."""
    d, k = r.d, r.k
    if len(u) != d:
        raise ValueError(f"expected {d} words, got {len(u)}")
    head = [components(sym, d) for sym in convolve(u)]
    length = len(head)
    atoms = r.sigma + (PAD,)
    index: dict = {}
    trans = []

    def state(key):
        if key not in index:
            index[key] = len(index)
            queue.append(key)
        return index[key]

    queue: deque = deque()
    state((0, frozenset()))
    while queue:
        i, ended = key = queue.popleft()
        src = index[key]
        choices = [(PAD,) if row in ended else atoms for row in range(k)]
        for tail in itertools.product(*choices):
            if i < length:
                top, nxt_i = head[i], i + 1
            else:
                if all(a == PAD for a in tail):
                    continue
                top, nxt_i = (PAD,) * d, i
            ended2 = ended | {row for row, a in enumerate(tail) if a == PAD}
            trans.append((src, make_symbol(top + tail), state((nxt_i, frozenset(ended2)))))
    final = [i for (pos, _), i in index.items() if pos == length]
    return Nfa(len(index), r.nfa.alphabet, trans, {0}, final)


def forall_member(u: Sequence[Sequence], r: RelationAutomaton, budget: int | None = None) -> bool:
    """Is (u, v) in R for every k-tuple v?"""
    return contains_lazy(r.nfa, extension_spine(u, r), budget)
