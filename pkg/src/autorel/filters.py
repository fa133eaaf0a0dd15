"""Filters: regular languages over marked letters (a, mark) with mark in {TOP, BOTTOM}.

A marked word w relates its input psi_in(w) (all bases) to its output
psi_out(w) (bases of TOP-marked letters only).
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .automata import (Class, Concat, Lit, Nfa, Power, Regex, Star, Union, intersect,
                       regex_to_nfa)

TOP = True
BOTTOM = False


def marked(symbols: Iterable, mark: bool) -> list:
    return [(a, mark) for a in symbols]


def marked_alphabet(sigma: Sequence) -> tuple:
    return tuple((a, m) for a in sigma for m in (TOP, BOTTOM))


def psi_in(w: Iterable[tuple]) -> tuple:
    return tuple(a for a, _ in w)


def psi_out(w: Iterable[tuple]) -> tuple:
    return tuple(a for a, m in w if m)


def base_alphabet(e: Regex) -> list:
    out: dict = {}

    def walk(node):
        if isinstance(node, Lit):
            out[node.symbol[0]] = None
        elif isinstance(node, Class):
            for s in node.symbols:
                out[s[0]] = None
        elif isinstance(node, (Concat, Union)):
            for p in node.parts:
                walk(p)
        elif isinstance(node, (Star, Power)):
            walk(node.child)

    walk(e)
    return list(out)


class CompiledFilter:
    """A(F) over the marked alphabet, plus the states from which any unmarked
    continuation is accepted (used to stop simulations early)."""

    def __init__(self, f: Regex, sigma: Sequence):
        self.sigma = tuple(sigma)
        self.nfa = regex_to_nfa(f, marked_alphabet(self.sigma))
        self.sinks = self._unmarked_universal()

    def _unmarked_universal(self) -> frozenset:
        a = self.nfa
        cand = set(a.final)
        changed = True
        while changed:
            changed = False
            for q in list(cand):
                for s in self.sigma:
                    if not (a.successors(q, (s, BOTTOM)) & cand):
                        cand.discard(q)
                        changed = True
                        break
        return frozenset(cand)

    def contains(self, u: Sequence, v: Sequence) -> bool:
        """Is (u, v) in the input-output relation?"""
        a = self.nfa
        v = tuple(v)
        target = len(v)
        pairs = {(q, 0) for q in a.initial}
        for letter in u:
            if any(j == target and q in self.sinks for q, j in pairs):
                return True
            nxt = set()
            for q, j in pairs:
                for q2 in a.successors(q, (letter, BOTTOM)):
                    nxt.add((q2, j))
                if j < target and v[j] == letter:
                    for q2 in a.successors(q, (letter, TOP)):
                        nxt.add((q2, j + 1))
            if not nxt:
                return False
            pairs = nxt
        return any(j == target and q in a.final for q, j in pairs)


def _sigma_for(f: Regex, u: Sequence, sigma: Sequence | None) -> tuple:
    if sigma is not None:
        return tuple(sigma)
    return tuple(dict.fromkeys(list(base_alphabet(f)) + list(u)))


def filter_outputs(f: Regex, u: Sequence, sigma: Sequence | None = None) -> Nfa:
    """Epsilon-free NFA over the base alphabet recognising F(u)."""
    sigma = _sigma_for(f, u, sigma)
    gamma = marked_alphabet(sigma)
    af = regex_to_nfa(f, gamma)
    u = tuple(u)
    spine = Nfa(len(u) + 1, gamma,
                [(i, (a, m), i + 1) for i, a in enumerate(u) for m in (TOP, BOTTOM)],
                {0}, {len(u)})
    return _erase_unmarked(intersect(af, spine), sigma)


def _erase_unmarked(a: Nfa, sigma: tuple) -> Nfa:
    # drop BOTTOM letters (as epsilon moves) and unmark TOP letters
    closure = {}
    for p in range(a.n_states):
        seen = {p}
        todo = [p]
        while todo:
            q = todo.pop()
            for (_, mark), targets in a.out_edges(q).items():
                if mark == BOTTOM:
                    for r in targets:
                        if r not in seen:
                            seen.add(r)
                            todo.append(r)
        closure[p] = seen
    trans = set()
    final = set()
    for p in range(a.n_states):
        for q in closure[p]:
            if q in a.final:
                final.add(p)
            for (base, mark), targets in a.out_edges(q).items():
                if mark == TOP:
                    trans.update((p, base, r) for r in targets)
    return Nfa(a.n_states, sigma, trans, a.initial, final)


def filter_contains(f: Regex | CompiledFilter, u: Sequence, v: Sequence,
                    sigma: Sequence | None = None) -> bool:
    if not isinstance(f, CompiledFilter):
        f = CompiledFilter(f, _sigma_for(f, tuple(u) + tuple(v), sigma))
    return f.contains(u, v)
