"""Finite automata and regular expressions over ordered alphabets.

Symbols are hashable values. A plain symbol is an atom (a string); a tuple
symbol of arity k >= 2 is a Python tuple of atoms. Every alphabet is an
ordered tuple without duplicates and its order is the total order used for
deterministic constructions and for tie-breaking of witnesses.

All automata produced here are epsilon-free. Regular expressions compile via
the position (Glushkov) construction, so no epsilon edges ever exist.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Mapping, Sequence

Symbol = Hashable
Word = tuple

PAD = "#"


class AutomatonError(ValueError):
    """Raised on malformed automata or mismatched operands."""


class BudgetExceeded(RuntimeError):
    """A construction or search went over its configured state/node budget."""


# ---------------------------------------------------------------------------
# Regular expressions


class Regex:
    __slots__ = ()

    def size(self) -> int:
        raise NotImplementedError

    def __add__(self, other: "Regex") -> "Regex":
        return Union((self, other))

    def __mul__(self, other: "Regex") -> "Regex":
        return Concat((self, other))


@dataclass(frozen=True)
class Empty(Regex):
    def size(self) -> int:
        return 1


@dataclass(frozen=True)
class Lit(Regex):
    symbol: Symbol

    def size(self) -> int:
        return 1


@dataclass(frozen=True)
class Class(Regex):
    symbols: tuple

    def __init__(self, symbols: Iterable[Symbol]):
        object.__setattr__(self, "symbols", tuple(dict.fromkeys(symbols)))

    def size(self) -> int:
        return 1


@dataclass(frozen=True)
class Concat(Regex):
    parts: tuple

    def __init__(self, parts: Iterable[Regex]):
        object.__setattr__(self, "parts", tuple(parts))

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.parts)


@dataclass(frozen=True)
class Union(Regex):
    parts: tuple

    def __init__(self, parts: Iterable[Regex]):
        object.__setattr__(self, "parts", tuple(parts))

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.parts)


@dataclass(frozen=True)
class Star(Regex):
    child: Regex

    def size(self) -> int:
        return 1 + self.child.size()


@dataclass(frozen=True)
class Power(Regex):
    child: Regex
    k: int

    def size(self) -> int:
        return 1 + self.child.size()


EPSILON = Star(Empty())


def plus(e: Regex) -> Regex:
    return Concat((e, Star(e)))


def word_regex(word: Iterable[Symbol]) -> Regex:
    return Concat(Lit(a) for a in word)


def regex_matches(e: Regex, word: Sequence[Symbol]) -> bool:
    """Direct recursive-descent matcher, independent of any automaton."""
    word = tuple(word)
    return len(word) in _match_ends(e, word, 0)


def _match_ends(e: Regex, w: tuple, i: int) -> frozenset:
    # set of end positions j such that w[i:j] is in L(e)
    if isinstance(e, Empty):
        return frozenset()
    if isinstance(e, Lit):
        return frozenset({i + 1}) if i < len(w) and w[i] == e.symbol else frozenset()
    if isinstance(e, Class):
        return frozenset({i + 1}) if i < len(w) and w[i] in e.symbols else frozenset()
    if isinstance(e, Concat):
        ends = frozenset({i})
        for part in e.parts:
            ends = frozenset(j for s in ends for j in _match_ends(part, w, s))
            if not ends:
                break
        return ends
    if isinstance(e, Union):
        return frozenset(j for part in e.parts for j in _match_ends(part, w, i))
    if isinstance(e, Star):
        seen = {i}
        todo = [i]
        while todo:
            s = todo.pop()
            for j in _match_ends(e.child, w, s):
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
        return frozenset(seen)
    if isinstance(e, Power):
        ends = frozenset({i})
        for _ in range(e.k):
            ends = frozenset(j for s in ends for j in _match_ends(e.child, w, s))
        return ends
    raise TypeError(f"not a regex: {e!r}")


# ---------------------------------------------------------------------------
# NFA


class Nfa:
    """An epsilon-free NFA with dense integer states ``0..n_states-1``.

    Instances are treated as immutable; the successor index is built once on
    construction.
    """

    __slots__ = ("n_states", "alphabet", "transitions", "initial", "final", "_succ", "_rank")

    def __init__(self, n_states: int, alphabet: Iterable[Symbol],
                 transitions: Iterable[tuple], initial: Iterable[int], final: Iterable[int]):
        self.n_states = n_states
        self.alphabet = tuple(alphabet)
        rank = {a: i for i, a in enumerate(self.alphabet)}
        if len(rank) != len(self.alphabet):
            raise AutomatonError("duplicate symbol in alphabet")
        self._rank = rank
        self.transitions = frozenset(transitions)
        self.initial = frozenset(initial)
        self.final = frozenset(final)
        succ: dict[int, dict] = {}
        for p, a, q in self.transitions:
            if not (0 <= p < n_states and 0 <= q < n_states):
                raise AutomatonError(f"transition {(p, a, q)!r} has an invalid state")
            if a not in rank:
                raise AutomatonError(f"transition label {a!r} not in alphabet")
            succ.setdefault(p, {}).setdefault(a, set()).add(q)
        self._succ = {p: {a: frozenset(qs) for a, qs in m.items()} for p, m in succ.items()}
        for q in self.initial | self.final:
            if not 0 <= q < n_states:
                raise AutomatonError(f"state {q} out of range")

    def __repr__(self) -> str:
        return (f"Nfa(states={self.n_states}, symbols={len(self.alphabet)}, "
                f"transitions={len(self.transitions)})")

    def successors(self, state: int, symbol: Symbol) -> frozenset:
        return self._succ.get(state, {}).get(symbol, frozenset())

    def out_edges(self, state: int) -> dict:
        return self._succ.get(state, {})

    def step(self, states: Iterable[int], symbol: Symbol) -> frozenset:
        out: set[int] = set()
        for s in states:
            m = self._succ.get(s)
            if m is not None:
                t = m.get(symbol)
                if t:
                    out |= t
        return frozenset(out)

    def symbol_rank(self, symbol: Symbol) -> int:
        return self._rank[symbol]

    def has_symbol(self, symbol: Symbol) -> bool:
        return symbol in self._rank

    @property
    def size_metric(self) -> int:
        """|Q| + |Q|^2 * |Sigma|."""
        return self.n_states + self.n_states ** 2 * len(self.alphabet)


def _same_alphabet(a: Nfa, b: Nfa) -> None:
    if set(a.alphabet) != set(b.alphabet):
        raise AutomatonError("alphabet mismatch")


def regex_to_nfa(e: Regex, sigma: Sequence[Symbol]) -> Nfa:
    """Position automaton of ``e``: one state per symbol occurrence plus a start state."""
    sigma = tuple(sigma)
    allowed = set(sigma)
    syms: list[tuple] = [()]  # position 0 is the start state
    follow: dict[int, set[int]] = {}

    def new_pos(symbols: tuple) -> int:
        bad = [a for a in symbols if a not in allowed]
        if bad:
            raise AutomatonError(f"symbol {bad[0]!r} not in alphabet")
        syms.append(symbols)
        return len(syms) - 1

    def link(lasts, firsts):
        for p in lasts:
            follow.setdefault(p, set()).update(firsts)

    def walk(node: Regex):
        # returns (nullable, first, last)
        if isinstance(node, Empty):
            return False, set(), set()
        if isinstance(node, Lit):
            p = new_pos((node.symbol,))
            return False, {p}, {p}
        if isinstance(node, Class):
            if not node.symbols:
                return False, set(), set()
            p = new_pos(node.symbols)
            return False, {p}, {p}
        if isinstance(node, (Concat, Power)):
            parts = node.parts if isinstance(node, Concat) else [node.child] * node.k
            nullable, first, last = True, set(), set()
            for part in parts:
                n2, f2, l2 = walk(part)
                link(last, f2)
                if nullable:
                    first |= f2
                last = l2 | (last if n2 else set())
                nullable = nullable and n2
            return nullable, first, last
        if isinstance(node, Union):
            nullable, first, last = False, set(), set()
            for part in node.parts:
                n2, f2, l2 = walk(part)
                nullable = nullable or n2
                first |= f2
                last |= l2
            return nullable, first, last
        if isinstance(node, Star):
            _, f, l = walk(node.child)
            link(l, f)
            return True, f, l
        raise TypeError(f"not a regex: {node!r}")

    nullable, first, last = walk(e)
    trans = []
    for p in sorted(first):
        trans.extend((0, a, p) for a in syms[p])
    for q, ps in follow.items():
        for p in ps:
            trans.extend((q, a, p) for a in syms[p])
    final = set(last) | ({0} if nullable else set())
    return Nfa(len(syms), sigma, trans, {0}, final)


def union(a: Nfa, b: Nfa) -> Nfa:
    _same_alphabet(a, b)
    off = a.n_states
    trans = list(a.transitions) + [(p + off, s, q + off) for p, s, q in b.transitions]
    return Nfa(a.n_states + b.n_states, a.alphabet, trans,
               a.initial | {q + off for q in b.initial},
               a.final | {q + off for q in b.final})


def union_all(automata: Sequence[Nfa]) -> Nfa:
    result = automata[0]
    for other in automata[1:]:
        result = union(result, other)
    return result


def concat(a: Nfa, b: Nfa) -> Nfa:
    _same_alphabet(a, b)
    off = a.n_states
    b_init = [q + off for q in sorted(b.initial)]
    trans = list(a.transitions) + [(p + off, s, q + off) for p, s, q in b.transitions]
    for p, s, q in a.transitions:
        if q in a.final:
            trans.extend((p, s, r) for r in b_init)
    initial = set(a.initial)
    if a.initial & a.final:
        initial |= set(b_init)
    final = {q + off for q in b.final}
    if b.initial & b.final:
        final |= a.final
    return Nfa(a.n_states + b.n_states, a.alphabet, trans, initial, final)


def inverse_hom(a: Nfa, rho: Mapping, gamma: Sequence[Symbol] | None = None) -> Nfa:
    """NFA for rho^-1(L(a)); ``rho`` maps each new symbol to a symbol of ``a``."""
    gamma = tuple(rho) if gamma is None else tuple(gamma)
    missing = [g for g in gamma if g not in rho]
    if missing:
        raise AutomatonError(f"map undefined on {missing[0]!r}")
    preimages: dict = {}
    for g in gamma:
        target = rho[g]
        if not a.has_symbol(target):
            raise AutomatonError(f"{g!r} maps to {target!r}, not in the alphabet")
        preimages.setdefault(target, []).append(g)
    trans = [(p, g, q) for p, s, q in a.transitions for g in preimages.get(s, ())]
    return Nfa(a.n_states, gamma, trans, a.initial, a.final)


def relabel_hom(a: Nfa, h: Mapping | Callable, gamma: Sequence[Symbol] | None = None) -> Nfa:
    """NFA for the letter-to-letter image h(L(a)), on the same states."""
    f = h if callable(h) else h.__getitem__
    image = {s: f(s) for s in a.alphabet}
    if gamma is None:
        gamma = tuple(dict.fromkeys(image.values()))
    trans = [(p, image[s], q) for p, s, q in a.transitions]
    return Nfa(a.n_states, gamma, trans, a.initial, a.final)


def with_alphabet(a: Nfa, sigma: Sequence[Symbol]) -> Nfa:
    """Same automaton over a larger alphabet (new symbols have no transitions)."""
    sigma = tuple(sigma)
    extra = set(a.alphabet) - set(sigma)
    if extra:
        raise AutomatonError(f"symbol {next(iter(extra))!r} missing from new alphabet")
    return Nfa(a.n_states, sigma, a.transitions, a.initial, a.final)


def _check_budget(count: int, budget: int | None, what: str) -> None:
    if budget is not None and count > budget:
        raise BudgetExceeded(f"{what} exceeded budget of {budget} states")


def determinize(a: Nfa, budget: int | None = None) -> tuple[list[frozenset], dict]:
    """Reachable subset construction, including the empty (dead) subset when reached.

    Returns the subsets in discovery order and a map (index, symbol) -> index.
    """
    start = frozenset(a.initial)
    index = {start: 0}
    subsets = [start]
    delta = {}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        i = index[cur]
        for sym in a.alphabet:
            nxt = a.step(cur, sym)
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(subsets)
                subsets.append(nxt)
                _check_budget(len(subsets), budget, "determinization")
                queue.append(nxt)
            delta[i, sym] = j
    return subsets, delta


def complement(a: Nfa, budget: int | None = None) -> Nfa:
    """Complete DFA (as an Nfa) for Sigma* minus L(a)."""
    subsets, delta = determinize(a, budget)
    trans = [(i, s, j) for (i, s), j in delta.items()]
    final = [i for i, sub in enumerate(subsets) if not (sub & a.final)]
    return Nfa(len(subsets), a.alphabet, trans, {0}, final)


def intersect(a: Nfa, b: Nfa, budget: int | None = None) -> Nfa:
    """Product automaton restricted to pairs reachable from initial pairs."""
    _same_alphabet(a, b)
    starts = [(p, q) for p in sorted(a.initial) for q in sorted(b.initial)]
    index = {pq: i for i, pq in enumerate(starts)}
    queue = deque(starts)
    trans = []
    while queue:
        p, q = queue.popleft()
        i = index[p, q]
        pm, qm = a.out_edges(p), b.out_edges(q)
        if len(qm) < len(pm):
            common = [s for s in qm if s in pm]
        else:
            common = [s for s in pm if s in qm]
        for s in common:
            for p2 in pm[s]:
                for q2 in qm[s]:
                    j = index.get((p2, q2))
                    if j is None:
                        j = index[p2, q2] = len(index)
                        _check_budget(len(index), budget, "product")
                        queue.append((p2, q2))
                    trans.append((i, s, j))
    final = [i for (p, q), i in index.items() if p in a.final and q in b.final]
    return Nfa(max(len(index), 1), a.alphabet, trans, range(len(starts)), final)


def accepts(a: Nfa, word: Iterable[Symbol]) -> bool:
    cur = a.initial
    for sym in word:
        if not a.has_symbol(sym):
            raise AutomatonError(f"unknown symbol {sym!r}")
        cur = a.step(cur, sym)
        if not cur:
            return False
    return bool(cur & a.final)


def coreachable(a: Nfa) -> frozenset:
    """States from which some final state is reachable."""
    pred: dict[int, set[int]] = {}
    for p, _, q in a.transitions:
        pred.setdefault(q, set()).add(p)
    seen = set(a.final)
    todo = list(seen)
    while todo:
        q = todo.pop()
        for p in pred.get(q, ()):
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return frozenset(seen)


def trim(a: Nfa) -> Nfa:
    """Drop states that are unreachable or cannot reach a final state; renumbers in order."""
    fwd = set(a.initial)
    todo = list(fwd)
    while todo:
        p = todo.pop()
        for targets in a.out_edges(p).values():
            for q in targets:
                if q not in fwd:
                    fwd.add(q)
                    todo.append(q)
    keep = sorted(fwd & coreachable(a))
    if not keep:
        return Nfa(1, a.alphabet, (), {0}, ())
    index = {q: i for i, q in enumerate(keep)}
    trans = [(index[p], s, index[q]) for p, s, q in a.transitions if p in index and q in index]
    return Nfa(len(keep), a.alphabet, trans,
               [index[q] for q in a.initial if q in index], [index[q] for q in a.final if q in index])


def bisimulation_quotient(a: Nfa) -> Nfa:
    """Merge forward-bisimilar states (same finality, same successor blocks per symbol).

    Blocks are numbered by their smallest member, so the result is deterministic.
    """
    block = [1 if q in a.final else 0 for q in range(a.n_states)]
    count = len(set(block))
    while True:
        sigs = {}
        new_block = []
        for q in range(a.n_states):
            edges = a.out_edges(q)
            sig = (block[q], frozenset((s, block[r]) for s, targets in edges.items()
                                       for r in targets))
            new_block.append(sigs.setdefault(sig, len(sigs)))
        block = new_block
        if len(sigs) == count:
            break
        count = len(sigs)
    order: dict[int, int] = {}
    for q in range(a.n_states):
        order.setdefault(block[q], len(order))
    rename = [order[b] for b in block]
    trans = {(rename[p], s, rename[q]) for p, s, q in a.transitions}
    return Nfa(len(order), a.alphabet, trans, {rename[q] for q in a.initial},
               {rename[q] for q in a.final})


def is_empty(a: Nfa) -> bool:
    return not (coreachable(a) & a.initial)


def shortest_accepted(a: Nfa, budget: int | None = None) -> Word | None:
    """Length-minimal accepted word, lexicographically least by alphabet order.

    Breadth-first search over reachable subsets, expanding symbols in
    alphabet order; the first accepting subset dequeued carries the answer.
    """
    live = coreachable(a)
    start = frozenset(a.initial & live)
    if not start:
        return None
    parent: dict[frozenset, tuple] = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur & a.final:
            word = []
            node = cur
            while parent[node] is not None:
                node, sym = parent[node]
                word.append(sym)
            return tuple(reversed(word))
        for sym in a.alphabet:
            nxt = a.step(cur, sym) & live
            if nxt and nxt not in parent:
                parent[nxt] = (cur, sym)
                _check_budget(len(parent), budget, "witness search")
                queue.append(nxt)
    return None


def enumerate_upto(a: Nfa, maxlen: int) -> list[Word]:
    """All accepted words of length <= maxlen in length-then-lexicographic order."""
    live = coreachable(a)
    start = frozenset(a.initial & live)
    if not start:
        return []
    out = []
    level = [((), start)]
    for length in range(maxlen + 1):
        nxt_level = []
        for word, cur in level:
            if cur & a.final:
                out.append(word)
            if length == maxlen:
                continue
            for sym in a.alphabet:
                nxt = a.step(cur, sym) & live
                if nxt:
                    nxt_level.append((word + (sym,), nxt))
        level = nxt_level
    return out


def find_uncovered(a: Nfa, b: Nfa, budget: int | None = None) -> Word | None:
    """Shortest word of L(b) not in L(a), or None when L(b) is contained in L(a).

    Searches pairs (state of b, subset of a's states) on the fly; the
    complement of ``a`` is never materialised.
    """
    _same_alphabet(a, b)
    a_start = frozenset(a.initial)
    starts = [(q, a_start) for q in sorted(b.initial)]
    parent: dict = {c: None for c in starts}
    queue = deque(starts)
    while queue:
        q, sub = cur = queue.popleft()
        if q in b.final and not (sub & a.final):
            word = []
            node = cur
            while parent[node] is not None:
                node, sym = parent[node]
                word.append(sym)
            return tuple(reversed(word))
        edges = b.out_edges(q)
        for sym in b.alphabet:
            targets = edges.get(sym)
            if not targets:
                continue
            sub2 = a.step(sub, sym)
            for q2 in sorted(targets):
                nxt = (q2, sub2)
                if nxt not in parent:
                    parent[nxt] = (cur, sym)
                    _check_budget(len(parent), budget, "containment search")
                    queue.append(nxt)
    return None


def contains_lazy(a: Nfa, b: Nfa, budget: int | None = None) -> bool:
    """True iff L(b) is a subset of L(a)."""
    return find_uncovered(a, b, budget) is None


def universal_states(a: Nfa) -> frozenset:
    """Final states from which every word is accepted (greatest fixpoint)."""
    cand = set(a.final)
    changed = True
    while changed:
        changed = False
        for q in list(cand):
            edges = a.out_edges(q)
            if any(not (edges.get(s, frozenset()) & cand) for s in a.alphabet):
                cand.discard(q)
                changed = True
    return frozenset(cand)


def _minimal_sets(sets) -> list:
    kept: list = []
    for c in sorted(sets, key=len):
        if not any(k <= c for k in kept):
            kept.append(c)
    return kept


def universal_preimage_member(word: Sequence[Symbol], a: Nfa,
                              annotations: Sequence[Symbol]) -> bool:
    """Decide whether every annotation of ``word`` is accepted by ``a``.

    ``a`` reads pairs (letter, annotation). Each annotated prefix leads to
    one subset of states; the word is accepted iff every subset reached at
    the end meets the final states. Since stepping is monotone, only the
    inclusion-minimal subsets matter, and subsets holding a state that
    accepts everything are dropped.
    """
    universal = universal_states(a)
    configs = [frozenset(a.initial)]
    if configs[0] & universal:
        return True
    cache: dict = {}
    for letter in word:
        labels = [(letter, x) for x in annotations]
        for lab in labels:
            if not a.has_symbol(lab):
                raise AutomatonError(f"unknown symbol {lab!r}")
        nxt = set()
        for cur in configs:
            for lab in labels:
                key = (cur, lab)
                res = cache.get(key)
                if res is None:
                    res = cache[key] = a.step(cur, lab)
                if not res:
                    return False
                if not (res & universal):
                    nxt.add(res)
        if not nxt:
            return True
        configs = _minimal_sets(nxt)
        if len(cache) > 200_000:
            cache.clear()
    return all(c & a.final for c in configs)


def random_nfa(rng: random.Random, n_states: int, alphabet: Sequence[Symbol],
               density: float = 0.3, p_final: float = 0.4) -> Nfa:
    """Seeded random NFA; state 0 is initial."""
    trans = [(p, s, q) for p in range(n_states) for s in alphabet for q in range(n_states)
             if rng.random() < density]
    final = [q for q in range(n_states) if rng.random() < p_final]
    return Nfa(n_states, alphabet, trans, {0}, final)
