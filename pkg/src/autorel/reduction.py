"""From a corridor tiling instance to an automaton whose universal projection
is non-empty exactly when the instance has a valid tiling.

Words over the instance alphabet are checked in two independent ways:
direct condition checkers (``cond_check``/``in_LI``) and automata over
annotated letters (``build_reduction``) queried through
``rho_forall_member``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .automata import (EPSILON, PAD, Class, Concat, Empty, Lit, Nfa, Regex, Star, Union,
                       bisimulation_quotient, concat, inverse_hom, plus, regex_to_nfa, trim,
                       union_all, universal_preimage_member, with_alphabet)
from .convolution import padded_alphabet
from .filters import BOTTOM, TOP, CompiledFilter, marked_alphabet
from .tiling import (CELL_CLOSE, CELL_OPEN, FORALL, ROW_CLOSE, ROW_OPEN, CorridorInstance,
                     comb)

MIN_N = 6
TAGS = range(1, 7)


def seq(*parts: Regex) -> Regex:
    return Concat(parts)


# ---------------------------------------------------------------------------
# the comb word as an intersection of n + 1 expressions


def comb_regexes(n: int) -> list[Regex]:
    """Expressions whose languages intersect to exactly {comb(n)}.

    Digits are ints. The zero-level expression separates zeros by non-zero
    digits.
    """
    if n < 1:
        raise ValueError("n must be at least 1")

    def above(i):
        return Class(range(i + 1, n + 1))

    def below(i):
        return Class(range(i))

    out = [seq(above(0), Star(seq(Lit(0), above(0))))]
    for i in range(1, n):
        low = Star(below(i))
        out.append(seq(above(i), Star(seq(low, Lit(i), low, above(i)))))
    out.append(seq(Lit(n), Star(below(n)), Lit(n)))
    return out


def annotated_alphabet(sigma: Sequence, n: int) -> tuple:
    return tuple((a, d) for a in sigma for d in range(n + 1))


def erase_annotation(sigma: Sequence, n: int) -> dict:
    return {(a, d): a for a in sigma for d in range(n + 1)}


def lift(a: Nfa, sigma: Sequence, n: int) -> Nfa:
    """Inverse image of ``a`` under the annotation-erasing map."""
    return inverse_hom(a, erase_annotation(sigma, n), annotated_alphabet(sigma, n))


def comb_automaton(n: int, sigma: Sequence | None = None) -> Nfa:
    """Union over i of (lifted E_i) followed by the letter (A, i)."""
    sigma = tuple(range(n + 1)) + (FORALL,) if sigma is None else tuple(sigma)
    gamma = annotated_alphabet(sigma, n)
    parts = []
    for i, e in enumerate(comb_regexes(n)):
        tag = regex_to_nfa(Lit((FORALL, i)), gamma)
        parts.append(concat(lift(regex_to_nfa(e, sigma), sigma, n), tag))
    return union_all(parts)


def rho_forall_member(word: Sequence, a: Nfa) -> bool:
    """Is every annotation of ``word`` accepted by ``a`` (over letter x digit pairs)?"""
    annotations = sorted({d for _, d in a.alphabet})
    return universal_preimage_member(tuple(word), a, annotations)


# ---------------------------------------------------------------------------
# the six conditions


class _Parts:
    """Regex building blocks over the instance alphabet."""

    def __init__(self, inst: CorridorInstance):
        self.inst = inst
        self.sigma = inst.sigma()
        self.digits = inst.digits()
        self.tiles = inst.tile_atoms()

    def lit(self, a, mark=None):
        return Lit(a if mark is None else (a, mark))

    def cls(self, symbols, mark=None):
        return Class(symbols if mark is None else [(a, mark) for a in symbols])

    def num(self, mark=None):
        return self.cls(self.digits, mark)

    def any(self, mark=None):
        return Star(self.cls(self.sigma, mark))

    def cell(self, tiles=None, mark=None):
        tiles = self.tiles if tiles is None else tiles
        return seq(self.lit(CELL_OPEN, mark), Star(self.num(mark)), self.cls(tiles, mark),
                   Star(self.num(mark)), self.lit(FORALL, mark), self.lit(CELL_CLOSE, mark))


def row_structure_regex(inst: CorridorInstance) -> Regex:
    p = _Parts(inst)
    n = inst.n
    first = seq(Lit(CELL_OPEN), Lit(n), p.cls(p.tiles), Star(p.num()), Lit(FORALL),
                Lit(CELL_CLOSE))
    last = seq(Lit(CELL_OPEN), Star(p.num()), p.cls(p.tiles), Lit(n), Lit(FORALL),
               Lit(CELL_CLOSE))
    return Star(seq(Lit(ROW_OPEN), first, Star(p.cell()), last, Lit(ROW_CLOSE)))


def corner_regex(inst: CorridorInstance) -> Regex:
    """First row starts with the top-left tile, last row ends with the bottom-right tile."""
    p = _Parts(inst)
    first = p.cell([inst.tile_atom(inst.top_left)])
    last = p.cell([inst.tile_atom(inst.bottom_right)])
    cells = Star(p.cell())
    several = seq(Lit(ROW_OPEN), first, cells, Lit(ROW_CLOSE), p.any(),
                  Lit(ROW_OPEN), cells, last, Lit(ROW_CLOSE))
    single = seq(Lit(ROW_OPEN), first, cells, last, Lit(ROW_CLOSE))
    return Union((several, single))


def colour_automaton(inst: CorridorInstance) -> Nfa:
    """Tracks the right colour of the last tile; every state is initial and final."""
    colours = inst.colours()
    idx = {c: i for i, c in enumerate(colours)}
    sigma = inst.sigma()
    trans = []
    for k, t in enumerate(inst.tiles):
        trans.append((idx[t.left], inst.tile_atom(k), idx[t.right]))
    tile_atoms = set(inst.tile_atoms())
    for a in sigma:
        if a == ROW_OPEN:
            trans.extend((i, a, j) for i in idx.values() for j in idx.values())
        elif a not in tile_atoms:
            trans.extend((i, a, i) for i in idx.values())
    states = range(len(colours))
    return Nfa(len(colours), sigma, trans, states, states)


def filter_regex(i: int, inst: CorridorInstance) -> Regex:
    """The filters of conditions 4, 5 and 6 over (letter, mark) pairs."""
    p = _Parts(inst)
    T, B = TOP, BOTTOM
    n_top, n_bot = p.num(T), p.num(B)
    tiles_b = p.cls(p.tiles, B)
    if i == 4:
        return seq(p.lit(CELL_OPEN, B), Star(n_top), tiles_b, Star(n_top), p.lit(FORALL, T),
                   p.lit(CELL_CLOSE, B), p.any(B))
    if i == 5:
        def cell(prefix, tail_mark):
            return seq(p.lit(CELL_OPEN, B), Star(prefix), tiles_b, n_top, Star(n_bot),
                       p.lit(FORALL, tail_mark), p.lit(CELL_CLOSE, B))
        several = seq(cell(n_top, B), Star(cell(n_bot, B)), cell(n_bot, T))
        return seq(Union((several, cell(n_top, T))), p.lit(ROW_CLOSE, B), p.any(B))
    if i == 6:
        other = Star(p.cell(mark=B))
        options = []
        for k, t in enumerate(inst.tile_atoms()):
            below = [inst.tile_atom(j) for j in inst.below(k)]
            if not below:
                continue
            upper = seq(p.lit(CELL_OPEN, B), Star(n_top), p.lit(t, B), Star(n_bot),
                        p.lit(FORALL, B), p.lit(CELL_CLOSE, B))
            lower = seq(p.lit(CELL_OPEN, B), Star(n_bot), p.cls(below, B), Star(n_top),
                        p.lit(FORALL, T), p.lit(CELL_CLOSE, B))
            options.append(seq(upper, other, p.lit(ROW_CLOSE, B), p.lit(ROW_OPEN, B),
                               other, lower, other, p.lit(ROW_CLOSE, B), p.any(B)))
        return Union(options) if options else Empty()
    raise ValueError("filters exist for conditions 4, 5 and 6")


class ConditionChecker:
    """Direct checkers for the six conditions, compiled once per instance."""

    def __init__(self, inst: CorridorInstance):
        self.inst = inst
        self.sigma = inst.sigma()
        self.known = set(self.sigma)
        self.structure = regex_to_nfa(row_structure_regex(inst), self.sigma)
        self.corners = regex_to_nfa(corner_regex(inst), self.sigma)
        self.colours = colour_automaton(inst)
        self.filters = {i: CompiledFilter(filter_regex(i, inst), self.sigma) for i in (4, 5, 6)}
        self.target = comb(inst.n) + (FORALL,)

    def check(self, i: int, w: Sequence) -> bool:
        w = tuple(w)
        if w[:1] == (FORALL,):
            w = w[1:]
        if any(a not in self.known for a in w):
            return False
        if i == 1:
            return _accepts(self.structure, w)
        if i == 2:
            return _accepts(self.corners, w)
        if i == 3:
            return _accepts(self.colours, w)
        if i not in (4, 5, 6):
            raise ValueError("condition index must be in 1..6")
        f = self.filters[i]
        rows_after = [0] * (len(w) + 1)
        for pos in range(len(w) - 1, -1, -1):
            rows_after[pos] = rows_after[pos + 1] + (w[pos] == ROW_OPEN)
        for start in range(1, len(w)):
            if w[start] != CELL_OPEN:
                continue
            if i == 6 and not rows_after[start]:
                continue
            if not f.contains(w[start:], self.target):
                return False
        return True

    def in_language(self, w: Sequence) -> bool:
        w = tuple(w)
        if w[:1] != (FORALL,):
            return False
        return all(self.check(i, w[1:]) for i in range(1, 7))


def _accepts(a: Nfa, w: tuple) -> bool:
    cur = a.initial
    for x in w:
        cur = a.step(cur, x)
        if not cur:
            return False
    return bool(cur & a.final)


def cond_check(i: int, inst: CorridorInstance, w: Sequence) -> bool:
    """Condition ``i`` on ``w``; a leading A is skipped so whole encodings can be passed."""
    return ConditionChecker(inst).check(i, w)


def in_LI(inst: CorridorInstance, w: Sequence) -> bool:
    return ConditionChecker(inst).in_language(w)


# ---------------------------------------------------------------------------
# automata over annotated letters


def allsuf(a: Nfa, n: int) -> Nfa:
    """One fresh start state that reads zero-annotated letters and enters ``a``
    on the first letter with a non-zero annotation."""
    s = a.n_states
    trans = set(a.transitions)
    for sym in a.alphabet:
        letter, digit = sym
        if digit == 0:
            trans.add((s, sym, s))
        else:
            trans.update((s, sym, q) for q in a.initial)
    return Nfa(s + 1, a.alphabet, trans, {s}, set(a.final) | {s})


def underline_product(c: Nfa, f: Nfa) -> Nfa:
    """Runs ``c`` on the TOP-marked letters read by ``f`` (reachable part only)."""
    gamma = c.alphabet
    starts = [(p, q) for p in sorted(c.initial) for q in sorted(f.initial)]
    index = {pq: k for k, pq in enumerate(starts)}
    todo = list(starts)
    trans = []
    while todo:
        p, q = pq = todo.pop()
        src = index[pq]
        f_edges = f.out_edges(q)
        for sym in gamma:
            letter, _ = sym
            targets = []
            for s in f_edges.get((letter, TOP), ()):
                targets.extend((r, s) for r in c.successors(p, sym))
            for s in f_edges.get((letter, BOTTOM), ()):
                targets.append((p, s))
            for t in targets:
                if t not in index:
                    index[t] = len(index)
                    todo.append(t)
                trans.append((src, sym, index[t]))
    final = [k for (p, q), k in index.items() if p in c.final and q in f.final]
    return Nfa(len(index), gamma, trans, range(len(starts)), final)


def guard_regex(i: int, sigma: Sequence) -> Regex:
    """Suffixes that condition ``i`` does not constrain (including the empty one)."""
    not_cell = seq(Class([a for a in sigma if a != CELL_OPEN]), Star(Class(sigma)))
    if i in (4, 5):
        return Union((EPSILON, not_cell))
    no_row = Star(Class([a for a in sigma if a != ROW_OPEN]))
    return Union((not_cell, no_row))


@dataclass
class Reduction:
    inst: CorridorInstance
    comb: Nfa
    hats: dict
    conditions: dict
    annotated: Nfa
    full: Nfa
    sizes: dict = field(default_factory=dict)


def build_reduction(inst: CorridorInstance) -> Reduction:
    n = inst.n
    if n < MIN_N:
        raise ValueError(f"the reduction needs n >= {MIN_N}, got {n}")
    sigma = inst.sigma()
    gamma = annotated_alphabet(sigma, n)
    c_n = comb_automaton(n, sigma)
    conditions = {
        1: lift(regex_to_nfa(row_structure_regex(inst), sigma), sigma, n),
        2: lift(regex_to_nfa(corner_regex(inst), sigma), sigma, n),
        3: lift(colour_automaton(inst), sigma, n),
    }
    hats = {}
    for i in (4, 5, 6):
        f = regex_to_nfa(filter_regex(i, inst), marked_alphabet(sigma))
        hats[i] = bisimulation_quotient(trim(underline_product(c_n, f)))
        guard = lift(regex_to_nfa(guard_regex(i, sigma), sigma), sigma, n)
        conditions[i] = allsuf(union_all([hats[i], guard]), n)
    branches = []
    for i in TAGS:
        branches.append(concat(regex_to_nfa(Lit((FORALL, i)), gamma), conditions[i]))
    rest = [(FORALL, d) for d in range(n + 1) if d not in TAGS]
    branches.append(regex_to_nfa(seq(Class(rest), Star(Class(gamma))), gamma))
    annotated = union_all(branches)

    wide = padded_alphabet(sigma, 2)
    pairs = Class([(a, b) for a in sigma for b in sigma])
    mismatch = Union((seq(Star(pairs), plus(Class([(a, PAD) for a in sigma]))),
                      seq(Star(pairs), plus(Class([(PAD, b) for b in sigma])))))
    digits = set(inst.digits())
    foreign = seq(Star(pairs), Class([(a, b) for a in sigma for b in sigma if b not in digits]),
                  Star(pairs))
    full = union_all([with_alphabet(annotated, wide), regex_to_nfa(mismatch, wide),
                      regex_to_nfa(foreign, wide)])
    sizes = {"comb": c_n.n_states, "full": full.n_states, "annotated": annotated.n_states}
    sizes.update({f"hat{i}": h.n_states for i, h in hats.items()})
    sizes.update({f"cond{i}": c.n_states for i, c in conditions.items()})
    return Reduction(inst, c_n, hats, conditions, annotated, full, sizes)
