"""Line-oriented text formats for automata, tiling instances, tilings and regexes.

NFA files::

    arity 2
    alphabet a b #
    alphabet a b #
    state 0
    state 1
    initial 0
    final 1
    trans 0 a|# 1

There is one ``alphabet`` line per component and the symbol alphabet is
their product. Tuple symbols join their atoms with ``|``; ``#`` is the pad
atom. Blank lines and lines starting with ``%`` are ignored.

Tiling files hold ``n <nat>``, ``tile <id> <top> <right> <bottom> <left>``,
``topleft <id>`` and ``bottomright <id>``; ids are 0..m-1.

Regexes use whitespace-separated atoms, ``+`` for union, juxtaposition for
concatenation, postfix ``*`` and ``^k``, parentheses, ``[a b c]`` for a
class, ``%e`` for the empty word and ``%0`` for the empty language.
"""

from __future__ import annotations

import itertools
import re
from typing import Iterable, Sequence

from .automata import EPSILON, Class, Concat, Empty, Lit, Nfa, Power, Regex, Star, Union
from .tiling import CorridorInstance, Tile

SEP = "|"


class ParseError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


def atom_text(a) -> str:
    s = str(a)
    if not s or SEP in s or any(c.isspace() for c in s):
        raise ValueError(f"atom {a!r} cannot be written")
    return s


def symbol_text(sym) -> str:
    if isinstance(sym, tuple):
        return SEP.join(atom_text(a) for a in sym)
    return atom_text(sym)


def parse_symbol(text: str):
    parts = text.split(SEP)
    if any(not p for p in parts):
        raise ValueError(f"malformed symbol {text!r}")
    return parts[0] if len(parts) == 1 else tuple(parts)


def word_text(word: Iterable) -> str:
    return " ".join(symbol_text(s) for s in word)


def parse_word(text: str) -> tuple:
    return tuple(parse_symbol(t) for t in text.split())


# ---------------------------------------------------------------------------
# NFA files


def _components(alphabet: Sequence) -> tuple[int, list[list[str]]]:
    syms = [s if isinstance(s, tuple) else (s,) for s in alphabet]
    arities = {len(s) for s in syms}
    if len(arities) > 1:
        raise ValueError("symbols of mixed arity")
    k = arities.pop() if arities else 1
    comps = [list(dict.fromkeys(atom_text(s[i]) for s in syms)) for i in range(k)]
    texts = {tuple(atom_text(a) for a in s) for s in syms}
    if len(texts) != len(syms) or len(texts) != _product_size(comps):
        raise ValueError("alphabet is not a product of component alphabets")
    return k, comps


def _product_size(comps) -> int:
    size = 1
    for c in comps:
        size *= len(c)
    return size


def serialize_nfa(a: Nfa) -> str:
    k, comps = _components(a.alphabet)
    order = {}
    for i, parts in enumerate(itertools.product(*comps)):
        order[parts] = i

    def key(sym):
        parts = sym if isinstance(sym, tuple) else (sym,)
        return order[tuple(atom_text(x) for x in parts)]

    lines = [f"arity {k}"]
    lines += ["alphabet " + " ".join(c) for c in comps]
    lines += [f"state {q}" for q in range(a.n_states)]
    lines += [f"initial {q}" for q in sorted(a.initial)]
    lines += [f"final {q}" for q in sorted(a.final)]
    for p, s, q in sorted(a.transitions, key=lambda t: (t[0], key(t[1]), t[2])):
        lines.append(f"trans {p} {symbol_text(s)} {q}")
    return "\n".join(lines) + "\n"


def parse_nfa(text: str) -> Nfa:
    arity = None
    comps: list[list[str]] = []
    states: dict[int, int] = {}
    initial, final, trans = [], [], []

    def state_id(tok, ln):
        try:
            q = int(tok)
        except ValueError:
            raise ParseError(ln, f"state id {tok!r} is not a number") from None
        if q not in states:
            raise ParseError(ln, f"unknown state {q}")
        return q

    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        head, *rest = line.split()
        if head == "arity":
            if arity is not None or len(rest) != 1 or not rest[0].isdigit() or int(rest[0]) < 1:
                raise ParseError(ln, "expected a single 'arity <k>' with k >= 1")
            arity = int(rest[0])
        elif head == "alphabet":
            if any(SEP in a for a in rest) or len(set(rest)) != len(rest):
                raise ParseError(ln, "alphabet atoms must be distinct and free of '|'")
            comps.append(rest)
        elif head == "state":
            if len(rest) != 1 or not rest[0].isdigit():
                raise ParseError(ln, "expected 'state <id>'")
            q = int(rest[0])
            if q in states:
                raise ParseError(ln, f"duplicate state {q}")
            states[q] = len(states)
        elif head in ("initial", "final"):
            if len(rest) != 1:
                raise ParseError(ln, f"expected '{head} <id>'")
            (initial if head == "initial" else final).append(state_id(rest[0], ln))
        elif head == "trans":
            if len(rest) != 3:
                raise ParseError(ln, "expected 'trans <p> <sym> <q>'")
            p, q = state_id(rest[0], ln), state_id(rest[2], ln)
            parts = rest[1].split(SEP)
            if arity is None or len(parts) != arity:
                raise ParseError(ln, f"symbol {rest[1]!r} does not have arity {arity}")
            for i, x in enumerate(parts):
                if i >= len(comps) or x not in comps[i]:
                    raise ParseError(ln, f"atom {x!r} not in alphabet of component {i + 1}")
            trans.append((p, parse_symbol(rest[1]), q, ln))
        else:
            raise ParseError(ln, f"unknown keyword {head!r}")
    if arity is None:
        raise ParseError(0, "missing 'arity' line")
    if len(comps) != arity:
        raise ParseError(0, f"expected {arity} alphabet lines, got {len(comps)}")
    alphabet = [p[0] if arity == 1 else tuple(p) for p in itertools.product(*comps)]
    index = {q: i for i, q in enumerate(sorted(states))}
    return Nfa(len(states), alphabet, [(index[p], s, index[q]) for p, s, q, _ in trans],
               [index[q] for q in initial], [index[q] for q in final])


# ---------------------------------------------------------------------------
# tiling files


def parse_instance(text: str) -> CorridorInstance:
    tiles: dict[int, Tile] = {}
    n = None
    tl = br = None
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        head, *rest = line.split()
        if not all(re.fullmatch(r"\d+", x) for x in rest):
            raise ParseError(ln, "fields must be natural numbers")
        vals = [int(x) for x in rest]
        if head == "tile":
            if len(vals) != 5:
                raise ParseError(ln, "expected 'tile <id> <top> <right> <bottom> <left>'")
            if vals[0] in tiles:
                raise ParseError(ln, f"duplicate tile id {vals[0]}")
            tiles[vals[0]] = Tile(*vals[1:])
        elif head in ("topleft", "bottomright", "n"):
            if len(vals) != 1:
                raise ParseError(ln, f"expected '{head} <nat>'")
            if head == "n":
                n = vals[0]
            elif head == "topleft":
                tl = vals[0]
            else:
                br = vals[0]
        else:
            raise ParseError(ln, f"unknown keyword {head!r}")
    if n is None or tl is None or br is None:
        raise ParseError(0, "missing n, topleft or bottomright")
    if sorted(tiles) != list(range(len(tiles))):
        raise ParseError(0, "tile ids must be 0..m-1")
    if tl not in tiles or br not in tiles:
        raise ParseError(0, "corner refers to an undeclared tile")
    if n < 1:
        raise ParseError(0, "n must be at least 1")
    return CorridorInstance(tuple(tiles[i] for i in range(len(tiles))), tl, br, n)


def serialize_instance(inst: CorridorInstance) -> str:
    lines = [f"n {inst.n}"]
    lines += [f"tile {i} {t.top} {t.right} {t.bottom} {t.left}" for i, t in enumerate(inst.tiles)]
    lines += [f"topleft {inst.top_left}", f"bottomright {inst.bottom_right}"]
    return "\n".join(lines) + "\n"


def tiling_text(tiling) -> str:
    return "\n".join(" ".join(str(t) for t in row) for row in tiling) + "\n"


def parse_tiling(text: str) -> tuple:
    rows = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not all(x.isdigit() for x in line.split()):
            raise ParseError(ln, "tiling rows are tile ids")
        rows.append(tuple(int(x) for x in line.split()))
    return tuple(rows)


# ---------------------------------------------------------------------------
# regexes

_TOKEN = re.compile(r"\s*(\(|\)|\[|\]|\+|\*|\^\d+|[^\s()\[\]+*^]+)")


def _tokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(1, f"unexpected character at offset {pos}")
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_regex(text: str) -> Regex:
    toks = _tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take():
        nonlocal pos
        pos += 1
        return toks[pos - 1]

    def alt():
        parts = [cat()]
        while peek() == "+":
            take()
            parts.append(cat())
        return parts[0] if len(parts) == 1 else Union(parts)

    def cat():
        parts = []
        while peek() not in (None, "+", ")"):
            parts.append(post())
        if not parts:
            raise ParseError(1, f"empty operand at token {pos + 1}")
        return parts[0] if len(parts) == 1 else Concat(parts)

    def post():
        e = base()
        while peek() is not None and (peek() == "*" or peek().startswith("^")):
            t = take()
            e = Star(e) if t == "*" else Power(e, int(t[1:]))
        return e

    def base():
        t = peek()
        if t is None:
            raise ParseError(1, "unexpected end of expression")
        take()
        if t == "(":
            e = alt()
            if peek() != ")":
                raise ParseError(1, "missing ')'")
            take()
            return e
        if t == "[":
            syms = []
            while peek() not in (None, "]"):
                syms.append(parse_symbol(take()))
            if peek() != "]":
                raise ParseError(1, "missing ']'")
            take()
            return Class(syms)
        if t in (")", "]", "+", "*") or t.startswith("^"):
            raise ParseError(1, f"unexpected {t!r}")
        if t == "%e":
            return EPSILON
        if t == "%0":
            return Empty()
        try:
            return Lit(parse_symbol(t))
        except ValueError as exc:
            raise ParseError(1, str(exc)) from None

    if not toks:
        raise ParseError(1, "empty expression")
    e = alt()
    if pos != len(toks):
        raise ParseError(1, f"unexpected {toks[pos]!r}")
    return e
