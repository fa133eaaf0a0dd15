"""Formulas of Buchi arithmetic <N, 0, 1, +, V_p> with a bounded evaluator.

Quantifiers in ``eval_bounded`` range over 0..bound. This is a testing
device: it agrees with the real semantics only when every relevant witness
lies below the bound.

Existential blocks are solved as small constraint problems: conjuncts are
checked as soon as their variables are known, linear equations and V_p
atoms with a single unknown are solved directly, and disjunctions are split
before any variable is enumerated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

# ---------------------------------------------------------------------------
# terms


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Const(Term):
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("constants are naturals")


@dataclass(frozen=True)
class Sum(Term):
    terms: tuple

    def __init__(self, terms):
        object.__setattr__(self, "terms", tuple(terms))


@dataclass(frozen=True)
class ScaledVar(Term):
    coef: int
    var: Var

    def __post_init__(self):
        if self.coef < 1:
            raise ValueError("coefficients are positive")


def term(x) -> Term:
    if isinstance(x, Term):
        return x
    if isinstance(x, str):
        return Var(x)
    if isinstance(x, int):
        return Const(x)
    raise TypeError(f"not a term: {x!r}")


def linear(t: Term) -> tuple[dict, int]:
    """Coefficient map and constant of a term."""
    if isinstance(t, Var):
        return {t.name: 1}, 0
    if isinstance(t, Const):
        return {}, t.value
    if isinstance(t, ScaledVar):
        return {t.var.name: t.coef}, 0
    coefs: dict = {}
    const = 0
    for s in t.terms:
        c2, k2 = linear(s)
        const += k2
        for v, c in c2.items():
            coefs[v] = coefs.get(v, 0) + c
    return coefs, const


def term_value(t: Term, env: Mapping[str, int]) -> int:
    coefs, const = linear(t)
    return const + sum(c * env[v] for v, c in coefs.items())


def term_vars(t: Term) -> frozenset:
    return frozenset(linear(t)[0])


# ---------------------------------------------------------------------------
# formulas


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Lt(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Gt(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Vp(Formula):
    """``power`` is the largest power of p dividing ``value``."""
    power: Term
    value: Term
    p: int = 2

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("V_p needs p >= 2")


@dataclass(frozen=True)
class Pp(Formula):
    """``x`` is a power of p, i.e. V_p(x, x)."""
    x: Term
    p: int = 2

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("P_p needs p >= 2")


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: tuple

    def __init__(self, parts):
        object.__setattr__(self, "parts", tuple(parts))


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple

    def __init__(self, parts):
        object.__setattr__(self, "parts", tuple(parts))


@dataclass(frozen=True)
class Implies(Formula):
    premise: Formula
    conclusion: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, eq=False)
class Opaque(Formula):
    """A leaf with executable semantics.

    ``holds`` decides the predicate on argument values. ``compute``, when
    given, returns the unique last argument for the others (or None if there
    is none). ``prefix`` is the quantifier prefix of the formula the leaf
    stands for; it is only used by ``prefix_shape``.
    """
    name: str
    args: tuple
    holds: Callable = field(repr=False)
    compute: Callable | None = field(default=None, repr=False)
    prefix: str = ""


TRUE = And(())
FALSE = Or(())


def exists(names, body: Formula) -> Formula:
    for v in reversed(list(names)):
        body = Exists(v, body)
    return body


def forall(names, body: Formula) -> Formula:
    for v in reversed(list(names)):
        body = Forall(v, body)
    return body


def le(a, b) -> Formula:
    """a <= b, written with the primitive order."""
    return Not(Gt(term(a), term(b)))


# ---------------------------------------------------------------------------
# semantics


def vp_eval(p: int, x: int, y: int) -> bool:
    """x is the largest power of p dividing y."""
    if p < 2:
        raise ValueError("p must be at least 2")
    if x < 1 or y == 0:
        return False
    k = x
    while k % p == 0:
        k //= p
    if k != 1:
        return False
    return y % x == 0 and y % (p * x) != 0


def largest_power_dividing(p: int, y: int) -> int | None:
    if y == 0:
        return None
    x = 1
    while y % (p * x) == 0:
        x *= p
    return x


def is_power(p: int, x: int) -> bool:
    return vp_eval(p, x, x)


def free_vars(f: Formula) -> frozenset:
    if isinstance(f, (Eq, Lt, Gt)):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, Vp):
        return term_vars(f.power) | term_vars(f.value)
    if isinstance(f, Pp):
        return term_vars(f.x)
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_vars(p) for p in f.parts))
    if isinstance(f, Implies):
        return free_vars(f.premise) | free_vars(f.conclusion)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    if isinstance(f, Opaque):
        return frozenset().union(*(term_vars(t) for t in f.args))
    raise TypeError(f"not a formula: {f!r}")


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form; implications become disjunctions."""
    if isinstance(f, Not):
        return nnf(f.body, not negate)
    if isinstance(f, Implies):
        return nnf(Or((Not(f.premise), f.conclusion)), negate)
    if isinstance(f, And):
        parts = tuple(nnf(p, negate) for p in f.parts)
        return Or(parts) if negate else And(parts)
    if isinstance(f, Or):
        parts = tuple(nnf(p, negate) for p in f.parts)
        return And(parts) if negate else Or(parts)
    if isinstance(f, Exists):
        body = nnf(f.body, negate)
        return Forall(f.var, body) if negate else Exists(f.var, body)
    if isinstance(f, Forall):
        body = nnf(f.body, negate)
        return Exists(f.var, body) if negate else Forall(f.var, body)
    return Not(f) if negate else f


def substitute(f: Formula, old: str, new: str) -> Formula:
    """Rename free occurrences of variable ``old``."""
    def t(x: Term) -> Term:
        if isinstance(x, Var):
            return Var(new) if x.name == old else x
        if isinstance(x, ScaledVar):
            return ScaledVar(x.coef, t(x.var))
        if isinstance(x, Sum):
            return Sum(t(s) for s in x.terms)
        return x

    if isinstance(f, (Eq, Lt, Gt)):
        return type(f)(t(f.left), t(f.right))
    if isinstance(f, Vp):
        return Vp(t(f.power), t(f.value), f.p)
    if isinstance(f, Pp):
        return Pp(t(f.x), f.p)
    if isinstance(f, Not):
        return Not(substitute(f.body, old, new))
    if isinstance(f, (And, Or)):
        return type(f)(substitute(p, old, new) for p in f.parts)
    if isinstance(f, Implies):
        return Implies(substitute(f.premise, old, new), substitute(f.conclusion, old, new))
    if isinstance(f, (Exists, Forall)):
        if f.var == old:
            return f
        return type(f)(f.var, substitute(f.body, old, new))
    if isinstance(f, Opaque):
        return Opaque(f.name, tuple(t(a) for a in f.args), f.holds, f.compute, f.prefix)
    raise TypeError(f"not a formula: {f!r}")


class _Evaluator:
    def __init__(self, bound: int):
        self.bound = bound
        self._fv: dict = {}
        self._fresh = itertools.count()

    def fv(self, f: Formula) -> frozenset:
        key = id(f)
        hit = self._fv.get(key)
        if hit is None or hit[0] is not f:
            hit = self._fv[key] = (f, free_vars(f))
        return hit[1]

    def holds(self, f: Formula, env: dict) -> bool:
        if isinstance(f, Eq):
            return term_value(f.left, env) == term_value(f.right, env)
        if isinstance(f, Lt):
            return term_value(f.left, env) < term_value(f.right, env)
        if isinstance(f, Gt):
            return term_value(f.left, env) > term_value(f.right, env)
        if isinstance(f, Vp):
            return vp_eval(f.p, term_value(f.power, env), term_value(f.value, env))
        if isinstance(f, Pp):
            return is_power(f.p, term_value(f.x, env))
        if isinstance(f, Not):
            return not self.holds(f.body, env)
        if isinstance(f, And):
            return all(self.holds(p, env) for p in f.parts)
        if isinstance(f, Or):
            return any(self.holds(p, env) for p in f.parts)
        if isinstance(f, Implies):
            return not self.holds(f.premise, env) or self.holds(f.conclusion, env)
        if isinstance(f, Exists):
            return self.solve([f], env)
        if isinstance(f, Forall):
            return not self.solve([nnf(f, negate=True)], env)
        if isinstance(f, Opaque):
            return bool(f.holds(*(term_value(a, env) for a in f.args)))
        raise TypeError(f"not a formula: {f!r}")

    # -- existential blocks -------------------------------------------------

    def _flatten(self, todo: list, env: dict, unknown: set) -> list:
        out = []
        todo = list(todo)
        while todo:
            f = todo.pop()
            if isinstance(f, And):
                todo.extend(f.parts)
            elif isinstance(f, Exists):
                var, body = f.var, f.body
                if var in env or var in unknown:
                    new = f"{var}'{next(self._fresh)}"
                    body = substitute(body, var, new)
                    var = new
                unknown.add(var)
                todo.append(body)
            elif isinstance(f, Forall):
                out.append(f)
            elif isinstance(f, Implies):
                out.append(nnf(f))
            elif isinstance(f, Not) and isinstance(f.body, (And, Or, Implies, Exists, Forall, Not)):
                todo.append(nnf(f))
            else:
                out.append(f)
        return out

    def solve(self, conjuncts: list, env: dict) -> bool:
        """Is there an assignment of the block's variables making all conjuncts true?"""
        env = dict(env)
        unknown: set = set()
        pending = self._flatten(conjuncts, env, unknown)
        return self._search(pending, env, unknown)

    def _search(self, pending: list, env: dict, unknown: set) -> bool:
        pending = list(pending)
        unknown = set(unknown)
        env = dict(env)
        while True:
            progress = False
            rest = []
            for c in pending:
                if not (self.fv(c) & unknown):
                    if not self.holds(c, env):
                        return False
                    progress = True
                else:
                    rest.append(c)
            pending = rest
            if not pending:
                return True
            for c in pending:
                res = self._propagate(c, env, unknown)
                if res is False:
                    return False
                if res:
                    progress = True
                    break
            if not progress:
                break
        ors = [c for c in pending if isinstance(c, Or)]
        if ors:
            best = None
            for c in ors:
                viable = [d for d in c.parts if not self._refuted(d, env, unknown)]
                if best is None or len(viable) < len(best[1]):
                    best = (c, viable)
            c, viable = best
            others = [x for x in pending if x is not c]
            for d in viable:
                local_unknown = set(unknown)
                local_env = dict(env)
                extra = self._flatten([d], local_env, local_unknown)
                if self._search(others + extra, local_env, local_unknown):
                    return True
            return False
        var, values = self._pick(pending, env, unknown)
        unknown.discard(var)
        for value in values:
            env[var] = value
            if self._search(pending, env, unknown):
                return True
        return False

    def _refuted(self, f: Formula, env: dict, unknown: set) -> bool:
        parts = f.parts if isinstance(f, And) else (f,)
        for p in parts:
            if isinstance(p, (Eq, Lt, Gt, Vp, Pp)) and not (self.fv(p) & unknown):
                if not self.holds(p, env):
                    return True
        return False

    def _bind(self, var, value, env, unknown):
        if value is None or not 0 <= value <= self.bound:
            return False
        env[var] = value
        unknown.discard(var)
        return True

    def _propagate(self, c: Formula, env: dict, unknown: set):
        """Bind one variable determined by ``c``; None if ``c`` determines nothing."""
        if isinstance(c, Eq):
            lc, lk = linear(c.left)
            rc, rk = linear(c.right)
            coefs = dict(lc)
            for v, k in rc.items():
                coefs[v] = coefs.get(v, 0) - k
            const = lk - rk
            open_vars = [v for v, k in coefs.items() if k and v in unknown]
            if len(open_vars) != 1:
                return None
            var = open_vars[0]
            total = const + sum(k * env[v] for v, k in coefs.items() if k and v != var)
            k = coefs[var]
            if total % k:
                return False
            return self._bind(var, -total // k, env, unknown)
        if isinstance(c, Vp):
            if isinstance(c.power, Var) and c.power.name in unknown \
                    and not (term_vars(c.value) & unknown):
                return self._bind(c.power.name,
                                  largest_power_dividing(c.p, term_value(c.value, env)),
                                  env, unknown)
            return None
        if isinstance(c, Opaque) and c.compute is not None and c.args:
            last = c.args[-1]
            if isinstance(last, Var) and last.name in unknown and not any(
                    term_vars(a) & unknown for a in c.args[:-1]):
                value = c.compute(*(term_value(a, env) for a in c.args[:-1]))
                return self._bind(last.name, value, env, unknown)
        return None

    def _pick(self, pending, env, unknown):
        ranges = {v: [0, self.bound] for v in unknown}
        for c in pending:
            if isinstance(c, (Lt, Gt)):
                small, big = (c.left, c.right) if isinstance(c, Lt) else (c.right, c.left)
                if isinstance(small, Var) and small.name in unknown and not (term_vars(big) & unknown):
                    r = ranges[small.name]
                    r[1] = min(r[1], term_value(big, env) - 1)
                if isinstance(big, Var) and big.name in unknown and not (term_vars(small) & unknown):
                    r = ranges[big.name]
                    r[0] = max(r[0], term_value(small, env) + 1)
            elif isinstance(c, Not) and isinstance(c.body, Gt):
                # not (a > b) is a <= b
                a, b = c.body.left, c.body.right
                if isinstance(a, Var) and a.name in unknown and not (term_vars(b) & unknown):
                    ranges[a.name][1] = min(ranges[a.name][1], term_value(b, env))
                if isinstance(b, Var) and b.name in unknown and not (term_vars(a) & unknown):
                    ranges[b.name][0] = max(ranges[b.name][0], term_value(a, env))
        powers = {c.x.name: c.p for c in pending
                  if isinstance(c, Pp) and isinstance(c.x, Var) and c.x.name in unknown}
        used = set().union(*(self.fv(c) for c in pending)) & unknown
        candidates = sorted(used or unknown)

        def size(v):
            lo, hi = ranges[v]
            if v in powers:
                return max(0, hi).bit_length()
            return hi - lo + 1

        var = min(candidates, key=lambda v: (size(v), v))
        lo, hi = ranges[var]
        if var in powers:
            p = powers[var]
            values = []
            k = 1
            while k <= hi:
                if k >= lo:
                    values.append(k)
                k *= p
            return var, values
        return var, range(lo, hi + 1)


def eval_bounded(f: Formula, env: Mapping[str, int] | None = None, bound: int = 64) -> bool:
    env = dict(env or {})
    missing = free_vars(f) - set(env)
    if missing:
        raise ValueError(f"unassigned free variables: {sorted(missing)}")
    return _Evaluator(bound).holds(f, env)


def leading_block(f: Formula) -> tuple[list[str], Formula]:
    names = []
    while isinstance(f, Exists):
        names.append(f.var)
        f = f.body
    return names, f


def eval_with_witness(f: Formula, witness: Mapping[str, int], bound: int = 64) -> bool:
    """Fix the leading existential block from ``witness`` and evaluate the rest."""
    names, matrix = leading_block(f)
    missing = [v for v in names if v not in witness]
    if missing:
        raise ValueError(f"witness leaves {missing} unassigned")
    env = {v: witness[v] for v in names}
    extra = {k: v for k, v in witness.items() if k not in env}
    env.update(extra)
    return eval_bounded(matrix, env, bound)


# ---------------------------------------------------------------------------
# quantifier prefixes


EXISTS_SIGN = "∃"
FORALL_SIGN = "∀"


def _expand_opaque(f: Formula) -> Formula:
    """Replace flagged opaque leaves by dummy quantifiers of the same shape."""
    if isinstance(f, Opaque):
        body: Formula = TRUE
        for k, sign in enumerate(reversed(f.prefix)):
            name = f"_{f.name}{k}"
            body = Exists(name, body) if sign == EXISTS_SIGN else Forall(name, body)
        return body
    if isinstance(f, Not):
        return Not(_expand_opaque(f.body))
    if isinstance(f, (And, Or)):
        return type(f)(_expand_opaque(p) for p in f.parts)
    if isinstance(f, Implies):
        return Implies(_expand_opaque(f.premise), _expand_opaque(f.conclusion))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, _expand_opaque(f.body))
    return f


def _pull(f: Formula, kind: type) -> tuple[Formula, bool]:
    """Remove every quantifier of ``kind`` not nested below the other kind."""
    if isinstance(f, kind):
        body, _ = _pull(f.body, kind)
        return body, True
    if isinstance(f, (And, Or)):
        parts, hit = [], False
        for p in f.parts:
            q, h = _pull(p, kind)
            parts.append(q)
            hit = hit or h
        return type(f)(parts), hit
    return f, False


def _has_quantifier(f: Formula) -> bool:
    if isinstance(f, (Exists, Forall)):
        return True
    if isinstance(f, (And, Or)):
        return any(_has_quantifier(p) for p in f.parts)
    return False


def prefix_shape(f: Formula) -> str:
    """Block pattern of a prenex form, pulling existential blocks first."""
    g = nnf(_expand_opaque(f))
    shape = ""
    kind, sign = Exists, EXISTS_SIGN
    while _has_quantifier(g):
        g, hit = _pull(g, kind)
        if hit:
            shape += sign
        kind, sign = (Forall, FORALL_SIGN) if kind is Exists else (Exists, EXISTS_SIGN)
    return shape


# ---------------------------------------------------------------------------
# printing


def show_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return str(t.value)
    if isinstance(t, ScaledVar):
        return f"{t.coef}{t.var.name}"
    return "(" + " + ".join(show_term(s) for s in t.terms) + ")"


def show(f: Formula) -> str:
    if isinstance(f, Eq):
        return f"{show_term(f.left)} = {show_term(f.right)}"
    if isinstance(f, Lt):
        return f"{show_term(f.left)} < {show_term(f.right)}"
    if isinstance(f, Gt):
        return f"{show_term(f.left)} > {show_term(f.right)}"
    if isinstance(f, Vp):
        return f"V{f.p}({show_term(f.power)}, {show_term(f.value)})"
    if isinstance(f, Pp):
        return f"P{f.p}({show_term(f.x)})"
    if isinstance(f, Not):
        return f"~{show(f.body)}" if not isinstance(f.body, (And, Or, Implies)) \
            else f"~({show(f.body)})"
    if isinstance(f, And):
        return "true" if not f.parts else " & ".join(_wrap(p) for p in f.parts)
    if isinstance(f, Or):
        return "false" if not f.parts else " | ".join(_wrap(p) for p in f.parts)
    if isinstance(f, Implies):
        return f"{_wrap(f.premise)} -> {_wrap(f.conclusion)}"
    if isinstance(f, Exists):
        return f"E{f.var}. {show(f.body)}"
    if isinstance(f, Forall):
        return f"A{f.var}. {show(f.body)}"
    if isinstance(f, Opaque):
        return f"{f.name}(" + ", ".join(show_term(a) for a in f.args) + ")"
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula) -> str:
    s = show(f)
    return f"({s})" if isinstance(f, (And, Or, Implies, Exists, Forall)) and f != TRUE else s


# ---------------------------------------------------------------------------
# builders for the tiling encodings

_names = itertools.count()


def _fresh(stem: str) -> str:
    return f"{stem}.{next(_names)}"


def ge(a, b) -> Formula:
    return Not(Lt(term(a), term(b)))


def twice(x) -> Term:
    x = term(x)
    if isinstance(x, Var):
        return ScaledVar(2, x)
    return Sum((x, x))


def bit_of(v: int, x: int) -> int | None:
    """Digit of v at weight x, or None when x is not a power of two."""
    if not is_power(2, x):
        return None
    return (v // x) & 1


def digit_of(us, x: int) -> int | None:
    """Number spelled by the bits of ``us`` at weight x (first entry most significant)."""
    if not is_power(2, x):
        return None
    value = 0
    for u in us:
        value = 2 * value + ((u // x) & 1)
    return value


def bit_at(v, x, b, opaque: bool = False) -> Formula:
    """The digit of v at weight x (a power of two) is b."""
    v, x, b = term(v), term(x), term(b)
    if opaque:
        return Opaque("BitAt", (v, x, b),
                      holds=lambda vv, xx, bb: bit_of(vv, xx) == bb,
                      compute=bit_of, prefix=EXISTS_SIGN)
    pre, y, suf = _fresh("pre"), _fresh("y"), _fresh("suf")
    return exists([pre, y, suf], And((
        Pp(x),
        Or((And((Vp(Var(y), Var(pre)), Gt(Var(y), x))), Eq(Var(pre), Const(0)))),
        Gt(x, Var(suf)),
        Or((And((Eq(b, Const(0)), Eq(v, Sum((Var(pre), Var(suf)))))),
            And((Eq(b, Const(1)), Eq(v, Sum((Var(pre), x, Var(suf)))))))),
    )))


def num_at(us, x, a, opaque: bool = False) -> Formula:
    """The bits of the tuple ``us`` at weight x spell the number a."""
    us = tuple(term(u) for u in us)
    x, a = term(x), term(a)
    k = len(us)
    if k < 1:
        raise ValueError("NumAt needs at least one component")
    if opaque:
        return Opaque(f"NumAt{k}", us + (x, a),
                      holds=lambda *vals: digit_of(vals[:k], vals[k]) == vals[k + 1],
                      compute=lambda *vals: digit_of(vals[:k], vals[k]),
                      prefix=EXISTS_SIGN)
    acc = [_fresh("a") for _ in range(k + 1)]
    bits = [_fresh("b") for _ in range(k)]
    parts = [Eq(Var(acc[0]), Const(0)), Eq(Var(acc[k]), a)]
    for i in range(1, k + 1):
        parts.append(Eq(Var(acc[i]), Sum((ScaledVar(2, Var(acc[i - 1])), Var(bits[i - 1])))))
        parts.append(bit_at(us[i - 1], x, Var(bits[i - 1])))
    return exists(acc + bits, And(parts))


def max_num(k: int, n_var, opaque: bool = False) -> Formula:
    """n_var = 2^k - 1."""
    return num_at([Const(1)] * k, Const(1), n_var, opaque)


def _tile_is(t, indices) -> Formula:
    t = term(t)
    return Or(tuple(Eq(t, Const(i)) for i in indices))


def top_left(inst, t) -> Formula:
    return _tile_is(t, [inst.top_left])


def bottom_right(inst, t) -> Formula:
    return _tile_is(t, [inst.bottom_right])


def _match(inst, t, t2, ok) -> Formula:
    t, t2 = term(t), term(t2)
    pairs = [(i, j) for i, a in enumerate(inst.tiles) for j, b in enumerate(inst.tiles) if ok(a, b)]
    return Or(tuple(And((Eq(t, Const(i)), Eq(t2, Const(j)))) for i, j in pairs))


def match_h(inst, t, t2) -> Formula:
    return _match(inst, t, t2, lambda a, b: a.right == b.left)


def match_v(inst, t, t2) -> Formula:
    return _match(inst, t, t2, lambda a, b: a.bottom == b.top)


def is_a_ruler(us, f, n_var, opaque: bool = False) -> Formula:
    """Digits of ``us`` read 0 at weight 2f and descend cyclically from N to 0 towards weight 1.

    The universal range includes x = f, which ties the value at 2f to the
    rest of the sequence and forces 2f to be a multiple of the period.
    """
    f, n_var = term(f), term(n_var)
    x, v2, v = _fresh("x"), _fresh("v'"), _fresh("v")
    step = Or((Eq(Var(v2), Sum((Var(v), Const(1)))),
               And((Eq(Var(v2), Const(0)), Eq(Var(v), n_var)))))
    return And((
        num_at(us, Const(1), Const(0), opaque),
        num_at(us, twice(f), Const(0), opaque),
        Forall(x, Implies(
            And((le(Var(x), f), ge(Var(x), Const(1)), Pp(Var(x)))),
            exists([v2, v], And((num_at(us, twice(Var(x)), Var(v2), opaque),
                                 num_at(us, Var(x), Var(v), opaque),
                                 step))))),
    ))


def width_mul(us, x, n_var, opaque: bool = False) -> Formula:
    return num_at(us, x, Const(0), opaque)


def width(us, x, x2, n_var, opaque: bool = False) -> Formula:
    """x and x2 carry the same ruler digit with no repetition strictly between them."""
    x, x2 = term(x), term(x2)
    v, y = _fresh("v"), _fresh("y")
    return Exists(v, And((
        num_at(us, x, Var(v), opaque),
        num_at(us, x2, Var(v), opaque),
        Forall(y, Implies(And((Gt(x, Var(y)), Gt(Var(y), x2), Pp(Var(y)))),
                          Not(num_at(us, Var(y), Var(v), opaque)))),
    )))


def _tiling_formula(inst, ruler, wmul, wid, opaque: bool) -> Formula:
    n = inst.n
    m = tile_bits(inst)
    us = [f"u{i}" for i in range(1, n + 1)]
    ws = [f"w{i}" for i in range(1, m + 1)]
    F, N = Var("F"), Var("N")
    t, t2, x, x2 = _fresh("t"), _fresh("t'"), _fresh("x"), _fresh("x'")
    block_b = Exists(t, And((num_at(ws, F, Var(t), opaque), top_left(inst, Var(t)))))
    t_c = _fresh("t")
    block_c = Exists(t_c, And((num_at(ws, Const(1), Var(t_c), opaque), bottom_right(inst, Var(t_c)))))
    block_d = Forall(x, Implies(
        And((Gt(F, Var(x)), Pp(Var(x)), Not(wmul(us, twice(Var(x)), N, opaque)))),
        exists([t2, t], And((num_at(ws, twice(Var(x)), Var(t2), opaque),
                             num_at(ws, Var(x), Var(t), opaque),
                             match_h(inst, Var(t2), Var(t)))))))
    s, s2 = _fresh("t"), _fresh("t'")
    block_e = forall([x, x2], Implies(
        And((Gt(twice(F), Var(x)), Gt(Var(x), Var(x2)), Pp(Var(x)), Pp(Var(x2)), wid(us, Var(x), Var(x2), N, opaque))),
        exists([s, s2], And((num_at(ws, Var(x), Var(s), opaque),
                             num_at(ws, Var(x2), Var(s2), opaque),
                             match_v(inst, Var(s), Var(s2)))))))
    matrix = And((max_num(n, N, opaque), ruler(us, F, N, opaque),
                  block_b, block_c, block_d, block_e))
    return exists(["F", "N"] + us + ws, matrix)


def tile_bits(inst) -> int:
    return max(1, (len(inst.tiles) - 1).bit_length())


def e_tiling(inst, opaque: bool = False) -> Formula:
    """Holds iff the instance has a valid tiling of width 2^n."""
    return _tiling_formula(inst, is_a_ruler, width_mul, width, opaque)


def _min_cases(v, v2, rel) -> Formula:
    # rel(min{v, v2}) by case split on which argument is smaller
    v, v2 = term(v), term(v2)
    return Or((And((le(v, v2), rel(v))), And((Lt(v2, v), rel(v2)))))


def is_a_ruler_prime(us, f, n_var, opaque: bool = False) -> Formula:
    """Digits of ``us`` between weights 2f and 1 spell N followed by repetitions of
    the ruler word of order N (without its first symbol)."""
    f, n_var = term(f), term(n_var)
    x, x2, v, v2 = _fresh("x"), _fresh("x'"), _fresh("v"), _fresh("v'")
    y, vy = _fresh("y"), _fresh("vy")
    y2, vy2 = _fresh("y"), _fresh("vy")
    X, X2, V, V2, Y, VY = map(Var, (x, x2, v, v2, y, vy))
    between = And((Gt(X, Y), Gt(Y, X2), Pp(Y), num_at(us, Y, VY, opaque)))
    larger = exists([y, vy], And((between, _min_cases(V, V2, lambda mn: ge(VY, mn)))))
    y_b, vy_b = _fresh("y"), _fresh("vy")
    YB, VYB = Var(y_b), Var(vy_b)
    only = forall([y2, vy2], Implies(
        And((Gt(X, Var(y2)), Gt(Var(y2), X2), Pp(Var(y2)), Not(Eq(Var(y2), YB)),
             num_at(us, Var(y2), Var(vy2), opaque))),
        Lt(Var(vy2), VYB)))
    one_less = exists([y_b, vy_b], And((
        Gt(X, YB), Gt(YB, X2), Pp(YB), num_at(us, YB, VYB, opaque),
        _min_cases(V, V2, lambda mn: Eq(Sum((VYB, Const(1))), mn)),
        only)))
    return And((
        num_at(us, twice(f), n_var, opaque),
        num_at(us, Const(1), n_var, opaque),
        forall([x, x2, v, v2], Implies(
            And((le(X, twice(f)), Gt(X, X2), ge(X2, Const(1)), Pp(X), Pp(X2),
                 num_at(us, X, V, opaque), num_at(us, X2, V2, opaque))),
            Or((larger, one_less, Or((Eq(V, Const(0)), Eq(V2, Const(0)))))))),
    ))


def width_mul_prime(us, x, n_var, opaque: bool = False) -> Formula:
    return num_at(us, x, n_var, opaque)


def width_prime(us, x, y, n_var, opaque: bool = False) -> Formula:
    """x and y occupy the same offset in two consecutive rows.

    Rows are delimited by the N digits p > q > r. The offset is compared
    through the bits of a virtual counter: bit B at x is set iff the segment
    from p down to x contains B and the last B in it is followed only by
    smaller digits.
    """
    x, y, n_var = term(x), term(y), term(n_var)
    p, q, r, s, b = (_fresh(k) for k in ("p", "q", "r", "s", "B"))
    P, Q, R, S, B = map(Var, (p, q, r, s, b))
    rows = And((
        Pp(x), Pp(y), Pp(P), Pp(Q), Pp(R),
        Gt(P, Q), Gt(Q, R),
        width_mul_prime(us, P, n_var, opaque),
        width_mul_prime(us, Q, n_var, opaque),
        width_mul_prime(us, R, n_var, opaque),
        Forall(s, Implies(And((Gt(P, S), Gt(S, R), Pp(S), width_mul_prime(us, S, n_var, opaque))),
                          Eq(S, Q))),
        Gt(P, x), ge(x, Q), Gt(Q, y), ge(y, R),
    ))

    def absent(hi, lo):
        z = _fresh("z")
        return Forall(z, Implies(And((Gt(hi, Var(z)), ge(Var(z), lo), Pp(Var(z)))),
                                 Not(num_at(us, Var(z), B, opaque))))

    def present(hi, lo):
        z = _fresh("z")
        return Exists(z, And((Gt(hi, Var(z)), ge(Var(z), lo), Pp(Var(z)), num_at(us, Var(z), B, opaque))))

    def later_b(last, lo):
        z = _fresh("z")
        return Exists(z, And((Gt(last, Var(z)), ge(Var(z), lo), Pp(Var(z)), num_at(us, Var(z), B, opaque))))

    def all_smaller(last, lo):
        z, w = _fresh("z"), _fresh("v")
        return Forall(z, Implies(And((Gt(last, Var(z)), ge(Var(z), lo), Pp(Var(z)))),
                                 Exists(w, And((num_at(us, Var(z), Var(w), opaque),
                                                Lt(Var(w), B))))))

    def some_larger(last, lo):
        z, w = _fresh("z"), _fresh("v")
        return exists([z, w], And((Gt(last, Var(z)), ge(Var(z), lo), Pp(Var(z)),
                                   num_at(us, Var(z), Var(w), opaque), Gt(Var(w), B))))

    x1, y1 = _fresh("x'"), _fresh("y'")
    X1, Y1 = Var(x1), Var(y1)
    same_bit = forall([x1, y1], Implies(
        And((Gt(P, X1), ge(X1, x), Pp(X1), num_at(us, X1, B, opaque),
             Gt(Q, Y1), ge(Y1, y), Pp(Y1), num_at(us, Y1, B, opaque))),
        Or((later_b(X1, x), later_b(Y1, y),
            And((all_smaller(X1, x), all_smaller(Y1, y))),
            And((some_larger(X1, x), some_larger(Y1, y)))))))
    per_bit = Forall(b, Implies(le(B, n_var), Or((
        And((absent(P, x), absent(Q, y))),
        And((present(P, x), present(Q, y), same_bit))))))
    return exists([p, q, r], And((rows, per_bit)))


def e_tiling_prime(inst, opaque: bool = False) -> Formula:
    """Holds iff the instance has a valid tiling whose width is the ruler period 2^(2^n - 1)."""
    return _tiling_formula(inst, is_a_ruler_prime, width_mul_prime, width_prime, opaque)


_BUILDERS = {
    "BitAt": (bit_at, ("v", "x", "b")),
    "NumAt": (num_at, ("us", "x", "a")),
    "MaxNum": (max_num, ("k", "N")),
    "TopLeft": (top_left, ("instance", "t")),
    "BottomRight": (bottom_right, ("instance", "t")),
    "MatchH": (match_h, ("instance", "t", "t'")),
    "MatchV": (match_v, ("instance", "t", "t'")),
    "IsARuler": (is_a_ruler, ("us", "F", "N")),
    "WidthMul": (width_mul, ("us", "x", "N")),
    "Width": (width, ("us", "x", "x'", "N")),
    "ETiling": (e_tiling, ("instance",)),
    "IsARuler'": (is_a_ruler_prime, ("us", "F", "N")),
    "WidthMul'": (width_mul_prime, ("us", "x", "N")),
    "Width'": (width_prime, ("us", "x", "y", "N")),
    "ETiling'": (e_tiling_prime, ("instance",)),
}

FORMULA_NAMES = tuple(_BUILDERS)
_HAS_MODE = {"BitAt", "NumAt", "MaxNum", "IsARuler", "WidthMul", "Width", "ETiling",
             "IsARuler'", "WidthMul'", "Width'", "ETiling'"}


def build_formula(name: str, params: Mapping | None = None, opaque: bool = False) -> Formula:
    """Build a named formula; ``opaque`` replaces NumAt/BitAt by oracle leaves."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown formula {name!r}; expected one of {', '.join(_BUILDERS)}")
    fn, keys = _BUILDERS[name]
    params = dict(params or {})
    defaults = {"v": "v", "x": "x", "b": "b", "a": "a", "N": "N", "F": "F",
                "t": "t", "t'": "t'", "x'": "x'", "y": "y"}
    if name in ("NumAt", "IsARuler", "WidthMul", "Width", "IsARuler'", "WidthMul'", "Width'") \
            and "us" not in params:
        k = params.pop("k", None)
        if k is None:
            raise ValueError(f"{name} needs 'us' or 'k'")
        params["us"] = [f"u{i}" for i in range(1, int(k) + 1)]
    args = []
    for key in keys:
        if key in params:
            args.append(params.pop(key))
        elif key in defaults:
            args.append(defaults[key])
        else:
            raise ValueError(f"{name} needs parameter {key!r}")
    params.pop("k", None)
    if params:
        raise ValueError(f"unexpected parameters for {name}: {sorted(params)}")
    if name in _HAS_MODE:
        return fn(*args, opaque=opaque)
    return fn(*args)


# ---------------------------------------------------------------------------
# witnesses


def _pack(digits_by_index: Sequence[int], width_bits: int) -> list[int]:
    """Split digits (indexed by weight exponent) into ``width_bits`` numbers, MSB first."""
    out = [0] * width_bits
    for i, d in enumerate(digits_by_index):
        for j in range(width_bits):
            if (d >> (width_bits - 1 - j)) & 1:
                out[j] |= 1 << i
    return out


def tiling_witness(inst, tiling: Sequence[Sequence[int]]) -> dict:
    """Values of F, N, u1..un, w1..wm describing ``tiling`` for the width-2^n formula."""
    rows = [tuple(r) for r in tiling]
    w = inst.width
    if not rows or any(len(r) != w for r in rows):
        raise ValueError(f"every row must have width {w}")
    total = len(rows) * w
    n, m = inst.n, tile_bits(inst)
    ruler = [i % w for i in range(total + 1)]
    cells = [t for row in rows for t in row]
    tiles = [cells[total - 1 - i] for i in range(total)]
    env = {"F": 2 ** (total - 1), "N": 2 ** n - 1}
    env.update({f"u{j + 1}": val for j, val in enumerate(_pack(ruler, n))})
    env.update({f"w{j + 1}": val for j, val in enumerate(_pack(tiles, m))})
    return env


def comb_ruler_digits(n: int, periods: int) -> list[int]:
    """Ruler digits for ``is_a_ruler_prime``, indexed by weight exponent.

    The top index holds N = 2^n - 1, followed (towards weight 1) by
    ``periods`` copies of the ruler word of order N without its first symbol.
    """
    from .tiling import comb
    big = 2 ** n - 1
    period = comb(big)[1:]
    seq = [big] + list(period) * periods
    return list(reversed(seq))


def comb_ruler(n: int, periods: int) -> dict:
    digits = comb_ruler_digits(n, periods)
    env = {"F": 2 ** (len(digits) - 2), "N": 2 ** n - 1}
    env.update({f"u{j + 1}": val for j, val in enumerate(_pack(digits, n))})
    return env


def tiling_witness_prime(inst, tiling: Sequence[Sequence[int]]) -> dict:
    """Witness for the formula built by ``e_tiling_prime``."""
    rows = [tuple(r) for r in tiling]
    w = 2 ** (2 ** inst.n - 1)
    if not rows or any(len(r) != w for r in rows):
        raise ValueError(f"every row must have width {w}")
    env = comb_ruler(inst.n, len(rows))
    total = len(rows) * w
    cells = [t for row in rows for t in row]
    tiles = [cells[total - 1 - i] for i in range(total)]
    env.update({f"w{j + 1}": val for j, val in enumerate(_pack(tiles, tile_bits(inst)))})
    return env
