import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autorel.buchi import (FALSE, TRUE, And, Const, Eq, Exists, Forall, Gt, Implies, Lt, Not,
                           Opaque, Or, Pp, ScaledVar, Sum, Var, Vp, build_formula, comb_ruler,
                           comb_ruler_digits, e_tiling, e_tiling_prime, eval_bounded,
                           eval_with_witness, free_vars, is_a_ruler, is_a_ruler_prime,
                           largest_power_dividing, leading_block, linear, max_num, nnf,
                           prefix_shape, show, show_term, substitute, term, tiling_witness,
                           tiling_witness_prime, vp_eval, width, width_prime)
from autorel.tiling import comb, toy_instance
from oracles import bit, digit, is_power_of, vp_reference

POWERS = (1, 2, 4, 8, 16)


@pytest.mark.parametrize("p", [2, 3])
def test_vp_against_reference(p):
    for x in range(256):
        for y in range(1024):
            assert vp_eval(p, x, y) == vp_reference(p, x, y)


def test_vp_examples():
    assert vp_eval(2, 4, 12)
    assert not vp_eval(2, 3, 6)
    assert not vp_eval(2, 1, 0)
    assert largest_power_dividing(2, 12) == 4
    assert largest_power_dividing(3, 0) is None
    with pytest.raises(ValueError):
        vp_eval(1, 1, 1)


def test_vp_atom_in_formulas():
    f = Vp(Var("x"), Var("y"), 3)
    for x in range(30):
        for y in range(30):
            assert eval_bounded(f, {"x": x, "y": y}) == vp_reference(3, x, y)
    assert eval_bounded(Pp(Var("x"), 3), {"x": 27})
    assert not eval_bounded(Pp(Var("x")), {"x": 6})


def test_term_construction():
    with pytest.raises(ValueError):
        Const(-1)
    with pytest.raises(ValueError):
        ScaledVar(0, Var("x"))
    with pytest.raises(ValueError):
        Vp(Var("x"), Var("y"), 1)
    with pytest.raises(ValueError):
        Pp(Var("x"), 1)
    assert term("x") == Var("x") and term(3) == Const(3)
    coeffs, const = linear(Sum((ScaledVar(2, Var("x")), Var("x"), Const(4))))
    assert (coeffs, const) == ({"x": 3}, 4)
    assert show_term(ScaledVar(2, Var("x"))) == "2x"


def test_bit_at_against_oracle():
    f = build_formula("BitAt")
    for v in range(32):
        for x in range(1, 17):
            for b in (0, 1):
                expected = is_power_of(2, x) and bit(v, x) == b
                assert eval_bounded(f, {"v": v, "x": x, "b": b}) == expected, (v, x, b)


def test_num_at_against_oracle():
    f = build_formula("NumAt", {"k": 2})
    for u1, u2 in itertools.product(range(16), repeat=2):
        for x in POWERS[:4]:
            for a in range(4):
                expected = digit((u1, u2), x) == a
                assert eval_bounded(f, {"u1": u1, "u2": u2, "x": x, "a": a}) == expected


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 31), min_size=3, max_size=3), st.sampled_from(POWERS),
       st.integers(0, 8))
def test_opaque_num_at_matches_raw(us, x, a):
    env = {"u1": us[0], "u2": us[1], "u3": us[2], "x": x, "a": a}
    raw = build_formula("NumAt", {"k": 3})
    leaf = build_formula("NumAt", {"k": 3}, opaque=True)
    assert eval_bounded(raw, env) == eval_bounded(leaf, env) == (digit(us, x) == a)


def test_leading_quantifier_counts():
    assert len(leading_block(build_formula("BitAt"))[0]) == 3
    for k in (1, 2, 3):
        assert len(leading_block(build_formula("NumAt", {"k": k}))[0]) == 2 * k + 1


def test_max_num():
    for k in (1, 2, 3):
        f = max_num(k, "N")
        assert [n for n in range(20) if eval_bounded(f, {"N": n})] == [2 ** k - 1]


@pytest.mark.parametrize("name,shape", [
    ("BitAt", "∃"), ("NumAt", "∃"), ("MaxNum", "∃"), ("WidthMul", "∃"), ("WidthMul'", "∃"),
    ("Width", "∃∀"), ("IsARuler", "∃∀∃"), ("Width'", "∃∀∃"), ("IsARuler'", "∃∀∃∀"),
    ("ETiling", "∃∀∃"), ("ETiling'", "∃∀∃∀")])
def test_prefix_shapes(name, shape):
    if name.startswith("ETiling"):
        params = {"instance": toy_instance()}
    else:
        params = {} if name == "BitAt" else {"k": 2}
    assert prefix_shape(build_formula(name, params)) == shape
    assert prefix_shape(build_formula(name, params, opaque=True)) == shape


def test_quantifier_free_shapes():
    inst = toy_instance()
    assert prefix_shape(build_formula("MatchH", {"instance": inst})) == ""
    assert prefix_shape(TRUE) == ""


def flip(env, name, k):
    out = dict(env)
    out[name] ^= 1 << k
    return out


TOY = toy_instance()
TOY_TILING = ((0, 1), (2, 3))


def test_ruler_witness_and_mutations():
    env = tiling_witness(TOY, TOY_TILING)
    f = is_a_ruler(["u1"], "F", "N")
    assert eval_bounded(f, env)
    for k in range(5):
        assert not eval_bounded(f, flip(env, "u1", k)), k


def ruler_oracle_width(us, x, x2):
    if digit(us, x) != digit(us, x2):
        return False
    return all(digit(us, y) != digit(us, x) for y in (2 ** i for i in range(10)) if x > y > x2)


def test_width_against_oracle():
    f = width(["u1"], "x", "x'", "N")
    u1 = tiling_witness(TOY, TOY_TILING)["u1"]
    for x, x2 in itertools.combinations(reversed(POWERS), 2):
        env = {"u1": u1, "x": x, "x'": x2, "N": 1}
        assert eval_bounded(f, env) == ruler_oracle_width((u1,), x, x2)


@pytest.mark.parametrize("n,periods", [(1, 3), (2, 1)])
def test_comb_ruler(n, periods):
    digits = comb_ruler_digits(n, periods)
    assert digits[-1] == 2 ** n - 1
    assert digits[:len(comb(2 ** n - 1)) - 1] == list(reversed(comb(2 ** n - 1)[1:]))
    env = comb_ruler(n, periods)
    us = [f"u{i}" for i in range(1, n + 1)]
    f = is_a_ruler_prime(us, "F", "N")
    bound = 4 * env["F"]
    assert eval_bounded(f, env, bound)
    for name in us:
        for k in range(len(digits)):
            assert not eval_bounded(f, flip(env, name, k), bound), (name, k)


def test_width_prime_pairs_consecutive_rows():
    env = comb_ruler(1, 3)
    f = width_prime(["u1"], "x", "y", "N")
    hits = [(x, y) for x in (2 ** i for i in range(6)) for y in (2 ** i for i in range(6))
            if eval_bounded(f, dict(env, x=x, y=y), bound=128)]
    assert hits == [(4, 1), (8, 2), (16, 4), (32, 8)]
    assert not eval_bounded(f, dict(env, x=6, y=3))


@pytest.mark.parametrize("opaque", [True, False])
def test_etiling_witness_and_mutation(opaque):
    f = e_tiling(TOY, opaque)
    env = tiling_witness(TOY, TOY_TILING)
    assert eval_with_witness(f, env, bound=32)
    assert not eval_with_witness(f, flip(env, "w1", 0), bound=32)


def test_etiling_mutations_inside_the_tiling_fail():
    f = e_tiling(TOY, opaque=True)
    env = tiling_witness(TOY, TOY_TILING)
    for name in ("u1", "w1", "w2"):
        for k in range(4):
            assert not eval_with_witness(f, flip(env, name, k)), (name, k)
    # bits above the encoded tiling are unconstrained
    assert eval_with_witness(f, flip(env, "w1", 4))


def test_etiling_prime_witness():
    f = e_tiling_prime(TOY, opaque=True)
    env = tiling_witness_prime(TOY, TOY_TILING)
    assert env == {"F": 8, "N": 1, "u1": 21, "w1": 3, "w2": 5}
    assert eval_with_witness(f, env)
    for name in ("u1", "w1", "w2"):
        for k in range(4):
            assert not eval_with_witness(f, flip(env, name, k)), (name, k)


def test_witness_errors():
    f = e_tiling(TOY, opaque=True)
    with pytest.raises(ValueError):
        eval_with_witness(f, {"F": 8})
    with pytest.raises(ValueError):
        eval_bounded(Eq(Var("x"), Const(0)))
    with pytest.raises(ValueError):
        tiling_witness(TOY, ((0,),))


def test_trivial_formulas():
    assert eval_bounded(Exists("x", Eq(Var("x"), Var("x"))), bound=0)
    assert eval_bounded(Forall("x", Eq(Var("x"), Const(0))), bound=0)
    assert not eval_bounded(Forall("x", Eq(Var("x"), Const(0))), bound=1)
    assert eval_bounded(TRUE) and not eval_bounded(FALSE)
    assert eval_bounded(Forall("x", Implies(Lt(Var("x"), Const(3)), Not(Gt(Var("x"), Const(2))))))
    # the same name bound twice
    nested = Exists("x", And((Eq(Var("x"), Const(2)), Exists("x", Eq(Var("x"), Const(5))))))
    assert eval_bounded(nested)


def test_opaque_without_compute_is_enumerated():
    leaf = Opaque("Square", (Var("x"), Var("y")), holds=lambda x, y: y == x * x)
    assert eval_bounded(Exists("x", leaf), {"y": 49})
    assert not eval_bounded(Exists("x", leaf), {"y": 50})


def test_syntax_helpers():
    f = Exists("y", And((Eq(Var("x"), Var("y")), Lt(Var("z"), Const(1)))))
    assert free_vars(f) == {"x", "z"}
    assert free_vars(substitute(f, "x", "w")) == {"w", "z"}
    assert nnf(Not(Or((Eq(Var("x"), Const(1)), FALSE)))) == And((Not(Eq(Var("x"), Const(1))), TRUE))
    text = show(build_formula("BitAt"))
    assert "V2(" in text and "P2(x)" in text and text.startswith("E")


def test_build_formula_errors():
    with pytest.raises(ValueError):
        build_formula("Nope")
    with pytest.raises(ValueError):
        build_formula("NumAt")
    with pytest.raises(ValueError):
        build_formula("BitAt", {"colour": 1})
    with pytest.raises(ValueError):
        build_formula("MatchH")
