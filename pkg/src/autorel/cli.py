"""Command-line entry point.

Exit codes: 0 success, 2 malformed input, 3 budget exceeded, 4 a semantic
precondition failed. Errors print one line ``error <code> <reason>`` on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import automata as fa
from . import buchi, convolution, reduction, tiling
from .textio import (ParseError, parse_instance, parse_nfa, parse_regex, parse_symbol,
                     parse_tiling, parse_word, serialize_instance, serialize_nfa, tiling_text,
                     word_text)

EXIT_PARSE, EXIT_BUDGET, EXIT_PRECONDITION = 2, 3, 4
MAX_N = 16


class Precondition(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(0, f"cannot read {path}: {exc.strerror}") from None


def _nfa(path: str) -> fa.Nfa:
    return parse_nfa(_read(path))


def _instance(path: str | None) -> tiling.CorridorInstance:
    if path is None:
        return tiling.toy_instance()
    inst = parse_instance(_read(path))
    if inst.n > MAX_N:
        raise Precondition(f"n = {inst.n} exceeds the limit {MAX_N}")
    return inst


def _map(path: str) -> dict:
    out = {}
    for ln, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(ln, "expected '<symbol> <symbol>'")
        src, dst = (parse_symbol(p) for p in parts)
        if src in out:
            raise ParseError(ln, f"symbol {parts[0]!r} mapped twice")
        out[src] = dst
    return out


def _relation(path: str, d: int) -> convolution.RelationAutomaton:
    a = _nfa(path)
    first = a.alphabet[0]
    arity = len(first) if isinstance(first, tuple) else 1
    if arity <= d:
        raise Precondition(f"automaton arity {arity} leaves nothing to project (d = {d})")
    atoms = dict.fromkeys(s[0] if isinstance(s, tuple) else s for s in a.alphabet)
    sigma = tuple(x for x in atoms if x != fa.PAD)
    return convolution.RelationAutomaton(a, d, arity - d, sigma)


def _out(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# regex / nfa


def cmd_regex(args) -> None:
    sigma = [parse_symbol(t) for t in _read(args.alphabet).split()]
    if not sigma:
        raise ParseError(0, "empty alphabet")
    e = parse_regex(_read(args.expr))
    _out(serialize_nfa(fa.regex_to_nfa(e, sigma)))


def cmd_nfa(args) -> None:
    op, files = args.op, args.files
    need = {"union": 2, "concat": 2, "intersect": 2}.get(op, 1)
    if len(files) != need:
        raise ParseError(0, f"'{op}' takes {need} automaton file(s)")
    autos = [_nfa(f) for f in files]
    a = autos[0]
    if op == "union":
        _out(serialize_nfa(fa.union(*autos)))
    elif op == "concat":
        _out(serialize_nfa(fa.concat(*autos)))
    elif op == "intersect":
        _out(serialize_nfa(fa.intersect(*autos, budget=args.budget)))
    elif op == "complement":
        _out(serialize_nfa(fa.complement(a, args.budget)))
    elif op in ("invhom", "relabel"):
        if not args.map:
            raise ParseError(0, f"'{op}' needs --map")
        m = _map(args.map)
        result = fa.inverse_hom(a, m) if op == "invhom" else fa.relabel_hom(a, m)
        _out(serialize_nfa(result))
    elif op == "empty":
        _out("EMPTY" if fa.is_empty(a) else "NONEMPTY")
    elif op == "shortest":
        w = fa.shortest_accepted(a, args.budget)
        _out("NONE" if w is None else ("WORD " + word_text(w)).rstrip())
    elif op == "accepts":
        if args.word is None:
            raise ParseError(0, "'accepts' needs --word")
        _out("true" if fa.accepts(a, parse_word(args.word)) else "false")


# ---------------------------------------------------------------------------
# conv


def cmd_conv(args) -> None:
    op = args.op
    if op == "convolve":
        _out(word_text(convolution.convolve([parse_word(w) for w in args.items])))
    elif op == "deconvolve":
        if len(args.items) != 1:
            raise ParseError(0, "'deconvolve' takes one word")
        try:
            rows = convolution.deconvolve(parse_word(args.items[0]), args.k)
        except convolution.InvalidConvolution as exc:
            raise Precondition(str(exc)) from None
        _out("\n".join(word_text(r) for r in rows))
    else:
        if len(args.items) != 1:
            raise ParseError(0, f"'{op}' takes one automaton file")
        r = _relation(args.items[0], args.d)
        if op == "project-exists":
            _out(serialize_nfa(convolution.project_exists(r)))
        elif op == "project-forall":
            _out(serialize_nfa(convolution.project_forall(r, args.budget)))
        elif op == "decide-forall":
            v = convolution.decide_forall_nonempty(r, args.mode, args.budget, args.budget)
            lines = ["EMPTY" if v.empty else ("NONEMPTY " + word_text(v.witness)).rstrip()]
            lines += [f"states {k} {val}" for k, val in sorted(v.stats.items())]
            _out("\n".join(lines))


# ---------------------------------------------------------------------------
# tiling


def _tiling_arg(args):
    if not args.tiling:
        raise ParseError(0, f"'{args.op}' needs a tiling file")
    return parse_tiling(_read(args.tiling))


def cmd_tiling(args) -> None:
    op = args.op
    if op == "counter":
        if args.width is None:
            raise ParseError(0, "'counter' needs --width")
        _out(serialize_instance(tiling.counter_instance(args.width)))
        return
    if not args.instance:
        raise ParseError(0, f"'{op}' needs an instance file")
    inst = _instance(args.instance)
    if op == "solve":
        t = tiling.solve_corridor(inst, args.width, args.budget)
        _out("NONE" if t is None else tiling_text(t))
    elif op == "enumerate":
        if args.width is None or args.max_height is None:
            raise ParseError(0, "'enumerate' needs --width and --max-height")
        found = tiling.enumerate_tilings(inst, args.width, args.max_height, args.budget)
        lines = [f"tilings {len(found)}"]
        for t in found:
            lines.append("")
            lines.append(tiling_text(t).rstrip("\n"))
        _out("\n".join(lines))
    elif op == "check":
        c = tiling.is_valid_tiling(inst, _tiling_arg(args))
        _out("VALID" if c.ok else f"INVALID {c.reason}")
    elif op == "encode":
        t = _tiling_arg(args)
        try:
            _out(word_text(tiling.encode_tiling(inst, t)))
        except ValueError as exc:
            raise Precondition(str(exc)) from None
    elif op == "conds":
        w = tiling.encode_tiling(inst, _tiling_arg(args))
        checker = reduction.ConditionChecker(inst)
        lines = [f"cond{i} {str(checker.check(i, w)).lower()}" for i in range(1, 7)]
        lines.append(f"in_language {str(checker.in_language(w)).lower()}")
        _out("\n".join(lines))
    elif op == "reduce":
        if inst.n < reduction.MIN_N:
            raise Precondition(f"the reduction needs n >= {reduction.MIN_N}")
        red = reduction.build_reduction(inst)
        _out(serialize_nfa(red.full))
        for k, v in sorted(red.sizes.items()):
            print(f"size {k} {v}", file=sys.stderr)


# ---------------------------------------------------------------------------
# buchi


def _params(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ParseError(0, f"parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        if k == "us":
            out[k] = v.split(",")
        elif v.isdigit():
            out[k] = int(v)
        else:
            out[k] = v
    return out


def _env(text: str | None) -> dict:
    env = {}
    for item in (text or "").split(","):
        if not item.strip():
            continue
        k, _, v = item.partition("=")
        if not v.strip().isdigit():
            raise ParseError(0, f"environment entry {item!r} is not name=natural")
        env[k.strip()] = int(v)
    return env


def _formula(args):
    params = _params(args.param)
    if args.name in ("TopLeft", "BottomRight", "MatchH", "MatchV", "ETiling", "ETiling'"):
        params["instance"] = _instance(args.instance)
    try:
        return buchi.build_formula(args.name, params, opaque=args.opaque)
    except ValueError as exc:
        raise ParseError(0, str(exc)) from None


def cmd_buchi(args) -> None:
    f = _formula(args)
    if args.op == "build":
        _out(buchi.show(f))
    elif args.op == "prefix":
        _out(buchi.prefix_shape(f))
    elif args.op == "eval-bounded":
        if args.bound is None:
            raise ParseError(0, "'eval-bounded' needs --bound")
        env = _env(args.env)
        missing = buchi.free_vars(f) - set(env)
        if missing:
            raise Precondition(f"unassigned free variables: {' '.join(sorted(missing))}")
        _out("true" if buchi.eval_bounded(f, env, args.bound) else "false")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="autorel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("regex", help="compile a regular expression")
    r.add_argument("op", choices=["compile"])
    r.add_argument("expr")
    r.add_argument("--alphabet", required=True)
    r.set_defaults(func=cmd_regex)

    n = sub.add_parser("nfa", help="automaton operations")
    n.add_argument("op", choices=["union", "concat", "complement", "intersect", "invhom",
                                  "relabel", "empty", "shortest", "accepts"])
    n.add_argument("files", nargs="+")
    n.add_argument("--map")
    n.add_argument("--word")
    n.add_argument("--budget", type=int)
    n.set_defaults(func=cmd_nfa)

    c = sub.add_parser("conv", help="convolutions and projections")
    c.add_argument("op", choices=["convolve", "deconvolve", "project-exists", "project-forall",
                                  "decide-forall"])
    c.add_argument("items", nargs="*")
    c.add_argument("--d", type=int, default=1)
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--mode", choices=["naive", "onthefly"], default="onthefly")
    c.add_argument("--budget", type=int)
    c.set_defaults(func=cmd_conv)

    t = sub.add_parser("tiling", help="corridor tiling instances")
    t.add_argument("op", choices=["solve", "enumerate", "check", "encode", "conds", "reduce",
                                  "counter"])
    t.add_argument("instance", nargs="?")
    t.add_argument("tiling", nargs="?")
    t.add_argument("--width", type=int)
    t.add_argument("--max-height", type=int)
    t.add_argument("--budget", type=int, default=1_000_000)
    t.set_defaults(func=cmd_tiling)

    b = sub.add_parser("buchi", help="Buchi arithmetic formulas")
    b.add_argument("op", choices=["build", "eval-bounded", "prefix"])
    b.add_argument("name", choices=buchi.FORMULA_NAMES)
    b.add_argument("--param", action="append", help="key=value (us=a,b,c for tuples)")
    b.add_argument("--instance")
    b.add_argument("--opaque", action="store_true", help="use oracle leaves for NumAt/BitAt")
    b.add_argument("--bound", type=int)
    b.add_argument("--env")
    b.set_defaults(func=cmd_buchi)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else 0
    try:
        args.func(args)
    except ParseError as exc:
        print(f"error {EXIT_PARSE} {exc}", file=sys.stderr)
        return EXIT_PARSE
    except fa.BudgetExceeded as exc:
        print(f"error {EXIT_BUDGET} {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (Precondition, fa.AutomatonError, ValueError) as exc:
        print(f"error {EXIT_PRECONDITION} {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    return 0


if __name__ == "__main__":
    sys.exit(main())
