"""Rewriting: the Boyer-Moore style engine and the "rewrite everything" engine.

Both engines normalize innermost-first with a step budget (fuel).  They
share the built-in logical rules, shell distinctness/injectivity, accessor
equations, definitional unfolding and user rules; they differ in

* ``bm``   unfolds a non-recursive definition only when one of its
           arguments is an explicit value template, removes duplicate
           literals and rewrites each literal assuming the other literals
           false (which also catches complementary literals);
* ``full`` unfolds every definition whenever its pattern matches and
           works literal by literal without context.

Ground arithmetic over numerals is evaluated with Python integers instead
of unfolding, for every operator whose definition in the theory agrees
with the integer function on small inputs.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import Callable, Optional

from .terms import (
    AND, BOOL, EQ, FALSE, IFF, IMP, ITE, NOT, OR, TRUE, App, Clause, Term,
    apply_bindings, disjuncts, is_explicit_value_template, match_pattern, mk_and, mk_eq, mk_not,
)
from .theory import RewriteRule, Theory

DEFAULT_FUEL = 10_000
# Largest numeral materialized by ground evaluation.
NUMERAL_CAP = 512

ENGINES = ("bm", "full")


class FuelExhausted(RuntimeError):
    """The step budget ran out: most likely a looping rule set."""

    def __init__(self, steps_used: int):
        super().__init__(f"rewrite fuel exhausted after {steps_used} steps")
        self.steps_used = steps_used


@dataclass(frozen=True)
class RewriteOutcome:
    result: Term
    changed: bool
    steps_used: int


# --------------------------------------------------------------------------
# term order

def term_order_key(t: Term, th: Theory) -> tuple:
    """Size, then root symbol (variables first, by name), then arguments."""
    if t.is_var:
        return (1, -1, t.name, ())
    return (t.size, th.symbol_index(t.sym), "", tuple(term_order_key(a, th) for a in t.args))


def term_less(a: Term, b: Term, th: Theory) -> bool:
    return a is not b and term_order_key(a, th) < term_order_key(b, th)


def permutative_ok(rule: RewriteRule, b: dict, th: Theory) -> bool:
    """A permutative rule may fire only if it makes the term smaller."""
    lhs = apply_bindings(rule.lhs, b)
    rhs = apply_bindings(rule.rhs, b)
    return term_less(rhs, lhs, th)


# --------------------------------------------------------------------------
# ground arithmetic

_INT_OPS: dict[str, tuple[int, Callable]] = {
    "PLUS": (2, lambda a, b: a + b),
    "MULT": (2, lambda a, b: a * b),
    "EXP": (2, lambda a, b: a ** b),
    "PRE": (1, lambda a: max(a - 1, 0)),
    "SUB": (2, lambda a, b: max(a - b, 0)),
    "LE": (2, lambda a, b: a <= b),
    "LT": (2, lambda a, b: a < b),
    "EVEN": (1, lambda a: a % 2 == 0),
    "ODD": (1, lambda a: a % 2 == 1),
    "DBL": (1, lambda a: 2 * a),
}

_arith_cache: "weakref.WeakKeyDictionary[Theory, dict]" = weakref.WeakKeyDictionary()


def _num_shell_ok(th: Theory) -> bool:
    sh = th.shell_of_constructor("0")
    con = th.constructor("SUC")
    return sh is not None and con is not None and con.arg_sorts == (sh.name,) and th.shell_of_constructor("SUC") is sh


def numeral(n: int, th_sort: str = "num") -> Term:
    t = App("0", (), th_sort)
    for _ in range(n):
        t = App("SUC", (t,), th_sort)
    return t


_value_cache: "weakref.WeakKeyDictionary[Term, int]" = weakref.WeakKeyDictionary()


def numeral_value(t: Term) -> Optional[int]:
    """k for SUC^k(0), else None."""
    hit = _value_cache.get(t)
    if hit is not None:
        return hit
    chain, s = [], t
    while True:
        if s.is_var:
            return None
        hv = _value_cache.get(s)
        if hv is not None:
            k = hv
            break
        if s.sym == "SUC" and len(s.args) == 1:
            chain.append(s)
            s = s.args[0]
        elif s.sym == "0" and not s.args:
            k = 0
            _value_cache[s] = 0
            break
        else:
            return None
    for node in reversed(chain):
        k += 1
        _value_cache[node] = k
    return _value_cache[t]


def arith_table(th: Theory) -> dict:
    """Operators whose definitions agree with integer arithmetic on 0..3."""
    hit = _arith_cache.get(th)
    if hit is not None:
        return hit
    table: dict = {}
    if _num_shell_ok(th):
        num = th.shell_of_constructor("0").name
        for sym, (arity, fn) in _INT_OPS.items():
            sig = th.signatures.get(sym)
            if sig is None or len(sig.arg_sorts) != arity:
                continue
            if sym not in th.fn_defs and sig.kind != "accessor":
                continue
            if any(s != num for s in sig.arg_sorts) or sig.result not in (num, BOOL):
                continue
            if _agrees(th, sym, arity, fn, num, sig.result):
                table[sym] = (fn, sig.result)
    _arith_cache[th] = table
    return table


def _agrees(th: Theory, sym: str, arity: int, fn: Callable, num: str, result: str) -> bool:
    rw = Rewriter(th, "full", fuel=20_000, arith={})
    samples = [(a,) for a in range(4)] if arity == 1 else [(a, b) for a in range(4) for b in range(4)]
    try:
        for args in samples:
            got = rw.normalize(App(sym, [numeral(a, num) for a in args], result))
            want = fn(*args)
            if result == BOOL:
                if got is not (TRUE if want else FALSE):
                    return False
            elif numeral_value(got) != want:
                return False
    except (FuelExhausted, RecursionError):
        return False
    return True


def num_reduce(t: Term, th: Theory) -> Optional[Term]:
    """Evaluate ground arithmetic subterms directly; None if nothing changes.

    Intermediate values stay Python integers, so ``2 EXP 10`` costs one
    multiplication chain rather than a thousand unfoldings.  Numerals above
    a fixed cap are left unevaluated.
    """
    table = arith_table(th)
    if not table:
        return None
    vals: dict = {}

    def value(s: Term):
        if s in vals:
            return vals[s]
        v = None
        if not s.is_var and s.ground:
            nv = numeral_value(s)
            if nv is not None:
                v = nv
            elif s.sym == "SUC" and len(s.args) == 1:
                a = value(s.args[0])
                if isinstance(a, int) and not isinstance(a, bool):
                    v = a + 1
            elif s.sym in table:
                args = [value(a) for a in s.args]
                if all(isinstance(a, int) and not isinstance(a, bool) for a in args):
                    if s.sym == "EXP" and args[1] > 64 and args[0] > 1:
                        v = None
                    else:
                        v = table[s.sym][0](*args)
            elif s.sym == EQ and s.args[0].sort == s.args[1].sort:
                a, b = value(s.args[0]), value(s.args[1])
                if isinstance(a, int) and isinstance(b, int):
                    v = a == b
        vals[s] = v
        return v

    def rebuild(s: Term) -> Term:
        if s.is_var or not s.args:
            return s
        v = value(s)
        if isinstance(v, bool):
            return TRUE if v else FALSE
        if isinstance(v, int) and v <= NUMERAL_CAP:
            if numeral_value(s) is not None:
                return s
            return numeral(v, s.sort)
        args = [rebuild(a) for a in s.args]
        if all(x is y for x, y in zip(args, s.args)):
            return s
        return App(s.sym, args, s.sort)

    out = rebuild(t)
    return None if out is t else out


# --------------------------------------------------------------------------
# the rewriter

class Rewriter:
    """Innermost normalizer with a step budget shared by all calls."""

    def __init__(self, th: Theory, engine: str = "full", fuel: int = DEFAULT_FUEL, arith: Optional[dict] = None):
        if engine not in ENGINES:
            raise ValueError(f"unknown rewrite engine {engine!r}")
        if fuel <= 0:
            raise ValueError("fuel must be positive")
        self.th = th
        self.engine = engine
        self.fuel = fuel
        self.steps = 0
        self.memo: dict = {}
        self.arith = arith_table(th) if arith is None else arith
        self.rules: dict[str, list[RewriteRule]] = {}
        for r in th.rewrite_rules:
            self.rules.setdefault(r.lhs.sym, []).append(r)

    def _charge(self) -> None:
        self.steps += 1
        if self.steps >= self.fuel:
            self.steps = self.fuel
            raise FuelExhausted(self.fuel)

    def is_value(self, t: Term) -> bool:
        """Ground term made of constructors only (numerals, lists of numerals...)."""
        if t.is_var or not t.ground:
            return False
        while True:
            if not self.th.is_constructor(t.sym):
                return False
            if len(t.args) == 1:
                t = t.args[0]
                continue
            return all(self.is_value(a) for a in t.args)

    def normalize(self, t: Term) -> Term:
        if t.is_var:
            return t
        hit = self.memo.get(t)
        if hit is not None:
            return hit
        if self.is_value(t):
            self.memo[t] = t
            return t
        cur = t
        if cur.args:
            args = [self.normalize(a) for a in cur.args]
            if any(x is not y for x, y in zip(args, cur.args)):
                cur = App(cur.sym, args, cur.sort)
        while True:
            r = self._step(cur)
            if r is None:
                break
            self._charge()
            if r.is_var or not r.args:
                cur = r
                break
            hit = self.memo.get(r)
            if hit is not None:
                cur = hit
                break
            args = [self.normalize(a) for a in r.args]
            cur = App(r.sym, args, r.sort) if any(x is not y for x, y in zip(args, r.args)) else r
        self.memo[t] = cur
        self.memo[cur] = cur
        return cur

    # -- one root step on a term whose arguments are normal ---------------

    def _step(self, t: Term) -> Optional[Term]:
        sym, args = t.sym, t.args
        th = self.th
        if sym in self.arith and t.ground:
            vals = [numeral_value(a) for a in args]
            if all(v is not None for v in vals):
                fn, res = self.arith[sym]
                if not (sym == "EXP" and vals[1] > 64 and vals[0] > 1):
                    v = fn(*vals)
                    if isinstance(v, bool):
                        return TRUE if v else FALSE
                    if v <= NUMERAL_CAP:
                        return numeral(v, t.sort)
        r = self._logical(t)
        if r is not None:
            return r
        kind = th.kind(sym)
        if kind == "accessor" and not args[0].is_var and th.is_constructor(args[0].sym):
            con, i = th.accessor_info(sym)
            a = args[0]
            if a.sym == con:
                return a.args[i]
            return th.default_value(t.sort)
        fn = th.fn_defs.get(sym)
        if fn is not None:
            r = self._unfold(t, fn)
            if r is not None:
                return r
        for rule in self.rules.get(sym, ()):
            b = match_pattern(rule.lhs, t)
            if b is None:
                continue
            if rule.permutative and not permutative_ok(rule, b, th):
                continue
            if rule.condition is not None:
                if self.normalize(apply_bindings(rule.condition, b)) is not TRUE:
                    continue
            return apply_bindings(rule.rhs, b)
        return None

    def _unfold(self, t: Term, fn) -> Optional[Term]:
        th = self.th
        if fn.recursive_arg is not None:
            a = t.args[fn.recursive_arg]
            if a.is_var or not th.is_constructor(a.sym):
                return None
            lhs, rhs = fn.cases()[a.sym]
        else:
            lhs, rhs = fn.equations[0]
            if self.engine == "bm" and not any(is_explicit_value_template(a, th) for a in t.args):
                return None
        b = match_pattern(lhs, t)
        return None if b is None else apply_bindings(rhs, b)

    def _logical(self, t: Term) -> Optional[Term]:
        sym, args = t.sym, t.args
        th = self.th
        if sym == NOT:
            a = args[0]
            if a is TRUE:
                return FALSE
            if a is FALSE:
                return TRUE
            if not a.is_var and a.sym == NOT:
                return a.args[0]
        elif sym == OR:
            a, b = args
            if a is TRUE or b is TRUE:
                return TRUE
            if a is FALSE:
                return b
            if b is FALSE or a is b:
                return a
        elif sym == AND:
            a, b = args
            if a is FALSE or b is FALSE:
                return FALSE
            if a is TRUE:
                return b
            if b is TRUE or a is b:
                return a
        elif sym == IMP:
            a, b = args
            if a is FALSE or b is TRUE or a is b:
                return TRUE
            if a is TRUE:
                return b
            if b is FALSE:
                return mk_not(a)
        elif sym == IFF:
            a, b = args
            if a is b:
                return TRUE
            if a is TRUE:
                return b
            if b is TRUE:
                return a
            if a is FALSE:
                return mk_not(b)
            if b is FALSE:
                return mk_not(a)
        elif sym == ITE:
            c, a, b = args
            if c is TRUE or a is b:
                return a
            if c is FALSE:
                return b
        elif sym == EQ:
            a, b = args
            if a is b:
                return TRUE
            ca = not a.is_var and th.is_constructor(a.sym)
            cb = not b.is_var and th.is_constructor(b.sym)
            if ca and cb:
                if a.sym != b.sym:
                    return FALSE
                return mk_and([mk_eq(x, y) for x, y in zip(a.args, b.args)])
            if a.is_var and cb and _under_constructors(a, b, th):
                return FALSE
            if b.is_var and ca and _under_constructors(b, a, th):
                return FALSE
        return None


def _under_constructors(v: Term, t: Term, th: Theory) -> bool:
    """v occurs strictly inside t along a path of constructor applications."""
    stack = list(t.args)
    while stack:
        s = stack.pop()
        if s is v:
            return True
        if not s.is_var and th.is_constructor(s.sym) and s.sort == t.sort:
            stack.extend(a for a in s.args if a.sort == t.sort)
    return False


def rewrite_term(t: Term, th: Theory, engine: str = "full", fuel: int = DEFAULT_FUEL) -> RewriteOutcome:
    rw = Rewriter(th, engine, fuel)
    out = rw.normalize(t)
    return RewriteOutcome(out, out is not t, rw.steps)


# --------------------------------------------------------------------------
# clause level

def _replace_atoms(t: Term, ctx: dict) -> Term:
    hit = ctx.get(t)
    if hit is not None:
        return hit
    if t.is_var or not t.args:
        return t
    args = [_replace_atoms(a, ctx) for a in t.args]
    if all(x is y for x, y in zip(args, t.args)):
        return t
    return App(t.sym, args, t.sort)


def _context(lits: list, skip: Term) -> dict:
    """Atoms fixed by assuming every other literal false."""
    ctx: dict = {}
    for lit in lits:
        if lit is skip:
            continue
        if not lit.is_var and lit.sym == NOT:
            ctx.setdefault(lit.args[0], TRUE)
        else:
            ctx.setdefault(lit, FALSE)
    return ctx


def _flatten(lits) -> list:
    out = []
    for lit in lits:
        out.extend(disjuncts(lit))
    return out


def simplify_literals(lits, th: Theory, engine: str, fuel: int = DEFAULT_FUEL) -> tuple[list, int]:
    """Rewrite a literal list; returns (new literals, steps).

    The result is ``[T]`` if the clause was proved and ``[F]`` if every
    literal rewrote to false.
    """
    rw = Rewriter(th, engine, fuel)
    cur = _flatten(rw.normalize(lit) for lit in lits)
    if engine == "bm":
        for _ in range(len(cur) + 2):
            changed = False
            for i, lit in enumerate(cur):
                if lit is TRUE:
                    break
                ctx = _context(cur, lit)
                if not ctx:
                    continue
                new = _replace_atoms(lit, ctx)
                if new is not lit:
                    new = rw.normalize(new)
                    if new is not lit:
                        cur[i] = new
                        changed = True
            cur = _flatten(cur)
            if not changed or TRUE in cur:
                break
    if any(lit is TRUE for lit in cur):
        return [TRUE], rw.steps
    cur = [lit for lit in cur if lit is not FALSE]
    if engine == "bm":
        cur = list(dict.fromkeys(cur))
    return (cur or [FALSE]), rw.steps


def _simplify(c: Clause, th: Theory, fuel: int, engine: str) -> Optional[Clause]:
    lits, _ = simplify_literals(c.literals, th, engine, fuel)
    if tuple(lits) == c.literals:
        return None
    return c.derive(lits, "simp")


def simplify_bm(c: Clause, th: Theory, fuel: int = DEFAULT_FUEL) -> Optional[Clause]:
    """Boyer-Moore style simplification; None when nothing changes."""
    return _simplify(c, th, fuel, "bm")


def simplify_full(c: Clause, th: Theory, fuel: int = DEFAULT_FUEL) -> Optional[Clause]:
    """Simplification with every rule and definition enabled; None when nothing changes."""
    return _simplify(c, th, fuel, "full")


def evaluate(t: Term, th: Theory, fuel: int = DEFAULT_FUEL) -> Term:
    """Normal form of a (typically ground) formula: fast arithmetic, then full rewriting."""
    reduced = num_reduce(t, th)
    return Rewriter(th, "full", fuel).normalize(reduced if reduced is not None else t)
