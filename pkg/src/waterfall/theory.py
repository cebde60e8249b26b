"""Shells, function definitions, rewrite rules and generalization lemmas.

A :class:`Theory` is a persistent value: every ``add_*``/``define_*``
operation returns a new theory and leaves its input untouched.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .terms import (
    AND, BOOL, CONNECTIVES, EQ, FALSE, FALSE_SYM, IFF, IMP, ITE, NOT, TRUE, TRUE_SYM,
    App, Term, Var, free_vars, is_app, match_pattern, mk_eq, mk_iff, subterms,
)


class TheoryError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    arg_sorts: tuple
    result: str
    kind: str  # logical | bottom | constructor | accessor | function
    index: int  # registration order, used by the term order


@dataclass(frozen=True)
class Constructor:
    symbol: str
    arg_sorts: tuple
    accessors: tuple


@dataclass(frozen=True)
class Shell:
    name: str
    bottom_objects: tuple
    constructors: tuple  # of Constructor

    def recursive_args(self, con: Constructor) -> tuple:
        return tuple(i for i, s in enumerate(con.arg_sorts) if s == self.name)

    def all_constructors(self) -> list:
        """Bottom objects first (as nullary constructors), then the rest."""
        return [Constructor(b, (), ()) for b in self.bottom_objects] + list(self.constructors)

    @property
    def induction_scheme(self) -> tuple:
        """(constructor, argument sorts, recursive argument indices) per case."""
        return tuple((c.symbol, c.arg_sorts, self.recursive_args(c)) for c in self.all_constructors())

    @property
    def cases_scheme(self) -> tuple:
        return tuple((c.symbol, c.arg_sorts) for c in self.all_constructors())

    @property
    def distinctness(self) -> tuple:
        syms = [c.symbol for c in self.all_constructors()]
        return tuple((a, b) for i, a in enumerate(syms) for b in syms[i + 1:])

    @property
    def injectivity(self) -> tuple:
        return tuple(c.symbol for c in self.constructors if c.arg_sorts)

    def accessor_equations(self) -> list[tuple[str, str, int]]:
        """(accessor, constructor, argument index) triples."""
        return [(a, c.symbol, i) for c in self.constructors for i, a in enumerate(c.accessors)]

    # textual renderings in the usual logical notation

    def _names(self, con: Constructor, avoid: str = "") -> list[str]:
        names, used = [], {avoid}
        for s in con.arg_sorts:
            n = s[0].lower()
            while n in used:
                n += "'"
            used.add(n)
            names.append(n)
        return names

    def _app(self, sym: str, args: list[str]) -> str:
        if not args:
            return sym
        return f"{sym} {args[0]}" if len(args) == 1 else f"{sym} ({', '.join(args)})"

    def describe_induction(self) -> str:
        parts = []
        for con in self.all_constructors():
            names = self._names(con)
            concl = f"P ({self._app(con.symbol, names)})" if names else f"P {con.symbol}"
            hyps = [f"P {names[i]}" for i in self.recursive_args(con)]
            body = concl if not hyps else f"{' ∧ '.join(hyps)} ⇒ {concl}"
            parts.append(f"(∀{' '.join(names)}. {body})" if names else body)
        v = self.name[0].lower()
        return f"{' ∧ '.join(parts)} ⇒ ∀{v}. P {v}"

    def describe_cases(self) -> str:
        v = self.name[0].lower()
        alts = []
        for con in self.all_constructors():
            names = self._names(con, avoid=v)
            rhs = self._app(con.symbol, names)
            alts.append(f"(∃{' '.join(names)}. {v} = {rhs})" if names else f"{v} = {rhs}")
        return f"∀{v}. " + " ∨ ".join(alts)


@dataclass(frozen=True)
class FnDef:
    symbol: str
    param_sorts: tuple
    result_sort: str
    equations: tuple  # of (lhs, rhs)
    recursive_arg: Optional[int]  # 0-based position of the destructured argument
    recursive: bool = False  # some equation calls the function itself

    def cases(self) -> dict:
        """Constructor symbol at the destructured position -> (lhs, rhs)."""
        if self.recursive_arg is None:
            return {}
        return {lhs.args[self.recursive_arg].sym: (lhs, rhs) for lhs, rhs in self.equations}


@dataclass(frozen=True)
class RewriteRule:
    lhs: Term
    rhs: Term
    condition: Optional[Term] = None
    permutative: bool = False
    name: str = ""


@dataclass(frozen=True, eq=False)
class Theory:
    shells: dict = field(default_factory=dict)
    fn_defs: dict = field(default_factory=dict)
    rewrite_rules: tuple = ()
    generalization_lemmas: tuple = ()
    signatures: dict = field(default_factory=dict)

    # -- lookups ----------------------------------------------------------

    def kind(self, sym: str) -> Optional[str]:
        sig = self.signatures.get(sym)
        return sig.kind if sig else None

    def signature(self, sym: str) -> Signature:
        try:
            return self.signatures[sym]
        except KeyError:
            raise TheoryError(f"unknown symbol {sym!r}") from None

    def symbol_index(self, sym: str) -> int:
        sig = self.signatures.get(sym)
        return sig.index if sig else len(self.signatures)

    def shell_of_sort(self, sort: str) -> Optional[Shell]:
        return self.shells.get(sort)

    def shell_of_constructor(self, sym: str) -> Optional[Shell]:
        for sh in self.shells.values():
            if sym in sh.bottom_objects or any(c.symbol == sym for c in sh.constructors):
                return sh
        return None

    def constructor(self, sym: str) -> Optional[Constructor]:
        for sh in self.shells.values():
            for c in sh.constructors:
                if c.symbol == sym:
                    return c
        return None

    def is_constructor(self, sym: str) -> bool:
        return self.kind(sym) in ("bottom", "constructor")

    def is_defined(self, sym: str) -> bool:
        return sym in self.fn_defs

    def is_recursive_fn(self, sym: str) -> bool:
        fn = self.fn_defs.get(sym)
        return fn is not None and fn.recursive

    def recursive_arg(self, sym: str) -> Optional[int]:
        fn = self.fn_defs.get(sym)
        return fn.recursive_arg if fn else None

    def accessor_info(self, sym: str) -> Optional[tuple[str, int]]:
        """(constructor, argument index) an accessor projects from."""
        for sh in self.shells.values():
            for acc, con, i in sh.accessor_equations():
                if acc == sym:
                    return con, i
        return None

    def default_value(self, sort: str) -> Optional[Term]:
        sh = self.shells.get(sort)
        if sh is None or not sh.bottom_objects:
            return None
        return App(sh.bottom_objects[0], (), sort)

    # -- construction helpers ---------------------------------------------

    def _register(self, sigs: dict, sym: str, arg_sorts, result: str, kind: str) -> None:
        if sym in sigs:
            raise TheoryError(f"symbol {sym!r} is already declared")
        sigs[sym] = Signature(tuple(arg_sorts), result, kind, len(sigs))

    def mk(self, sym: str, *args: Term) -> Term:
        """Build a well-sorted application of a declared symbol."""
        sig = self.signature(sym)
        if sig.kind == "logical":
            raise TheoryError(f"use the terms helpers for logical symbol {sym!r}")
        if len(args) != len(sig.arg_sorts):
            raise TheoryError(f"{sym} expects {len(sig.arg_sorts)} arguments, got {len(args)}")
        for a, s in zip(args, sig.arg_sorts):
            if a.sort != s:
                raise TheoryError(f"{sym}: argument of sort {a.sort} where {s} expected")
        return App(sym, args, sig.result)


def empty_theory() -> Theory:
    """A theory holding only the logical vocabulary and the bool shell."""
    sigs: dict = {}
    th = Theory(signatures=sigs)
    for sym, args, res in [
        (TRUE_SYM, (), BOOL), (FALSE_SYM, (), BOOL),
        (NOT, (BOOL,), BOOL), ("or", (BOOL, BOOL), BOOL), (AND, (BOOL, BOOL), BOOL),
        (IMP, (BOOL, BOOL), BOOL), (IFF, (BOOL, BOOL), BOOL),
        (EQ, ("*", "*"), BOOL), (ITE, (BOOL, "*", "*"), "*"),
    ]:
        th._register(sigs, sym, args, res, "logical")
    shells = {BOOL: Shell(BOOL, (TRUE_SYM, FALSE_SYM), ())}
    return replace(th, shells=shells)


# --------------------------------------------------------------------------
# shells

def define_shell(th: Theory, name: str, bottom_objects=(), constructors=()) -> Theory:
    """Register a recursive datatype.

    ``constructors`` is a sequence of ``(symbol, arg_sorts, accessors)``.
    """
    if name in th.shells:
        raise TheoryError(f"duplicate shell {name!r}")
    cons = []
    for sym, arg_sorts, accessors in constructors:
        arg_sorts, accessors = tuple(arg_sorts), tuple(accessors)
        if not arg_sorts:
            raise TheoryError(f"constructor {sym!r} has no arguments; declare it as a bottom object")
        for s in arg_sorts:
            if s != name and s not in th.shells:
                raise TheoryError(f"constructor {sym!r} refers to unknown sort {s!r}")
        if accessors and len(accessors) != len(arg_sorts):
            raise TheoryError(f"constructor {sym!r} needs one accessor per argument")
        cons.append(Constructor(sym, arg_sorts, accessors))
    recursive = any(name in c.arg_sorts for c in cons)
    nonrec_cons = [c for c in cons if name not in c.arg_sorts]
    if not bottom_objects and (not nonrec_cons or not recursive and not cons):
        raise TheoryError(f"shell {name!r} has no bottom object")
    sh = Shell(name, tuple(bottom_objects), tuple(cons))
    sigs = dict(th.signatures)
    for b in sh.bottom_objects:
        th._register(sigs, b, (), name, "bottom")
    for c in cons:
        th._register(sigs, c.symbol, c.arg_sorts, name, "constructor")
    for c in cons:
        for acc, s in zip(c.accessors, c.arg_sorts):
            th._register(sigs, acc, (name,), s, "accessor")
    shells = dict(th.shells)
    shells[name] = sh
    return replace(th, shells=shells, signatures=sigs)


# --------------------------------------------------------------------------
# function definitions

def declare_function(th: Theory, symbol: str, param_sorts, result_sort: str) -> Theory:
    """Reserve a function symbol so its equations can be elaborated."""
    for s in list(param_sorts) + [result_sort]:
        if s not in th.shells:
            raise TheoryError(f"function {symbol!r} refers to unknown sort {s!r}")
    sigs = dict(th.signatures)
    th._register(sigs, symbol, param_sorts, result_sort, "function")
    return replace(th, signatures=sigs)


def define_function(th: Theory, symbol: str, param_sorts, result_sort: str, equations) -> Theory:
    """Add a primitive-recursive (or non-recursive) definition.

    ``symbol`` may already be declared with :func:`declare_function` (the
    parser does so, to elaborate recursive calls); the declared signature
    must then agree.
    """
    param_sorts = tuple(param_sorts)
    if symbol in th.signatures:
        sig = th.signatures[symbol]
        if sig.kind != "function" or symbol in th.fn_defs:
            raise TheoryError(f"symbol {symbol!r} is already declared")
        if sig.arg_sorts != param_sorts or sig.result != result_sort:
            raise TheoryError(f"definition of {symbol!r} disagrees with its declaration")
    else:
        th = declare_function(th, symbol, param_sorts, result_sort)
    eqs = [_split_equation(th, symbol, e) for e in equations]
    if not eqs:
        raise TheoryError(f"{symbol}: no defining equations")
    for lhs, _ in eqs:
        if lhs.is_var or lhs.sym != symbol:
            raise TheoryError(f"{symbol}: equation does not define {symbol}")
    pos = _destructured_position(th, symbol, eqs)
    recursive = False
    if pos is None:
        if len(eqs) != 1:
            raise TheoryError(f"{symbol}: a non-recursive definition takes exactly one equation")
        lhs, rhs = eqs[0]
        if any(not s.is_var and s.sym == symbol for s in subterms(rhs)):
            raise TheoryError(f"{symbol}: recursive call without a destructured argument")
    else:
        sort = param_sorts[pos]
        shell = th.shells[sort]
        expected = [c.symbol for c in shell.all_constructors()]
        seen = [lhs.args[pos].sym for lhs, _ in eqs]
        for c in expected:
            n = seen.count(c)
            if n == 0:
                raise TheoryError(f"{symbol}: missing case for constructor {c}")
            if n > 1:
                raise TheoryError(f"{symbol}: duplicate case for constructor {c}")
        for lhs, rhs in eqs:
            pat = lhs.args[pos]
            rec_vars = {a for a, s in zip(pat.args, th.signature(pat.sym).arg_sorts) if s == sort}
            for s in subterms(rhs):
                if not s.is_var and s.sym == symbol:
                    recursive = True
                    if s.args[pos] not in rec_vars:
                        raise TheoryError(
                            f"{symbol}: recursive call on a non-immediate subterm "
                            f"(only primitive recursion is supported)")
    for lhs, rhs in eqs:
        extra = free_vars(rhs) - free_vars(lhs)
        if extra:
            raise TheoryError(f"{symbol}: variables {sorted(v.name for v in extra)} not bound on the left")
    fn = FnDef(symbol, param_sorts, result_sort, tuple(eqs), pos, recursive)
    fns = dict(th.fn_defs)
    fns[symbol] = fn
    return replace(th, fn_defs=fns)


def _split_equation(th: Theory, symbol: str, e: Term) -> tuple[Term, Term]:
    if is_app(e, EQ) or is_app(e, IFF):
        return e.args[0], e.args[1]
    if is_app(e, NOT) and not e.args[0].is_var and e.args[0].sym == symbol:
        return e.args[0], FALSE
    if not e.is_var and e.sym == symbol:
        return e, TRUE
    raise TheoryError(f"{symbol}: defining equations must have the form lhs = rhs")


def _destructured_position(th: Theory, symbol: str, eqs) -> Optional[int]:
    positions = set()
    for lhs, _ in eqs:
        for i, a in enumerate(lhs.args):
            if a.is_var:
                continue
            if not th.is_constructor(a.sym):
                raise TheoryError(f"{symbol}: argument {i + 1} is not a constructor pattern")
            if len(set(a.args)) != len(a.args) or not all(x.is_var for x in a.args):
                raise TheoryError(f"{symbol}: constructor patterns take distinct variables")
            positions.add(i)
        lvars = [v for a in lhs.args for v in ([a] if a.is_var else a.args)]
        if len(set(lvars)) != len(lvars):
            raise TheoryError(f"{symbol}: left-hand side variables must be distinct")
    if len(positions) > 1:
        raise TheoryError(f"{symbol}: more than one recursive argument position")
    return positions.pop() if positions else None


# --------------------------------------------------------------------------
# rewrite rules and generalization lemmas

def rule_from_term(term: Term, name: str = "") -> RewriteRule:
    condition = None
    body = term
    if is_app(body, IMP):
        condition, body = body.args
    if is_app(body, EQ) or is_app(body, IFF):
        lhs, rhs = body.args
    elif is_app(body, NOT):
        lhs, rhs = body.args[0], FALSE
    else:
        lhs, rhs = body, TRUE
    if lhs.is_var:
        raise TheoryError("the left-hand side of a rewrite rule cannot be a variable")
    extra = free_vars(rhs) - free_vars(lhs)
    if condition is not None:
        extra |= free_vars(condition) - free_vars(lhs)
    if extra:
        raise TheoryError(
            f"rewrite rule has variables {sorted(v.name for v in extra)} not bound by its left-hand side")
    perm = lhs is not rhs and match_pattern(lhs, rhs) is not None and match_pattern(rhs, lhs) is not None
    return RewriteRule(lhs, rhs, condition, perm, name)


def add_rewrite_rule(th: Theory, rule: Term, name: str = "") -> Theory:
    if rule.sort != BOOL:
        raise TheoryError("a rewrite rule must be a formula")
    r = rule_from_term(rule, name)
    return replace(th, rewrite_rules=th.rewrite_rules + (r,))


def add_generalization_lemma(th: Theory, lemma: Term) -> Theory:
    if lemma.sort != BOOL:
        raise TheoryError("a generalization lemma must be a formula")
    return replace(th, generalization_lemmas=th.generalization_lemmas + (lemma,))


def shell_facts(th: Theory) -> list[Term]:
    """Distinctness and injectivity facts of every shell, as formulas."""
    facts = []
    for sh in th.shells.values():
        cons = sh.all_constructors()

        def inst(c, suffix):
            args = [Var(f"x{i}{suffix}", s) for i, s in enumerate(c.arg_sorts)]
            return App(c.symbol, args, sh.name)

        for i, a in enumerate(cons):
            for b in cons[i + 1:]:
                if sh.name == BOOL:
                    facts.append(App(NOT, (mk_iff(inst(a, "a"), inst(b, "b")),), BOOL))
                else:
                    facts.append(App(NOT, (mk_eq(inst(a, "a"), inst(b, "b")),), BOOL))
        for c in sh.constructors:
            x, y = inst(c, "a"), inst(c, "b")
            eqs = [mk_eq(p, q) for p, q in zip(x.args, y.args)]
            conj = eqs[0]
            for e in eqs[1:]:
                conj = App(AND, (conj, e), BOOL)
            facts.append(mk_iff(mk_eq(x, y), conj))
    return facts


__all__ = [
    "Theory", "Shell", "Constructor", "FnDef", "RewriteRule", "Signature", "TheoryError",
    "empty_theory", "define_shell", "declare_function", "define_function",
    "add_rewrite_rule", "add_generalization_lemma", "rule_from_term", "shell_facts",
    "CONNECTIVES",
]
