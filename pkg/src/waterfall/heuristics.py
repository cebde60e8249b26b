"""The waterfall heuristics.

Each heuristic takes a clause and answers with one of four outcomes:
the clause is proved, it is replaced by a list of clauses whose
provability suffices, it is disproved, or the heuristic does not apply.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .disprove import Disprover
from .generalize import ALGORITHMS, GenMemory, Generalization, generalize
from .rewrite import DEFAULT_FUEL, FuelExhausted, simplify_literals
from .terms import (
    AND, BOOL, EQ, FALSE, IFF, IMP, ITE, NOT, OR, TRUE, Clause, Term, apply_bindings, clause_setify,
    count_occurrences, free_vars, is_app, is_explicit_value_template, mk_not, mk_or, occurs,
    replace_subterm, subterms,
)
from .theory import Theory


# --------------------------------------------------------------------------
# outcomes

@dataclass(frozen=True)
class Proved:
    note: str = ""


@dataclass(frozen=True)
class Replaced:
    clauses: tuple
    note: str = ""

    def __post_init__(self):
        if not self.clauses:
            raise ValueError("Replaced needs at least one clause")


@dataclass(frozen=True)
class Disproved:
    reason: str
    witness: Optional[dict] = None


@dataclass(frozen=True)
class Failed:
    reason: str = ""
    warning: str = ""


HeuristicOutcome = Union[Proved, Replaced, Disproved, Failed]

FAILED = Failed()


# --------------------------------------------------------------------------
# tautology

PROP_CONNECTIVES = {NOT, OR, AND, IMP, IFF}
MAX_TAUT_ATOMS = 14


def prop_atoms(t: Term) -> list[Term]:
    """Maximal non-propositional subformulas, left to right."""
    out: dict = {}

    def walk(s: Term):
        if s is TRUE or s is FALSE:
            return
        if not s.is_var and (s.sym in PROP_CONNECTIVES or s.sym == ITE and s.sort == BOOL):
            for a in s.args:
                walk(a)
        else:
            out.setdefault(s, None)

    walk(t)
    return list(out)


def prop_eval(t: Term, val: dict) -> bool:
    if t is TRUE:
        return True
    if t is FALSE:
        return False
    hit = val.get(t)
    if hit is not None:
        return hit
    s, a = t.sym, t.args
    if s == NOT:
        return not prop_eval(a[0], val)
    if s == OR:
        return prop_eval(a[0], val) or prop_eval(a[1], val)
    if s == AND:
        return prop_eval(a[0], val) and prop_eval(a[1], val)
    if s == IMP:
        return not prop_eval(a[0], val) or prop_eval(a[1], val)
    if s == IFF:
        return prop_eval(a[0], val) == prop_eval(a[1], val)
    if s == ITE:
        return prop_eval(a[1], val) if prop_eval(a[0], val) else prop_eval(a[2], val)
    raise KeyError(t)


def _reflexive_to_true(t: Term) -> Term:
    if t.is_var or not t.args:
        return t
    if t.sym == EQ and t.args[0] is t.args[1]:
        return TRUE
    args = [_reflexive_to_true(a) for a in t.args]
    if all(x is y for x, y in zip(args, t.args)):
        return t
    return t.__class__(t.sym, args, t.sort)


def is_tautology(t: Term) -> Optional[bool]:
    """Propositional validity with opaque atoms; None if too many atoms."""
    t = _reflexive_to_true(t)
    atoms = prop_atoms(t)
    if len(atoms) > MAX_TAUT_ATOMS:
        return None
    for bits in itertools.product((False, True), repeat=len(atoms)):
        if not prop_eval(t, dict(zip(atoms, bits))):
            return False
    return True


def tautology(c: Clause) -> HeuristicOutcome:
    if is_tautology(c.as_term()):
        return Proved()
    return FAILED


# --------------------------------------------------------------------------
# clausal form

MAX_CNF_CLAUSES = 256


class _TooBig(Exception):
    pass


def _cnf(t: Term, pos: bool) -> list[list[Term]]:
    """CNF of t (or of ~t when pos is False) as a list of literal lists."""
    if not t.is_var:
        s, a = t.sym, t.args
        if t is TRUE:
            return [] if pos else [[]]
        if t is FALSE:
            return [[]] if pos else []
        if s == NOT:
            return _cnf(a[0], not pos)
        if s == AND and pos or s == OR and not pos:
            return _cnf(a[0], pos) + _cnf(a[1], pos)
        if s == OR and pos or s == AND and not pos:
            return _product(_cnf(a[0], pos), _cnf(a[1], pos))
        if s == IMP:
            if pos:
                return _product(_cnf(a[0], False), _cnf(a[1], True))
            return _cnf(a[0], True) + _cnf(a[1], False)
        if s == IFF:
            p, q = a
            if pos:
                return _product(_cnf(p, False), _cnf(q, True)) + _product(_cnf(p, True), _cnf(q, False))
            return _product(_cnf(p, True), _cnf(q, True)) + _product(_cnf(p, False), _cnf(q, False))
        if s == ITE and t.sort == BOOL:
            c, x, y = a
            return _product(_cnf(c, False), _cnf(x, pos)) + _product(_cnf(c, True), _cnf(y, pos))
    return [[t if pos else mk_not(t)]]


def _product(xs: list, ys: list) -> list:
    if len(xs) * len(ys) > MAX_CNF_CLAUSES:
        raise _TooBig
    return [x + y for x in xs for y in ys]


def to_cnf(t: Term) -> Optional[list[list[Term]]]:
    try:
        out = _cnf(t, True)
    except _TooBig:
        return None
    return None if len(out) > MAX_CNF_CLAUSES else out


def is_literal(t: Term) -> bool:
    atom = t.args[0] if is_app(t, NOT) else t
    if atom.is_var:
        return True
    return atom.sym not in PROP_CONNECTIVES and not (atom.sym == ITE and atom.sort == BOOL)


def clausal_form(c: Clause) -> HeuristicOutcome:
    if all(is_literal(l) for l in c.literals):
        return FAILED
    out = to_cnf(c.as_term())
    if out is None:
        return Failed("clausal form too large")
    if not out:
        return Proved("clausal form is empty")
    clauses = tuple(c.derive(lits, "cnf") for lits in out)
    n = len(clauses)
    return Replaced(clauses, f"{n} clause{'s' if n != 1 else ''}")


# --------------------------------------------------------------------------
# setify

def setify(c: Clause) -> HeuristicOutcome:
    out = clause_setify(c)
    return FAILED if out is None else Replaced((out,))


# --------------------------------------------------------------------------
# substitution

def substitution(c: Clause) -> HeuristicOutcome:
    for i, lit in enumerate(c.literals):
        if not is_app(lit, NOT):
            continue
        atom = lit.args[0]
        if not (is_app(atom, EQ) or is_app(atom, IFF)):
            continue
        for x, t in (atom.args, reversed(atom.args)):
            if x.is_var and not occurs(x, t):
                rest = [apply_bindings(l, {x: t}) for j, l in enumerate(c.literals) if j != i]
                return Replaced((c.derive(rest, "subst"),), f"{x.name} := {_show(t)}")
    return FAILED


# --------------------------------------------------------------------------
# simplification

def simplify_heuristic(c: Clause, th: Theory, engine: str = "full", fuel: int = DEFAULT_FUEL) -> HeuristicOutcome:
    try:
        lits, _ = simplify_literals(c.literals, th, engine, fuel)
    except FuelExhausted as e:
        return Failed("rewrite fuel exhausted", warning=str(e))
    except RecursionError:
        return Failed("rewriting too deep", warning="recursion limit reached while rewriting")
    if lits == [TRUE]:
        return Proved()
    if lits == [FALSE]:
        return Disproved("clause simplifies to F")
    if tuple(lits) == c.literals:
        return FAILED
    return Replaced((c.derive(lits, "simp"),))


# --------------------------------------------------------------------------
# equality (cross-fertilization)

def _cross_replace(t: Term, v: Term, by: Term) -> Term:
    """Replace v by ``by`` in t, leaving alone occurrences inside subterms of ``by``."""
    if t is v:
        return by
    if t.is_var or not t.args or occurs(t, by):
        return t
    args = [_cross_replace(a, v, by) for a in t.args]
    if all(x is y for x, y in zip(args, t.args)):
        return t
    return t.__class__(t.sym, args, t.sort)


def equality(c: Clause, th: Theory) -> HeuristicOutcome:
    """Use a hypothesis s = t to replace s by t in the other literals.

    The replaced side must not be an explicit value template and must occur
    in another literal.  Left-to-right is tried first; on an induction-step
    clause, where the equation is then dropped, the reverse direction is
    tried as well.  A variable side is only replaced where it does not sit
    inside a subterm of the other side.
    """
    lits = c.literals
    for i, lit in enumerate(lits):
        if not is_app(lit, NOT) or not is_app(lit.args[0], EQ):
            continue
        a, b = lit.args[0].args
        others = [l for j, l in enumerate(lits) if j != i]
        dirs = [(a, b)]
        if c.from_induction_step:
            dirs.append((b, a))
        for s, t in dirs:
            if is_explicit_value_template(s, th):
                continue
            if s.is_var:
                if not occurs(s, t):
                    continue  # the substitution heuristic's business
                new = [_cross_replace(l, s, t) for l in others]
                if all(x is y for x, y in zip(new, others)):
                    continue
            else:
                if not any(count_occurrences(s, l) for l in others):
                    continue
                new = [replace_subterm(l, s, t) for l in others]
            if c.from_induction_step:
                out = new
            else:
                out = new[:i] + [lit] + new[i:]
            return Replaced((c.derive(out, "equal"),), "cross-fertilized")
    return FAILED


# --------------------------------------------------------------------------
# irrelevance

def _partitions(lits) -> list[list[int]]:
    parent = list(range(len(lits)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict = {}
    for i, lit in enumerate(lits):
        for v in free_vars(lit):
            if v in owner:
                parent[find(i)] = find(owner[v])
            else:
                owner[v] = i
    groups: dict = {}
    for i in range(len(lits)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _fn_of_distinct_vars(lit: Term, th: Theory) -> bool:
    atom = lit.args[0] if is_app(lit, NOT) else lit
    if atom.is_var:
        return True
    if not atom.args or not all(a.is_var for a in atom.args):
        return False
    if len(set(atom.args)) != len(atom.args):
        return False
    return atom.sym == EQ or th.kind(atom.sym) == "function"


def falsifiable(lits, th: Theory) -> bool:
    recursive = any(not s.is_var and th.is_recursive_fn(s.sym) for l in lits for s in subterms(l))
    if not recursive:
        return True
    return len(lits) == 1 and _fn_of_distinct_vars(lits[0], th)


def irrelevance(c: Clause, th: Theory) -> HeuristicOutcome:
    lits = c.literals
    groups = _partitions(lits)
    drop = set()
    for g in groups:
        if falsifiable([lits[i] for i in g], th):
            drop.update(g)
    if not drop:
        return FAILED
    if len(drop) == len(lits):
        return Disproved("every partition of the clause is falsifiable")
    keep = [l for i, l in enumerate(lits) if i not in drop]
    return Replaced((c.derive(keep, "irrel"),), f"dropped {len(drop)} literal{'s' if len(drop) > 1 else ''}")


# --------------------------------------------------------------------------
# generalization

def generalize_heuristic(c: Clause, th: Theory, algo: str, state: GenMemory,
                         dp: Optional[Disprover] = None, eq_criterion: bool = True) -> HeuristicOutcome:
    before = state.vetoes
    g = generalize(c, th, algo, state, dp, eq_criterion)
    vetoed = state.vetoes - before
    if g is None:
        note = f"{vetoed} proposal{'s' if vetoed != 1 else ''} vetoed" if vetoed else ""
        return Failed(note)
    return Replaced((g.clause,), _describe(g))


def _show(t: Term) -> str:
    from .syntax import print_term
    return print_term(t)


def _describe(g: Generalization) -> str:
    if g.method == "apart":
        (new, old), = g.abstracted.items()
        return f"{old.name} apart to {new.name}"
    return ", ".join(f"{_show(t)} to {v.name}" for v, t in g.abstracted.items())


# --------------------------------------------------------------------------
# registry

NAMES = ("taut", "cnf", "setify", "subst", "simp", "equal", "gen", "irrel")

DISPLAY = {
    "taut": "Tautology Heuristic",
    "cnf": "Clausal Form Heuristic",
    "setify": "Setify Heuristic",
    "subst": "Substitution Heuristic",
    "simp": "Simplify Heuristic",
    "equal": "Equality Heuristic",
    "gen": "Generalization Heuristic",
    "irrel": "Irrelevance Heuristic",
}


@dataclass
class HeuristicContext:
    th: Theory
    engine: str = "full"
    gen_algo: str = "bm"
    eq_criterion: bool = True
    fuel: int = DEFAULT_FUEL
    memory: GenMemory = field(default_factory=GenMemory)
    disprover: Optional[Disprover] = None

    def __post_init__(self):
        if self.gen_algo not in ALGORITHMS:
            raise ValueError(f"unknown generalization algorithm {self.gen_algo!r}")


def apply(name: str, c: Clause, ctx: HeuristicContext) -> HeuristicOutcome:
    if name == "taut":
        return tautology(c)
    if name == "cnf":
        return clausal_form(c)
    if name == "setify":
        return setify(c)
    if name == "subst":
        return substitution(c)
    if name == "simp":
        return simplify_heuristic(c, ctx.th, ctx.engine, ctx.fuel)
    if name == "equal":
        return equality(c, ctx.th)
    if name == "gen":
        return generalize_heuristic(c, ctx.th, ctx.gen_algo, ctx.memory, ctx.disprover, ctx.eq_criterion)
    if name == "irrel":
        return irrelevance(c, ctx.th)
    raise ValueError(f"unknown heuristic {name!r}")


def display_name(name: str, engine: str = "full") -> str:
    if name == "simp" and engine == "full":
        return "HL Simplify Heuristic"
    return DISPLAY[name]
