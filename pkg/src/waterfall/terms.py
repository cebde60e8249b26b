"""Terms, clauses and the basic operations every heuristic is built from.

Terms are hash-consed: two structurally equal terms are the same Python
object, so equality is identity and hashing is O(1).  Hashes are derived
from CRC32 of symbol names, which keeps set/dict iteration order stable
across interpreter runs (``PYTHONHASHSEED`` does not leak into results).
"""
from __future__ import annotations

import sys
import weakref
import zlib
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Optional

# SUC-chains produced by numeric evaluation can be a few thousand deep.
if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)

BOOL = "bool"

TRUE_SYM, FALSE_SYM = "T", "F"
NOT, OR, AND, IMP, IFF, EQ, ITE = "not", "or", "and", "imp", "iff", "eq", "ite"
CONNECTIVES = frozenset({NOT, OR, AND, IMP, IFF})
LOGICAL_SYMBOLS = CONNECTIVES | {TRUE_SYM, FALSE_SYM, EQ, ITE}


def _crc(s: str) -> int:
    return zlib.crc32(s.encode("utf-8"))


class Term:
    __slots__ = ()

    is_var = False

    @property
    def size(self) -> int:
        raise NotImplementedError


class Var(Term):
    __slots__ = ("name", "sort", "_hash", "__weakref__")
    _table: "weakref.WeakValueDictionary[tuple, Var]" = weakref.WeakValueDictionary()

    is_var = True

    def __new__(cls, name: str, sort: str):
        key = (name, sort)
        obj = cls._table.get(key)
        if obj is None:
            obj = object.__new__(cls)
            object.__setattr__(obj, "name", name)
            object.__setattr__(obj, "sort", sort)
            object.__setattr__(obj, "_hash", hash(("v", _crc(name), _crc(sort))))
            cls._table[key] = obj
        return obj

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (Var, (self.name, self.sort))

    def __repr__(self):
        return f"Var({self.name!r}, {self.sort!r})"

    @property
    def size(self) -> int:
        return 1

    @property
    def ground(self) -> bool:
        return False


class App(Term):
    __slots__ = ("sym", "args", "sort", "_hash", "_size", "ground", "_fv", "__weakref__")
    _table: "weakref.WeakValueDictionary[tuple, App]" = weakref.WeakValueDictionary()

    def __new__(cls, sym: str, args: Iterable[Term] = (), sort: str = BOOL):
        args = tuple(args)
        key = (sym, args)
        obj = cls._table.get(key)
        if obj is None:
            obj = object.__new__(cls)
            sa = object.__setattr__
            sa(obj, "sym", sym)
            sa(obj, "args", args)
            sa(obj, "sort", sort)
            sa(obj, "_hash", hash((_crc(sym),) + tuple(a._hash for a in args)))
            sa(obj, "_size", 1 + sum(a.size for a in args))
            sa(obj, "ground", all(a.ground for a in args))
            sa(obj, "_fv", None)
            cls._table[key] = obj
        return obj

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (App, (self.sym, self.args, self.sort))

    def __repr__(self):
        if not self.args:
            return f"App({self.sym!r})"
        return f"App({self.sym!r}, {list(self.args)!r})"

    @property
    def size(self) -> int:
        return self._size


# --------------------------------------------------------------------------
# constructors for the logical vocabulary

TRUE = App(TRUE_SYM, (), BOOL)
FALSE = App(FALSE_SYM, (), BOOL)


def mk_not(p: Term) -> Term:
    return App(NOT, (p,), BOOL)


def mk_eq(a: Term, b: Term) -> Term:
    if a.sort != b.sort:
        raise SortError(f"eq between sorts {a.sort} and {b.sort}")
    if a.sort == BOOL:
        return App(IFF, (a, b), BOOL)
    return App(EQ, (a, b), BOOL)


def mk_imp(p: Term, q: Term) -> Term:
    return App(IMP, (p, q), BOOL)


def mk_iff(p: Term, q: Term) -> Term:
    return App(IFF, (p, q), BOOL)


def mk_ite(c: Term, a: Term, b: Term) -> Term:
    return App(ITE, (c, a, b), a.sort)


def mk_or(lits: Iterable[Term]) -> Term:
    """Right-nested disjunction; the empty disjunction is F."""
    lits = list(lits)
    if not lits:
        return FALSE
    out = lits[-1]
    for lit in reversed(lits[:-1]):
        out = App(OR, (lit, out), BOOL)
    return out


def mk_and(conjs: Iterable[Term]) -> Term:
    conjs = list(conjs)
    if not conjs:
        return TRUE
    out = conjs[-1]
    for c in reversed(conjs[:-1]):
        out = App(AND, (c, out), BOOL)
    return out


def is_app(t: Term, sym: str) -> bool:
    return not t.is_var and t.sym == sym


def is_eq(t: Term) -> bool:
    return is_app(t, EQ)


def is_neg(t: Term) -> bool:
    return is_app(t, NOT)


def negate(lit: Term) -> Term:
    """Complement of a literal, collapsing a double negation."""
    return lit.args[0] if is_neg(lit) else mk_not(lit)


def disjuncts(t: Term) -> list[Term]:
    if is_app(t, OR):
        return disjuncts(t.args[0]) + disjuncts(t.args[1])
    return [t]


def conjuncts(t: Term) -> list[Term]:
    if is_app(t, AND):
        return conjuncts(t.args[0]) + conjuncts(t.args[1])
    return [t]


class SortError(ValueError):
    pass


# --------------------------------------------------------------------------
# traversal

def subterms(t: Term) -> Iterator[Term]:
    """Pre-order, left to right, with repetition."""
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        if not s.is_var:
            stack.extend(reversed(s.args))


def positions(t: Term, path: tuple = ()) -> Iterator[tuple[tuple, Term]]:
    yield path, t
    if not t.is_var:
        for i, a in enumerate(t.args):
            yield from positions(a, path + (i,))


def free_vars(t: Term) -> frozenset:
    if t.is_var:
        return frozenset((t,))
    if t.ground:
        return frozenset()
    if t._fv is None:
        fv = frozenset().union(*(free_vars(a) for a in t.args))
        object.__setattr__(t, "_fv", fv)
    return t._fv


def vars_in_order(t: Term | Iterable[Term]) -> list[Var]:
    """Distinct variables in order of first (pre-order) occurrence."""
    terms = [t] if isinstance(t, Term) else list(t)
    seen: dict[Var, None] = {}
    for root in terms:
        for s in subterms(root):
            if s.is_var:
                seen.setdefault(s, None)
    return list(seen)


def occurs(sub: Term, t: Term) -> bool:
    if sub is t:
        return True
    if t.is_var or t.size <= sub.size:
        return False
    if sub.is_var and sub not in free_vars(t):
        return False
    return any(occurs(sub, a) for a in t.args)


def count_occurrences(sub: Term, t: Term) -> int:
    if sub is t:
        return 1
    if t.is_var or t.size <= sub.size:
        return 0
    return sum(count_occurrences(sub, a) for a in t.args)


def max_var_depth(t: Term) -> int:
    """Deepest variable occurrence, counting application nodes above it.

    The root sits at depth 0; a ground term has depth 0 as well.
    """
    best = 0
    stack = [(t, 0)]
    while stack:
        s, d = stack.pop()
        if s.is_var:
            best = max(best, d)
        elif not s.ground:
            stack.extend((a, d + 1) for a in s.args)
    return best


def depth(t: Term) -> int:
    """Height of the syntax tree (a leaf has depth 0)."""
    if t.is_var or not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


# --------------------------------------------------------------------------
# matching and substitution

Bindings = dict


def match_pattern(pattern: Term, subject: Term, bindings: Optional[Bindings] = None) -> Optional[Bindings]:
    """One-way syntactic matching; repeated pattern variables must agree."""
    b = dict(bindings) if bindings else {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if p.is_var:
            if p.sort != s.sort:
                return None
            bound = b.get(p)
            if bound is None:
                b[p] = s
            elif bound is not s:
                return None
        elif p.ground:
            if p is not s:
                return None
        elif s.is_var or p.sym != s.sym or len(p.args) != len(s.args):
            return None
        else:
            stack.extend(zip(p.args, s.args))
    return b


def apply_bindings(t: Term, b: Bindings) -> Term:
    """Simultaneous substitution of variables."""
    if not b:
        return t
    for v, val in b.items():
        if v.sort != val.sort:
            raise SortError(f"cannot bind {v.name}:{v.sort} to a term of sort {val.sort}")
    return _subst(t, b, {})


def _subst(t: Term, b: Bindings, memo: dict) -> Term:
    if t.is_var:
        return b.get(t, t)
    if t.ground:
        return t
    hit = memo.get(t)
    if hit is None:
        hit = App(t.sym, [_subst(a, b, memo) for a in t.args], t.sort)
        memo[t] = hit
    return hit


def replace_subterm(t: Term, old: Term, new: Term) -> Term:
    """Replace every occurrence of ``old`` in ``t`` by ``new``."""
    if t is old:
        return new
    if t.is_var or t.size <= old.size:
        return t
    args = [replace_subterm(a, old, new) for a in t.args]
    if all(x is y for x, y in zip(args, t.args)):
        return t
    return App(t.sym, args, t.sort)


def replace_at(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    i = path[0]
    args = list(t.args)
    args[i] = replace_at(args[i], path[1:], new)
    return App(t.sym, args, t.sort)


def rename_apart(name: str, avoid: Iterable[str]) -> str:
    """``name`` itself if free, else ``name'``, ``name''`` ..."""
    avoid = set(avoid)
    cand = name
    while cand in avoid:
        cand += "'"
    return cand


def sort_base_name(sort: str) -> str:
    return sort[0].lower() if sort else "x"


def fresh_var(sort: str, avoid: Iterable[str], base: Optional[str] = None) -> Var:
    return Var(rename_apart(base or sort_base_name(sort), avoid), sort)


# --------------------------------------------------------------------------
# explicit value templates

def is_explicit_value_template(t: Term, th) -> bool:
    """Non-variable term built from bottom objects, constants and
    constructor applications whose arguments are variables or templates."""
    if t.is_var:
        return False
    kind = th.kind(t.sym)
    if not t.args:
        return kind in ("bottom", "constructor", "logical")
    if kind != "constructor":
        return False
    return all(a.is_var or is_explicit_value_template(a, th) for a in t.args)


# --------------------------------------------------------------------------
# clauses

@dataclass(frozen=True)
class Clause:
    """Disjunction of boolean literals, the unit the waterfall works on."""

    literals: tuple
    from_induction_step: bool = False
    origin: str = "initial"

    def __post_init__(self):
        lits = tuple(self.literals)
        if not lits:
            raise ValueError("a clause needs at least one literal (use F for falsity)")
        for lit in lits:
            if lit.sort != BOOL:
                raise SortError(f"clause literal of sort {lit.sort}")
        object.__setattr__(self, "literals", lits)

    @classmethod
    def of(cls, lits: Iterable[Term], parent: Optional["Clause"] = None, origin: str = "initial") -> "Clause":
        lits = list(lits) or [FALSE]
        step = parent.from_induction_step if parent is not None else False
        return cls(tuple(lits), step, origin)

    def derive(self, lits: Iterable[Term], origin: str) -> "Clause":
        """A descendant clause that keeps the induction-step provenance."""
        lits = list(lits) or [FALSE]
        return replace(self, literals=tuple(lits), origin=origin)

    def as_term(self) -> Term:
        return mk_or(self.literals)

    @property
    def key(self) -> tuple:
        return self.literals

    def __len__(self):
        return len(self.literals)


def clause_setify(c: Clause) -> Optional[Clause]:
    """Drop repeated literals keeping first occurrences, or None if there are none."""
    seen: dict[Term, None] = {}
    for lit in c.literals:
        seen.setdefault(lit, None)
    if len(seen) == len(c.literals):
        return None
    return c.derive(seen, "setify")


def clause_vars(c: Clause) -> list[Var]:
    return vars_in_order(c.literals)


def variant_key(lits: Iterable[Term]) -> tuple:
    """Fingerprint of a literal sequence that ignores variable names."""
    lits = tuple(lits)
    ren = {v: Var(f"_{i}", v.sort) for i, v in enumerate(vars_in_order(lits))}
    return tuple(apply_bindings(lit, ren) for lit in lits)


def stable_hash(obj) -> int:
    """Process-independent 32-bit hash of printable data."""
    return zlib.crc32(repr(obj).encode("utf-8"))
