"""Generalization: minimal common subterms, Aderhold's proposals, and
generalizing variables apart.

Every algorithm returns a :class:`Generalization` recording which terms
were replaced by which fresh variables, so the caller (and the tests) can
check that instantiating the fresh variables gives back the input.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .disprove import Disprover
from .terms import (
    BOOL, EQ, NOT, Clause, Term, Var, apply_bindings, count_occurrences, free_vars, is_app,
    is_explicit_value_template, match_pattern, mk_and, mk_imp, mk_or, occurs, positions, rename_apart,
    replace_subterm, sort_base_name, subterms, variant_key, vars_in_order,
)
from .theory import Theory

ALGORITHMS = ("bm", "aderhold", "aderhold-noeq", "bm+apart", "aderhold+apart")


@dataclass(frozen=True)
class Generalization:
    clause: Clause
    abstracted: dict  # fresh Var -> the term it replaced (for "apart": the variable itself)
    method: str
    hypotheses: tuple = ()  # instantiated generalization lemmas added as hypotheses


@dataclass
class Proposal:
    terms: tuple
    fresh_vars: dict
    score: tuple  # (induction test passed, times proposed, occurrences)


@dataclass
class GenMemory:
    """Per-proof record of generalizations already made."""

    done: set = field(default_factory=set)  # (clause family, term)
    outputs: set = field(default_factory=set)  # clause families produced by generalization
    vetoes: int = 0
    log: list = field(default_factory=list)  # accepted Generalization records

    def family(self, c: Clause) -> tuple:
        return variant_key(c.literals)


# --------------------------------------------------------------------------
# shared helpers

def generalizable(t: Term, th: Theory) -> bool:
    if t.is_var or t.sort == BOOL:
        return False
    if is_explicit_value_template(t, th):
        return False
    if th.kind(t.sym) in ("accessor", "logical", "bottom"):
        return False
    return True


def has_constructor(t: Term, th: Theory) -> bool:
    return any(not s.is_var and s.args and th.kind(s.sym) == "constructor" for s in subterms(t))


def _equations(lits) -> list[Term]:
    """Equality atoms anywhere in the literals (negated or not), pre-order."""
    return [s for lit in lits for s in subterms(lit) if is_app(s, EQ)]


def _occurrences(t: Term, lits) -> int:
    return sum(count_occurrences(t, lit) for lit in lits)


def fresh_names(lits, terms, extra_avoid=()) -> dict:
    """Fresh variables named after the sort (n, n', ...), one per term."""
    avoid = {v.name for v in vars_in_order(lits)} | set(extra_avoid)
    out = {}
    for t in terms:
        v = Var(rename_apart(sort_base_name(t.sort), avoid), t.sort)
        avoid.add(v.name)
        out[t] = v
    return out


def _abstract(lits, mapping: dict) -> list[Term]:
    out = []
    for lit in lits:
        for t, v in mapping.items():
            lit = replace_subterm(lit, t, v)
        out.append(lit)
    return out


def _first_position(t: Term, lits) -> tuple:
    for i, lit in enumerate(lits):
        for path, s in positions(lit):
            if s is t:
                return (i, path)
    return (len(lits), ())


def instantiation_recovers(g: Generalization, original: Clause) -> bool:
    """Substituting the abstracted terms back yields the input clause."""
    lits = [apply_bindings(lit, g.abstracted) for lit in g.clause.literals]
    if g.hypotheses:
        return is_app(lits[0], "imp") and lits[0].args[1] is mk_or(original.literals)
    return tuple(lits) == original.literals


# --------------------------------------------------------------------------
# Boyer-Moore minimal common subterms

def bm_candidates(c: Clause, th: Theory) -> list[Term]:
    lits = c.literals
    seen: dict = {}
    for lit in lits:
        for s in subterms(lit):
            if s not in seen and generalizable(s, th):
                seen[s] = None
    cands = []
    for t in seen:
        if _occurrences(t, lits) >= 2:
            cands.append(t)
            continue
        for e in _equations(lits):
            a, b = e.args
            if (a is t or count_occurrences(t, a)) and (b is t or count_occurrences(t, b)):
                cands.append(t)
                break
    minimal = [t for t in cands if not any(u is not t and count_occurrences(u, t) for u in cands)]
    minimal.sort(key=lambda t: _first_position(t, lits))
    return minimal


def bm_generalize(c: Clause, th: Theory) -> Optional[Generalization]:
    cands = bm_candidates(c, th)
    if not cands:
        return None
    mapping = fresh_names(c.literals, cands)
    body = _abstract(c.literals, mapping)
    hyps = []
    for lemma in th.generalization_lemmas:
        for t, v in mapping.items():
            for sub in subterms(lemma):
                if sub.is_var or sub.sort != t.sort:
                    continue
                b = match_pattern(sub, t)
                if b is None or not free_vars(lemma) <= set(b):
                    continue
                inst = apply_bindings(lemma, b)
                hyps.append((inst, replace_subterm(inst, t, v)))
                break
    abstracted = {v: t for t, v in mapping.items()}
    if hyps:
        lit = mk_imp(mk_and([h for _, h in hyps]), mk_or(body))
        out = c.derive([lit], "gen")
        return Generalization(out, abstracted, "bm", tuple(h for h, _ in hyps))
    return Generalization(c.derive(body, "gen"), abstracted, "bm")


# --------------------------------------------------------------------------
# Aderhold common subterms

def induction_test(c: Clause | list, v: Var, th: Theory) -> bool:
    """v occurs as the recursive argument of some defined function application."""
    lits = c.literals if isinstance(c, Clause) else c
    for lit in lits:
        for s in subterms(lit):
            if s.is_var or s.sym not in th.fn_defs:
                continue
            pos = th.fn_defs[s.sym].recursive_arg
            if pos is not None and s.args[pos] is v:
                return True
    return False


def aderhold_proposals(c: Clause, th: Theory, eq_criterion: bool = True) -> list[Proposal]:
    lits = c.literals

    def ok(t: Term) -> bool:
        return generalizable(t, th) and not has_constructor(t, th)

    proposed: dict = {}  # term -> times proposed
    equations = []
    for lit in lits:
        for s in subterms(lit):
            if s.is_var:
                continue
            if s.sym in th.fn_defs:
                pos = th.fn_defs[s.sym].recursive_arg
                if pos is not None and ok(s.args[pos]):
                    proposed[s.args[pos]] = proposed.get(s.args[pos], 0) + 1
            elif s.sym == EQ:
                equations.append(s)
                for side in s.args:
                    if ok(side):
                        proposed[side] = proposed.get(side, 0) + 1
    out = []
    for t, times in proposed.items():
        occ = _occurrences(t, lits)
        if occ < 2:
            continue
        # the equation criterion, for every equation the term occurs in
        if eq_criterion and not all(_eq_suitable(t, e) for e in equations if occurs(t, e)):
            continue
        mapping = fresh_names(lits, [t])
        gen = _abstract(lits, mapping)
        passed = induction_test(gen, mapping[t], th)
        out.append(Proposal((t,), mapping, (passed, times, occ)))
    out.sort(key=lambda p: (not p.score[0], -p.score[1], -p.score[2], p.terms[0].size,
                            _first_position(p.terms[0], lits)))
    return out


def _eq_suitable(t: Term, e: Term) -> bool:
    """t occurs on both sides of e, or twice on one side."""
    a, b = e.args
    na, nb = count_occurrences(t, a), count_occurrences(t, b)
    return (na and nb) or na >= 2 or nb >= 2


def aderhold_generalize(c: Clause, th: Theory, eq_criterion: bool, mem: GenMemory,
                        dp: Optional[Disprover]) -> Optional[Generalization]:
    fam = mem.family(c)
    if fam in mem.outputs:
        return None
    method = "aderhold" if eq_criterion else "aderhold-noeq"
    for p in aderhold_proposals(c, th, eq_criterion):
        t = p.terms[0]
        if (fam, t) in mem.done:
            continue
        gen = c.derive(_abstract(c.literals, p.fresh_vars), "gen")
        if dp is not None and not dp.check(gen).survived:
            mem.vetoes += 1
            mem.done.add((fam, t))
            continue
        mem.done.add((fam, t))
        mem.outputs.add(mem.family(gen))
        return Generalization(gen, {v: u for u, v in p.fresh_vars.items()}, method)
    return None


# --------------------------------------------------------------------------
# generalizing variables apart

def _rec_pos(th: Theory, sym: str) -> Optional[int]:
    fn = th.fn_defs.get(sym)
    return None if fn is None else fn.recursive_arg


def apart_candidates(c: Clause, th: Theory) -> list[tuple[str, Var]]:
    """(f, v) with v the recursive argument of some f application and a
    non-recursive argument of the same or a later one (left to right)."""
    seen_rec: set = set()
    order: list = []
    for lit in c.literals:
        for s in subterms(lit):
            if s.is_var:
                continue
            pos = _rec_pos(th, s.sym)
            if pos is None:
                continue
            if s.args[pos].is_var:
                seen_rec.add((s.sym, s.args[pos]))
            for i, a in enumerate(s.args):
                key = (s.sym, a)
                if i != pos and a.is_var and key in seen_rec and key not in order:
                    order.append(key)
    return order


def _rename_phase1(t: Term, f: str, v: Var, new: Var, th: Theory) -> Term:
    """In every f application not nested in another f application, rename v
    at the recursive argument, or else at a non-recursive argument."""
    if t.is_var or not t.args:
        return t
    if t.sym == f:
        pos = th.fn_defs[f].recursive_arg
        args = list(t.args)
        if args[pos] is v:
            args[pos] = new
        else:
            for i, a in enumerate(args):
                if i != pos and a is v:
                    args[i] = new
                    break
        return t.__class__(t.sym, args, t.sort)
    args = [_rename_phase1(a, f, v, new, th) for a in t.args]
    if all(x is y for x, y in zip(args, t.args)):
        return t
    return t.__class__(t.sym, args, t.sort)


def _rename_phase2(t: Term, fs: set, v: Var, new: Var, th: Theory) -> Term:
    """Rename v where the path from t passes only through recursive argument
    positions of functions in ``fs`` (constructors are transparent)."""
    if t is v:
        return new
    if t.is_var or not t.args:
        return t
    if t.sym in fs:
        pos = th.fn_defs[t.sym].recursive_arg
        args = list(t.args)
        args[pos] = _rename_phase2(args[pos], fs, v, new, th)
    elif th.kind(t.sym) == "constructor":
        args = [_rename_phase2(a, fs, v, new, th) for a in t.args]
    else:
        return t
    if all(x is y for x, y in zip(args, t.args)):
        return t
    return t.__class__(t.sym, args, t.sort)


def _apart_ok(before: Term, after: Term, v: Var, new: Var) -> bool:
    """Became the fresh variable, or some but not all occurrences of v renamed."""
    if after is new:
        return True
    n_before = count_occurrences(v, before)
    n_new = count_occurrences(new, after)
    return 0 < n_new < n_before


def _useful(old_lits, new_lits, v: Var, new: Var) -> bool:
    """Some but not all occurrences of v renamed across the clause, and
    every equation side mentioning v generalized apart successfully."""
    total_old = sum(count_occurrences(v, l) for l in old_lits)
    total_new = sum(count_occurrences(new, l) for l in new_lits)
    if not 0 < total_new < total_old:
        return False
    for ol, nl in zip(old_lits, new_lits):
        oa = ol.args[0] if is_app(ol, NOT) else ol
        na = nl.args[0] if is_app(nl, NOT) else nl
        if is_app(oa, EQ):
            for bs, as_ in zip(oa.args, na.args):
                if count_occurrences(v, bs) and not _apart_ok(bs, as_, v, new):
                    return False
    return True


def generalize_apart(c: Clause, th: Theory, dp: Optional[Disprover],
                     mem: Optional[GenMemory] = None) -> Optional[Generalization]:
    lits = c.literals
    fam = variant_key(lits)
    for f, v in apart_candidates(c, th):
        new = Var(rename_apart(sort_base_name(v.sort), {x.name for x in vars_in_order(lits)}), v.sort)
        # phase 1
        new_lits = [_rename_phase1(l, f, v, new, th) for l in lits]
        candidate = None
        if _useful(lits, new_lits, v, new):
            candidate = new_lits
        else:
            pos = th.fn_defs[f].recursive_arg
            fs = {g for g, fn in th.fn_defs.items() if fn.recursive_arg == pos}
            new_lits = []
            for l in lits:
                neg = is_app(l, NOT)
                atom = l.args[0] if neg else l
                if is_app(atom, EQ) or is_app(atom, "iff"):
                    atom = atom.__class__(atom.sym, [_rename_phase2(s, fs, v, new, th) for s in atom.args], atom.sort)
                else:
                    atom = _rename_phase2(atom, fs, v, new, th)
                new_lits.append(atom.__class__(NOT, (atom,), BOOL) if neg else atom)
            if _useful(lits, new_lits, v, new):
                candidate = new_lits
        if candidate is None:
            continue
        if mem is not None and (fam, ("apart", f, v)) in mem.done:
            continue
        gen = c.derive(candidate, "gen")
        if mem is not None:
            mem.done.add((fam, ("apart", f, v)))
        if dp is not None and not dp.check(gen).survived:
            if mem is not None:
                mem.vetoes += 1
            continue
        if mem is not None:
            mem.outputs.add(mem.family(gen))
        return Generalization(gen, {new: v}, "apart")
    return None


def generalize(c: Clause, th: Theory, algo: str, mem: GenMemory,
               dp: Optional[Disprover], eq_criterion: bool = True) -> Optional[Generalization]:
    """Dispatch on an algorithm token; every result is vetted by ``dp``.

    ``eq_criterion`` only matters for the ``aderhold`` token;
    ``aderhold-noeq`` always runs without it.
    """
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown generalization algorithm {algo!r}")
    first, _, second = algo.partition("+")
    if first == "bm":
        g = bm_generalize(c, th)
        if g is not None and dp is not None and not dp.check(g.clause).survived:
            mem.vetoes += 1
            g = None
    else:
        g = aderhold_generalize(c, th, eq_criterion and first == "aderhold", mem, dp)
    if g is None and second == "apart":
        g = generalize_apart(c, th, dp, mem)
    if g is not None:
        mem.log.append((c, g))
    return g
