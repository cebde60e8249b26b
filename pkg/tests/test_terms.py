import random

import pytest

from waterfall.syntax import parse_term
from waterfall.terms import (
    App, Clause, SortError, Var, apply_bindings, clause_setify, free_vars, is_explicit_value_template,
    match_pattern, max_var_depth, mk_eq, variant_key,
)

from gen import formula, num
from conftest import clause


def test_terms_are_hash_consed():
    a = App("SUC", (App("0", (), "num"),), "num")
    b = App("SUC", (App("0", (), "num"),), "num")
    assert a is b
    assert Var("m", "num") is Var("m", "num")


# -- matching -------------------------------------------------------------

def test_match_binds_pattern_variable(P):
    b = match_pattern(P("x + 0 = y").args[0], P("SUC(0) + 0 = y").args[0])
    assert b == {Var("x", "num"): P("SUC(0) = y").args[0]}


def test_match_nonlinear_mismatch(P):
    assert match_pattern(P("x + x = y").args[0], P("0 + SUC(0) = y").args[0]) is None


def test_match_variable_matches_anything(L):
    pat = Var("x", "list")
    subj = L("REVERSE(l) = l").args[0]
    assert match_pattern(pat, subj) == {pat: subj}


def test_match_respects_sort(P):
    assert match_pattern(Var("x", "list"), P("m = 0").args[0]) is None


def test_match_round_trip_on_random_terms(peano):
    rng = random.Random(3)
    hits = 0
    for _ in range(400):
        s = num(rng, 4)
        # build a pattern by abstracting a random subterm position into a variable
        pat = s
        if not s.is_var and s.args:
            i = rng.randrange(len(s.args))
            args = list(s.args)
            args[i] = Var("zz", "num")
            pat = App(s.sym, args, s.sort)
        b = match_pattern(pat, s)
        assert b is not None
        assert apply_bindings(pat, b) is s
        hits += 1
    assert hits == 400


# -- substitution -----------------------------------------------------------

def test_apply_bindings_single(P):
    t = P("x + y = z").args[0]
    assert apply_bindings(t, {Var("x", "num"): P("0 = z").args[0]}) is P("0 + y = z").args[0]


def test_apply_bindings_repeated(P):
    t = P("x + x = z").args[0]
    one = P("SUC(0) = z").args[0]
    assert apply_bindings(t, {Var("x", "num"): one}) is P("SUC(0) + SUC(0) = z").args[0]


def test_apply_bindings_is_simultaneous(P):
    t = P("x + y = z").args[0]
    x, y = Var("x", "num"), Var("y", "num")
    assert apply_bindings(t, {x: y, y: x}) is P("y + x = z").args[0]


def test_apply_bindings_sort_mismatch(P):
    with pytest.raises(SortError):
        apply_bindings(P("x = 0"), {Var("x", "num"): Var("l", "list")})


# -- free variables -----------------------------------------------------------

def test_free_vars(P):
    assert free_vars(P("0 = 0")) == frozenset()
    assert free_vars(P("m + n = n + m")) == {Var("m", "num"), Var("n", "num")}
    assert free_vars(P("SUC(SUC(x)) = 0")) == {Var("x", "num")}


# -- depth ---------------------------------------------------------------------

def _depth_oracle(t, d=0):
    """Brute-force walk: depth of each variable occurrence, root at 0."""
    if t.is_var:
        return [d]
    out = []
    for a in t.args:
        out.extend(_depth_oracle(a, d + 1))
    return out


def test_max_var_depth_examples(P):
    x = Var("x", "num")
    assert max_var_depth(x) == 0
    assert max_var_depth(P("SUC(SUC(x)) = 0").args[0]) == 2
    assert max_var_depth(P("SUC(x) + y = 0").args[0]) == 2
    assert max_var_depth(P("SUC(SUC(0)) = 0").args[0]) == 0


def test_max_var_depth_matches_oracle_and_renaming(peano):
    rng = random.Random(11)
    for _ in range(300):
        t = num(rng, 5)
        want = max(_depth_oracle(t), default=0)
        assert max_var_depth(t) == want
        ren = {v: Var(v.name + "'", v.sort) for v in free_vars(t)}
        assert max_var_depth(apply_bindings(t, ren)) == want


# -- explicit value templates ---------------------------------------------------

def test_explicit_value_templates(P, peano):
    for text in ["0", "SUC(0)", "SUC(SUC(x))"]:
        assert is_explicit_value_template(P(f"{text} = 0").args[0], peano)
    assert not is_explicit_value_template(P("n * 0 = 0").args[0], peano)
    assert not is_explicit_value_template(Var("x", "num"), peano)


def test_explicit_value_template_closure(L, lists):
    t = L("CONS(SUC(x), CONS(0, l)) = NIL").args[0]
    assert is_explicit_value_template(t, lists)
    assert not is_explicit_value_template(L("CONS(x + 0, l) = NIL").args[0], lists)


# -- clauses ----------------------------------------------------------------------

def test_clause_rejects_empty():
    with pytest.raises(ValueError):
        Clause(())


def test_setify_examples(P, peano):
    a, b = P("m = 0"), P("n = 0")
    assert clause_setify(Clause((a, b, a))).literals == (a, b)
    assert clause_setify(Clause((a, b))) is None
    assert clause_setify(Clause((a, a, a))).literals == (a,)


def test_setify_idempotent_and_matches_set_oracle(peano):
    rng = random.Random(5)
    for _ in range(200):
        lits = [formula(rng, 1) for _ in range(rng.randint(1, 5))]
        lits += [rng.choice(lits) for _ in range(rng.randint(0, 3))]
        c = Clause(tuple(lits))
        once = clause_setify(c) or c
        assert list(once.literals) == list(dict.fromkeys(lits))
        assert (clause_setify(once) or once) == once


def test_derived_clause_keeps_step_flag(peano):
    c = clause("m = 0 \\/ n = 0", peano, step=True)
    assert c.derive(c.literals[:1], "simp").from_induction_step


def test_variant_key_ignores_names(P):
    assert variant_key([P("m + n = n")]) == variant_key([P("a + b = b")])
    assert variant_key([P("m + n = n")]) != variant_key([P("m + n = m")])
    assert mk_eq(Var("a", "num"), Var("a", "num")).sort == "bool"
