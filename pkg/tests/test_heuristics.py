import random

import pytest

from waterfall.heuristics import (
    NAMES, Disproved, Failed, HeuristicContext, Proved, Replaced, apply, clausal_form, display_name,
    equality, irrelevance, is_tautology, setify, simplify_heuristic, substitution, tautology, to_cnf,
)
from waterfall.syntax import parse_theory, print_term
from waterfall.terms import App, Clause, Var, free_vars

import oracle
from conftest import clause
from gen import formula, num


def shown(outcome):
    assert isinstance(outcome, Replaced)
    return [[print_term(l) for l in c.literals] for c in outcome.clauses]


# -- tautology --------------------------------------------------------------

def test_tautology(peano):
    assert isinstance(tautology(clause("m = 0 \\/ ~(m = 0)", peano)), Proved)
    assert tautology(clause("m = 0 \\/ n = 0", peano)) == Failed()
    assert isinstance(tautology(clause("(m = 0 ==> n = 0) \\/ m = 0", peano)), Proved)


def test_reflexive_equation_is_tautology(P):
    assert is_tautology(P("m + n = m + n"))


# -- clausal form -------------------------------------------------------------

def test_cnf_splits_iff(peano):
    assert shown(clausal_form(clause("(m = 0 <=> n = 0)", peano))) == [
        ["~(m = 0)", "n = 0"], ["m = 0", "~(n = 0)"]]


def test_cnf_of_implication(peano):
    out = clausal_form(clause("m = 0 /\\ n = 0 ==> SUC(m) = n", peano))
    assert shown(out) == [["~(m = 0)", "~(n = 0)", "SUC(m) = n"]]


def test_cnf_does_nothing_on_literals(peano):
    assert clausal_form(clause("m = 0 \\/ ~(n = 0)", peano)) == Failed()


def test_cnf_keeps_step_flag(peano):
    out = clausal_form(clause("(m = 0 <=> n = 0)", peano, step=True))
    assert all(c.from_induction_step for c in out.clauses)


# -- setify -------------------------------------------------------------------

def test_setify(peano):
    assert shown(setify(clause("m = 0 \\/ m = 0", peano))) == [["m = 0"]]
    assert setify(clause("m = 0 \\/ n = 0", peano)) == Failed()


# -- substitution ---------------------------------------------------------------

def test_substitution(peano):
    out = substitution(clause("~(m = SUC(n)) \\/ m + n = 0", peano))
    assert shown(out) == [["SUC(n) + n = 0"]]
    assert out.note == "m := SUC(n)"


def test_substitution_needs_occurs_check(peano):
    assert substitution(clause("~(m = SUC(m)) \\/ m = 0", peano)) == Failed()


# -- simplification ----------------------------------------------------------------

def test_simplify_outcomes(peano):
    assert isinstance(simplify_heuristic(clause("0 + n = n", peano), peano), Proved)
    assert isinstance(simplify_heuristic(clause("SUC(n) = 0", peano), peano), Disproved)
    assert simplify_heuristic(clause("m + 0 = m", peano), peano) == Failed()
    assert shown(simplify_heuristic(clause("SUC(m) = SUC(n)", peano), peano)) == [["m = n"]]


def test_simplify_reports_fuel_exhaustion(peano):
    th = parse_theory("rewrite PRE(m) = PRE(SUC(PRE(m)));", peano).theory
    out = simplify_heuristic(clause("PRE(a) = 0", th), th, fuel=40)
    assert isinstance(out, Failed) and "fuel" in out.warning


# -- equality -------------------------------------------------------------------------

def test_equality_keeps_hypothesis_outside_step(peano):
    out = equality(clause("~(n * 0 = 0) \\/ n * 0 + 0 = 0", peano), peano)
    assert shown(out) == [["~(n * 0 = 0)", "0 + 0 = 0"]]


def test_equality_drops_hypothesis_in_step(peano):
    out = equality(clause("~(n * 0 = 0) \\/ n * 0 + 0 = 0", peano, step=True), peano)
    assert shown(out) == [["0 + 0 = 0"]]
    assert out.clauses[0].from_induction_step


def test_equality_reverse_direction_only_in_step(peano):
    c = "~(0 = n * 0) \\/ n * 0 + 0 = 0"
    assert equality(clause(c, peano), peano) == Failed()
    assert shown(equality(clause(c, peano, step=True), peano)) == [["0 + 0 = 0"]]


def test_equality_skips_explicit_values(peano):
    assert equality(clause("~(SUC(0) = n + n) \\/ SUC(0) <= m", peano), peano) == Failed()


# -- irrelevance ------------------------------------------------------------------------

def test_irrelevance_drops_unrelated_partition(peano):
    out = irrelevance(clause("m <= p \\/ q + 0 = 0", peano), peano)
    assert shown(out) == [["q + 0 = 0"]]


def test_irrelevance_keeps_connected_literals(peano):
    assert irrelevance(clause("m <= p \\/ m + 0 = 0", peano), peano) == Failed()


def test_irrelevance_disproves_when_everything_goes(peano):
    assert isinstance(irrelevance(clause("p <= q", peano), peano), Disproved)


def test_irrelevance_drops_nonrecursive_partition(peano):
    out = irrelevance(clause("m + n = n + m \\/ SUC(p) = q", peano), peano)
    assert shown(out) == [["m + n = n + m"]]


# -- registry ------------------------------------------------------------------------------

def test_registry(peano):
    ctx = HeuristicContext(peano)
    assert NAMES == ("taut", "cnf", "setify", "subst", "simp", "equal", "gen", "irrel")
    assert isinstance(apply("taut", clause("m = 0 \\/ ~(m = 0)", peano), ctx), Proved)
    with pytest.raises(ValueError):
        apply("induct", clause("m = 0", peano), ctx)
    with pytest.raises(ValueError):
        HeuristicContext(peano, gen_algo="magic")
    assert display_name("simp", "full") == "HL Simplify Heuristic"
    assert display_name("simp", "bm") == "Simplify Heuristic"


# -- soundness sampling ----------------------------------------------------------------------

def _random_clause(rng, step):
    lits = [formula(rng, 1) for _ in range(rng.randint(1, 3))]
    if rng.random() < 0.5:
        # a hypothesis for the substitution and equality heuristics to use
        lhs = Var(rng.choice(["m", "n"]), "num") if rng.random() < 0.5 else num(rng, 2)
        eq = App("eq", (lhs, num(rng, 2)), "bool")
        lits.insert(rng.randrange(len(lits) + 1), App("not", (eq,), "bool"))
    if rng.random() < 0.2:
        lits.append(rng.choice(lits))
    return Clause(tuple(lits), from_induction_step=step)


def _holds(c, env):
    return oracle.value(c.as_term(), env)


@pytest.mark.parametrize("name", ["taut", "cnf", "setify", "subst", "simp", "equal", "irrel"])
def test_heuristic_soundness_sampling(name, peano):
    """Whenever the input clause is falsified, some output clause is too."""
    rng = random.Random(NAMES.index(name))
    ctx = HeuristicContext(peano)
    fired = 0
    for i in range(300):
        c = _random_clause(rng, step=i % 2 == 1)
        out = apply(name, c, ctx)
        if isinstance(out, Failed):
            continue
        fired += 1
        vs = sorted(free_vars(c.as_term()), key=lambda v: v.name)
        for _ in range(30):
            env = {v.name: oracle.random_value(v.sort, rng, 3) for v in vs}
            if isinstance(out, Proved):
                assert _holds(c, env), print_term(c.as_term())
            elif isinstance(out, Replaced) and not _holds(c, env):
                assert not all(_holds(d, env) for d in out.clauses), print_term(c.as_term())
            elif isinstance(out, Disproved) and name == "simp":
                assert not _holds(c, env)
    assert fired > 0
