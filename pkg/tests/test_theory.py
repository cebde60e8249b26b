import pytest

from waterfall.syntax import ParseError, bundled_path, load_bundled, parse_term, parse_theory, print_theory
from waterfall.theory import (
    TheoryError, add_generalization_lemma, declare_function, add_rewrite_rule, define_function, define_shell,
    empty_theory, rule_from_term, shell_facts,
)


def test_num_induction_scheme(peano):
    sh = peano.shells["num"]
    assert sh.describe_induction() == "P 0 ∧ (∀n. P n ⇒ P (SUC n)) ⇒ ∀n. P n"
    assert sh.describe_cases() == "∀n. n = 0 ∨ (∃n'. n = SUC n')"
    assert sh.induction_scheme == (("0", (), ()), ("SUC", ("num",), (0,)))


def test_list_schemes(lists):
    sh = lists.shells["list"]
    assert sh.describe_induction() == "P NIL ∧ (∀n l. P l ⇒ P (CONS (n, l))) ⇒ ∀l. P l"
    assert sh.describe_cases() == "∀l. l = NIL ∨ (∃n l'. l = CONS (n, l'))"
    assert sh.distinctness == (("NIL", "CONS"),)
    assert sh.injectivity == ("CONS",)
    assert sh.accessor_equations() == [("HD", "CONS", 0), ("TL", "CONS", 1)]


def test_recursive_positions_are_zero_based(lists):
    assert lists.fn_defs["PLUS"].recursive_arg == 0
    assert lists.fn_defs["APPEND"].recursive_arg == 0
    assert lists.fn_defs["LE"].recursive_arg == 1
    assert lists.fn_defs["EXP"].recursive_arg == 1
    assert lists.is_recursive_fn("MULT")


def test_shell_facts_cover_distinctness_and_injectivity(peano):
    facts = shell_facts(peano)
    # bool distinctness, 0 versus SUC, SUC injectivity
    assert len(facts) == 3
    assert all(f.sort == "bool" for f in facts)


def test_shell_needs_bottom_object():
    th = empty_theory()
    with pytest.raises(TheoryError):
        define_shell(th, "tree", (), [("NODE", ("tree", "tree"), ())])


def test_shell_rejects_unknown_sort_and_duplicates(peano):
    with pytest.raises(TheoryError):
        define_shell(peano, "box", ("EMPTY",), [("BOX", ("widget",), ())])
    with pytest.raises(TheoryError):
        define_shell(peano, "num", ("Z",), ())


def test_missing_constructor_case():
    with pytest.raises(ParseError, match="missing case"):
        parse_theory("""
            shell nat { bottom Z; con S(nat); }
            define HALF(nat): nat { HALF(S(n)) = HALF(n); }
        """)


def test_non_primitive_recursion_rejected():
    with pytest.raises(ParseError, match="non-immediate"):
        parse_theory("""
            shell nat { bottom Z; con S(nat) accessors (P); }
            define BAD(nat): nat { BAD(Z) = Z; BAD(S(n)) = BAD(S(S(n))); }
        """)


def test_unbound_rhs_variable_rejected():
    with pytest.raises(ParseError, match="not bound"):
        parse_theory("""
            shell nat { bottom Z; con S(nat); }
            define K(nat): nat { K(Z) = m; K(S(n)) = n; }
        """)


def test_rewrite_rule_shapes(P):
    r = rule_from_term(P("m + 0 = m"))
    assert r.lhs is P("m + 0 = m").args[0] and r.condition is None and not r.permutative
    assert rule_from_term(P("m + n = n + m")).permutative
    neg = rule_from_term(P("~(SUC(n) = 0)"))
    assert str(neg.rhs) in ("F", "F()") or neg.rhs.sym == "F"
    cond = rule_from_term(P("n <= m ==> (m - n) + n = m"))
    assert cond.condition is P("n <= m")


def test_rewrite_rule_errors(peano, P):
    with pytest.raises(TheoryError):
        rule_from_term(P("m = m + 0"))  # variable left-hand side
    with pytest.raises(TheoryError):
        rule_from_term(P("m + 0 = n"))  # unbound right-hand variable
    with pytest.raises(TheoryError):
        add_rewrite_rule(peano, P("m + 0 = 0").args[0])


def test_theories_are_persistent(peano, P):
    before = len(peano.rewrite_rules)
    th2 = add_rewrite_rule(peano, P("m + 0 = m"))
    th3 = add_generalization_lemma(th2, P("0 <= m * n"))
    assert len(peano.rewrite_rules) == before
    assert len(th3.rewrite_rules) == before + 1
    assert peano.generalization_lemmas == ()
    assert len(th3.generalization_lemmas) == 1


def test_define_function_programmatically(peano):
    declared = declare_function(peano, "TWICE", ("num",), "num")
    th = define_function(declared, "TWICE", ("num",), "num", [parse_term("TWICE(n) = n + n", declared)])
    assert th.fn_defs["TWICE"].recursive_arg is None
    assert not th.fn_defs["TWICE"].recursive
    assert "TWICE" not in peano.fn_defs
    with pytest.raises(TheoryError):
        define_function(th, "TWICE", ("num",), "num", [parse_term("TWICE(n) = n", declared)])


def test_print_theory_round_trip():
    tf = parse_theory(bundled_path("peano.bmt").read_text())
    again = parse_theory(print_theory(tf))
    assert set(again.theory.fn_defs) == set(tf.theory.fn_defs)
    for k, f in tf.theory.fn_defs.items():
        assert again.theory.fn_defs[k].equations == f.equations


def test_bundled_list_theory_builds_on_peano():
    th = load_bundled("peano.bmt", "lists.bmt")
    assert th.signature("LENGTH").result == "num"
    assert th.default_value("list").sym == "NIL"
