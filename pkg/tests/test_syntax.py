import pytest

from waterfall.syntax import (
    ParseError, bundled_path, load_bundled, load_theory, parse_term, parse_theory, print_term, tokenize,
)
from waterfall.terms import free_vars


@pytest.mark.parametrize("text", [
    "m + n * p = p", "(m + n) * p = 0", "m - (n - p) = 0", "m - n - p = 0",
    "m EXP n EXP p = 0", "~(m = 0) /\\ n = 0 ==> p = 0", "~EVEN(n) <=> ODD(n)",
])
def test_printing_is_a_fixed_point(text, peano):
    t = parse_term(text, peano)
    assert print_term(t) == text
    assert parse_term(print_term(t), peano) is t


def test_precedence(P):
    assert P("m + n * p = p").args[0].sym == "PLUS"
    assert P("m - n - p = 0").args[0].args[0].sym == "SUB"  # left associative
    t = P("m = 0 /\\ n = 0 ==> p = 0")
    assert t.sym == "imp" and t.args[0].sym == "and"


def test_numerals_and_unicode(P, L):
    assert P("2 = m") is P("SUC(SUC(0)) = m")
    assert P("m ≤ n ∧ ¬(n = 0)") is P("m <= n /\\ ~(n = 0)")
    assert L("[1, 2] = x") is L("CONS(SUC(0), CONS(SUC(SUC(0)), NIL)) = x")
    assert L("[] = x") is L("NIL = x")


def test_sorts_are_inferred_from_context(L):
    t = L("m = NIL")
    assert next(iter(free_vars(t))).sort == "list"


@pytest.mark.parametrize("text,line,col,msg", [
    ("m + ", 1, 5, "unexpected"),
    ("FOO(m) = 0", 1, 1, "unknown symbol"),
    ("x = y", 1, 1, "cannot infer"),
    ("m +* n = 0", 1, 4, "unexpected '*'"),
    ("(m = 0", 1, 7, "expected ')'"),
    ("SUC(m, n) = 0", 1, 1, "expects 1 argument"),
    ("m = 0 $", 1, 7, "unexpected character"),
])
def test_error_positions(text, line, col, msg, lists):
    with pytest.raises(ParseError) as info:
        parse_term(text, lists)
    assert (info.value.line, info.value.col) == (line, col)
    assert msg in info.value.message


def test_sort_clash(lists):
    with pytest.raises(ParseError):
        parse_term("m + n = NIL", lists)
    with pytest.raises(ParseError):
        parse_term("m + x = 0 /\\ APPEND(x, x) = NIL", lists)


def test_theory_errors_have_positions(peano):
    with pytest.raises(ParseError) as info:
        parse_theory('conjecture "a" m = 0;\nconjecture "a" n = 0;', peano)
    assert info.value.line == 2
    with pytest.raises(ParseError) as info:
        parse_theory("\n\nshell num { bottom Z; }", peano)
    assert info.value.line == 3


def test_theory_file_contents(peano):
    tf = parse_theory('rewrite m + 0 = m;\ngenlemma 0 <= m * n;\nconjecture "c" m * 0 = 0;', peano)
    assert len(tf.theory.rewrite_rules) == len(peano.rewrite_rules) + 1
    assert len(tf.theory.generalization_lemmas) == 1
    assert [c.name for c in tf.conjectures] == ["c"]


def test_bundled_files():
    assert bundled_path("peano.bmt").exists()
    suite = load_theory("peano.bmt", "suite_hol.bmt")
    assert len(suite.conjectures) == 92
    rip = load_theory("peano.bmt", "lists.bmt", "suite_rippling.bmt")
    assert len(rip.conjectures) == 25
    with pytest.raises(OSError):
        load_theory("no_such_theory.bmt")
    assert "APPEND" in load_bundled("peano.bmt", "lists.bmt").fn_defs


def test_tokens_carry_positions():
    toks = tokenize("m +\n  n")
    assert [(t.text, t.line, t.col) for t in toks if t.text] == [("m", 1, 1), ("+", 1, 3), ("n", 2, 3)]
