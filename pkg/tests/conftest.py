import pytest

from waterfall.syntax import load_bundled, parse_term
from waterfall.terms import Clause, disjuncts


@pytest.fixture(scope="session")
def peano():
    return load_bundled("peano.bmt")


@pytest.fixture(scope="session")
def lists():
    return load_bundled("peano.bmt", "lists.bmt")


@pytest.fixture
def P(peano):
    return lambda text: parse_term(text, peano)


@pytest.fixture
def L(lists):
    return lambda text: parse_term(text, lists)


def clause(text, th, step=False):
    """A clause whose literals are the top-level disjuncts of ``text``."""
    return Clause(tuple(disjuncts(parse_term(text, th))), from_induction_step=step)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
