"""Property suites: round trip, CNF, sample soundness, generalization
recovery and bench determinism."""
import io
import itertools
import random

import pytest

from waterfall.cli import main
from waterfall.engine import preset_config, prove
from waterfall.generalize import instantiation_recovers
from waterfall.heuristics import to_cnf
from waterfall.syntax import load_theory, parse_term, print_term
from waterfall.terms import App, Var, free_vars

import oracle
from gen import formula

SUITES = [("peano.bmt", "suite_hol.bmt"), ("peano.bmt", "lists.bmt", "suite_rippling.bmt")]


@pytest.fixture(scope="module")
def bench_runs():
    """Every bench conjecture under BMF, plus the suites under BMG'."""
    runs = []
    for preset in ("BMF", "BMG'"):
        cfg = preset_config(preset, timeout=30)
        for names in SUITES:
            suite = load_theory(*names)
            for conj in suite.conjectures:
                runs.append((preset, conj, prove(conj.term, suite.theory, cfg)))
    return runs


# (a) -------------------------------------------------------------------------

def test_parse_print_round_trip(lists):
    rng = random.Random(2)
    for _ in range(1000):
        t = formula(rng, 3, lists=True)
        fixed = {v.name: v.sort for v in free_vars(t)}
        assert parse_term(print_term(t), lists, fixed=fixed) is t


# (b) -------------------------------------------------------------------------

ATOMS = [Var(x, "bool") for x in "pqrs"]


def _skeletons(depth):
    if depth == 0:
        return list(ATOMS)
    smaller = _skeletons(depth - 1)
    out = list(smaller)
    out += [App("not", (a,), "bool") for a in smaller]
    for op in ("or", "and", "imp", "iff"):
        out += [App(op, (a, b), "bool") for a in smaller for b in smaller]
    return list(dict.fromkeys(out))


def _cnf_value(clauses, env):
    return all(any(oracle.value(l, env) for l in c) for c in clauses)


def test_cnf_truth_table_equivalence():
    forms = _skeletons(2)
    assert len(forms) > 20000
    envs = [dict(zip("pqrs", bits)) for bits in itertools.product([False, True], repeat=4)]
    for f in forms:
        clauses = to_cnf(f)
        assert clauses is not None
        for env in envs:
            assert _cnf_value(clauses, env) == oracle.value(f, env), print_term(f)


def test_cnf_deeper_random_skeletons():
    rng = random.Random(17)
    envs = [dict(zip("pqrs", bits)) for bits in itertools.product([False, True], repeat=4)]

    def rand(d):
        if d == 0 or rng.random() < 0.2:
            return rng.choice(ATOMS)
        op = rng.choice(["not", "or", "and", "imp", "iff"])
        k = 1 if op == "not" else 2
        return App(op, tuple(rand(d - 1) for _ in range(k)), "bool")

    for _ in range(2000):
        f = rand(4)
        clauses = to_cnf(f)
        if clauses is None:
            continue
        for env in envs:
            assert _cnf_value(clauses, env) == oracle.value(f, env)


# (c) -------------------------------------------------------------------------

def test_proved_bench_theorems_survive_sampling(bench_runs):
    checked = 0
    for preset, conj, o in bench_runs:
        if not o.proved:
            continue
        vs = sorted(free_vars(conj.term), key=lambda v: v.name)
        bad = oracle.falsifier(conj.term, vs, samples=1000, seed=checked, bound=5)
        assert bad is None, (preset, conj.name, bad)
        checked += 1
    assert checked >= 60


# (d) -------------------------------------------------------------------------

def test_generalizations_recover_by_instantiation(bench_runs):
    seen = 0
    for preset, conj, o in bench_runs:
        for original, g in o.generalizations:
            assert instantiation_recovers(g, original), (preset, conj.name)
            seen += 1
    assert seen >= 20


# (e) -------------------------------------------------------------------------

def _bench_csv(tmp_path, name, *extra):
    out = tmp_path / name
    code = main(["bench", "--theory", "peano.bmt", "--suite", "suite_hol.bmt", "--out", str(out),
                 "--no-time", "--seed", "3", *extra], out=io.StringIO())
    assert code == 0
    return out.read_bytes()


def test_bench_runs_are_deterministic(tmp_path):
    first = _bench_csv(tmp_path, "a.csv")
    assert _bench_csv(tmp_path, "b.csv") == first
    assert _bench_csv(tmp_path, "c.csv", "--jobs", "4") == first
