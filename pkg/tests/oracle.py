"""Independent ground evaluator for the bundled theories.

Numbers are Python ints and lists are tuples; nothing here goes through
the rewriter, so it can referee it.
"""
from __future__ import annotations

import random

from waterfall.terms import App, Term, Var

NUM_FNS = {
    "PLUS": lambda a, b: a + b,
    "MULT": lambda a, b: a * b,
    "EXP": lambda a, b: a ** b,
    "SUB": lambda a, b: max(a - b, 0),
    "LE": lambda a, b: a <= b,
    "LT": lambda a, b: a < b,
    "EVEN": lambda a: a % 2 == 0,
    "ODD": lambda a: a % 2 == 1,
    "PRE": lambda a: max(a - 1, 0),
    "SUC": lambda a: a + 1,
    "DBL": lambda a: 2 * a,
    "APPEND": lambda a, b: a + b,
    "REVERSE": lambda a: a[::-1],
    "LENGTH": lambda a: len(a),
    "CONS": lambda h, t: (h,) + t,
    "HD": lambda a: a[0] if a else 0,
    "TL": lambda a: a[1:],
}
CONSTS = {"0": 0, "NIL": (), "T": True, "F": False}


def value(t: Term, env: dict):
    if t.is_var:
        return env[t.name]
    s, a = t.sym, t.args
    if s in CONSTS:
        return CONSTS[s]
    if s == "not":
        return not value(a[0], env)
    if s == "or":
        return value(a[0], env) or value(a[1], env)
    if s == "and":
        return value(a[0], env) and value(a[1], env)
    if s == "imp":
        return (not value(a[0], env)) or value(a[1], env)
    if s == "iff":
        return value(a[0], env) == value(a[1], env)
    if s == "eq":
        return value(a[0], env) == value(a[1], env)
    if s == "ite":
        return value(a[1], env) if value(a[0], env) else value(a[2], env)
    return NUM_FNS[s](*(value(x, env) for x in a))


def random_value(sort: str, rng: random.Random, bound: int = 5):
    if sort == "num":
        return rng.randint(0, bound)
    if sort == "list":
        return tuple(rng.randint(0, bound) for _ in range(rng.randint(0, bound)))
    if sort == "bool":
        return rng.random() < 0.5
    raise ValueError(sort)


def to_term(v, sort: str) -> Term:
    if sort == "num":
        t: Term = App("0", (), "num")
        for _ in range(v):
            t = App("SUC", (t,), "num")
        return t
    if sort == "list":
        t = App("NIL", (), "list")
        for h in reversed(v):
            t = App("CONS", (to_term(h, "num"), t), "list")
        return t
    return App("T" if v else "F", (), "bool")


def falsifier(t: Term, vars_, samples: int, seed: int = 0, bound: int = 5):
    """An assignment making t false, or None after ``samples`` random tries."""
    rng = random.Random(seed)
    for _ in range(samples):
        env = {v.name: random_value(v.sort, rng, bound) for v in vars_}
        if not value(t, env):
            return env
    return None
