"""Random ground counterexample search.

Every free variable is replaced by a random constructor term; the
resulting ground clause is evaluated by rewriting.  Used to veto
over-generalizations, and by the tests as a sampling oracle.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .rewrite import DEFAULT_FUEL, FuelExhausted, evaluate
from .terms import FALSE, TRUE, App, Clause, Term, apply_bindings, mk_or, stable_hash, vars_in_order
from .theory import Theory


class NoBottomObject(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    kind: str  # disproved | survived | undecided
    witness: Optional[dict] = None

    @property
    def disproved(self) -> bool:
        return self.kind == "disproved"

    @property
    def survived(self) -> bool:
        return self.kind == "survived"


SURVIVED = Verdict("survived")
UNDECIDED = Verdict("undecided")


def random_ground(sort: str, max_depth: int, rng: random.Random, th: Theory,
                  p0: float = 0.25, delta: float = 0.25, depth: int = 0) -> Term:
    """A random constructor term of ``sort`` no deeper than ``max_depth``.

    At depth d a bottom object is picked with probability
    ``min(1, p0 + d * delta)``, and always at ``max_depth``.
    """
    sh = th.shell_of_sort(sort)
    if sh is None or not sh.bottom_objects:
        raise NoBottomObject(f"sort {sort!r} has no bottom object to build examples from")
    if depth >= max_depth or not sh.constructors or rng.random() < min(1.0, p0 + depth * delta):
        return App(rng.choice(sh.bottom_objects), (), sort)
    con = rng.choice(sh.constructors)
    args = [random_ground(s, max_depth, rng, th, p0, delta, depth + 1) for s in con.arg_sorts]
    return App(con.symbol, args, sort)


@dataclass
class Disprover:
    th: Theory
    checks_per_call: int = 5
    max_example_depth: int = 8
    seed: int = 0
    p0: float = 0.25
    delta: float = 0.25
    fuel: int = DEFAULT_FUEL
    calls: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.checks_per_call < 1:
            raise ValueError("checks_per_call must be at least 1")

    def rng_for(self, lits) -> random.Random:
        return random.Random((self.seed & 0xFFFFFFFFFFFFFFFF) ^ stable_hash(tuple(lits)))

    def check(self, c: Clause | Term) -> Verdict:
        lits = c.literals if isinstance(c, Clause) else (c,)
        self.calls += 1
        rng = self.rng_for(lits)
        vs = vars_in_order(lits)
        body = mk_or(lits)
        undecided = False
        for _ in range(self.checks_per_call):
            try:
                b = {v: random_ground(v.sort, self.max_example_depth, rng, self.th, self.p0, self.delta)
                     for v in vs}
            except NoBottomObject:
                return UNDECIDED
            try:
                val = evaluate(apply_bindings(body, b), self.th, self.fuel)
            except (FuelExhausted, RecursionError):
                undecided = True
                continue
            if val is FALSE:
                return Verdict("disproved", b)
            if val is not TRUE:
                undecided = True
        return UNDECIDED if undecided else SURVIVED


def check(c: Clause | Term, dp: Disprover) -> Verdict:
    return dp.check(c)
