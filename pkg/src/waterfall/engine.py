"""The waterfall: pouring clauses over the heuristics, pooling survivors,
inducting on them and pouring the cases over fresh waterfalls.

A proof run is single-threaded and owns its warehouse records,
generalization memory, trace and metrics.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from typing import Optional

from .disprove import Disprover
from .generalize import ALGORITHMS, GenMemory
from .heuristics import (
    NAMES, Disproved, Failed, HeuristicContext, Proved, Replaced, apply, display_name,
)
from .rewrite import DEFAULT_FUEL, ENGINES
from .syntax import print_clause, print_term
from .terms import (
    BOOL, Clause, Term, Var, apply_bindings, free_vars, max_var_depth, mk_and, mk_imp, mk_or,
    rename_apart, sort_base_name, subterms, variant_key, vars_in_order,
)
from .theory import Theory

BASIC_ORDER = ("cnf", "subst", "simp", "equal", "gen", "irrel")
FULL_ORDER = ("taut", "cnf", "setify", "subst", "simp", "equal", "gen", "irrel")
TRACE_LEVELS = ("silent", "normal", "tree")
STATUSES = ("proved", "failed", "cutoff", "disproved", "timeout")


# --------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class Config:
    heuristic_order: tuple = FULL_ORDER
    simplify_engine: str = "full"
    gen_algo: str = "bm+apart"
    eq_criterion: bool = True
    warehouse: bool = True
    max_depth: Optional[int] = 12
    cex_checks: int = 5
    cex_depth: int = 8
    seed: int = 0
    fuel: int = DEFAULT_FUEL
    max_steps: int = 2000
    timeout: float = 120.0
    trace_level: str = "normal"
    preset: Optional[str] = None

    def __post_init__(self):
        order = tuple(self.heuristic_order)
        object.__setattr__(self, "heuristic_order", order)
        for name in order:
            if name not in NAMES:
                raise ValueError(f"unknown heuristic {name!r} (expected one of {', '.join(NAMES)})")
        if len(set(order)) != len(order):
            raise ValueError("a heuristic may appear only once in the order")
        if self.simplify_engine not in ENGINES:
            raise ValueError(f"unknown simplifier {self.simplify_engine!r}")
        if self.gen_algo not in ALGORITHMS:
            raise ValueError(f"unknown generalization algorithm {self.gen_algo!r}")
        if self.trace_level not in TRACE_LEVELS:
            raise ValueError(f"unknown trace level {self.trace_level!r}")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        if self.cex_checks < 1:
            raise ValueError("cex_checks must be at least 1")

    def with_(self, **kw) -> "Config":
        return replace(self, **kw)


# Component matrix of the six evaluated instances.
PRESET_COMPONENTS = {
    "BM":   dict(bm_simp=True,  warehouse=False, max_depth=False, taut=False, setify=False,
                 bm_gen=True,  aderhold=False, apart=False, eq_criterion=False),
    "BME":  dict(bm_simp=True,  warehouse=True,  max_depth=True,  taut=True,  setify=True,
                 bm_gen=True,  aderhold=False, apart=False, eq_criterion=False),
    "BMR":  dict(bm_simp=False, warehouse=True,  max_depth=True,  taut=True,  setify=True,
                 bm_gen=True,  aderhold=False, apart=False, eq_criterion=False),
    "BMG":  dict(bm_simp=False, warehouse=True,  max_depth=True,  taut=True,  setify=True,
                 bm_gen=False, aderhold=True,  apart=True,  eq_criterion=True),
    "BMG'": dict(bm_simp=False, warehouse=True,  max_depth=True,  taut=True,  setify=True,
                 bm_gen=False, aderhold=True,  apart=True,  eq_criterion=False),
    "BMF":  dict(bm_simp=False, warehouse=True,  max_depth=True,  taut=True,  setify=True,
                 bm_gen=True,  aderhold=False, apart=True,  eq_criterion=False),
}
PRESETS = tuple(PRESET_COMPONENTS)


def preset_config(name: str, **overrides) -> Config:
    key = {"BMG_PRIME": "BMG'", "BMGP": "BMG'"}.get(name.upper(), name.upper())
    if key not in PRESET_COMPONENTS:
        raise ValueError(f"unknown preset {name!r} (expected one of {', '.join(PRESETS)})")
    comp = PRESET_COMPONENTS[key]
    order = [h for h in FULL_ORDER
             if (h != "taut" or comp["taut"]) and (h != "setify" or comp["setify"])]
    gen = ("bm" if comp["bm_gen"] else "aderhold") + ("+apart" if comp["apart"] else "")
    cfg = Config(
        heuristic_order=tuple(order),
        simplify_engine="bm" if comp["bm_simp"] else "full",
        gen_algo=gen,
        eq_criterion=comp["eq_criterion"],
        warehouse=comp["warehouse"],
        max_depth=12 if comp["max_depth"] else None,
        preset=key,
    )
    return cfg.with_(**overrides) if overrides else cfg


def components_of(cfg: Config) -> dict:
    """Inverse of :func:`preset_config`, for checking the component matrix."""
    first, _, second = cfg.gen_algo.partition("+")
    return dict(
        bm_simp=cfg.simplify_engine == "bm",
        warehouse=cfg.warehouse,
        max_depth=cfg.max_depth is not None,
        taut="taut" in cfg.heuristic_order,
        setify="setify" in cfg.heuristic_order,
        bm_gen=first == "bm",
        aderhold=first.startswith("aderhold"),
        apart=second == "apart",
        eq_criterion=first == "aderhold" and cfg.eq_criterion,
    )


# --------------------------------------------------------------------------
# trace and metrics

@dataclass
class Event:
    kind: str  # goal | pour | duplicate | heuristic | skip | proven | induction | cutoff | disproved | failed | theorem | warning
    waterfall: int
    clause: Optional[Clause] = None
    heuristic: str = ""
    detail: str = ""
    variable: Optional[Var] = None
    top: bool = False  # first pour of a waterfall
    results: tuple = ()  # clauses produced by a heuristic

    def as_record(self) -> dict:
        rec = {"event": self.kind, "waterfall": self.waterfall}
        if self.clause is not None:
            rec["clause"] = print_clause(self.clause)
            rec["from_induction_step"] = self.clause.from_induction_step
        if self.heuristic:
            rec["heuristic"] = self.heuristic
        if self.detail:
            rec["detail"] = self.detail
        if self.variable is not None:
            rec["variable"] = self.variable.name
        if self.results:
            rec["results"] = [print_clause(c) for c in self.results]
        if self.kind == "pour":
            rec["top"] = self.top
        return rec


@dataclass
class ProofTrace:
    events: list = field(default_factory=list)
    engine: str = "full"

    def add(self, ev: Event) -> None:
        self.events.append(ev)


@dataclass
class Metrics:
    steps: int = 0
    inductions: int = 0
    generalizations: int = 0
    overgeneralizations: int = 0
    wall_time: float = 0.0


@dataclass
class ProofOutcome:
    status: str  # proved | failed | cutoff | disproved | timeout
    goal: Term
    metrics: Metrics
    trace: ProofTrace
    reason: str = ""
    witness: Optional[dict] = None
    generalizations: list = field(default_factory=list)  # (input clause, Generalization)

    @property
    def proved(self) -> bool:
        return self.status == "proved"


class _Stop(Exception):
    def __init__(self, status: str, reason: str, witness=None):
        super().__init__(reason)
        self.status, self.reason, self.witness = status, reason, witness


class Warehouse:
    """Per-waterfall record of which heuristics succeeded on which clause."""

    def __init__(self):
        self.applied: dict = {}

    @staticmethod
    def key(c: Clause) -> tuple:
        return (c.literals, c.from_induction_step)

    def skipped(self, c: Clause) -> set:
        return self.applied.get(self.key(c), set())

    def record(self, c: Clause, name: str) -> None:
        self.applied.setdefault(self.key(c), set()).add(name)


# --------------------------------------------------------------------------
# induction

def induction_variable(c: Clause, th: Theory) -> Optional[Var]:
    """The variable with most occurrences in recursive argument positions,
    leftmost on ties; else the leftmost variable of a recursive shell sort."""
    vs = [v for v in vars_in_order(c.literals) if _inductive_sort(th, v.sort)]
    if not vs:
        return None
    score = {v: 0 for v in vs}
    for lit in c.literals:
        for s in subterms(lit):
            if s.is_var or s.sym not in th.fn_defs:
                continue
            pos = th.fn_defs[s.sym].recursive_arg
            if pos is not None and s.args[pos] in score:
                score[s.args[pos]] += 1
    best = max(score.values())
    return next(v for v in vs if score[v] == best)


def _inductive_sort(th: Theory, sort: str) -> bool:
    sh = th.shell_of_sort(sort)
    return sh is not None and sort != BOOL and bool(sh.constructors)


def induct(c: Clause, th: Theory) -> Optional[tuple[Var, list, list]]:
    """Structural induction on the chosen variable: (variable, bases, steps)."""
    v = induction_variable(c, th)
    if v is None:
        return None
    sh = th.shell_of_sort(v.sort)
    others = {x.name for x in vars_in_order(c.literals) if x is not v}
    body = mk_or(c.literals)
    bases, steps = [], []
    for con in sh.all_constructors():
        avoid = set(others)
        args = []
        for s in con.arg_sorts:
            a = Var(rename_apart(sort_base_name(s), avoid), s)
            avoid.add(a.name)
            args.append(a)
        inst = th.mk(con.symbol, *args) if args else th.mk(con.symbol)
        rec = [a for a, s in zip(args, con.arg_sorts) if s == v.sort]
        if not rec:
            lits = [apply_bindings(l, {v: inst}) for l in c.literals]
            bases.append(Clause(tuple(lits), False, "induction-base"))
        else:
            hyps = [apply_bindings(body, {v: a}) for a in rec]
            concl = apply_bindings(body, {v: inst})
            steps.append(Clause((mk_imp(mk_and(hyps), concl),), True, "induction-step"))
    return v, bases, steps


# --------------------------------------------------------------------------
# the prover

class _Run:
    def __init__(self, th: Theory, cfg: Config):
        self.th = th
        self.cfg = cfg
        self.trace = ProofTrace(engine=cfg.simplify_engine)
        self.metrics = Metrics()
        self.memory = GenMemory()
        self.disprover = Disprover(th, cfg.cex_checks, cfg.cex_depth, cfg.seed, fuel=cfg.fuel)
        self.ctx = HeuristicContext(th, cfg.simplify_engine, cfg.gen_algo, cfg.eq_criterion, cfg.fuel,
                                    self.memory, self.disprover)
        self.deadline = time.monotonic() + cfg.timeout if cfg.timeout else None
        self.n_waterfalls = 0

    def _tick(self) -> None:
        self.metrics.steps += 1
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Stop("timeout", f"wall-clock limit of {self.cfg.timeout:g} s reached")
        if self.metrics.steps > self.cfg.max_steps:
            raise _Stop("failed", f"proof step budget of {self.cfg.max_steps} exhausted")

    def waterfall(self, clauses: list, first: bool = False) -> list:
        """Pour clauses over one fresh waterfall; returns the pool."""
        self.n_waterfalls += 1
        wf = self.n_waterfalls
        wh = Warehouse() if self.cfg.warehouse else None
        pool: list = []
        poured: set = set()
        stack = [(c, True, frozenset()) for c in reversed(clauses)]
        while stack:
            c, top, ancestors = stack.pop()
            key = Warehouse.key(c)
            if wh is not None and key in poured and key not in ancestors:
                # a sibling already carries this obligation
                self.trace.add(Event("duplicate", wf, c))
                continue
            poured.add(key)
            self._tick()
            self.trace.add(Event("pour", wf, c, top=top and not first))
            if self.cfg.max_depth is not None:
                d = max(max_var_depth(l) for l in c.literals)
                if d > self.cfg.max_depth:
                    self.trace.add(Event("cutoff", wf, c, detail=f"variable depth {d} exceeds {self.cfg.max_depth}"))
                    raise _Stop("cutoff", f"maximum depth {self.cfg.max_depth} exceeded by {print_clause(c)}")
            skip = wh.skipped(c) if wh is not None and key in ancestors else set()
            for name in self.cfg.heuristic_order:
                if name in skip:
                    self.trace.add(Event("skip", wf, c, heuristic=name))
                    continue
                out = apply(name, c, self.ctx)
                if isinstance(out, Failed):
                    if out.warning:
                        self.trace.add(Event("warning", wf, c, heuristic=name, detail=out.warning))
                    if name == "gen":
                        self.metrics.overgeneralizations = self.memory.vetoes
                    continue
                if name == "gen":
                    self.metrics.overgeneralizations = self.memory.vetoes
                if isinstance(out, Proved):
                    if wh is not None:
                        wh.record(c, name)
                    self.trace.add(Event("heuristic", wf, c, heuristic=name, detail=out.note))
                    self.trace.add(Event("proven", wf, c))
                    break
                if isinstance(out, Disproved):
                    self.trace.add(Event("heuristic", wf, c, heuristic=name, detail=out.reason))
                    self.trace.add(Event("disproved", wf, c, detail=out.reason))
                    raise _Stop("disproved", f"{display_name(name, self.cfg.simplify_engine)}: {out.reason}",
                                out.witness)
                assert isinstance(out, Replaced)
                if wh is not None:
                    wh.record(c, name)
                if name == "gen":
                    self.metrics.generalizations += 1
                self.trace.add(Event("heuristic", wf, c, heuristic=name, detail=out.note, results=out.clauses))
                below = ancestors | {key}
                stack.extend((r, False, below) for r in reversed(out.clauses))
                break
            else:
                pool.append(c)
        return pool

    def run(self, goal: Term) -> ProofOutcome:
        start = time.monotonic()
        status, reason, witness = "proved", "", None
        self.trace.add(Event("goal", 0, Clause((goal,))))
        try:
            jobs = [("waterfall", [Clause((goal,))], frozenset(), True)]
            while jobs:
                kind, payload, branch, first = jobs.pop()
                if kind == "waterfall":
                    pool = self.waterfall(payload, first)
                    jobs.extend(("induct", c, branch, False) for c in reversed(pool))
                    continue
                c = payload
                key = variant_key(c.literals)
                wf = self.n_waterfalls
                if self.cfg.warehouse and key in branch:
                    self.trace.add(Event("failed", wf, c, detail="induction already applied to this clause"))
                    raise _Stop("failed", f"repeated induction on {print_clause(c)}")
                res = induct(c, self.th)
                if res is None:
                    raise _Stop("failed", f"no variable to induct on in {print_clause(c)}")
                v, bases, steps = res
                self._tick()
                self.metrics.inductions += 1
                self.trace.add(Event("induction", wf, c, variable=v))
                jobs.append(("waterfall", bases + steps, branch | {key}, False))
        except _Stop as e:
            status, reason, witness = e.status, e.reason, e.witness
        except RecursionError:
            status, reason = "failed", "term nesting too deep"
        self.metrics.overgeneralizations = self.memory.vetoes
        self.metrics.wall_time = time.monotonic() - start
        if status == "proved":
            self.trace.add(Event("theorem", 0, Clause((goal,))))
        elif status != "disproved" or not any(e.kind == "disproved" for e in self.trace.events):
            self.trace.add(Event("failed", self.n_waterfalls, detail=reason))
        else:
            self.trace.add(Event("failed", self.n_waterfalls, detail=reason))
        return ProofOutcome(status, goal, self.metrics, self.trace, reason, witness, list(self.memory.log))


def prove(goal: Term, th: Theory, cfg: Optional[Config] = None) -> ProofOutcome:
    if goal.sort != BOOL:
        raise ValueError("the goal must be a formula")
    return _Run(th, cfg or Config()).run(goal)


def waterfall(c: Clause, th: Theory, cfg: Optional[Config] = None) -> tuple[str, list, ProofTrace, Metrics]:
    """Pour one clause over a fresh waterfall: ("proved" | "pool" | "disproved" | "cutoff", pool, trace, metrics)."""
    run = _Run(th, cfg or Config())
    try:
        pool = run.waterfall([c], first=True)
    except _Stop as e:
        return e.status, [], run.trace, run.metrics
    return ("proved" if not pool else "pool"), pool, run.trace, run.metrics


# --------------------------------------------------------------------------
# rendering

def render_trace(t: ProofTrace, level: str = "normal") -> str:
    if level == "silent":
        return ""
    if level not in TRACE_LEVELS:
        raise ValueError(f"unknown trace level {level!r}")
    lines: list[str] = []
    goal_shown = False
    events = t.events
    for i, ev in enumerate(events):
        k = ev.kind
        if k == "goal":
            continue
        if k == "pour":
            text = print_clause(ev.clause)
            if ev.top:
                lines.extend(["", "", " " + text])
            elif not goal_shown:
                lines.append(text)
                goal_shown = True
            elif i > 0 and events[i - 1].kind == "heuristic":
                lines.append(" " + text)
            else:
                lines.append(" " + text)
        elif k == "heuristic":
            name = display_name(ev.heuristic, t.engine)
            lines.append(f"-> {name} ({ev.detail})" if ev.detail else f"-> {name}")
        elif k == "proven":
            lines.append(f"Proven:|- {print_clause(ev.clause)}")
        elif k == "induction":
            if level == "tree":
                lines.extend(_tree(events, ev.waterfall))
            lines.append(f"Doing induction on:{print_clause(ev.clause)}")
        elif k == "duplicate":
            lines.append(f"-- already poured: {print_clause(ev.clause)}")
        elif k == "skip":
            lines.append(f"-- skipping {display_name(ev.heuristic, t.engine)} (already applied to this clause)")
        elif k == "cutoff":
            lines.append(f"Depth cutoff: {ev.detail}")
        elif k == "warning":
            lines.append(f"Warning: {ev.detail}")
        elif k == "disproved":
            lines.append(f"Disproved: {print_clause(ev.clause)}")
        elif k == "theorem":
            lines.extend(["", "", f"Theorem:|- {print_term(ev.clause.literals[0])}"])
        elif k == "failed":
            if ev.clause is not None:
                lines.append(f"Failed: {ev.detail}: {print_clause(ev.clause)}")
            else:
                lines.extend(["", "", f"Failed: {ev.detail}"])
    return "\n".join(lines) + "\n"


def _tree(events: list, wf: int) -> list[str]:
    """The waterfall's derivation tree: each clause with the heuristic that
    transformed it, children indented below."""
    children: dict = {}
    roots = []
    how: dict = {}
    for ev in events:
        if ev.waterfall != wf:
            continue
        if ev.kind == "pour" and id(ev.clause) not in {id(c) for cs in children.values() for c in cs}:
            if not any(ev.clause is c for cs in children.values() for c in cs):
                roots.append(ev.clause)
        elif ev.kind == "heuristic":
            how[id(ev.clause)] = display_name(ev.heuristic)
            children[id(ev.clause)] = list(ev.results)
        elif ev.kind == "proven":
            how.setdefault(id(ev.clause), "")
            how[id(ev.clause)] += " [proven]"
    out = ["Waterfall tree:"]

    def walk(c, depth):
        note = how.get(id(c), "[pool]")
        out.append(f"{'  ' * depth}* {print_clause(c)}   {note}".rstrip())
        for ch in children.get(id(c), ()):
            walk(ch, depth + 1)

    seen = set()
    for r in roots:
        if id(r) not in seen:
            seen.add(id(r))
            walk(r, 1)
    return out


def trace_jsonl(t: ProofTrace) -> str:
    """One JSON object per event: event, waterfall, and where relevant clause,
    from_induction_step, heuristic, detail, variable, results, top."""
    return "".join(json.dumps(ev.as_record(), ensure_ascii=False) + "\n" for ev in t.events)


def recount_steps(t: ProofTrace) -> int:
    return sum(1 for ev in t.events if ev.kind in ("pour", "induction"))
