"""A Boyer-Moore style waterfall prover for inductive conjectures.

Typical use::

    from waterfall import load_bundled, parse_term, prove, preset_config
    th = load_bundled("peano.bmt")
    outcome = prove(parse_term("m + n = n + m", th), th, preset_config("BMF"))
"""
from .disprove import Disprover, Verdict, check
from .engine import (
    PRESETS, Config, Metrics, ProofOutcome, ProofTrace, preset_config, prove, render_trace,
    trace_jsonl, waterfall,
)
from .syntax import ParseError, load_bundled, load_theory, parse_term, parse_theory, print_term
from .terms import App, Clause, Term, Var
from .theory import Theory, TheoryError

__version__ = "0.1.0"

__all__ = [
    "App", "Clause", "Config", "Disprover", "Metrics", "PRESETS", "ParseError", "ProofOutcome",
    "ProofTrace", "Term", "Theory", "TheoryError", "Var", "Verdict", "check", "load_bundled",
    "load_theory", "parse_term", "parse_theory", "preset_config", "print_term", "prove",
    "render_trace", "trace_jsonl", "waterfall",
]
