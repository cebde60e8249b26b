"""Concrete syntax: a Pratt parser and a minimal-parentheses printer.

File grammar (``.bmt``)::

    file     ::= decl*
    decl     ::= "shell" NAME "{" item* "}"
               | "define" NAME "(" [sort ("," sort)*] ")" ":" sort "{" (term ";")+ "}"
               | "rewrite" term ";"
               | "genlemma" term ";"
               | "conjecture" STRING term ";"
    item     ::= "bottom" NAME+ ";"
               | "con" NAME "(" sort ("," sort)* ")" ["accessors" "(" NAME ("," NAME)* ")"] ";"

Terms use prefix application ``F(t, u)`` plus infix operators, loosest first::

    <=>  (right)   ==>  (right)   \\/  (right)   /\\  (right)
    =  <  <=  >  >=  (non-associative)
    +  -  (left)   *  (left)   EXP  (right)   ~ (prefix, tightest)

Decimal numerals are SUC-chains over 0; ``[a, b]`` is CONS(a, CONS(b, NIL)).
Identifiers that are not declared symbols are variables; their sorts are
inferred.  ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .terms import (
    AND, BOOL, EQ, IFF, IMP, ITE, NOT, OR, App, Term, Var, is_app,
)
from .theory import (
    Theory, TheoryError, add_generalization_lemma, add_rewrite_rule, declare_function,
    define_function, define_shell, empty_theory,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message, self.line, self.col = message, line, col
        super().__init__(f"{line}:{col}: {message}" if line else message)


# --------------------------------------------------------------------------
# tokens

ALIASES = {
    "¬": "~", "∨": "\\/", "∧": "/\\", "⇒": "==>", "⟹": "==>", "→": "==>",
    "⇔": "<=>", "↔": "<=>", "≤": "<=", "≥": ">=", "×": "*",
}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<str>"[^"\n]*")
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><=>|==>|\\/|/\\|<=|>=|[~=<>+\-*(){}\[\],;:]|[¬∨∧⇒⟹→⇔↔≤≥×])
""", re.VERBOSE)

KEYWORDS = {"shell", "bottom", "con", "accessors", "define", "rewrite", "genlemma", "conjecture"}


@dataclass(frozen=True)
class Token:
    kind: str  # name | num | str | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks, line, start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        col = pos - start + 1
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind == "op":
            toks.append(Token("op", ALIASES.get(m.group(), m.group()), line, col))
        elif kind in ("num", "name"):
            toks.append(Token(kind, m.group(), line, col))
        elif kind == "str":
            toks.append(Token("str", m.group()[1:-1], line, col))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - start + 1))
    return toks


# --------------------------------------------------------------------------
# operator table

# op text -> (symbol, precedence, associativity)
INFIX = {
    "<=>": (IFF, 1, "right"),
    "==>": (IMP, 2, "right"),
    "\\/": (OR, 3, "right"),
    "/\\": (AND, 4, "right"),
    "=": (EQ, 5, "none"),
    "<": ("LT", 5, "none"),
    "<=": ("LE", 5, "none"),
    ">": ("LT", 5, "none"),
    ">=": ("LE", 5, "none"),
    "+": ("PLUS", 6, "left"),
    "-": ("SUB", 6, "left"),
    "*": ("MULT", 7, "left"),
    "EXP": ("EXP", 8, "right"),
}
FLIPPED = {">", ">="}
PREFIX_PREC = 9

# symbol -> (printed operator, precedence, associativity)
PRINT_INFIX = {sym: (op, prec, assoc) for op, (sym, prec, assoc) in INFIX.items() if op not in FLIPPED}


# --------------------------------------------------------------------------
# abstract syntax

@dataclass
class Node:
    kind: str  # id | num | app | list
    name: str
    args: list
    line: int
    col: int
    value: int = 0


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind in ("str", "eof") and text:
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def expect_name(self, what: str = "a name") -> Token:
        if self.tok.kind not in ("name", "num"):
            raise self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    # -- terms --------------------------------------------------------------

    def _infix(self) -> Optional[str]:
        t = self.tok
        if t.kind == "op" and t.text in INFIX:
            return t.text
        if t.kind == "name" and t.text == "EXP":
            return "EXP"
        return None

    def term(self, min_prec: int = 0) -> Node:
        left = self.prefix()
        while True:
            op = self._infix()
            if op is None:
                break
            _, prec, assoc = INFIX[op]
            if prec < min_prec:
                break
            optok = self.advance()
            right = self.term(prec if assoc == "right" else prec + 1)
            left = Node("app", op, [left, right], optok.line, optok.col)
            nxt = self._infix()
            if assoc == "none" and nxt is not None and INFIX[nxt][1] == prec:
                raise self.error(f"operator {nxt!r} is non-associative; add parentheses")
        return left

    def prefix(self) -> Node:
        t = self.tok
        if t.kind == "op" and t.text == "~":
            self.advance()
            return Node("app", "~", [self.term(PREFIX_PREC)], t.line, t.col)
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.term()
            self.expect(")")
            return inner
        if t.kind == "op" and t.text == "[":
            self.advance()
            items = []
            if self.tok.text != "]":
                items.append(self.term())
                while self.tok.text == ",":
                    self.advance()
                    items.append(self.term())
            self.expect("]")
            return Node("list", "", items, t.line, t.col)
        if t.kind == "num":
            self.advance()
            return Node("num", t.text, [], t.line, t.col, int(t.text))
        if t.kind == "name" and t.text not in KEYWORDS:
            self.advance()
            if self.tok.text == "(" and self.tok.kind == "op":
                self.advance()
                args = [self.term()]
                while self.tok.text == ",":
                    self.advance()
                    args.append(self.term())
                self.expect(")")
                return Node("app", t.text, args, t.line, t.col)
            return Node("id", t.text, [], t.line, t.col)
        raise self.error(f"unexpected {t.text or 'end of input'!r} in term")


# --------------------------------------------------------------------------
# elaboration with sort inference

class _Sorts:
    """Union-find over sort variables (ints) and concrete sorts (str)."""

    def __init__(self):
        self.parent: dict = {}

    def find(self, s):
        while isinstance(s, int) and s in self.parent:
            s = self.parent[s]
        return s

    def unify(self, a, b, node: Node, what: str = ""):
        a, b = self.find(a), self.find(b)
        if a == b:
            return
        if isinstance(a, int):
            self.parent[a] = b
        elif isinstance(b, int):
            self.parent[b] = a
        else:
            raise ParseError(f"sort mismatch{what}: {a} vs {b}", node.line, node.col)


class Elaborator:
    def __init__(self, th: Theory, fixed: Optional[dict] = None):
        self.th = th
        self.fixed = dict(fixed or {})

    def elaborate(self, node: Node, expected: Optional[str] = None) -> Term:
        self.sorts = _Sorts()
        self.var_sort: dict[str, object] = {}
        self.counter = 0
        s = self._infer(node)
        if expected is not None:
            self.sorts.unify(s, expected, node, " (top level)")
        return self._build(node)

    def _fresh(self) -> int:
        self.counter += 1
        return self.counter

    def _num_shell(self, node: Node) -> str:
        sh = self.th.shell_of_constructor("0")
        if sh is None or self.th.constructor("SUC") is None:
            raise ParseError("numerals need a shell with bottom 0 and constructor SUC", node.line, node.col)
        return sh.name

    def _list_shell(self, node: Node):
        sh = self.th.shell_of_constructor("NIL")
        con = self.th.constructor("CONS")
        if sh is None or con is None:
            raise ParseError("list literals need a shell with NIL and CONS", node.line, node.col)
        return sh.name, con.arg_sorts[0]

    def _symbol(self, node: Node) -> str:
        if node.name in INFIX:
            sym = INFIX[node.name][0]
        elif node.name == "~":
            sym = NOT
        else:
            sym = node.name
        if sym not in self.th.signatures:
            raise ParseError(f"unknown symbol {node.name!r}", node.line, node.col)
        return sym

    def _args(self, node: Node) -> list:
        return list(reversed(node.args)) if node.name in FLIPPED else node.args

    def _infer(self, node: Node):
        if node.kind == "num":
            return self._num_shell(node)
        if node.kind == "list":
            lsort, esort = self._list_shell(node)
            for it in node.args:
                self.sorts.unify(self._infer(it), esort, it, " in list literal")
            return lsort
        if node.kind == "id":
            sig = self.th.signatures.get(node.name)
            if sig is not None:
                if sig.arg_sorts:
                    raise ParseError(f"{node.name} expects {len(sig.arg_sorts)} argument(s)", node.line, node.col)
                return sig.result
            if node.name not in self.var_sort:
                self.var_sort[node.name] = self.fixed.get(node.name, self._fresh())
            return self.var_sort[node.name]
        sym = self._symbol(node)
        sig = self.th.signatures[sym]
        args = self._args(node)
        if len(args) != len(sig.arg_sorts):
            raise ParseError(f"{node.name} expects {len(sig.arg_sorts)} argument(s), got {len(args)}",
                             node.line, node.col)
        sorts = [self._infer(a) for a in args]
        if sym == EQ:
            self.sorts.unify(sorts[0], sorts[1], node, " across '='")
            return BOOL
        if sym == ITE:
            self.sorts.unify(sorts[0], BOOL, args[0], " in condition")
            self.sorts.unify(sorts[1], sorts[2], node, " across branches")
            return sorts[1]
        for a, s, want in zip(args, sorts, sig.arg_sorts):
            self.sorts.unify(s, want, a, f" in argument of {node.name}")
        return sig.result

    def _build(self, node: Node) -> Term:
        th = self.th
        if node.kind == "num":
            t = App("0", (), th.signatures["0"].result)
            for _ in range(node.value):
                t = App("SUC", (t,), t.sort)
            return t
        if node.kind == "list":
            lsort, _ = self._list_shell(node)
            t = App("NIL", (), lsort)
            for it in reversed(node.args):
                t = App("CONS", (self._build(it), t), lsort)
            return t
        if node.kind == "id":
            sig = th.signatures.get(node.name)
            if sig is not None:
                return App(node.name, (), sig.result)
            s = self.sorts.find(self.var_sort[node.name])
            if isinstance(s, int):
                raise ParseError(f"cannot infer the sort of variable {node.name!r}", node.line, node.col)
            return Var(node.name, s)
        sym = self._symbol(node)
        args = [self._build(a) for a in self._args(node)]
        if sym == EQ:
            if args[0].sort == BOOL:
                return App(IFF, args, BOOL)
            return App(EQ, args, BOOL)
        if sym == ITE:
            return App(ITE, args, args[1].sort)
        return App(sym, args, th.signatures[sym].result)


def parse_term(text: str, th: Theory, expected: Optional[str] = BOOL, fixed: Optional[dict] = None) -> Term:
    p = Parser(text)
    node = p.term()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after term")
    return Elaborator(th, fixed).elaborate(node, expected)


# --------------------------------------------------------------------------
# printing

def print_term(t: Term) -> str:
    return _pr(t)


def _prec(t: Term) -> int:
    if t.is_var or not t.args:
        return 100
    if t.sym == NOT:
        return PREFIX_PREC
    if t.sym in PRINT_INFIX and len(t.args) == 2:
        return PRINT_INFIX[t.sym][1]
    return 100


def _pr(t: Term) -> str:
    if t.is_var:
        return t.name
    if not t.args:
        return t.sym
    if t.sym == NOT:
        a = t.args[0]
        inner = _pr(a)
        return "~" + (f"({inner})" if _prec(a) < PREFIX_PREC else inner)
    if t.sym in PRINT_INFIX and len(t.args) == 2:
        op, prec, assoc = PRINT_INFIX[t.sym]
        l, r = t.args
        ls, rs = _pr(l), _pr(r)
        lp, rp = _prec(l), _prec(r)
        if lp < prec or lp == prec and assoc != "left":
            ls = f"({ls})"
        if rp < prec or rp == prec and assoc != "right":
            rs = f"({rs})"
        return f"{ls} {op} {rs}"
    return f"{t.sym}({', '.join(_pr(a) for a in t.args)})"


def print_clause(lits) -> str:
    lits = getattr(lits, "literals", lits)
    out = []
    for lit in lits:
        s = _pr(lit)
        out.append(f"({s})" if len(lits) > 1 and _prec(lit) <= INFIX["\\/"][1] else s)
    return " \\/ ".join(out)


# --------------------------------------------------------------------------
# theory files

@dataclass(frozen=True)
class ShellDecl:
    name: str
    bottom_objects: tuple
    constructors: tuple  # (symbol, arg sorts, accessors)
    line: int = 0


@dataclass(frozen=True)
class DefineDecl:
    symbol: str
    param_sorts: tuple
    result_sort: str
    equations: tuple  # of Term
    line: int = 0


@dataclass(frozen=True)
class RewriteDecl:
    term: Term
    line: int = 0


@dataclass(frozen=True)
class GenLemmaDecl:
    term: Term
    line: int = 0


@dataclass(frozen=True)
class ConjectureDecl:
    name: str
    term: Term
    line: int = 0


Decl = Union[ShellDecl, DefineDecl, RewriteDecl, GenLemmaDecl, ConjectureDecl]


@dataclass
class TheoryFile:
    declarations: list = field(default_factory=list)
    theory: Theory = field(default_factory=empty_theory)

    @property
    def conjectures(self) -> list[ConjectureDecl]:
        return [d for d in self.declarations if isinstance(d, ConjectureDecl)]

    def same_declarations(self, other: "TheoryFile") -> bool:
        strip = lambda ds: [_without_line(d) for d in ds]
        return strip(self.declarations) == strip(other.declarations)


def _without_line(d):
    from dataclasses import replace
    return replace(d, line=0)


def parse_theory(text: str, base: Optional[Theory] = None) -> TheoryFile:
    """Parse and elaborate a theory file on top of ``base``."""
    th = base if base is not None else empty_theory()
    p = Parser(text)
    decls: list = []
    names: set = set()
    while p.tok.kind != "eof":
        t = p.tok
        try:
            if t.text == "shell":
                d = _shell_decl(p)
                th = define_shell(th, d.name, d.bottom_objects, d.constructors)
            elif t.text == "define":
                d, th = _define_decl(p, th)
            elif t.text in ("rewrite", "genlemma"):
                p.advance()
                node = p.term()
                term = Elaborator(th).elaborate(node, BOOL)
                p.expect(";")
                if t.text == "rewrite":
                    d = RewriteDecl(term, t.line)
                    th = add_rewrite_rule(th, term)
                else:
                    d = GenLemmaDecl(term, t.line)
                    th = add_generalization_lemma(th, term)
            elif t.text == "conjecture":
                p.advance()
                if p.tok.kind != "str":
                    raise p.error("expected a quoted conjecture name")
                name = p.advance().text
                if name in names:
                    raise ParseError(f"duplicate conjecture name {name!r}", t.line, t.col)
                names.add(name)
                term = Elaborator(th).elaborate(p.term(), BOOL)
                p.expect(";")
                d = ConjectureDecl(name, term, t.line)
            else:
                raise p.error(f"expected a declaration, found {t.text or 'end of input'!r}")
        except TheoryError as e:
            raise ParseError(str(e), t.line, t.col) from None
        decls.append(d)
    return TheoryFile(decls, th)


def _shell_decl(p: Parser) -> ShellDecl:
    start = p.expect("shell")
    name = p.expect_name("a shell name").text
    p.expect("{")
    bottoms, cons = [], []
    while p.tok.text != "}":
        if p.tok.text == "bottom":
            p.advance()
            while p.tok.text != ";":
                bottoms.append(p.expect_name("a bottom object").text)
            p.expect(";")
        elif p.tok.text == "con":
            p.advance()
            sym = p.expect_name("a constructor name").text
            p.expect("(")
            sorts = [p.expect_name("a sort").text]
            while p.tok.text == ",":
                p.advance()
                sorts.append(p.expect_name("a sort").text)
            p.expect(")")
            accs = []
            if p.tok.text == "accessors":
                p.advance()
                p.expect("(")
                accs.append(p.expect_name("an accessor").text)
                while p.tok.text == ",":
                    p.advance()
                    accs.append(p.expect_name("an accessor").text)
                p.expect(")")
            p.expect(";")
            cons.append((sym, tuple(sorts), tuple(accs)))
        else:
            raise p.error("expected 'bottom' or 'con' in shell body")
    p.expect("}")
    return ShellDecl(name, tuple(bottoms), tuple(cons), start.line)


def _define_decl(p: Parser, th: Theory):
    start = p.expect("define")
    sym_tok = p.expect_name("a function name")
    p.expect("(")
    sorts = []
    if p.tok.text != ")":
        sorts.append(p.expect_name("a sort").text)
        while p.tok.text == ",":
            p.advance()
            sorts.append(p.expect_name("a sort").text)
    p.expect(")")
    p.expect(":")
    result = p.expect_name("a sort").text
    th2 = declare_function(th, sym_tok.text, sorts, result)
    p.expect("{")
    eqs = []
    while p.tok.text != "}":
        node = p.term()
        eqs.append(Elaborator(th2).elaborate(node, BOOL))
        p.expect(";")
    p.expect("}")
    th3 = define_function(th2, sym_tok.text, sorts, result, eqs)
    return DefineDecl(sym_tok.text, tuple(sorts), result, tuple(eqs), start.line), th3


def print_theory(tf: TheoryFile) -> str:
    out = []
    for d in tf.declarations:
        if isinstance(d, ShellDecl):
            lines = [f"shell {d.name} {{"]
            if d.bottom_objects:
                lines.append(f"  bottom {' '.join(d.bottom_objects)};")
            for sym, sorts, accs in d.constructors:
                acc = f" accessors ({', '.join(accs)})" if accs else ""
                lines.append(f"  con {sym}({', '.join(sorts)}){acc};")
            lines.append("}")
            out.append("\n".join(lines))
        elif isinstance(d, DefineDecl):
            body = "\n".join(f"  {print_term(e)};" for e in d.equations)
            out.append(f"define {d.symbol}({', '.join(d.param_sorts)}): {d.result_sort} {{\n{body}\n}}")
        elif isinstance(d, RewriteDecl):
            out.append(f"rewrite {print_term(d.term)};")
        elif isinstance(d, GenLemmaDecl):
            out.append(f"genlemma {print_term(d.term)};")
        else:
            out.append(f'conjecture "{d.name}" {print_term(d.term)};')
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# bundled files

def bundled_path(name: str) -> Path:
    return Path(str(resources.files("waterfall") / "data" / name))


def resolve_path(name: str) -> Path:
    """A filesystem path, falling back to the bundled data directory."""
    p = Path(name)
    if p.exists():
        return p
    b = bundled_path(p.name)
    if b.exists():
        return b
    raise FileNotFoundError(name)


def load_theory(*names: str, base: Optional[Theory] = None) -> TheoryFile:
    """Parse several files in sequence; later files see earlier declarations."""
    th = base
    decls: list = []
    for n in names:
        tf = parse_theory(resolve_path(n).read_text(encoding="utf-8"), th)
        th = tf.theory
        decls.extend(tf.declarations)
    return TheoryFile(decls, th if th is not None else empty_theory())


def load_bundled(*names: str) -> Theory:
    return load_theory(*names).theory


def is_infix_symbol(sym: str) -> bool:
    return sym in PRINT_INFIX


__all__ = [
    "ParseError", "parse_term", "print_term", "print_clause", "parse_theory", "print_theory",
    "TheoryFile", "load_theory", "load_bundled", "resolve_path", "is_app",
]
