"""Rule files.

::

    system ::= stmt*
    stmt   ::= atom ( "<-" atom ( "," atom )* )? "."
    atom   ::= IDENT "(" word ")"
    word   ::= SYM* ( "x" | "eps" )?

``x`` is the rule variable and ``eps`` the empty word; ``P()`` is
``P(eps)``.  ``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional

from .core import (
    EMPTY_WORD,
    VARIABLE,
    Atom,
    Composed,
    Instance,
    Pattern,
    Rule,
    RuleError,
    Selection,
    SignedSystem,
    System,
    aps_class,
)

_TOKEN = re.compile(r"\s+|#[^\n]*|(?P<tok><-|[(),.]|[A-Za-z0-9_]+)")


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {message}" if line else message)


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


def _tokens(text: str) -> Iterator[_Tok]:
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        if m.group("tok"):
            yield _Tok(m.group("tok"), line, pos - line_start + 1)
        chunk = m.group(0)
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()


class _Parser:
    def __init__(self, text: str):
        self.toks = list(_tokens(text))
        self.i = 0
        self.end_pos = (text.count("\n") + 1, 1)

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, expected: str = "") -> _Tok:
        t = self.peek()
        if t is None:
            raise ParseError(f"unexpected end of input, expected {expected or 'more'}", *self.end_pos)
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next(repr(text))
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t

    def ident(self, what: str) -> _Tok:
        t = self.next(what)
        if not re.fullmatch(r"[A-Za-z0-9_]+", t.text):
            raise ParseError(f"expected {what}, found {t.text!r}", t.line, t.col)
        return t

    def pattern(self, allow_var: bool = True) -> tuple[Pattern, _Tok]:
        name = self.ident("predicate name")
        if name.text in (VARIABLE, EMPTY_WORD):
            raise ParseError(f"{name.text!r} cannot be a predicate name", name.line, name.col)
        self.expect("(")
        syms: list[str] = []
        tail = None
        while True:
            t = self.peek()
            if t is not None and t.text == ")":
                self.next()
                break
            t = self.ident("stack symbol, 'x', 'eps' or ')'")
            if tail is not None:
                raise ParseError(f"{tail.text!r} must end the word", tail.line, tail.col)
            if t.text in (VARIABLE, EMPTY_WORD):
                if t.text == VARIABLE and not allow_var:
                    raise ParseError("closed atom expected; 'x' is not allowed", t.line, t.col)
                tail = t
            else:
                syms.append(t.text)
        var = tail is not None and tail.text == VARIABLE
        return Pattern(name.text, tuple(syms), var), name


def parse_system(text: str, aps: bool = True) -> System:
    """Parse a rule file; with ``aps`` every rule must be an APS shape."""
    p = _Parser(text)
    rules: list[Rule] = []
    seen: dict = {}
    n = 0
    while p.peek() is not None:
        concl, head = p.pattern()
        premises: list[Pattern] = []
        t = p.next("'<-' or '.'")
        if t.text == "<-":
            while True:
                prem, ptok = p.pattern()
                if prem in premises:
                    raise ParseError(f"duplicate premise {prem}", ptok.line, ptok.col)
                premises.append(prem)
                t = p.next("',' or '.'")
                if t.text == ".":
                    break
                if t.text != ",":
                    raise ParseError(f"expected ',' or '.', found {t.text!r}", t.line, t.col)
        elif t.text != ".":
            raise ParseError(f"expected '<-' or '.', found {t.text!r}", t.line, t.col)
        n += 1
        try:
            rule = Rule(f"r{n}", concl, tuple(premises))
        except RuleError as e:
            raise ParseError(str(e), head.line, head.col) from None
        if aps and aps_class(rule.conclusion, rule.premises) is None:
            raise ParseError(
                f"shape violation: {rule} matches no alternating pushdown rule template",
                head.line,
                head.col,
            )
        if rule.key in seen:
            raise ParseError(f"duplicate rule: {rule} repeats rule {seen[rule.key]}", head.line, head.col)
        seen[rule.key] = rule.id
        rules.append(rule)
    if not rules:
        raise ParseError("no rules")
    try:
        return System(tuple(rules), flags={"aps_shaped"} if aps else set())
    except ValueError as e:
        raise ParseError(str(e)) from None


def parse_atom(text: str) -> Atom:
    p = _Parser(text)
    pat, _ = p.pattern(allow_var=False)
    extra = p.peek()
    if extra is not None:
        raise ParseError(f"trailing input {extra.text!r}", extra.line, extra.col)
    return Atom(pat.predicate, pat.prefix)


def _provenance_note(r: Rule) -> str:
    prov = r.provenance
    if isinstance(prov, Composed):
        parts = ", ".join(p or "id" for p in prov.parts)
        return f"{r.id}: {prov.base} o ({parts})"
    if isinstance(prov, Instance):
        return f"{r.id}: instance of {prov.base}"
    if isinstance(prov, Selection):
        sel = ", ".join(f"{rid}#{j + 1}" for rid, j in prov.choices[0])
        return f"{r.id}: selects {sel or 'nothing'}"
    return r.id


def format_system(s: System, comments: bool = False) -> str:
    lines = []
    for r in s:
        text = str(r)
        if comments:
            text = f"{text:<40} # {_provenance_note(r)} [{r.kind.value}]"
        lines.append(text)
    return "\n".join(lines) + "\n"


def canonical_text(s: System | SignedSystem) -> str:
    """Text that identifies a system together with its rule ids."""
    if isinstance(s, SignedSystem):
        return "".join(f"+ {r.id}: {r}\n" for r in s.positive) + "".join(
            f"- {r.id}: {r}\n" for r in s.negative
        )
    return "".join(f"{r.id}: {r}\n" for r in s)
