"""Concrete syntax for GTL formulas.

Grammar (UTF-8 text)::

    formula  := or ;  or := and ('|' and)* ;  and := unary ('&' unary)*
    unary    := '!' unary | 'F[' INT ',' INT ']' unary
              | 'G[' INT ',' INT ']' unary
              | 'E' INT '{' edgeprop (',' edgeprop)* '}' unary
              | atom | '(' formula ')'
    atom     := '(' IDENT ('>=' | '<' | '=') NUMBER ')'
    edgeprop := IDENT ('>=' | '>' | '<=' | '<' | '=') NUMBER

Sugar: ``(X = 1)`` lowers to ``X >= 1.0``, ``(X = 0)`` to ``!(X >= 1.0)``
and ``(V < c)`` to ``!(V >= c)``.  Only bounded temporal operators are
accepted; ``U``/``X`` and interval-free ``F``/``G`` are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .formulas import (
    Always,
    And,
    Atomic,
    EdgeProp,
    Eventually,
    ExistsN,
    Formula,
    Not,
    Or,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<NUMBER>\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<OP>>=|<=|[()\[\]{},&|!<>=\-])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        kind = m.lastgroup or "OP"
        tok = m.group()
        tokens.append(_Token("OP" if kind == "OP" else kind, tok, line, col))
        col += len(tok)
        i = m.end()
    tokens.append(_Token("EOF", "", line, col))
    return tokens


_EXISTS_RE = re.compile(r"^E(\d+)$")


class _Parser:
    def __init__(self, text: str) -> None:
        self._tokens = _tokenize(text)
        self._pos = 0

    def parse(self) -> Formula:
        formula = self._or()
        tok = self._peek()
        if tok.kind != "EOF":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.column)
        return formula

    # -- token helpers -----------------------------------------------------

    def _peek(self, offset: int = 0) -> _Token:
        return self._tokens[min(self._pos + offset, len(self._tokens) - 1)]

    def _advance(self) -> _Token:
        tok = self._tokens[self._pos]
        if tok.kind != "EOF":
            self._pos += 1
        return tok

    def _expect(self, text: str) -> _Token:
        tok = self._peek()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.column)
        return self._advance()

    def _error(self, message: str) -> ParseError:
        tok = self._peek()
        return ParseError(message, tok.line, tok.column)

    # -- grammar -----------------------------------------------------------

    def _or(self) -> Formula:
        left = self._and()
        while self._peek().text == "|":
            self._advance()
            left = Or(left, self._and())
        return left

    def _and(self) -> Formula:
        left = self._unary()
        while self._peek().text == "&":
            self._advance()
            left = And(left, self._unary())
        return left

    def _unary(self) -> Formula:
        tok = self._peek()
        if tok.text == "!":
            self._advance()
            return Not(self._unary())
        if tok.kind == "IDENT":
            if tok.text in ("F", "G"):
                if self._peek(1).text != "[":
                    raise ParseError(
                        f"unbounded temporal operator {tok.text!r}: interval [a,b] required",
                        tok.line, tok.column)
                self._advance()
                lo, hi = self._interval()
                inner = self._unary()
                return Eventually(lo, hi, inner) if tok.text == "F" else Always(lo, hi, inner)
            exists = _EXISTS_RE.match(tok.text)
            if exists and self._peek(1).text == "{":
                self._advance()
                count = int(exists.group(1))
                if count < 1:
                    raise ParseError("neighbor quantifier count must be >= 1",
                                     tok.line, tok.column)
                props = self._edge_props()
                return ExistsN(count, props, self._unary())
            if tok.text in ("U", "X"):
                raise ParseError(
                    f"unbounded temporal operator {tok.text!r} is not supported",
                    tok.line, tok.column)
            raise self._error(f"expected formula, found {tok.text!r}")
        if tok.text == "(":
            return self._group_or_atom()
        raise self._error(f"expected formula, found {tok.text or 'end of input'!r}")

    def _interval(self) -> tuple[int, int]:
        open_tok = self._expect("[")
        lo = self._int_bound()
        self._expect(",")
        hi = self._int_bound()
        self._expect("]")
        if lo > hi:
            raise ParseError(f"inverted interval bounds [{lo},{hi}]",
                             open_tok.line, open_tok.column)
        return lo, hi

    def _int_bound(self) -> int:
        tok = self._peek()
        if tok.text == "-":
            raise ParseError("negative interval bound", tok.line, tok.column)
        if tok.kind != "NUMBER":
            raise ParseError(f"expected integer bound, found {tok.text!r}",
                             tok.line, tok.column)
        if any(c in tok.text for c in ".eE"):
            raise ParseError(f"interval bounds must be integers, found {tok.text!r}",
                             tok.line, tok.column)
        self._advance()
        return int(tok.text)

    def _number(self) -> float:
        sign = 1.0
        if self._peek().text == "-":
            self._advance()
            sign = -1.0
        tok = self._peek()
        if tok.kind != "NUMBER":
            raise ParseError(f"expected number, found {tok.text!r}", tok.line, tok.column)
        self._advance()
        return sign * float(tok.text)

    def _edge_props(self) -> tuple[EdgeProp, ...]:
        self._expect("{")
        props: list[EdgeProp] = []
        while True:
            ident = self._peek()
            if ident.kind != "IDENT":
                raise ParseError(f"expected edge feature name, found {ident.text!r}",
                                 ident.line, ident.column)
            self._advance()
            op = self._peek()
            if op.text not in (">=", ">", "<=", "<", "="):
                raise ParseError(f"expected edge comparison, found {op.text!r}",
                                 op.line, op.column)
            self._advance()
            props.append(EdgeProp(ident.text, op.text, self._number()))
            if self._peek().text == ",":
                self._advance()
                continue
            break
        self._expect("}")
        return tuple(props)

    def _group_or_atom(self) -> Formula:
        open_tok = self._expect("(")
        tok = self._peek()
        if tok.kind == "IDENT" and self._peek(1).text in (">=", "<", "=", ">", "<="):
            feature = self._advance().text
            op = self._advance()
            value = self._number()
            self._expect(")")
            return self._atom(feature, op, value)
        formula = self._or()
        closing = self._peek()
        if closing.text != ")":
            raise ParseError("unbalanced parenthesis", open_tok.line, open_tok.column)
        self._advance()
        return formula

    def _atom(self, feature: str, op: _Token, value: float) -> Formula:
        if op.text == ">=":
            return Atomic(feature, value)
        if op.text == "<":
            return Not(Atomic(feature, value))
        if op.text == "=":
            if value == 1:
                return Atomic(feature, 1.0)
            if value == 0:
                return Not(Atomic(feature, 1.0))
            raise ParseError("equality sugar supports only '= 0' and '= 1'",
                             op.line, op.column)
        raise ParseError(f"node atoms support '>=', '<' and '=' (found {op.text!r})",
                         op.line, op.column)


def parse_formula(text: str) -> Formula:
    """Parse concrete syntax into a formula tree.

    Raises :class:`ParseError` with line/column positions for syntax
    errors, inverted or negative interval bounds, and unbounded
    temporal operators.
    """
    return _Parser(text).parse()
