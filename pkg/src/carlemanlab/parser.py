"""Text grammar for expressions, plus the matching pretty-printer.

Grammar (whitespace-insensitive)::

    expr    := term (("+" | "-") term)*
    term    := factor ("*" factor)*
    factor  := "-"* power
    power   := primary ("^" INT)?
    primary := rational | "i" | "dt" | "dB" | NAME | call | "(" expr ")"
    rational:= INT ("/" INT)?
    call    := FN "(" expr ")"
    FN      := "dx1" | "dx2" | "dx3" | "dtau" | "d" | "conj" | "Re" | "Im"

`dtau` is the time derivative, `d` the Ito differential.  There is no
division operator; "/" only forms rational literals.  Identifiers must be
declared on the Context handed to :func:`parse`; errors carry the
offending position.
"""

from __future__ import annotations

import re as _re
from fractions import Fraction

from .exact import QQi
from .exprs import (
    Add,
    C,
    Conj,
    Const,
    Context,
    DB,
    DBAtom,
    DIto,
    DT,
    Dt,
    DtAtom,
    Dx,
    Expr,
    ExprError,
    ImPart,
    Mul,
    Pow,
    RePart,
    Sym,
)

_TOKEN = _re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^/()]))"
)

_FUNCTIONS = ("dx1", "dx2", "dx3", "dtau", "d", "conj", "Re", "Im")


class ParseError(ExprError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tok: tuple[str, str, int] | None = None  # (kind, value, start)
        self._advance()

    def _advance(self):
        m = _TOKEN.match(self.text, self.pos)
        if m is None:
            rest = self.text[self.pos :].strip()
            if rest:
                raise ParseError(f"unexpected character {rest[0]!r}", self.pos)
            self.tok = None
            return
        self.pos = m.end()
        if m.group("int") is not None:
            self.tok = ("int", m.group("int"), m.start())
        elif m.group("name") is not None:
            self.tok = ("name", m.group("name"), m.start())
        else:
            self.tok = ("op", m.group("op"), m.start())
        if self.tok is not None and self.tok[0] == "op" and not m.group("op"):
            raise ParseError("empty token", m.start())

    def peek(self):
        return self.tok

    def take(self):
        tok = self.tok
        self._advance()
        return tok

    def expect_op(self, op: str):
        tok = self.tok
        if tok is None or tok[0] != "op" or tok[1] != op:
            raise ParseError(f"expected {op!r}", tok[2] if tok else len(self.text))
        self._advance()


class _Parser:
    def __init__(self, text: str, ctx: Context):
        self.lex = _Lexer(text)
        self.ctx = ctx
        self.text = text

    def parse(self) -> Expr:
        e = self._expr()
        tok = self.lex.peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok[1]!r}", tok[2])
        return e

    def _expr(self) -> Expr:
        terms = [self._term()]
        while True:
            tok = self.lex.peek()
            if tok is None or tok[0] != "op" or tok[1] not in "+-":
                break
            self.lex.take()
            t = self._term()
            terms.append(t if tok[1] == "+" else Mul((C(-1), t)))
        return terms[0] if len(terms) == 1 else Add(terms)

    def _term(self) -> Expr:
        factors = [self._factor()]
        while True:
            tok = self.lex.peek()
            if tok is None or tok[0] != "op" or tok[1] != "*":
                break
            self.lex.take()
            factors.append(self._factor())
        return factors[0] if len(factors) == 1 else Mul(factors)

    def _factor(self) -> Expr:
        negate = False
        while True:
            tok = self.lex.peek()
            if tok is not None and tok[0] == "op" and tok[1] == "-":
                self.lex.take()
                negate = not negate
            else:
                break
        e = self._power()
        return Mul((C(-1), e)) if negate else e

    def _power(self) -> Expr:
        base = self._primary()
        tok = self.lex.peek()
        if tok is not None and tok[0] == "op" and tok[1] == "^":
            self.lex.take()
            etok = self.lex.peek()
            if etok is None or etok[0] != "int":
                raise ParseError(
                    "exponent must be a nonnegative integer",
                    etok[2] if etok else len(self.text),
                )
            self.lex.take()
            return Pow(base, int(etok[1]))
        return base

    def _primary(self) -> Expr:
        tok = self.lex.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        kind, value, pos = tok
        if kind == "int":
            self.lex.take()
            nxt = self.lex.peek()
            if nxt is not None and nxt[0] == "op" and nxt[1] == "/":
                self.lex.take()
                den = self.lex.peek()
                if den is None or den[0] != "int":
                    raise ParseError(
                        "expected denominator", den[2] if den else len(self.text)
                    )
                self.lex.take()
                if int(den[1]) == 0:
                    raise ParseError("zero denominator", den[2])
                return Const(QQi(Fraction(int(value), int(den[1]))))
            return Const(QQi(int(value)))
        if kind == "op":
            if value == "(":
                self.lex.take()
                e = self._expr()
                self.lex.expect_op(")")
                return e
            raise ParseError(f"unexpected operator {value!r}", pos)
        # names
        if value == "i":
            self.lex.take()
            return Const(QQi(0, 1))
        if value == "dt":
            self.lex.take()
            return DT
        if value == "dB":
            self.lex.take()
            return DB
        if value in _FUNCTIONS:
            self.lex.take()
            self.lex.expect_op("(")
            arg = self._expr()
            self.lex.expect_op(")")
            if value.startswith("dx"):
                j = int(value[2])
                if j > self.ctx.n:
                    raise ParseError(
                        f"{value} out of range for dimension {self.ctx.n}", pos
                    )
                return Dx(j, arg)
            if value == "dtau":
                return Dt(arg)
            if value == "d":
                return DIto(arg)
            if value == "conj":
                return Conj(arg)
            if value == "Re":
                return RePart(arg)
            return ImPart(arg)
        self.lex.take()
        sym = self.ctx.symbols.get(value)
        if sym is None:
            raise ParseError(f"unknown symbol {value!r}", pos)
        return Sym(sym)


def parse(text: str, ctx: Context) -> Expr:
    """Parse the grammar above over the context's declared symbols."""
    return _Parser(text, ctx).parse()


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

# Precedence levels: add=1, mul=2, unary/pow=3, pow base (primary)=4.


def _print(e: Expr, level: int) -> str:
    if isinstance(e, Const):
        s = str(e.value)
        needs = level >= 2 and (s.startswith("-") or "+" in s[1:] or "-" in s[1:])
        # parenthesized mixed constants already carry parens
        if s.startswith("("):
            needs = False
        return f"({s})" if needs else s
    if isinstance(e, Sym):
        return e.sym.name
    if isinstance(e, DtAtom):
        return "dt"
    if isinstance(e, DBAtom):
        return "dB"
    if isinstance(e, Add):
        if not e.terms:
            return "0"
        inner = " + ".join(_print(t, 1) for t in e.terms)
        return f"({inner})" if level >= 2 else inner
    if isinstance(e, Mul):
        if not e.factors:
            return "1"
        inner = "*".join(_print(f, 2) for f in e.factors)
        return f"({inner})" if level >= 3 else inner
    if isinstance(e, Pow):
        # the grammar has no chained "^": a Pow base needs its own parens
        s = f"{_print(e.base, 4)}^{e.exp}"
        return f"({s})" if level >= 4 else s
    if isinstance(e, Dx):
        return f"dx{e.j}({_print(e.arg, 1)})"
    if isinstance(e, Dt):
        return f"dtau({_print(e.arg, 1)})"
    if isinstance(e, DIto):
        return f"d({_print(e.arg, 1)})"
    if isinstance(e, Conj):
        return f"conj({_print(e.arg, 1)})"
    if isinstance(e, RePart):
        return f"Re({_print(e.arg, 1)})"
    if isinstance(e, ImPart):
        return f"Im({_print(e.arg, 1)})"
    raise ExprError(f"cannot print node {type(e).__name__}")


def to_text(e: Expr) -> str:
    """Print an expression in the grammar accepted by :func:`parse`."""
    return _print(e, 1)
