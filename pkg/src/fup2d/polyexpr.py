"""A small grammar for bivariate polynomials typed on the command line.

    expr   := [sign] term (sign term)*
    term   := factor ([*] factor)*
    factor := number | "i" | ("z" | "w") ["^" integer]

Whitespace is ignored and juxtaposition multiplies, so ``3i z^2 w`` and
``3*i*z^2*w`` are the same term.  Columns in error messages are 1-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import PolySyntaxError
from .polymethod import BivarPoly

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_INT = re.compile(r"\d+")


@dataclass(frozen=True, eq=False)
class PolyExpr:
    source: str
    parsed: BivarPoly

    @property
    def degenerate(self) -> bool:
        """True for the zero polynomial, whose zero set is everything."""
        return self.parsed.is_zero

    def canonical(self) -> str:
        return render_poly(self.parsed)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg, pos=None):
        raise PolySyntaxError(msg, (self.pos if pos is None else pos) + 1)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> BivarPoly:
        terms = {}
        sign = 1
        c = self.peek()
        if c and c in "+-":
            sign = -1 if c == "-" else 1
            self.pos += 1
        while True:
            coef, exp = self.term()
            terms[exp] = terms.get(exp, 0) + sign * coef
            c = self.peek()
            if not c:
                break
            if c not in "+-":
                self.error(f"unexpected character {c!r}")
            sign = -1 if c == "-" else 1
            self.pos += 1
        return BivarPoly(terms)

    def term(self):
        coef, k, l = 1 + 0j, 0, 0
        got = False
        while True:
            c = self.peek()
            if c == "*":
                if not got:
                    self.error("'*' needs a factor on its left")
                self.pos += 1
                c = self.peek()
                if not c or c in "+-*^":
                    self.error("'*' needs a factor on its right")
            if not c or c in "+-":
                break
            start = self.pos
            if c in "zw":
                self.pos += 1
                e = 1
                if self.peek() == "^":
                    self.pos += 1
                    e = self.exponent()
                if c == "z":
                    k += e
                else:
                    l += e
            elif c == "i":
                self.pos += 1
                coef *= 1j
            elif c.isdigit() or c == ".":
                m = _NUMBER.match(self.text, self.pos)
                if not m:
                    self.error("malformed number")
                coef *= float(m.group(0))
                self.pos = m.end()
            elif c == "^":
                self.error("'^' is only allowed after z or w")
            else:
                self.error(f"unexpected character {c!r}", start)
            got = True
        if not got:
            self.error("expected a term")
        return coef, (k, l)

    def exponent(self) -> int:
        c = self.peek()
        if c == "-":
            self.error("negative exponents are not allowed")
        m = _INT.match(self.text, self.pos)
        if not m:
            self.error("expected a nonnegative integer exponent")
        self.pos = m.end()
        return int(m.group(0))


def parse_poly(source: str) -> PolyExpr:
    """Parse a polynomial expression in ``z`` and ``w``."""
    return PolyExpr(source, _Parser(source).parse())


def _monomial(k: int, l: int) -> str:
    parts = []
    if k:
        parts.append("z" if k == 1 else f"z^{k}")
    if l:
        parts.append("w" if l == 1 else f"w^{l}")
    return "*".join(parts)


def render_poly(F: BivarPoly) -> str:
    """Canonical text that parses back to exactly the same coefficients.

    Real and imaginary parts become separate terms; numbers use ``repr``.
    """
    pieces = []
    for (k, l), a in sorted(F.coeffs.items(), key=lambda t: (-(t[0][0] + t[0][1]), -t[0][0])):
        if k < 0 or l < 0:
            raise ValueError("negative exponents cannot be rendered")
        mono = _monomial(k, l)
        for part, unit in ((a.real, ""), (a.imag, "i")):
            if part == 0:
                continue
            mag = repr(abs(part))
            body = "*".join(x for x in (mag + unit, mono) if x)
            pieces.append(("-" if part < 0 else "+", body))
    if not pieces:
        return "0"
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out
