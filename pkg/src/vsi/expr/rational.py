"""Normalized rational functions: the scalar ring of every tensor component."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from gmpy2 import mpq

from .context import Symbol, VariableContext
from .errors import MissingAssignmentError, PoleError
from .poly import Polynomial, integer_normalize, poly_gcd, to_fraction, to_q


def gcd_normalize(p: Polynomial, q: Polynomial) -> tuple[Polynomial, Polynomial]:
    """Cancel the polynomial gcd of ``p/q``.

    The returned pair is coprime, has integer coefficients with no common
    integer factor, and the denominator has a positive leading coefficient:
    ``(6v^2, 4v) -> (3v, 2)``.
    """
    if q.is_zero():
        raise ZeroDivisionError("denominator is the zero polynomial")
    if p.is_zero():
        return p, Polynomial.one(p.ctx)
    g = poly_gcd(p, q)
    if not g.is_one():
        p, q = p.exact_div(g), q.exact_div(g)
    return integer_normalize(p, q)


def _reduce(num: Polynomial, den: Polynomial) -> RationalFunction:
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if num.is_zero():
        return RationalFunction(num, Polynomial.one(num.ctx))
    if not den.is_constant():
        g = poly_gcd(num, den)
        if not g.is_one():
            num = num.exact_div(g)
            den = den.exact_div(g)
    lc = den.leading_coeff()
    if lc != 1:
        inv = 1 / lc
        num = num.scale(inv)
        den = den.scale(inv)
    return RationalFunction(num, den)


class RationalFunction:
    """``num/den`` with gcd 1 and a monic denominator (leading coefficient 1
    in the packed monomial order), so equality is structural."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Polynomial, den: Polynomial) -> None:
        # trusted: callers pass an already-normalized pair; use ``make``
        self.num = num
        self.den = den
        self._hash: int | None = None

    @classmethod
    def make(cls, num: Polynomial, den: Polynomial | None = None) -> RationalFunction:
        if den is None:
            return cls(num, Polynomial.one(num.ctx))
        return _reduce(num, den)

    @classmethod
    def zero(cls, ctx: VariableContext) -> RationalFunction:
        return cls(Polynomial.zero(ctx), Polynomial.one(ctx))

    @classmethod
    def one(cls, ctx: VariableContext) -> RationalFunction:
        return cls(Polynomial.one(ctx), Polynomial.one(ctx))

    @classmethod
    def constant(cls, ctx: VariableContext, c) -> RationalFunction:
        return cls(Polynomial.constant(ctx, c), Polynomial.one(ctx))

    @classmethod
    def symbol(cls, ctx: VariableContext, name: str | Symbol) -> RationalFunction:
        return cls(Polynomial.variable(ctx, ctx.index(name)), Polynomial.one(ctx))

    @property
    def ctx(self) -> VariableContext:
        return self.num.ctx

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num.terms

    def __bool__(self) -> bool:
        return bool(self.num.terms)

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_one()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return to_fraction(self.num.constant_value())

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RationalFunction):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self.den.is_one() and self.num == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> RationalFunction:
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other, Polynomial.one(other.ctx))
        return RationalFunction.constant(self.ctx, other)

    def __add__(self, other) -> RationalFunction:
        other = self._coerce(other)
        a, b, c, d = self.num, self.den, other.num, other.den
        if not c.terms:
            return self
        if not a.terms:
            return other
        b1, d1 = b.is_one(), d.is_one()
        if b1 and d1:
            return RationalFunction(a + c, b)
        if d1:
            return RationalFunction(a + c * b, b)
        if b1:
            return RationalFunction(a * d + c, d)
        if b == d:
            return _reduce(a + c, b)
        g = poly_gcd(b, d)
        if g.is_one():
            return _reduce(a * d + c * b, b * d)
        bg = b.exact_div(g)
        dg = d.exact_div(g)
        t = a * dg + c * bg
        return _reduce(t, bg * d)

    __radd__ = __add__

    def __neg__(self) -> RationalFunction:
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other) -> RationalFunction:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> RationalFunction:
        return self._coerce(other) - self

    def __mul__(self, other) -> RationalFunction:
        if not isinstance(other, RationalFunction):
            if isinstance(other, Polynomial):
                other = self._coerce(other)
            else:
                c = to_q(other)
                if not c:
                    return RationalFunction.zero(self.ctx)
                return RationalFunction(self.num.scale(c), self.den)
        a, b, c, d = self.num, self.den, other.num, other.den
        if not a.terms or not c.terms:
            return RationalFunction(Polynomial.zero(a.ctx), Polynomial.one(a.ctx))
        b1, d1 = b.is_one(), d.is_one()
        if b1 and d1:
            return RationalFunction(a * c, b)
        if not d1:
            g1 = poly_gcd(a, d)
            if not g1.is_one():
                a = a.exact_div(g1)
                d = d.exact_div(g1)
        if not b1:
            g2 = poly_gcd(c, b)
            if not g2.is_one():
                c = c.exact_div(g2)
                b = b.exact_div(g2)
        den = b * d
        num = a * c
        lc = den.leading_coeff()
        if lc != 1:
            num, den = num.scale(1 / lc), den.scale(1 / lc)
        return RationalFunction(num, den)

    __rmul__ = __mul__

    def inverse(self) -> RationalFunction:
        if self.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        num, den = self.den, self.num
        lc = den.leading_coeff()
        if lc != 1:
            num, den = num.scale(1 / lc), den.scale(1 / lc)
        return RationalFunction(num, den)

    def __truediv__(self, other) -> RationalFunction:
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> RationalFunction:
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> RationalFunction:
        if n < 0:
            return self.inverse() ** (-n)
        return RationalFunction(self.num**n, self.den**n)

    # -- calculus and evaluation ------------------------------------------
    def diff_index(self, i: int) -> RationalFunction:
        a, b = self.num, self.den
        if b.is_one():
            return RationalFunction(a.diff(i), b)
        da, db = a.diff(i), b.diff(i)
        if not db.terms:
            # da may share a factor with b: d/dT (XT/X) = X/X
            return _reduce(da, b) if da.terms else RationalFunction.zero(a.ctx)
        # d(a/b) = (a'b - ab')/b^2; gcd(b, b') shortens the denominator
        g = poly_gcd(b, db)
        bg = b.exact_div(g)
        num = da * bg - a * db.exact_div(g)
        return _reduce(num, bg * b)

    def evaluate_values(self, values) -> mpq:
        d = self.den.evaluate(values)
        if not d:
            raise PoleError(f"denominator {self.den} vanishes at the sample point")
        return self.num.evaluate(values) / d

    def free_indices(self) -> set[int]:
        return self.num.variables() | self.den.variables()

    def substitute(self, values: Mapping[int, mpq]) -> RationalFunction:
        return _reduce(self.num.substitute(values), self.den.substitute(values))

    def __repr__(self) -> str:
        return f"RationalFunction({str(self)!r})"

    def __str__(self) -> str:
        from .printer import format_rational

        return format_rational(self)


def differentiate(f: RationalFunction, x: Symbol | str) -> RationalFunction:
    """Partial derivative by a coordinate; parameters are constants and
    differentiating by one is an error."""
    ctx = f.ctx
    sym = ctx[x] if isinstance(x, str) else x
    if not sym.is_coordinate:
        raise ValueError(f"cannot differentiate by parameter {sym.name!r}")
    return f.diff_index(ctx.index(sym))


def evaluate(f: RationalFunction, assignment: Mapping[Symbol | str, object]) -> Fraction:
    """Exact value of ``f`` at a rational point."""
    ctx = f.ctx
    values = [mpq(0)] * ctx.nvars
    given = set()
    for key, val in assignment.items():
        i = ctx.index(key)
        values[i] = to_q(val)
        given.add(i)
    missing = f.free_indices() - given
    if missing:
        names = ", ".join(sorted(ctx.symbols[i].name for i in missing))
        raise MissingAssignmentError(f"no value assigned to {names}")
    return to_fraction(f.evaluate_values(values))
