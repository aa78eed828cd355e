"""Sparse multivariate polynomials over the rationals.

A monomial is an exponent vector packed into one Python int, ``BITS`` bits per
variable with variable 0 in the lowest field. Integer order on packed keys is
a monomial order (lex, last variable most significant), so the leading term is
``max(terms)``. The top bit of every field is kept clear and used as a borrow
guard for divisibility tests, which caps single exponents at ``MAX_EXP``.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import gmpy2
from gmpy2 import mpq

from .context import VariableContext

BITS = 16
MASK = (1 << BITS) - 1
MAX_EXP = (1 << (BITS - 1)) - 1

_ZERO = mpq(0)
_ONE = mpq(1)


@lru_cache(maxsize=None)
def _guard(nvars: int) -> int:
    return sum(1 << (BITS * i + BITS - 1) for i in range(nvars))


def to_q(c) -> mpq:
    """Coerce an int, Fraction, mpq or ``"p/q"`` string to ``mpq``."""
    if isinstance(c, type(_ONE)):
        return c
    if isinstance(c, int):
        return mpq(c)
    if isinstance(c, Fraction):
        return mpq(c.numerator, c.denominator)
    if isinstance(c, str):
        return mpq(Fraction(c).numerator, Fraction(c).denominator)
    if isinstance(c, type(gmpy2.mpz(0))):
        return mpq(c)
    raise TypeError(f"not an exact rational: {c!r}")


def to_fraction(c: mpq) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def pack(exps: Sequence[int]) -> int:
    key = 0
    for i, e in enumerate(exps):
        if e < 0 or e > MAX_EXP:
            raise OverflowError(f"exponent {e} out of range")
        key |= e << (BITS * i)
    return key


def unpack(key: int, nvars: int) -> tuple[int, ...]:
    return tuple((key >> (BITS * i)) & MASK for i in range(nvars))


class Polynomial:
    """Immutable polynomial: ``terms`` maps packed monomials to nonzero ``mpq``."""

    __slots__ = ("ctx", "terms", "_hash", "_tdeg")

    def __init__(self, ctx: VariableContext, terms: dict[int, mpq]) -> None:
        # trusted constructor: no zero coefficients, keys in range
        self.ctx = ctx
        self.terms = terms
        self._hash: int | None = None
        self._tdeg: int | None = None

    # -- construction -----------------------------------------------------
    @classmethod
    def zero(cls, ctx: VariableContext) -> Polynomial:
        return cls(ctx, {})

    @classmethod
    def one(cls, ctx: VariableContext) -> Polynomial:
        return cls(ctx, {0: _ONE})

    @classmethod
    def constant(cls, ctx: VariableContext, c) -> Polynomial:
        c = to_q(c)
        return cls(ctx, {0: c} if c else {})

    @classmethod
    def variable(cls, ctx: VariableContext, i: int) -> Polynomial:
        return cls(ctx, {1 << (BITS * i): _ONE})

    @classmethod
    def from_dict(cls, ctx: VariableContext, data: Mapping[Sequence[int], object]) -> Polynomial:
        terms: dict[int, mpq] = {}
        for exps, c in data.items():
            if len(exps) != ctx.nvars:
                raise ValueError("exponent vector length does not match context")
            c = to_q(c)
            if c:
                k = pack(exps)
                v = terms.get(k, _ZERO) + c
                if v:
                    terms[k] = v
                else:
                    terms.pop(k, None)
        return cls(ctx, terms)

    def to_dict(self) -> dict[tuple[int, ...], Fraction]:
        n = self.ctx.nvars
        return {unpack(k, n): to_fraction(c) for k, c in self.terms.items()}

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        t = self.terms
        return len(t) == 1 and t.get(0) == _ONE

    def is_constant(self) -> bool:
        t = self.terms
        return not t or (len(t) == 1 and 0 in t)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def constant_value(self) -> mpq:
        return self.terms.get(0, _ZERO)

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)) or isinstance(other, type(_ONE)):
            c = to_q(other)
            return self.terms == ({0: c} if c else {})
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # -- degrees ----------------------------------------------------------
    def total_degree(self) -> int:
        if self._tdeg is None:
            n = self.ctx.nvars
            best = 0
            for k in self.terms:
                s = 0
                while k:
                    s += k & MASK
                    k >>= BITS
                if s > best:
                    best = s
            self._tdeg = best if n else 0
        return self._tdeg

    def degree(self, i: int) -> int:
        sh = BITS * i
        return max(((k >> sh) & MASK for k in self.terms), default=0)

    def variables(self) -> set[int]:
        acc = 0
        for k in self.terms:
            acc |= k
        out = set()
        i = 0
        while acc:
            if acc & MASK:
                out.add(i)
            acc >>= BITS
            i += 1
        return out

    def leading_monomial(self) -> int:
        return max(self.terms)

    def leading_coeff(self) -> mpq:
        return self.terms[max(self.terms)] if self.terms else _ZERO

    # -- ring operations --------------------------------------------------
    def _check(self, other: Polynomial) -> None:
        if other.ctx is not self.ctx and other.ctx != self.ctx:
            raise ValueError("polynomials live in different variable contexts")

    def __add__(self, other: Polynomial) -> Polynomial:
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.ctx, other)
        a, b = self.terms, other.terms
        if not b:
            return self
        if not a:
            return other
        if len(a) < len(b):
            a, b = b, a
        res = dict(a)
        get = res.get
        for k, c in b.items():
            v = get(k, _ZERO) + c
            if v:
                res[k] = v
            else:
                del res[k]
        return Polynomial(self.ctx, res)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(self.ctx, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: Polynomial) -> Polynomial:
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.ctx, other)
        b = other.terms
        if not b:
            return self
        res = dict(self.terms)
        get = res.get
        for k, c in b.items():
            v = get(k, _ZERO) - c
            if v:
                res[k] = v
            else:
                del res[k]
        return Polynomial(self.ctx, res)

    def __rsub__(self, other) -> Polynomial:
        return Polynomial.constant(self.ctx, other) - self

    def scale(self, c) -> Polynomial:
        c = to_q(c)
        if not c:
            return Polynomial(self.ctx, {})
        if c == _ONE:
            return self
        return Polynomial(self.ctx, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other: Polynomial) -> Polynomial:
        if not isinstance(other, Polynomial):
            return self.scale(other)
        a, b = self.terms, other.terms
        if not a or not b:
            return Polynomial(self.ctx, {})
        if self.total_degree() + other.total_degree() > MAX_EXP:
            raise OverflowError("polynomial degree exceeds the packed exponent range")
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            ((m, c),) = b.items()
            if m == 0:
                return self.scale(c) if a is self.terms else other.scale(c)
            return Polynomial(self.ctx, {k + m: v * c for k, v in a.items()})
        res: dict[int, mpq] = {}
        get = res.get
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                k = m1 + m2
                res[k] = get(k, _ZERO) + c1 * c2
        return Polynomial(self.ctx, {k: v for k, v in res.items() if v})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Polynomial:
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial.one(self.ctx)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def diff(self, i: int) -> Polynomial:
        sh = BITS * i
        unit = 1 << sh
        res = {}
        for k, c in self.terms.items():
            e = (k >> sh) & MASK
            if e:
                res[k - unit] = c * e
        return Polynomial(self.ctx, res)

    def monic(self) -> Polynomial:
        if not self.terms:
            return self
        return self.scale(1 / self.leading_coeff())

    # -- evaluation -------------------------------------------------------
    def evaluate(self, values: Sequence[mpq]) -> mpq:
        """Evaluate with ``values[i]`` substituted for variable ``i``."""
        total = _ZERO
        n = len(values)
        for k, c in self.terms.items():
            i = 0
            while k:
                e = k & MASK
                if e:
                    if i >= n:
                        raise IndexError("no value for variable %d" % i)
                    c = c * values[i] ** e
                k >>= BITS
                i += 1
            total += c
        return total

    def substitute(self, values: Mapping[int, mpq]) -> Polynomial:
        """Substitute rationals for some variables; the rest stay symbolic."""
        res: dict[int, mpq] = {}
        get = res.get
        for k, c in self.terms.items():
            rest = k
            for i, val in values.items():
                sh = BITS * i
                e = (k >> sh) & MASK
                if e:
                    c = c * val**e
                    rest -= e << sh
            if c:
                v = get(rest, _ZERO) + c
                if v:
                    res[rest] = v
                else:
                    del res[rest]
        return Polynomial(self.ctx, res)

    # -- division ---------------------------------------------------------
    def monomial_content(self) -> int:
        """Packed exponent vector of the largest monomial dividing every term."""
        it = iter(self.terms)
        try:
            acc = list(unpack(next(it), self.ctx.nvars))
        except StopIteration:
            return 0
        n = len(acc)
        for k in it:
            for i in range(n):
                if acc[i]:
                    e = (k >> (BITS * i)) & MASK
                    if e < acc[i]:
                        acc[i] = e
            if not any(acc):
                return 0
        return pack(acc)

    def shift_down(self, mono: int) -> Polynomial:
        """Divide by a monomial known to divide every term."""
        if not mono:
            return self
        return Polynomial(self.ctx, {k - mono: c for k, c in self.terms.items()})

    def exact_div(self, q: Polynomial) -> Polynomial | None:
        """Return ``self / q`` if ``q`` divides exactly, else ``None``."""
        if not q.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.terms:
            return self
        G = _guard(self.ctx.nvars)
        if len(q.terms) == 1:
            ((m, c),) = q.terms.items()
            inv = 1 / c
            res = {}
            for k, v in self.terms.items():
                d = (k | G) - m
                if d & G != G:
                    return None
                res[d - G] = v * inv
            return Polynomial(self.ctx, res)
        r = dict(self.terms)
        lmq = max(q.terms)
        inv = 1 / q.terms[lmq]
        qitems = [(m, c) for m, c in q.terms.items() if m != lmq]
        quot: dict[int, mpq] = {}
        get = r.get
        while r:
            lm = max(r)
            d = (lm | G) - lmq
            if d & G != G:
                return None
            t = d - G
            c = r.pop(lm) * inv
            quot[t] = c
            for m, cq in qitems:
                k = m + t
                v = get(k, _ZERO) - c * cq
                if v:
                    r[k] = v
                else:
                    del r[k]
        return Polynomial(self.ctx, quot)

    def divides(self, other: Polynomial) -> bool:
        return other.exact_div(self) is not None

    def rational_content(self) -> mpq:
        """Positive rational c such that self/c has coprime integer coefficients."""
        if not self.terms:
            return _ONE
        num = 0
        den = 1
        for c in self.terms.values():
            num = gmpy2.gcd(num, c.numerator)
            den = gmpy2.lcm(den, c.denominator)
        return mpq(num, den)

    # -- univariate views (used by gcd) -----------------------------------
    def coefficient(self, i: int, d: int) -> Polynomial:
        """Coefficient of ``x_i^d`` as a polynomial free of ``x_i``."""
        sh = BITS * i
        cut = d << sh
        return Polynomial(
            self.ctx, {k - cut: c for k, c in self.terms.items() if (k >> sh) & MASK == d}
        )

    def coefficients(self, i: int) -> dict[int, Polynomial]:
        sh = BITS * i
        buckets: dict[int, dict[int, mpq]] = {}
        for k, c in self.terms.items():
            e = (k >> sh) & MASK
            buckets.setdefault(e, {})[k - (e << sh)] = c
        return {e: Polynomial(self.ctx, t) for e, t in buckets.items()}

    def univariate_image(self, i: int, values: Mapping[int, mpq]) -> dict[int, mpq]:
        """Substitute every variable except ``x_i``; return ``{degree: coeff}``."""
        sh = BITS * i
        out: dict[int, mpq] = {}
        for k, c in self.terms.items():
            e = (k >> sh) & MASK
            rest = k - (e << sh)
            j = 0
            while rest:
                f = rest & MASK
                if f:
                    c = c * values[j] ** f
                rest >>= BITS
                j += 1
            out[e] = out.get(e, _ZERO) + c
        return {e: c for e, c in out.items() if c}

    # -- printing ---------------------------------------------------------
    def sorted_terms(self) -> list[tuple[tuple[int, ...], mpq]]:
        n = self.ctx.nvars
        items = [(unpack(k, n), c) for k, c in self.terms.items()]
        items.sort(key=lambda t: (-sum(t[0]), tuple(-e for e in t[0])))
        return items

    def __repr__(self) -> str:
        from .printer import format_polynomial

        return f"Polynomial({format_polynomial(self)!r})"

    def __str__(self) -> str:
        from .printer import format_polynomial

        return format_polynomial(self)


# ---------------------------------------------------------------------------
# GCD
# ---------------------------------------------------------------------------

_rng = random.Random(0x5EED)


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    """Monic greatest common divisor over Q (zero only if both are zero)."""
    if not p.terms:
        return q.monic()
    if not q.terms:
        return p.monic()
    if p.is_constant() or q.is_constant():
        return Polynomial.one(p.ctx)
    mp, mq = p.monomial_content(), q.monomial_content()
    mono = _mono_min(mp, mq, p.ctx.nvars)
    p = p.shift_down(mp)
    q = q.shift_down(mq)
    g = _gcd_no_monomial(p, q)
    if mono:
        g = Polynomial(g.ctx, {k + mono: c for k, c in g.terms.items()})
    return g


def _mono_min(a: int, b: int, n: int) -> int:
    out = 0
    for i in range(n):
        sh = BITS * i
        e = min((a >> sh) & MASK, (b >> sh) & MASK)
        out |= e << sh
    return out


def _gcd_no_monomial(p: Polynomial, q: Polynomial) -> Polynomial:
    one = Polynomial.one(p.ctx)
    if p.is_constant() or q.is_constant():
        return one
    if len(p) < len(q):
        p, q = q, p
    if p.exact_div(q) is not None:
        return q.monic()
    shared = p.variables() & q.variables()
    if not shared:
        return one
    if all(_images_coprime(p, q, x) for x in sorted(shared)):
        return one
    return _gcd_prs(p, q, shared)


def _images_coprime(p: Polynomial, q: Polynomial, x: int) -> bool:
    """Sound test that gcd(p, q) has degree 0 in ``x``.

    Specialising the other variables at a point where both leading
    coefficients in ``x`` survive keeps the degree of the gcd's image at
    least ``deg_x gcd``, so a constant image gcd proves ``deg_x gcd = 0``.
    """
    dp, dq = p.degree(x), q.degree(x)
    others = sorted((p.variables() | q.variables()) - {x})
    n = p.ctx.nvars
    for _ in range(3):
        values = [_ZERO] * n
        for j in others:
            values[j] = mpq(_rng.randint(-61, 61) or 67)
        pu = p.univariate_image(x, values)
        qu = q.univariate_image(x, values)
        if max(pu, default=-1) != dp or max(qu, default=-1) != dq:
            continue
        return _univariate_gcd_degree(pu, qu) == 0
    return False


def _univariate_gcd_degree(a: dict[int, mpq], b: dict[int, mpq]) -> int:
    da, db = max(a), max(b)
    A = [a.get(i, _ZERO) for i in range(da + 1)]
    B = [b.get(i, _ZERO) for i in range(db + 1)]
    if len(A) < len(B):
        A, B = B, A
    while B:
        # remainder of A by B
        A = A[:]
        lb = B[-1]
        while len(A) >= len(B):
            c = A[-1] / lb
            shift = len(A) - len(B)
            for i, bc in enumerate(B):
                A[shift + i] -= c * bc
            A.pop()
            while A and not A[-1]:
                A.pop()
        A, B = B, A
    return len(A) - 1


def _content_in(p: Polynomial, x: int) -> Polynomial:
    coeffs = sorted(p.coefficients(x).values(), key=len)
    g = coeffs[0].monic()
    for c in coeffs[1:]:
        if g.is_one():
            break
        g = poly_gcd(g, c)
    return g


def _primitive_in(p: Polynomial, x: int) -> Polynomial:
    c = _content_in(p, x)
    if c.is_one():
        return p
    out = p.exact_div(c)
    assert out is not None
    return out


def _prem(a: Polynomial, b: Polynomial, x: int) -> Polynomial:
    db = b.degree(x)
    lcb = b.coefficient(x, db)
    unit = 1 << (BITS * x)
    r = a
    while r.terms:
        dr = r.degree(x)
        if dr < db:
            break
        lcr = r.coefficient(x, dr)
        shift = (dr - db) * unit
        t = Polynomial(r.ctx, {k + shift: c for k, c in lcr.terms.items()})
        r = lcb * r - t * b
    return r


def _gcd_prs(p: Polynomial, q: Polynomial, shared: set[int]) -> Polynomial:
    x = min(shared, key=lambda i: (max(p.degree(i), q.degree(i)), i))
    cp, cq = _content_in(p, x), _content_in(q, x)
    c = poly_gcd(cp, cq)
    a = p.exact_div(cp)
    b = q.exact_div(cq)
    assert a is not None and b is not None
    if a.degree(x) < b.degree(x):
        a, b = b, a
    while True:
        r = _prem(a, b, x)
        if not r.terms:
            g = b
            break
        if r.degree(x) == 0:
            g = Polynomial.one(p.ctx)
            break
        a, b = b, _primitive_in(r.scale(1 / r.rational_content()), x)
    g = _primitive_in(g, x)
    return (c * g).monic()


def integer_normalize(p: Polynomial, q: Polynomial) -> tuple[Polynomial, Polynomial]:
    """Scale the pair so both have integer coefficients, the joint integer
    content is 1 and ``q`` has a positive leading coefficient."""
    if not p.terms:
        return p, Polynomial.one(p.ctx)
    cp, cq = p.rational_content(), q.rational_content()
    num = gmpy2.gcd(cp.numerator, cq.numerator)
    den = gmpy2.lcm(cp.denominator, cq.denominator)
    s = mpq(den, num)
    if q.leading_coeff() < 0:
        s = -s
    return p.scale(s), q.scale(s)


def poly_from_terms(ctx: VariableContext, items: Iterable[tuple[int, mpq]]) -> Polynomial:
    res: dict[int, mpq] = {}
    for k, c in items:
        v = res.get(k, _ZERO) + c
        if v:
            res[k] = v
        else:
            res.pop(k, None)
    return Polynomial(ctx, res)
