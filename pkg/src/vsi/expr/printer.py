"""Render polynomials and rational functions in the input grammar.

Output always re-parses to the same value. Two grammar quirks shape it: a
leading ``-`` binds tighter than ``^`` (so ``-v^2`` means ``(-v)^2``), and a
literal ``p/q`` is one token (so a rational coefficient is printed first).
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .poly import Polynomial
    from .rational import RationalFunction


def _format_coeff(c) -> str:
    n, d = int(c.numerator), int(c.denominator)
    return str(n) if d == 1 else f"{n}/{d}"


def _format_monomial(exps, names) -> list[str]:
    out = []
    for e, name in zip(exps, names):
        if e == 1:
            out.append(name)
        elif e:
            out.append(f"{name}^{e}")
    return out


def format_polynomial(p: Polynomial) -> str:
    if not p.terms:
        return "0"
    names = [s.name for s in p.ctx.symbols]
    pieces: list[str] = []
    for idx, (exps, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        mag = -c if neg else c
        factors = _format_monomial(exps, names)
        if mag != 1 or not factors:
            factors.insert(0, _format_coeff(mag))
        body = "*".join(factors)
        if idx == 0:
            if neg:
                # "-v^2" would parse as (-v)^2
                if "^" in factors[0]:
                    body = "1*" + body
                pieces.append("-" + body)
            else:
                pieces.append(body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    return "".join(pieces)


def _is_single_factor(p: Polynomial) -> bool:
    if len(p.terms) != 1:
        return False
    ((exps, c),) = p.sorted_terms()
    if c != 1:
        return False
    return sum(1 for e in exps if e) == 1


def format_rational(f: RationalFunction) -> str:
    num = format_polynomial(f.num)
    if f.den.is_one():
        return num
    den = format_polynomial(f.den)
    if len(f.num.terms) > 1:
        num = f"({num})"
    if not _is_single_factor(f.den):
        den = f"({den})"
    return f"{num}/{den}"
