"""Point-wise cross-check of a curvature stack.

At each sample point the metric jet (values, first and second derivatives) is
evaluated exactly, and the Christoffel symbols, Riemann tensor, Ricci and
bivector operators are rebuilt with plain rational arithmetic.  Higher members
are rebuilt one step at a time: ``nabla^(j)`` at the point is the derivative of
the symbolic member ``j-1`` evaluated there, corrected with the point values of
the Christoffel symbols.  Every scalar invariant is then contracted with the
inverse metric at the point and compared with the symbolic invariant evaluated
at the same point.  "Numeric" means exact rationals at a point, never floats.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from gmpy2 import mpq

from .curvature import CurvatureStack, operator_invariants, self_norm_invariant
from .expr import Polynomial, RationalFunction, VariableContext
from .expr.errors import PoleError

Point = tuple  # values of every context variable, coordinates first


@dataclass(frozen=True)
class SamplePlan:
    seed: int = 0
    points: int = 20
    low: int = -3
    high: int = 3
    denominator: int = 4
    retries: int = 50
    fixed: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.points < 0 or self.retries < 1 or self.denominator < 1 or self.low > self.high:
            raise ValueError(f"invalid sample plan {self}")


@dataclass
class Mismatch:
    point: dict[str, Fraction]
    quantity: str
    symbolic: Fraction
    numeric: Fraction

    def __str__(self) -> str:
        return f"{self.quantity} at {self.point}: symbolic {self.symbolic}, point-wise {self.numeric}"


@dataclass
class OracleReport:
    points: list[dict[str, Fraction]] = field(default_factory=list)
    # point-wise scalar invariants, one mapping per point
    invariants: list[dict[str, Fraction]] = field(default_factory=list)
    comparisons: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {
            "points": [{k: str(v) for k, v in p.items()} for p in self.points],
            "invariants": [{k: str(v) for k, v in p.items()} for p in self.invariants],
            "comparisons": self.comparisons,
            "mismatches": [
                {
                    "point": {k: str(v) for k, v in m.point.items()},
                    "quantity": m.quantity,
                    "symbolic": str(m.symbolic),
                    "numeric": str(m.numeric),
                }
                for m in self.mismatches
            ],
            "problems": list(self.problems),
        }


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _denominators(stack: CurvatureStack) -> set[Polynomial]:
    dens = set()
    m = stack.metric
    for row in m.rows() + m.inv_rows():
        for f in row:
            dens.add(f.den)
    dens.add(m.det.num)
    for T in stack.nabla:
        for f in T.components.values():
            dens.add(f.den)
    return {d for d in dens if not d.is_constant()}


def _resolve_fixed(ctx: VariableContext, fixed: Mapping[str, object]) -> dict[int, mpq]:
    out = {}
    for name, val in fixed.items():
        idx = ctx.index(name)
        out[idx] = mpq(Fraction(str(val)) if isinstance(val, str) else Fraction(val))
    return out


def sample_points(stack: CurvatureStack, plan: SamplePlan) -> tuple[list[Point], list[str]]:
    """``plan.points`` points avoiding every denominator; unfilled slots are
    reported rather than raised."""
    ctx = stack.ctx
    rng = random.Random(plan.seed)
    fixed = _resolve_fixed(ctx, plan.fixed)
    dens = _denominators(stack)
    d = plan.denominator
    out, problems = [], []
    for i in range(plan.points):
        for _ in range(plan.retries):
            pt = tuple(
                fixed[v] if v in fixed else mpq(rng.randint(plan.low * d, plan.high * d), d)
                for v in range(ctx.nvars)
            )
            if all(q.evaluate(pt) for q in dens):
                out.append(pt)
                break
        else:
            problems.append(f"point {i}: no pole-free sample after {plan.retries} tries")
    return out, problems


# ---------------------------------------------------------------------------
# Point-wise rebuild
# ---------------------------------------------------------------------------


def _inverse(M: list[list[mpq]]) -> list[list[mpq]] | None:
    n = len(M)
    A = [list(row) + [mpq(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col]), None)
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [x / p for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [row[n:] for row in A]


@dataclass
class PointGeometry:
    g: list[list[mpq]]
    ginv: list[list[mpq]]
    gamma: list  # gamma[a][b][c] = G^a_{bc}
    riemann: dict[tuple, mpq]


def point_geometry(stack: CurvatureStack, pt: Point) -> PointGeometry:
    m = stack.metric
    n = m.dim
    rows = m.rows()
    g = [[rows[a][b].evaluate_values(pt) for b in range(n)] for a in range(n)]
    dg = [[[rows[a][b].diff_index(c).evaluate_values(pt) for c in range(n)] for b in range(n)] for a in range(n)]
    ddg = [
        [[[rows[a][b].diff_index(c).diff_index(e).evaluate_values(pt) for e in range(n)] for c in range(n)] for b in range(n)]
        for a in range(n)
    ]
    ginv = _inverse(g)
    if ginv is None:
        raise PoleError("metric is degenerate at the sample point")
    R = range(n)
    half = mpq(1, 2)
    low = [[[half * (dg[d][b][c] + dg[d][c][b] - dg[b][c][d]) for c in R] for b in R] for d in R]
    dlow = [
        [[[half * (ddg[d][b][c][e] + ddg[d][c][b][e] - ddg[b][c][d][e]) for e in R] for c in R] for b in R]
        for d in R
    ]
    gam = [[[sum(ginv[a][d] * low[d][b][c] for d in R) for c in R] for b in R] for a in R]
    # d_e g^{ad} = -g^{af} (d_e g_{fh}) g^{hd}
    dginv = [
        [[-sum(ginv[a][f] * dg[f][h][e] * ginv[h][d] for f in R for h in R) for e in R] for d in R]
        for a in R
    ]
    dgam = [
        [
            [
                [sum(dginv[a][d][e] * low[d][b][c] + ginv[a][d] * dlow[d][b][c][e] for d in R) for e in R]
                for c in R
            ]
            for b in R
        ]
        for a in R
    ]
    mixed = {}
    for a in R:
        for b in R:
            for c in R:
                for d in R:
                    v = dgam[a][d][b][c] - dgam[a][c][b][d]
                    v += sum(gam[a][c][e] * gam[e][d][b] - gam[a][d][e] * gam[e][c][b] for e in R)
                    if v:
                        mixed[a, b, c, d] = v
    riem = {}
    for (e, b, c, d), v in mixed.items():
        for a in R:
            if g[a][e]:
                key = (a, b, c, d)
                riem[key] = riem.get(key, 0) + g[a][e] * v
    return PointGeometry(g, ginv, gam, {k: v for k, v in riem.items() if v})


def point_derivative(stack: CurvatureStack, j: int, geo: PointGeometry, pt: Point) -> dict[tuple, mpq]:
    """``nabla^(j) Riem`` at the point, from the symbolic member ``j-1``."""
    prev = stack.nabla[j - 1].components
    n = stack.metric.dim
    vals = {J: f.evaluate_values(pt) for J, f in prev.items()}
    gam = geo.gamma
    out: dict[tuple, mpq] = {}
    for J, f in prev.items():
        for c in range(n):
            dv = f.diff_index(c)
            if dv:
                out[J + (c,)] = out.get(J + (c,), 0) + dv.evaluate_values(pt)
    for J, v in vals.items():
        for s, d in enumerate(J):
            head, tail = J[:s], J[s + 1 :]
            for c in range(n):
                for a in range(n):
                    gv = gam[d][c][a]
                    if gv:
                        key = head + (a,) + tail + (c,)
                        out[key] = out.get(key, 0) - gv * v
    return {k: v for k, v in out.items() if v}


def _raise_all(T: dict[tuple, mpq], ginv) -> dict[tuple, mpq]:
    n = len(ginv)
    cur = T
    rank = len(next(iter(T))) if T else 0
    for s in range(rank):
        nxt: dict[tuple, mpq] = {}
        for J, v in cur.items():
            d = J[s]
            for a in range(n):
                gv = ginv[a][d]
                if gv:
                    key = J[:s] + (a,) + J[s + 1 :]
                    nxt[key] = nxt.get(key, 0) + gv * v
        cur = nxt
    return cur


def point_self_norm(T: dict[tuple, mpq], ginv) -> mpq:
    up = _raise_all(T, ginv)
    return sum((v * up[J] for J, v in T.items() if J in up), mpq(0))


def _trace_powers(M, count: int) -> list[mpq]:
    n = len(M)
    out, P = [], M
    for p in range(count):
        if p:
            P = [[sum(P[i][k] * M[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        out.append(sum((P[i][i] for i in range(n)), mpq(0)))
    return out


def point_operator_invariants(geo: PointGeometry) -> dict[str, mpq]:
    n = len(geo.g)
    R = range(n)
    riem, ginv = geo.riemann, geo.ginv
    ric = [[sum(ginv[a][e] * riem.get((e, b, a, d), 0) for a in R for e in R) for d in R] for b in R]
    ric_op = [[sum(ginv[a][c] * ric[c][b] for c in R) for b in R] for a in R]
    up = _raise_all(riem, ginv) if riem else {}
    # lower the last two slots again: R^{ab}_{cd}
    mixed: dict[tuple, mpq] = {}
    for (a, b, e, f), v in up.items():
        for c in R:
            if geo.g[c][e]:
                for d in R:
                    if geo.g[d][f]:
                        key = (a, b, c, d)
                        mixed[key] = mixed.get(key, 0) + geo.g[c][e] * geo.g[d][f] * v
    pairs = [(a, b) for a in R for b in range(a + 1, n)]
    biv = [[mixed.get((a, b, c, d), mpq(0)) for (c, d) in pairs] for (a, b) in pairs]
    out = {}
    for p, t in enumerate(_trace_powers(ric_op, n), start=1):
        out[f"tr(Ric^{p})"] = t
    for p, t in enumerate(_trace_powers(biv, len(pairs)), start=1):
        out[f"tr(Riem^{p})"] = t
    return out


# ---------------------------------------------------------------------------
# The check
# ---------------------------------------------------------------------------


def _named(ctx: VariableContext, pt: Point) -> dict[str, Fraction]:
    return {s.name: Fraction(int(v.numerator), int(v.denominator)) for s, v in zip(ctx.symbols, pt)}


def check_point(stack: CurvatureStack, pt: Point, report: OracleReport, max_order: int | None = None) -> None:
    ctx = stack.ctx
    top = stack.order if max_order is None else min(max_order, stack.order)
    named = _named(ctx, pt)
    report.points.append(named)
    scalars: dict[str, Fraction] = {}
    report.invariants.append(scalars)

    def compare(name, sym: RationalFunction, num, scalar=False):
        report.comparisons += 1
        if scalar:
            scalars[name] = Fraction(str(num))
        s = sym.evaluate_values(pt)
        if s != num:
            report.mismatches.append(Mismatch(named, name, Fraction(str(s)), Fraction(str(num))))

    geo = point_geometry(stack, pt)
    members = [geo.riemann]
    for j in range(1, top + 1):
        members.append(point_derivative(stack, j, geo, pt))
    for j, comps in enumerate(members):
        compare(f"self_norm({j})", self_norm_invariant(stack, j), point_self_norm(comps, geo.ginv), True)
        sym = stack.nabla[j].components
        for J in set(sym) | set(comps):
            f = sym.get(J)
            if f is None:
                f = RationalFunction.zero(ctx)
            compare(f"nabla^{j} Riem{J}", f, comps.get(J, 0))
    numeric_ops = point_operator_invariants(geo)
    for name, val in operator_invariants(stack):
        compare(name, val, numeric_ops[name], True)


def cross_check(
    stack: CurvatureStack,
    plan: SamplePlan | None = None,
    points: Sequence[Mapping[str, object]] | None = None,
    max_order: int | None = None,
) -> OracleReport:
    """Compare the symbolic stack with its point-wise rebuild.

    Either sample ``plan.points`` pole-free points or use the explicit
    ``points`` (mappings from every variable name to a rational).
    """
    ctx = stack.ctx
    report = OracleReport()
    if points is not None:
        pts = []
        for p in points:
            vals = _resolve_fixed(ctx, p)
            missing = [s.name for i, s in enumerate(ctx.symbols) if i not in vals]
            if missing:
                raise ValueError(f"point {dict(p)} misses {', '.join(missing)}")
            pts.append(tuple(vals[i] for i in range(ctx.nvars)))
    else:
        pts, report.problems = sample_points(stack, plan or SamplePlan())
    for pt in pts:
        try:
            check_point(stack, pt, report, max_order)
        except PoleError as exc:
            report.problems.append(f"{_named(ctx, pt)}: {exc}")
    return report


def cross_check_instance(instance, stack: CurvatureStack, plan: SamplePlan | None = None, **kw) -> OracleReport:
    """``cross_check`` for a catalog instance (the stack must be built from it)."""
    if stack.metric is not instance.metric and stack.metric.ctx != instance.ctx:
        raise ValueError("stack was not built for this instance")
    return cross_check(stack, plan, **kw)
