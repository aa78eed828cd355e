"""Levi-Civita connection, Riemann tensor, iterated covariant derivatives and
the scalar invariants built from them.

Conventions: ``R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}``,
``R_{abcd} = g_{ae} R^e_{bcd}`` (so a round sphere has ``R_{1212} > 0``), and
each covariant derivative appends its slot last: ``R_{abcd;ef}`` is
``nabla_f nabla_e R_{abcd}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

from .errors import InvariantViolation, ResourceLimitError, component_cap
from .expr import Polynomial, RationalFunction, VariableContext
from .tensor import (
    DOWN,
    UP,
    Metric,
    Tensor,
    TensorError,
    contract,
    full_contraction,
    raise_lower,
)

Index = tuple[int, ...]


class CurvatureError(ValueError):
    pass


@dataclass(frozen=True)
class Connection:
    """Christoffel symbols ``gamma[a][b][c] = G^a_{bc}`` of a metric."""

    metric: Metric
    gamma: Tensor
    # nonzero (b, c, value) triples per upper index, for sparse contraction
    rows: tuple[tuple[tuple[int, int, RationalFunction], ...], ...] = field(repr=False)

    @property
    def ctx(self) -> VariableContext:
        return self.metric.ctx

    def __getitem__(self, idx: tuple[int, int, int]) -> RationalFunction:
        return self.gamma[idx]


def _zero(ctx):
    return RationalFunction.zero(ctx)


def christoffel(metric: Metric) -> Connection:
    ctx = metric.ctx
    n = metric.dim
    g = metric.rows()
    ginv = metric.inv_rows()
    dg = [[[g[a][b].diff_index(c) for c in range(n)] for b in range(n)] for a in range(n)]
    half = RationalFunction.constant(ctx, "1/2")
    # first kind: G_{dbc} = 1/2 (g_{db,c} + g_{dc,b} - g_{bc,d})
    first = {}
    for d in range(n):
        for b in range(n):
            for c in range(b, n):
                val = dg[d][b][c] + dg[d][c][b] - dg[b][c][d]
                if val:
                    first[d, b, c] = val * half
    comps = {}
    for a in range(n):
        for b in range(n):
            for c in range(b, n):
                total = _zero(ctx)
                for d in range(n):
                    if ginv[a][d]:
                        v = first.get((d, b, c))
                        if v is not None:
                            total = total + ginv[a][d] * v
                if total:
                    comps[a, b, c] = total
                    comps[a, c, b] = total
    gamma = Tensor._raw(ctx, (UP, DOWN, DOWN), comps, "christoffel")
    rows = tuple(
        tuple((b, c, v) for (a2, b, c), v in sorted(comps.items()) if a2 == a) for a in range(n)
    )
    return Connection(metric, gamma, rows)


def riemann(conn: Connection) -> Tensor:
    """Fully covariant Riemann tensor ``R_{abcd}``."""
    ctx = conn.ctx
    n = conn.metric.dim
    G = conn.gamma
    g = conn.metric.rows()
    mixed = {}
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(c + 1, n):
                    val = G[a, d, b].diff_index(c) - G[a, c, b].diff_index(d)
                    for e in range(n):
                        ace, adx = G.components.get((a, c, e)), G.components.get((a, d, e))
                        if ace is not None:
                            edb = G.components.get((e, d, b))
                            if edb is not None:
                                val = val + ace * edb
                        if adx is not None:
                            ecb = G.components.get((e, c, b))
                            if ecb is not None:
                                val = val - adx * ecb
                    if val:
                        mixed[a, b, c, d] = val
                        mixed[a, b, d, c] = -val
    acc: dict[Index, RationalFunction] = {}
    for (e, b, c, d), val in mixed.items():
        for a in range(n):
            if g[a][e]:
                key = (a, b, c, d)
                prod = g[a][e] * val
                acc[key] = acc[key] + prod if key in acc else prod
    comps = {k: v for k, v in acc.items() if v}
    return Tensor._raw(ctx, (DOWN,) * 4, comps, "riemann")


def is_canonical_block(J: Index) -> bool:
    """First four slots ``(a, b, c, d)`` with ``a < b``, ``c < d``, ``(a, b) <= (c, d)``."""
    a, b, c, d = J[0], J[1], J[2], J[3]
    return a < b and c < d and (a < c or (a == c and b <= d))


def expand_riemann_block(canonical: dict[Index, RationalFunction]) -> dict[Index, RationalFunction]:
    """Fill in every component implied by pair antisymmetry and pair exchange."""
    out = {}
    for J, v in canonical.items():
        a, b, c, d = J[:4]
        rest = J[4:]
        neg = -v
        out[J] = v
        out[(b, a, c, d) + rest] = neg
        out[(a, b, d, c) + rest] = neg
        out[(b, a, d, c) + rest] = v
        if (a, b) != (c, d):
            out[(c, d, a, b) + rest] = v
            out[(d, c, a, b) + rest] = neg
            out[(c, d, b, a) + rest] = neg
            out[(d, c, b, a) + rest] = v
    return out


def covariant_derivative(T: Tensor, conn: Connection) -> Tensor:
    """``(nabla T)_{a1..ap c} = d_c T_{a1..ap} - sum_i G^d_{c a_i} T_{..d..}``.

    A tensor flagged ``symmetry="riemann"`` (Riemann symmetries in its first
    four slots) keeps the flag, and only canonical components are computed.
    """
    if any(v != DOWN for v in T.valence):
        raise TensorError("covariant_derivative expects a fully covariant tensor")
    ctx = T.ctx
    n = T.dim
    rows = conn.rows  # rows[d] = ((c, a, G^d_{ca}), ...)
    block = T.symmetry == "riemann" and T.rank >= 4
    acc: dict[Index, RationalFunction] = {}
    get = acc.get
    for J, val in T.components.items():
        canon = not block or is_canonical_block(J)
        if canon:
            for c in range(n):
                dv = val.diff_index(c)
                if dv:
                    key = J + (c,)
                    cur = get(key)
                    acc[key] = dv if cur is None else cur + dv
        for s, d in enumerate(J):
            head, tail = J[:s], J[s + 1 :]
            for c, a, gam in rows[d]:
                key = head + (a,) + tail + (c,)
                if block and not (is_canonical_block(key) if s < 4 else canon):
                    continue
                term = gam * val
                cur = get(key)
                acc[key] = -term if cur is None else cur - term
    comps = {k: v for k, v in acc.items() if v}
    if block:
        comps = expand_riemann_block(comps)
        return Tensor._raw(ctx, T.valence + (DOWN,), comps, "riemann")
    return Tensor._raw(ctx, T.valence + (DOWN,), comps)


# ---------------------------------------------------------------------------
# Identities
# ---------------------------------------------------------------------------


def riemann_symmetry_violations(T: Tensor, limit: int = 10) -> list[str]:
    """Check pair antisymmetry, pair exchange and the first Bianchi identity
    on the first four slots of ``T`` (extra slots ride along)."""
    comps = T.components
    zero = _zero(T.ctx)
    out: list[str] = []

    def get(k):
        return comps.get(k, zero)

    for J, v in comps.items():
        a, b, c, d = J[:4]
        rest = J[4:]
        checks = (
            ((b, a, c, d) + rest, -v, "R_abcd = -R_bacd"),
            ((a, b, d, c) + rest, -v, "R_abcd = -R_abdc"),
            ((c, d, a, b) + rest, v, "R_abcd = R_cdab"),
        )
        for key, want, name in checks:
            if get(key) != want:
                out.append(f"{name} fails at {J}")
        bianchi = v + get((a, c, d, b) + rest) + get((a, d, b, c) + rest)
        if bianchi:
            out.append(f"first Bianchi fails at {J}")
        if len(out) >= limit:
            break
    return out


def second_bianchi_violations(nabla_riem: Tensor, limit: int = 10) -> list[str]:
    """``R_{abcd;e} + R_{abde;c} + R_{abec;d} = 0``."""
    comps = nabla_riem.components
    zero = _zero(nabla_riem.ctx)
    out: list[str] = []
    seen = set()
    for J in comps:
        a, b, c, d, e = J
        key = (a, b) + tuple(sorted((c, d, e)))
        if key in seen:
            continue
        for c2, d2, e2 in ((c, d, e), (c, e, d)):
            s = (
                comps.get((a, b, c2, d2, e2), zero)
                + comps.get((a, b, d2, e2, c2), zero)
                + comps.get((a, b, e2, c2, d2), zero)
            )
            if s:
                out.append(f"second Bianchi fails at {(a, b, c2, d2, e2)}")
        seen.add(key)
        if len(out) >= limit:
            break
    return out


# ---------------------------------------------------------------------------
# Irreducible pieces
# ---------------------------------------------------------------------------


def ricci(riem: Tensor, metric: Metric) -> Tensor:
    """``R_{bd} = R^a_{bad}``."""
    mixed = raise_lower(riem, 0, metric)
    return contract(mixed, 0, 2)


def ricci_scalar(ric: Tensor, metric: Metric) -> RationalFunction:
    return contract(raise_lower(ric, 0, metric), 0, 1)[()]


def traceless_ricci(ric: Tensor, scalar: RationalFunction, metric: Metric) -> Tensor:
    n = metric.dim
    return ric - metric.g.scale(scalar / n)


def weyl(riem: Tensor, ric: Tensor, scalar: RationalFunction, metric: Metric) -> Tensor:
    n = metric.dim
    ctx = riem.ctx
    if n < 3:
        return Tensor(ctx, (DOWN,) * 4)
    g = metric.rows()
    R = ric.matrix()
    c1 = RationalFunction.constant(ctx, 1) / (n - 2)
    c2 = scalar / ((n - 1) * (n - 2))
    comps = {}
    for a, b, c, d in itertools.product(range(n), repeat=4):
        v = riem[a, b, c, d]
        s = R[a][c] * g[b][d] - R[a][d] * g[b][c] - R[b][c] * g[a][d] + R[b][d] * g[a][c]
        if s:
            v = v - c1 * s
        if c2:
            t = g[a][c] * g[b][d] - g[a][d] * g[b][c]
            if t:
                v = v + c2 * t
        if v:
            comps[a, b, c, d] = v
    return Tensor._raw(ctx, (DOWN,) * 4, comps, "riemann")


def _poly_sqrt(p: Polynomial) -> Polynomial | None:
    if not p.terms:
        return p
    lm = p.leading_monomial()
    lc = p.terms[lm]
    import gmpy2

    num, den = int(lc.numerator), int(lc.denominator)
    if num < 0 or not gmpy2.is_square(num) or not gmpy2.is_square(den):
        return None
    exps = []
    m = lm
    while m:
        e = m & 0xFFFF
        if e % 2:
            return None
        exps.append(e // 2)
        m >>= 16
    from gmpy2 import isqrt, mpq

    root_lm = sum(e << (16 * i) for i, e in enumerate(exps))
    s = Polynomial(p.ctx, {root_lm: mpq(isqrt(num), isqrt(den))})
    two_lt = s.terms[root_lm] * 2
    r = p - s * s
    while True:
        if not r.terms:
            return s
        lmr = max(r.terms)
        if lmr < root_lm:
            return None
        q = Polynomial(p.ctx, {lmr: r.terms[lmr]}).exact_div(
            Polynomial(p.ctx, {root_lm: two_lt})
        )
        if q is None:
            return None
        s = s + q
        r = p - s * s


def rational_sqrt(f: RationalFunction) -> RationalFunction | None:
    n, d = _poly_sqrt(f.num), _poly_sqrt(f.den)
    if n is None or d is None:
        return None
    return RationalFunction.make(n, d)


def volume_form(metric: Metric) -> Tensor:
    ctx = metric.ctx
    det = metric.det
    root = rational_sqrt(det) or rational_sqrt(-det)
    if root is None:
        raise CurvatureError("sqrt|det g| is not a rational function; volume form unavailable")
    n = metric.dim
    comps = {}
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        comps[perm] = root if inv % 2 == 0 else -root
    return Tensor._raw(ctx, (DOWN,) * n, comps)


def hodge_left(C: Tensor, metric: Metric, eps: Tensor | None = None) -> Tensor:
    """``(*C)_{abcd} = 1/2 eps_{ab}^{ef} C_{efcd}`` on the first bivector pair."""
    eps = eps if eps is not None else volume_form(metric)
    up = raise_lower(raise_lower(C, 0, metric), 1, metric)  # C^{ef}_{cd}
    half = RationalFunction.constant(C.ctx, "1/2")
    acc: dict[Index, RationalFunction] = {}
    n = metric.dim
    for (e, f, c, d), val in up.components.items():
        for a in range(n):
            for b in range(n):
                ev = eps.components.get((a, b, e, f))
                if ev is not None:
                    key = (a, b, c, d)
                    term = ev * val
                    acc[key] = acc[key] + term if key in acc else term
    comps = {k: v * half for k, v in acc.items() if v}
    return Tensor._raw(C.ctx, (DOWN,) * 4, comps)


def _is_neutral_4d(metric: Metric) -> bool:
    return metric.dim == 4 and metric.ctx.signature == (2, 0)


# ---------------------------------------------------------------------------
# The stack
# ---------------------------------------------------------------------------


@dataclass
class CurvatureStack:
    metric: Metric
    connection: Connection
    nabla: list[Tensor]  # nabla[j] = nabla^(j) Riem, fully covariant
    ricci: Tensor
    scalar: RationalFunction
    traceless_ricci: Tensor
    weyl: Tensor
    weyl_plus: Tensor | None = None
    weyl_minus: Tensor | None = None
    notes: list[str] = field(default_factory=list)
    _norms: dict[int, RationalFunction] = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return len(self.nabla) - 1

    @property
    def riemann(self) -> Tensor:
        return self.nabla[0]

    @property
    def ctx(self) -> VariableContext:
        return self.metric.ctx

    def scalar_entries(self) -> int:
        n = self.metric.dim
        return sum(n ** t.rank for t in self.nabla)


def stack_size(dim: int, order: int) -> int:
    """Dense scalar-entry count of Riem, ..., nabla^(order) Riem."""
    return sum(dim ** (4 + j) for j in range(order + 1))


def build_stack(metric: Metric, order: int, cap: int | None = None, audit: bool = True) -> CurvatureStack:
    if order < 0:
        raise ValueError("order must be non-negative")
    cap = component_cap() if cap is None else cap
    size = stack_size(metric.dim, order)
    if size > cap:
        raise ResourceLimitError(
            f"stack to order {order} in dimension {metric.dim} needs {size} scalar entries "
            f"(cap {cap}; set VSI_COMPONENT_CAP to raise it)"
        )
    conn = christoffel(metric)
    riem = riemann(conn)
    nabla = [riem]
    for _ in range(order):
        nabla.append(covariant_derivative(nabla[-1], conn))
    ric = ricci(riem, metric)
    R = ricci_scalar(ric, metric)
    S = traceless_ricci(ric, R, metric)
    C = weyl(riem, ric, R, metric)
    stack = CurvatureStack(metric, conn, nabla, ric, R, S, C)
    if _is_neutral_4d(metric):
        try:
            stack.weyl_plus, stack.weyl_minus = _split(C, metric)
        except CurvatureError as exc:
            stack.notes.append(str(exc))
    if audit:
        audit_stack(stack)
    return stack


def audit_stack(stack: CurvatureStack) -> None:
    """Raise ``InvariantViolation`` if any exact identity fails."""
    problems: list[str] = []
    for j, T in enumerate(stack.nabla):
        problems += [f"order {j}: {p}" for p in riemann_symmetry_violations(T)]
    if stack.order >= 1:
        problems += second_bianchi_violations(stack.nabla[1])
    S = stack.traceless_ricci
    trace = ricci_scalar(S, stack.metric)
    if trace:
        problems.append("traceless Ricci has nonzero trace")
    if stack.weyl_plus is not None and stack.weyl_plus + stack.weyl_minus != stack.weyl:
        problems.append("W+ + W- != Weyl")
    if problems:
        raise InvariantViolation("; ".join(problems[:10]))


def _split(C: Tensor, metric: Metric) -> tuple[Tensor, Tensor]:
    star = hodge_left(C, metric)
    half = RationalFunction.constant(C.ctx, "1/2")
    return (C + star).scale(half), (C - star).scale(half)


def weyl_split(stack: CurvatureStack) -> tuple[Tensor, Tensor]:
    """Self-dual and anti-self-dual Weyl parts, ``W+ + W- = C``, ``*W+- = +-W+-``."""
    if not _is_neutral_4d(stack.metric):
        raise CurvatureError("the Weyl split is implemented for 4D neutral signature only")
    if stack.weyl_plus is None:
        stack.weyl_plus, stack.weyl_minus = _split(stack.weyl, stack.metric)
    return stack.weyl_plus, stack.weyl_minus


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------


def self_norm_invariant(stack: CurvatureStack, j: int) -> RationalFunction:
    """Full metric contraction of ``nabla^(j) Riem`` with itself."""
    if not 0 <= j <= stack.order:
        raise ValueError(f"order {j} not in the stack (built to {stack.order})")
    if j not in stack._norms:
        T = stack.nabla[j]
        stack._norms[j] = full_contraction(T, T, stack.metric)
    return stack._norms[j]


def ricci_operator(stack: CurvatureStack) -> list[list[RationalFunction]]:
    """Matrix of ``R^a_b``."""
    return raise_lower(stack.ricci, 0, stack.metric).matrix()


def bivector_pairs(n: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


def bivector_operator(stack: CurvatureStack) -> list[list[RationalFunction]]:
    """Matrix of ``R^{ab}_{cd}`` on the basis ``{e_a ^ e_b : a < b}``."""
    m = stack.metric
    up = raise_lower(raise_lower(stack.riemann, 0, m), 1, m)
    pairs = bivector_pairs(m.dim)
    return [[up[a, b, c, d] for (c, d) in pairs] for (a, b) in pairs]


def mat_mul(A, B, ctx):
    n, m, p = len(A), len(B), len(B[0]) if B else 0
    zero = RationalFunction.zero(ctx)
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            s = zero
            for k in range(m):
                if A[i][k] and B[k][j]:
                    s = s + A[i][k] * B[k][j]
            row.append(s)
        out.append(row)
    return out


def trace_powers(M, p_max: int, ctx: VariableContext) -> list[RationalFunction]:
    out = []
    P = M
    for p in range(1, p_max + 1):
        if p > 1:
            P = mat_mul(P, M, ctx)
        t = RationalFunction.zero(ctx)
        for i in range(len(M)):
            if P[i][i]:
                t = t + P[i][i]
        out.append(t)
    return out


def operator_invariants(
    stack: CurvatureStack, p_max: int | None = None
) -> list[tuple[str, RationalFunction]]:
    """``tr(M^p)`` for the Ricci operator and the Riemann bivector operator.

    With ``p_max`` unset, powers run up to each operator's size, which by
    Newton's identities decides nilpotency.
    """
    ctx = stack.ctx
    out = []
    ric = ricci_operator(stack)
    for p, t in enumerate(trace_powers(ric, p_max or len(ric), ctx), start=1):
        out.append((f"tr(Ric^{p})", t))
    biv = bivector_operator(stack)
    for p, t in enumerate(trace_powers(biv, p_max or len(biv), ctx), start=1):
        out.append((f"tr(Riem^{p})", t))
    return out


def witness_invariants(stack: CurvatureStack, j: int) -> list[tuple[str, int, RationalFunction]]:
    """The finite refutation family for order ``j``: ``(id, order, value)``."""
    out = [(f"self_norm({i})", i, self_norm_invariant(stack, i)) for i in range(j + 1)]
    out += [(name, 0, v) for name, v in operator_invariants(stack)]
    return out


def iter_nonzero(values: Iterable[tuple[str, int, RationalFunction]]):
    return [(name, order, v) for name, order, v in values if v]
