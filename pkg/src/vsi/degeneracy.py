"""Boost-weight conditions, separating directions and the VSI verdict.

A support set is the set of boost weights carrying a nonzero component. A
strict separating direction is a rational ``lam`` with ``b . lam < 0`` for
every occurring ``b``; its existence for the whole curvature direct sum up to
order ``j`` certifies that every invariant built from those tensors vanishes.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .curvature import CurvatureStack, build_stack, mat_mul, witness_invariants
from .errors import InvariantViolation
from .expr import RationalFunction
from .frame import (
    CONVENTION,
    BWDecomposition,
    FrameError,
    NullFrame,
    bw_decompose,
    decompose_components,
    frame_components,
    frame_self_norm,
    validate_frame,
)
from .tensor import Metric, Tensor, contract, raise_lower, tensor_product

BoostWeight = tuple[int, ...]


# ---------------------------------------------------------------------------
# B conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BConditions:
    b: tuple[bool, ...]  # b[i] is condition B(i+1)
    n: bool

    @property
    def s_level(self) -> int:
        """Largest ``i`` with B1..Bi all true (``S_i``); 0 if B1 fails."""
        level = 0
        for ok in self.b:
            if not ok:
                break
            level += 1
        return level


def b_conditions_on(support: Iterable[Sequence[int]], k: int) -> BConditions:
    support = [tuple(b) for b in support]
    conds = []
    for i in range(k):
        ok = True
        for b in support:
            if all(x == 0 for x in b[:i]) and b[i] > 0:
                ok = False
                break
        conds.append(ok)
    has_zero = any(all(x == 0 for x in b) for b in support)
    return BConditions(tuple(conds), all(conds) and not has_zero)


def check_B_conditions(dec: BWDecomposition) -> BConditions:
    return b_conditions_on(dec.support(), dec.frame.k)


# ---------------------------------------------------------------------------
# Separating directions
# ---------------------------------------------------------------------------


class Strictness(enum.Enum):
    STRICT = "strict"
    WEAK = "weak"


@dataclass(frozen=True)
class SeparatingDirection:
    lam: tuple[Fraction, ...]
    strictness: Strictness

    def as_ints(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self.lam)

    def certifies(self, support: Iterable[Sequence[int]]) -> bool:
        for b in support:
            d = sum(Fraction(x) * y for x, y in zip(b, self.lam))
            if d > 0 or (d == 0 and self.strictness is Strictness.STRICT):
                return False
        return any(self.lam)


# An inequality sum(a_i x_i) <= c is stored as (primitive int tuple a, Fraction c).
Row = tuple[tuple[int, ...], Fraction]


def _normalize(a: Sequence[int], c) -> Row:
    g = 0
    for x in a:
        g = math.gcd(g, x)
    if g == 0:
        return tuple(a), Fraction(c)
    return tuple(x // g for x in a), Fraction(c) / g


def _tighten(rows: Iterable[Row]) -> list[Row]:
    """Keep the tightest of every set of parallel rows."""
    best: dict[tuple[int, ...], Fraction] = {}
    for a, c in rows:
        cur = best.get(a)
        if cur is None or c < cur:
            best[a] = c
    return list(best.items())


def _eliminate(rows: list[Row], j: int) -> list[Row]:
    pos, neg, rest = [], [], []
    for a, c in rows:
        (pos if a[j] > 0 else neg if a[j] < 0 else rest).append((a, c))
    out = list(rest)
    for ap, cp in pos:
        for an, cn in neg:
            sp, sn = -an[j], ap[j]  # positive multipliers
            a = tuple(sp * x + sn * y for x, y in zip(ap, an))
            out.append(_normalize(a, sp * cp + sn * cn))
    # drop trivially true rows, keep contradictions for the final check
    return [r for r in _tighten(out) if any(r[0]) or r[1] < 0]


def _pick(lo: Fraction | None, hi: Fraction | None) -> Fraction:
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return min(Fraction(0), Fraction(math.floor(hi)))
    if hi is None:
        return max(Fraction(0), Fraction(math.ceil(lo)))
    if lo <= 0 <= hi:
        return Fraction(0)
    c = Fraction(math.ceil(lo))
    if c <= hi:
        return c if lo > 0 else Fraction(math.floor(hi))
    return (lo + hi) / 2


def fourier_motzkin(rows: list[Row], k: int) -> tuple[Fraction, ...] | None:
    """A rational solution of ``A x <= c`` or None if infeasible (exact)."""
    stages = [_tighten(_normalize(a, c) for a, c in rows)]
    for j in range(k - 1, -1, -1):
        stages.append(_eliminate(stages[-1], j))
    if any(c < 0 for a, c in stages[-1] if not any(a)):
        return None
    x = [Fraction(0)] * k
    # stages[k - 1 - j] involves x_0..x_j only
    for j in range(k):
        lo = hi = None
        for a, c in stages[k - 1 - j]:
            if a[j] == 0:
                continue
            rhs = c - sum(a[i] * x[i] for i in range(j))
            bound = rhs / a[j]
            if a[j] > 0:
                hi = bound if hi is None else min(hi, bound)
            else:
                lo = bound if lo is None else max(lo, bound)
        if lo is not None and hi is not None and lo > hi:
            raise InvariantViolation("Fourier-Motzkin back substitution found an empty interval")
        x[j] = _pick(lo, hi)
    return tuple(x)


def _primitive(v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    g = g or 1
    return tuple(Fraction(x // g) for x in ints)


def _support_k(S: Iterable[Sequence[int]], k: int | None) -> tuple[list[BoostWeight], int]:
    S = sorted({tuple(int(x) for x in b) for b in S})
    if k is None:
        if not S:
            raise ValueError("cannot infer k from an empty support set; pass k")
        k = len(S[0])
    if any(len(b) != k for b in S):
        raise ValueError("boost weights of inconsistent length")
    return S, k


def solve_inequalities(M: Sequence[Sequence[int]], h: Sequence[int], k: int) -> tuple[Fraction, ...] | None:
    """Exact rational ``x`` with ``M x <= h`` (``h`` entries 0 or negative), or None.

    Works on the Farkas dual ``y >= 0, M^T y = 0, -h.y = 1``, which has only
    ``k + 1`` rows: a Phase-I simplex (Bland's rule) either finds ``y``, proving
    the system infeasible, or stops with simplex multipliers ``(x', mu)``,
    ``mu > 0``, and ``x = x' / mu`` solves the original system.
    """
    n = len(M)
    rows = k + 1
    # columns 0..n-1 original, n..n+rows-1 artificial, last is the right-hand side
    T = []
    for r in range(rows):
        row = [Fraction(M[j][r]) if r < k else Fraction(-h[j]) for j in range(n)]
        row += [Fraction(int(r == a)) for a in range(rows)]
        row.append(Fraction(int(r == k)))
        T.append(row)
    basis = [n + r for r in range(rows)]
    width = n + rows
    while True:
        # reduced costs of Phase I: c_j - sum over artificial basics
        enter = None
        for j in range(width):
            if j in basis:
                continue
            cost = (1 if j >= n else 0) - sum(T[i][j] for i in range(rows) if basis[i] >= n)
            if cost < 0:
                enter = j
                break
        if enter is None:
            break
        leave = None
        best = None
        for i in range(rows):
            if T[i][enter] > 0:
                ratio = T[i][-1] / T[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # unbounded cannot happen in Phase I
            raise InvariantViolation("Phase-I simplex reported an unbounded ray")
        pv = T[leave][enter]
        T[leave] = [x / pv for x in T[leave]]
        for i in range(rows):
            if i != leave and T[i][enter]:
                f = T[i][enter]
                T[i] = [x - f * y for x, y in zip(T[i], T[leave])]
        basis[leave] = enter
    w = sum(T[i][-1] for i in range(rows) if basis[i] >= n)
    if w == 0:
        return None
    pi = [sum(T[i][n + r] for i in range(rows) if basis[i] >= n) for r in range(rows)]
    mu = pi[k]
    return tuple(x / mu for x in pi[:k])


def find_separating_direction(
    S: Iterable[Sequence[int]], strict: bool = True, k: int | None = None, method: str = "simplex"
) -> SeparatingDirection | None:
    """Exact search for ``lam`` with ``b.lam < 0`` (strict) or ``b.lam <= 0``,
    ``lam != 0`` (weak) over all ``b`` in ``S``.

    ``method`` picks the exact solver: ``"simplex"`` (default) or ``"fm"``
    (Fourier-Motzkin elimination, fine for small supports).
    """
    S, k = _support_k(S, k)
    strength = Strictness.STRICT if strict else Strictness.WEAK
    if method == "simplex":
        solve = lambda rows: solve_inequalities([a for a, _ in rows], [c for _, c in rows], k)  # noqa: E731
    elif method == "fm":
        solve = lambda rows: fourier_motzkin(rows, k)  # noqa: E731
    else:
        raise ValueError(f"unknown method {method!r}")
    if strict:
        if any(not any(b) for b in S):
            return None
        if not S:
            return SeparatingDirection(tuple(Fraction(int(i == 0)) for i in range(k)), strength)
        sol = solve([(b, -1) for b in S])
        if sol is None:
            return None
        found = SeparatingDirection(_primitive(sol), strength)
    else:
        found = None
        base = [(b, 0) for b in S]
        for i in range(k):
            for s in (1, -1):
                # s * lam_i >= 1
                e = tuple(-s * int(t == i) for t in range(k))
                sol = solve(base + [(e, -1)])
                if sol is not None:
                    found = SeparatingDirection(_primitive(sol), strength)
                    break
            if found:
                break
        if found is None:
            return None
    if not found.certifies(S):
        raise InvariantViolation(f"separating direction {found.lam} does not certify {S}")
    return found


def _nullspace_vector(rows: list[BoostWeight], k: int) -> tuple[Fraction, ...] | None:
    """Spanning vector of the nullspace of ``rows`` if it is one-dimensional."""
    m = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for col in range(k):
        p = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][col]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(k) if c not in pivots]
    if len(free) != 1:
        return None
    f = free[0]
    v = [Fraction(0)] * k
    v[f] = Fraction(1)
    for i, pc in enumerate(pivots):
        v[pc] = -m[i][f]
    return tuple(v)


def enumerate_separating_direction(
    S: Iterable[Sequence[int]], strict: bool = True, k: int | None = None
) -> SeparatingDirection | None:
    """Brute-force candidate search, meant for small ``k`` as a cross-check.

    Candidates are the normals of every ``k-1`` subset of the support plus
    coordinate axes, the support vectors, the axes, and (for the strict case)
    the sum of all weakly feasible candidates.
    """
    S, k = _support_k(S, k)
    strength = Strictness.STRICT if strict else Strictness.WEAK
    axes = [tuple(int(i == j) for i in range(k)) for j in range(k)]
    cands: set[tuple[Fraction, ...]] = set()
    for sub in itertools.combinations(S + axes, k - 1):
        v = _nullspace_vector(list(sub), k) if k > 1 else None
        if v is not None:
            cands.add(v)
    for v in S + axes:
        cands.add(tuple(Fraction(x) for x in v))
    cands |= {tuple(-x for x in v) for v in cands}
    cands.discard(tuple([Fraction(0)] * k))

    def dots(v):
        return [sum(Fraction(x) * y for x, y in zip(b, v)) for b in S]

    weak = [v for v in sorted(cands) if all(d <= 0 for d in dots(v))]
    if not strict:
        return SeparatingDirection(_primitive(weak[0]), strength) if weak else None
    if not S:
        return SeparatingDirection(_primitive(tuple(Fraction(x) for x in axes[0])), strength)
    pool = list(weak)
    if weak:
        pool.append(tuple(sum(v[i] for v in weak) for i in range(k)))
    for v in pool:
        if any(v) and all(d < 0 for d in dots(v)):
            return SeparatingDirection(_primitive(v), strength)
    return None


# ---------------------------------------------------------------------------
# Nilpotency
# ---------------------------------------------------------------------------


def nilpotency_check(M: Sequence[Sequence[RationalFunction]], d: int | None = None) -> bool:
    """True iff ``M^d == 0`` exactly."""
    d = len(M) if d is None else d
    if not M:
        return True
    if any(len(row) != len(M) for row in M):
        raise ValueError("operator must be square")
    ctx = next(x for row in M for x in row).ctx
    P = [list(r) for r in M]
    for _ in range(d - 1):
        if not any(x for row in P for x in row):
            return True
        P = mat_mul(P, M, ctx)
    return not any(x for row in P for x in row)


# ---------------------------------------------------------------------------
# VSI verdict
# ---------------------------------------------------------------------------


class Status(enum.Enum):
    CERTIFIED = "certified"
    REFUTED = "refuted"
    INCONCLUSIVE = "inconclusive"


@dataclass
class OrderVerdict:
    order: int
    status: Status
    direction: SeparatingDirection | None = None
    witness: str | None = None
    witness_value: RationalFunction | None = None
    support: list[BoostWeight] = field(default_factory=list)


CAVEATS = (
    "certification uses one strict direction for the joint support of orders 0..j in the supplied frame",
    "an inconclusive order means no strict direction exists in this frame and the finite witness family vanishes; another frame may still certify it",
    "results hold up to the computed order only",
)


@dataclass
class VSIVerdict:
    orders: list[OrderVerdict]
    convention: str = CONVENTION
    caveats: tuple[str, ...] = CAVEATS
    decompositions: list[BWDecomposition] = field(default_factory=list, repr=False)

    @property
    def max_order(self) -> int:
        return len(self.orders) - 1

    def highest_certified(self) -> int | None:
        """Largest ``j`` such that orders ``0..j`` are all certified."""
        best = None
        for v in self.orders:
            if v.status is not Status.CERTIFIED:
                break
            best = v.order
        return best

    def first_refuted(self) -> OrderVerdict | None:
        return next((v for v in self.orders if v.status is Status.REFUTED), None)

    def summary(self) -> str:
        hc = self.highest_certified()
        fr = self.first_refuted()
        parts = []
        if hc is not None:
            parts.append(f"VSI_{hc}")
        if fr is not None:
            parts.append(f"not VSI_{fr.order}")
        if not parts:
            parts.append("inconclusive")
        return ", ".join(parts)


def stack_decompositions(stack: CurvatureStack, frame: NullFrame) -> list[BWDecomposition]:
    """Decompose every member, projecting each onto the frame once.

    The frame must be validated against the stack metric: the self-norms are
    then read off the frame components and cached on the stack, which is far
    cheaper than contracting coordinate components with the inverse metric.
    """
    decs = []
    for j, T in enumerate(stack.nabla):
        table = frame_components(T, frame)
        stack._norms.setdefault(j, frame_self_norm(table))
        dec = decompose_components(table)
        dec.tensor = T
        decs.append(dec)
    return decs


def vsi_verdict(
    metric: Metric,
    frame: NullFrame,
    K: int,
    stack: CurvatureStack | None = None,
) -> VSIVerdict:
    if stack is None or stack.order < K:
        stack = build_stack(metric, K)
    report = validate_frame(frame, metric)
    if not report.ok:
        raise FrameError("; ".join(report.violations))
    decs = stack_decompositions(stack, frame)[: K + 1]
    joint: set[BoostWeight] = set()
    orders = []
    for j in range(K + 1):
        joint |= set(decs[j].support())
        support = sorted(joint)
        direction = find_separating_direction(support, strict=True, k=frame.k)
        witnesses = witness_invariants(stack, j)
        nonzero = [(name, val) for name, _, val in witnesses if val]
        if direction is not None:
            if nonzero:
                name, val = nonzero[0]
                raise InvariantViolation(
                    f"order {j} certified by {direction.lam} but witness {name} = {val}"
                )
            orders.append(OrderVerdict(j, Status.CERTIFIED, direction, support=support))
        elif nonzero:
            name, val = nonzero[0]
            orders.append(OrderVerdict(j, Status.REFUTED, None, name, val, support))
        else:
            orders.append(OrderVerdict(j, Status.INCONCLUSIVE, support=support))
    return VSIVerdict(orders, decompositions=decs)


# ---------------------------------------------------------------------------
# Tensor-product property check
# ---------------------------------------------------------------------------


@dataclass
class ProductReport:
    t: BConditions
    s: BConditions
    product: BConditions
    contraction: BConditions | None
    expected_s_level: int
    expected_n: bool
    expected_contraction_n: bool
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def tensor_product_property_check(
    T: Tensor, S: Tensor, frame: NullFrame, metric: Metric
) -> ProductReport:
    """Check that ``T (x) S`` (and, when both have N, the contraction of their
    first slots) has at least the property levels the product rules promise."""
    k = frame.k
    bt = check_B_conditions(bw_decompose(T, frame, metric))
    bs = check_B_conditions(bw_decompose(S, frame, metric))
    P = tensor_product(T, S)
    bp = check_B_conditions(bw_decompose(P, frame, metric))
    expect_level = min(bt.s_level, bs.s_level)
    if bs.n:
        expect_level = max(expect_level, bt.s_level)
    if bt.n:
        expect_level = max(expect_level, bs.s_level)
    expect_n = (bt.n and bs.n) or (bs.n and bt.s_level == k) or (bt.n and bs.s_level == k)
    bc = None
    failures = []
    if P.rank >= 2 and T.rank >= 1 and S.rank >= 1:
        mixed = raise_lower(P, 0, metric) if P.valence[0] == P.valence[T.rank] else P
        C = contract(mixed, 0, T.rank)
        bc = check_B_conditions(decompose_components(frame_components(C, frame, metric))) if C.rank else None
    if bp.s_level < expect_level:
        failures.append(f"T(x)S has S_{bp.s_level}, expected at least S_{expect_level}")
    if expect_n and not bp.n:
        failures.append("T(x)S lacks the N property")
    contraction_n = bt.n and bs.n
    if contraction_n and bc is not None and not bc.n:
        failures.append("contraction of T(x)S lacks the N property")
    return ProductReport(bt, bs, bp, bc, expect_level, expect_n, contraction_n, failures)
