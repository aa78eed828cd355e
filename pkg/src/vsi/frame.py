"""Null frames, frame components and boost-weight decomposition.

A frame component is the tensor evaluated on frame vectors. The boost weight
of a component counts, for each null pair ``I``, the ``l^I`` slots minus the
``n^I`` slots. Expanding the tensor on the dual basis covectors this is the
number of ``n^I`` factors minus the number of ``l^I`` factors, and for the
Walker basis ``{du, dv+A du+C dU, dU, dV+B dU}`` it is ``#(1)-#(2), #(3)-#(4)``.
Scaling ``l^I -> s l^I``, ``n^I -> n^I / s`` multiplies a weight ``b``
component by ``s^b``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .curvature import Connection, christoffel, covariant_derivative
from .expr import RationalFunction, VariableContext
from .tensor import (
    DOWN,
    UP,
    Metric,
    Tensor,
    TensorError,
    _gauss_jordan,
    apply_matrix,
    lower_all,
)

Index = tuple[int, ...]
BoostWeight = tuple[int, ...]

_ROLE = re.compile(r"^(l|n|m)([1-9][0-9]*)$")

CONVENTION = "b_I = #(l^I) - #(n^I) over frame-vector slots (= #(n^I) - #(l^I) over basis covectors)"
FLIPPED = "b_I = #(n^I) - #(l^I) over frame-vector slots"

SPIN_RELABELING = "(l, n, m, mt) = (l1, n1, l2, -n2)"


class FrameError(ValueError):
    pass


def canonical_roles(k: int, m: int) -> tuple[str, ...]:
    roles = []
    for i in range(1, k + 1):
        roles += [f"l{i}", f"n{i}"]
    roles += [f"m{i}" for i in range(1, m + 1)]
    return tuple(roles)


def parse_role(role: str) -> tuple[str, int]:
    match = _ROLE.match(role)
    if not match:
        raise FrameError(f"bad frame role {role!r}; expected l<I>, n<I> or m<i>")
    return match.group(1), int(match.group(2))


@dataclass(frozen=True)
class NullFrame:
    """Frame vectors in the canonical order ``l1, n1, ..., lk, nk, m1, ..., mm``.

    ``vectors[i][a]`` is coordinate component ``a`` of frame vector ``i``.
    """

    ctx: VariableContext
    roles: tuple[str, ...]
    vectors: tuple[tuple[RationalFunction, ...], ...]

    @classmethod
    def from_vectors(cls, ctx: VariableContext, vectors: Mapping[str, Sequence]) -> NullFrame:
        k, m = ctx.signature
        roles = canonical_roles(k, m)
        if set(vectors) != set(roles):
            missing = sorted(set(roles) - set(vectors))
            extra = sorted(set(vectors) - set(roles))
            raise FrameError(f"frame roles mismatch: missing {missing}, unexpected {extra}")
        rows = []
        for r in roles:
            vec = list(vectors[r])
            if len(vec) != ctx.dim:
                raise FrameError(f"frame vector {r} has {len(vec)} components, need {ctx.dim}")
            rows.append(tuple(_coerce(ctx, c) for c in vec))
        return cls(ctx, roles, tuple(rows))

    @classmethod
    def from_covectors(cls, metric: Metric, covectors: Mapping[str, Sequence]) -> NullFrame:
        """Frame whose vectors are the metric duals of the given covectors."""
        ctx = metric.ctx
        ginv = metric.inv_rows()
        vectors = {}
        for role, cov in covectors.items():
            cov = [_coerce(ctx, c) for c in cov]
            if len(cov) != ctx.dim:
                raise FrameError(f"frame covector {role} has {len(cov)} components, need {ctx.dim}")
            vectors[role] = [
                _dot(ginv[a], cov, ctx) for a in range(ctx.dim)
            ]
        return cls.from_vectors(ctx, vectors)

    @property
    def k(self) -> int:
        return self.ctx.signature[0]

    @property
    def m(self) -> int:
        return self.ctx.signature[1]

    @property
    def dim(self) -> int:
        return len(self.roles)

    def index(self, role: str) -> int:
        try:
            return self.roles.index(role)
        except ValueError:
            raise FrameError(f"no frame role {role!r}") from None

    def vector(self, role: str) -> Tensor:
        vec = self.vectors[self.index(role)]
        return Tensor._raw(self.ctx, (UP,), {(a,): v for a, v in enumerate(vec) if v})

    def covector(self, role: str, metric: Metric) -> tuple[RationalFunction, ...]:
        g = metric.rows()
        vec = self.vectors[self.index(role)]
        return tuple(_dot(g[a], vec, self.ctx) for a in range(self.dim))

    def matrix(self) -> list[list[RationalFunction]]:
        return [list(v) for v in self.vectors]

    def weight_table(self) -> list[BoostWeight]:
        """Unit boost weight of each frame slot."""
        out = []
        for role in self.roles:
            kind, i = parse_role(role)
            b = [0] * self.k
            if kind == "l":
                b[i - 1] = 1
            elif kind == "n":
                b[i - 1] = -1
            out.append(tuple(b))
        return out

    def boosted(self, scales: Sequence) -> NullFrame:
        """``l^I -> s_I l^I``, ``n^I -> n^I / s_I`` for nonzero rationals ``s_I``."""
        if len(scales) != self.k:
            raise FrameError(f"need {self.k} boost scales")
        rows = []
        for role, vec in zip(self.roles, self.vectors):
            kind, i = parse_role(role)
            if kind == "m":
                rows.append(vec)
                continue
            s = RationalFunction.constant(self.ctx, scales[i - 1])
            f = s if kind == "l" else s.inverse()
            rows.append(tuple(c * f for c in vec))
        return NullFrame(self.ctx, self.roles, tuple(rows))

    def to_json(self) -> dict[str, list[str]]:
        return {r: [str(c) for c in vec] for r, vec in zip(self.roles, self.vectors)}


def _coerce(ctx, c) -> RationalFunction:
    if isinstance(c, RationalFunction):
        return c
    if isinstance(c, str):
        from .expr import parse_expression

        return parse_expression(c, ctx)
    return RationalFunction.constant(ctx, c)


def _dot(row, vec, ctx) -> RationalFunction:
    total = RationalFunction.zero(ctx)
    for x, y in zip(row, vec):
        if x and y:
            total = total + x * y
    return total


def _pair(metric: Metric, x, y) -> RationalFunction:
    g = metric.rows()
    ctx = metric.ctx
    return _dot(x, [_dot(g[a], y, ctx) for a in range(metric.dim)], ctx)


@dataclass
class FrameReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def expected_pairing(r1: str, r2: str) -> int:
    k1, i1 = parse_role(r1)
    k2, i2 = parse_role(r2)
    if i1 != i2:
        return 0
    if {k1, k2} == {"l", "n"}:
        return 1
    if k1 == k2 == "m":
        return 1
    return 0


def validate_frame(frame: NullFrame, metric: Metric) -> FrameReport:
    report = FrameReport()
    if frame.ctx != metric.ctx:
        report.violations.append("frame and metric use different variable contexts")
        return report
    for i, r1 in enumerate(frame.roles):
        for j in range(i, frame.dim):
            r2 = frame.roles[j]
            got = _pair(metric, frame.vectors[i], frame.vectors[j])
            want = expected_pairing(r1, r2)
            if got != RationalFunction.constant(metric.ctx, want):
                report.violations.append(f"g({r1}, {r2}) = {got}, expected {want}")
    return report


# ---------------------------------------------------------------------------
# Components and boost weights
# ---------------------------------------------------------------------------


@dataclass
class FrameComponents:
    frame: NullFrame
    rank: int
    components: dict[Index, RationalFunction]

    def __getitem__(self, idx: Index) -> RationalFunction:
        return self.components.get(tuple(idx), RationalFunction.zero(self.frame.ctx))

    def by_roles(self, *roles: str) -> RationalFunction:
        return self[tuple(self.frame.index(r) for r in roles)]


def _transform(comps: dict, slot: int, cols: list[list[tuple[int, RationalFunction]]]) -> dict:
    # new[.., i, ..] = sum_a M[i][a] old[.., a, ..]; cols[a] lists (i, M[i][a])
    acc: dict = {}
    get = acc.get
    for idx, val in comps.items():
        head, tail = idx[:slot], idx[slot + 1 :]
        for i, mval in cols[idx[slot]]:
            key = head + (i,) + tail
            term = mval * val
            cur = get(key)
            acc[key] = term if cur is None else cur + term
    return {k: v for k, v in acc.items() if v}


def _columns(mat: list[list[RationalFunction]]) -> list[list[tuple[int, RationalFunction]]]:
    n = len(mat[0]) if mat else 0
    return [[(i, row[a]) for i, row in enumerate(mat) if row[a]] for a in range(n)]


def frame_components(T: Tensor, frame: NullFrame, metric: Metric | None = None) -> FrameComponents:
    """Evaluate ``T`` on frame vectors, one slot at a time."""
    if any(v == UP for v in T.valence):
        if metric is None:
            raise TensorError("lowering an upper slot needs the metric")
        T = lower_all(T, metric)
    E = _columns(frame.matrix())
    if T.symmetry == "riemann" and T.rank >= 4:
        return FrameComponents(frame, T.rank, _riemann_block_components(T, frame, E))
    comps = dict(T.components)
    for s in range(T.rank):
        comps = _transform(comps, s, E)
    return FrameComponents(frame, T.rank, comps)


def _riemann_block_components(T: Tensor, frame: NullFrame, E) -> dict[Index, RationalFunction]:
    # the first four slots are handled as two bivector slots
    from .curvature import expand_riemann_block

    n = frame.dim
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    pid = {p: i for i, p in enumerate(pairs)}
    V = frame.vectors
    W = [[V[i][a] * V[j][b] - V[i][b] * V[j][a] for (a, b) in pairs] for (i, j) in pairs]
    Wcols = _columns(W)
    comps = {}
    for J, v in T.components.items():
        a, b, c, d = J[:4]
        if a < b and c < d:
            comps[(pid[a, b], pid[c, d]) + J[4:]] = v
    for s in range(2, T.rank - 2):
        comps = _transform(comps, s, E)
    comps = _transform(comps, 0, Wcols)
    comps = _transform(comps, 1, Wcols)
    canonical = {}
    for key, v in comps.items():
        P, Q = key[0], key[1]
        if P <= Q:
            canonical[pairs[P] + pairs[Q] + key[2:]] = v
    return expand_riemann_block(canonical)


def frame_self_norm(table: FrameComponents) -> RationalFunction:
    """Full contraction of a covariant tensor with itself from its frame
    components: each slot pairs ``l^I`` with ``n^I`` and ``m^i`` with itself."""
    frame = table.frame
    partner = []
    for role in frame.roles:
        kind, i = parse_role(role)
        partner.append(frame.index({"l": "n", "n": "l", "m": "m"}[kind] + str(i)))
    total = RationalFunction.zero(frame.ctx)
    comps = table.components
    for idx, val in comps.items():
        other = comps.get(tuple(partner[i] for i in idx))
        if other is not None:
            total = total + val * other
    return total


def coordinate_components(table: FrameComponents) -> Tensor:
    """Inverse of ``frame_components``: rebuild the covariant coordinate tensor."""
    frame = table.frame
    inv, _ = _gauss_jordan(frame.ctx, frame.matrix())
    # T_a = sum_i inv[a][i] F_i since sum_a E[i][a] inv[a][j] = delta
    T = Tensor._raw(frame.ctx, (DOWN,) * table.rank, dict(table.components))
    for s in range(table.rank):
        T = apply_matrix(T, s, inv, DOWN)
    return T


def boost_weight_of(multi_index: Sequence[int], frame: NullFrame, flip: bool = False) -> BoostWeight:
    table = frame.weight_table()
    b = [0] * frame.k
    for i in multi_index:
        if not 0 <= i < frame.dim:
            raise FrameError(f"frame index {i} out of range")
        for I, w in enumerate(table[i]):
            b[I] += w
    if flip:
        b = [-x for x in b]
    return tuple(b)


@dataclass
class BWDecomposition:
    frame: NullFrame
    tensor: Tensor | None
    parts: dict[BoostWeight, list[tuple[Index, RationalFunction]]]
    convention: str = CONVENTION

    def support(self) -> list[BoostWeight]:
        return sorted(self.parts)

    def part(self, b: Sequence[int]) -> dict[Index, RationalFunction]:
        return dict(self.parts.get(tuple(b), ()))

    def reassemble(self) -> dict[Index, RationalFunction]:
        out = {}
        for items in self.parts.values():
            out.update(items)
        return out

    def flipped(self) -> BWDecomposition:
        flip = self.convention == CONVENTION
        parts = {tuple(-x for x in b): v for b, v in self.parts.items()}
        return BWDecomposition(self.frame, self.tensor, parts, FLIPPED if flip else CONVENTION)


def decompose_components(table: FrameComponents, flip: bool = False) -> BWDecomposition:
    parts: dict[BoostWeight, list] = {}
    for idx in sorted(table.components):
        val = table.components[idx]
        parts.setdefault(boost_weight_of(idx, table.frame, flip), []).append((idx, val))
    return BWDecomposition(table.frame, None, parts, FLIPPED if flip else CONVENTION)


def bw_decompose(
    T: Tensor, frame: NullFrame, metric: Metric | None = None, flip: bool = False
) -> BWDecomposition:
    dec = decompose_components(frame_components(T, frame, metric), flip)
    dec.tensor = T
    return dec


def format_index(idx: Index, one_based: bool = True) -> str:
    return "".join(str(i + 1 if one_based else i) for i in idx)


# ---------------------------------------------------------------------------
# Spin coefficients (4D neutral)
# ---------------------------------------------------------------------------


_SPIN_FIELDS = (
    "kappa",
    "kappa_t",
    "rho",
    "rho_t",
    "sigma",
    "sigma_t",
    "tau",
    "tau_t",
    "eps_sum",
    "alpha_beta_t",
    "alpha_t_beta",
    "gamma_sum",
)

SPIN_LABELS = {
    "kappa": "κ",
    "kappa_t": "κ̃",
    "rho": "ρ",
    "rho_t": "ρ̃",
    "sigma": "σ",
    "sigma_t": "σ̃",
    "tau": "τ",
    "tau_t": "τ̃",
    "eps_sum": "ε+ε̃",
    "alpha_beta_t": "α+β̃",
    "alpha_t_beta": "α̃+β",
    "gamma_sum": "γ+γ̃",
}


@dataclass
class SpinCoefficients4D:
    """Projections of ``Y^b nabla_b l^a`` for ``Y`` in ``(l, mt, m, n)``.

    ``l^b nabla_b l = (eps_sum) l + kappa_t m + kappa mt`` and likewise for
    ``mt`` (alpha_beta_t, sigma_t, rho), ``m`` (alpha_t_beta, rho_t, sigma) and
    ``n`` (gamma_sum, tau_t, tau). The ``n`` components of all four vanish
    identically; ``n_residuals`` records them anyway.
    """

    kappa: RationalFunction
    kappa_t: RationalFunction
    rho: RationalFunction
    rho_t: RationalFunction
    sigma: RationalFunction
    sigma_t: RationalFunction
    tau: RationalFunction
    tau_t: RationalFunction
    eps_sum: RationalFunction
    alpha_beta_t: RationalFunction
    alpha_t_beta: RationalFunction
    gamma_sum: RationalFunction
    n_residuals: tuple[RationalFunction, ...] = ()
    relabeling: str = SPIN_RELABELING

    def as_dict(self) -> dict[str, RationalFunction]:
        return {f: getattr(self, f) for f in _SPIN_FIELDS}

    def expansion(self, which: str) -> tuple[RationalFunction, RationalFunction, RationalFunction]:
        """Coefficients on ``(l, m, mt)`` of ``Y^b nabla_b l`` for ``Y = which``."""
        return {
            "l": (self.eps_sum, self.kappa_t, self.kappa),
            "mt": (self.alpha_beta_t, self.sigma_t, self.rho),
            "m": (self.alpha_t_beta, self.rho_t, self.sigma),
            "n": (self.gamma_sum, self.tau_t, self.tau),
        }[which]


def _require_neutral_4d(ctx: VariableContext) -> None:
    if ctx.signature != (2, 0):
        raise FrameError(
            f"spin coefficients need dimension 4 and signature (2,2); got signature {ctx.signature}"
        )


def spin_tetrad(frame: NullFrame) -> dict[str, tuple[RationalFunction, ...]]:
    _require_neutral_4d(frame.ctx)
    v = dict(zip(frame.roles, frame.vectors))
    return {"l": v["l1"], "n": v["n1"], "m": v["l2"], "mt": tuple(-c for c in v["n2"])}


def nabla_l(frame: NullFrame, conn: Connection) -> Tensor:
    """``(nabla l)_{ab} = nabla_b l_a`` for the covector of ``l = l1``."""
    metric = conn.metric
    lcov = frame.covector("l1", metric)
    L = Tensor._raw(frame.ctx, (DOWN,), {(a,): c for a, c in enumerate(lcov) if c})
    return covariant_derivative(L, conn)


def _bilinear(T: Tensor, x, y, ctx) -> RationalFunction:
    total = RationalFunction.zero(ctx)
    for (a, b), val in T.components.items():
        if x[a] and y[b]:
            total = total + x[a] * y[b] * val
    return total


def spin_coefficients(frame: NullFrame, conn: Connection | None = None, metric: Metric | None = None) -> SpinCoefficients4D:
    _require_neutral_4d(frame.ctx)
    if conn is None:
        if metric is None:
            raise FrameError("need a connection or a metric")
        conn = christoffel(metric)
    ctx = frame.ctx
    t = spin_tetrad(frame)
    D = nabla_l(frame, conn)

    def proj(Y):
        # g(X, Z) with X = Y^b nabla_b l
        c_l = _bilinear(D, t["n"], Y, ctx)
        c_m = -_bilinear(D, t["mt"], Y, ctx)
        c_mt = -_bilinear(D, t["m"], Y, ctx)
        c_n = _bilinear(D, t["l"], Y, ctx)
        return c_l, c_m, c_mt, c_n

    ll = proj(t["l"])
    mt = proj(t["mt"])
    mm = proj(t["m"])
    nn = proj(t["n"])
    return SpinCoefficients4D(
        kappa=ll[2],
        kappa_t=ll[1],
        rho=mt[2],
        rho_t=mm[1],
        sigma=mm[2],
        sigma_t=mt[1],
        tau=nn[2],
        tau_t=nn[1],
        eps_sum=ll[0],
        alpha_beta_t=mt[0],
        alpha_t_beta=mm[0],
        gamma_sum=nn[0],
        n_residuals=(ll[3], mt[3], mm[3], nn[3]),
    )


def reconstruction_residuals(sc: SpinCoefficients4D, frame: NullFrame, conn: Connection) -> list[str]:
    """Rebuild ``Y^b nabla_b l^a`` from the coefficients and compare with the
    coordinate computation; returns a description of each mismatch."""
    ctx = frame.ctx
    t = spin_tetrad(frame)
    D = nabla_l(frame, conn)
    ginv = conn.metric.inv_rows()
    n = frame.dim
    out = []
    for which in ("l", "mt", "m", "n"):
        Y = t[which]
        lower = [
            sum((Y[b] * D[a, b] for b in range(n) if Y[b] and D[a, b]), RationalFunction.zero(ctx))
            for a in range(n)
        ]
        direct = [_dot(ginv[a], lower, ctx) for a in range(n)]
        c_l, c_m, c_mt = sc.expansion(which)
        for a in range(n):
            rebuilt = c_l * t["l"][a] + c_m * t["m"][a] + c_mt * t["mt"][a]
            if rebuilt != direct[a]:
                out.append(f"{which}^b nabla_b l^{a}: rebuilt {rebuilt} != {direct[a]}")
    for r in sc.n_residuals:
        if r:
            out.append(f"nonzero n-component {r}")
    return out


@dataclass
class GeometryFlags:
    walker_plane: bool
    kundt: bool
    recurrent: bool
    covariantly_constant: bool
    coefficients: SpinCoefficients4D
    relabeling: str = SPIN_RELABELING

    def as_dict(self) -> dict[str, bool]:
        return {
            "walker_plane": self.walker_plane,
            "kundt": self.kundt,
            "recurrent": self.recurrent,
            "covariantly_constant": self.covariantly_constant,
        }


def classify_geometry(metric: Metric, frame: NullFrame, conn: Connection | None = None) -> GeometryFlags:
    """Flags read off the spin coefficients of the frame's ``l``.

    ``recurrent`` means ``nabla l = l (x) p`` (every m and mt projection of
    ``nabla l`` vanishes); ``covariantly_constant`` additionally needs the
    four ``l`` projections to vanish.
    """
    conn = conn or christoffel(metric)
    sc = spin_coefficients(frame, conn)
    z = lambda *names: all(not getattr(sc, f) for f in names)  # noqa: E731
    walker = z("kappa", "rho", "sigma", "tau")
    kundt = z("kappa_t", "kappa", "rho_t", "rho", "sigma_t", "sigma")
    recurrent = kundt and z("tau", "tau_t")
    constant = recurrent and z("eps_sum", "alpha_beta_t", "alpha_t_beta", "gamma_sum")
    return GeometryFlags(walker, kundt, recurrent, constant, sc)
