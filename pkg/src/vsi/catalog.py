"""Metric families with adapted null frames and expected classifications.

Every family is given by a coframe: covectors ``l^I, n^I, m^i`` with
``g = sum_I (l^I n^I + n^I l^I) + sum_i m^i m^i``. Free functions are *slots*
bound to expression strings; any identifier in a binding that is not a
coordinate becomes a parameter of the instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .expr import ParseError, RationalFunction, VariableContext, identifiers, parse_expression
from .frame import NullFrame, canonical_roles, validate_frame
from .tensor import Metric, Tensor, metric_inverse

WALKER_COORDS = ("u", "v", "U", "V")
KUNDT_ST_COORDS = ("u", "v", "T", "X")
SIX_D_COORDS = ("u", "v", "U", "V", "U2", "V2")

DEFAULT_SWEEP = ("0", "1", "u", "U", "u*U", "u^2+U")


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class Slot:
    name: str
    depends: tuple[str, ...]  # coordinates the bound function may depend on
    default: str = "0"
    doc: str = ""


@dataclass
class FamilyInstance:
    family: str
    bindings: dict[str, str]
    ctx: VariableContext
    metric: Metric
    frame: NullFrame
    coframe: dict[str, tuple[RationalFunction, ...]]
    expected: dict = field(default_factory=dict)
    values: dict[str, RationalFunction] = field(default_factory=dict, repr=False)

    @property
    def coordinates(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.ctx.coordinates)

    @property
    def parameters(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.ctx.parameters)


@dataclass(frozen=True)
class Family:
    name: str
    coordinates: tuple[str, ...]
    signature: tuple[int, int]
    slots: tuple[Slot, ...]
    build: Callable[[Callable[[str], RationalFunction], Mapping[str, RationalFunction]], dict]
    doc: str = ""


# ---------------------------------------------------------------------------
# Plumbing
# ---------------------------------------------------------------------------


def metric_from_coframe(ctx: VariableContext, coframe: Mapping[str, Sequence[RationalFunction]]) -> Tensor:
    n = ctx.dim
    zero = RationalFunction.zero(ctx)
    g = [[zero] * n for _ in range(n)]
    k, m = ctx.signature
    for I in range(1, k + 1):
        lv, nv = coframe[f"l{I}"], coframe[f"n{I}"]
        for a in range(n):
            for b in range(n):
                if lv[a] and nv[b]:
                    p = lv[a] * nv[b]
                    g[a][b] = g[a][b] + p
                    g[b][a] = g[b][a] + p
    for i in range(1, m + 1):
        mv = coframe[f"m{i}"]
        for a in range(n):
            for b in range(n):
                if mv[a] and mv[b]:
                    g[a][b] = g[a][b] + mv[a] * mv[b]
    return Tensor.from_matrix(ctx, g)


def _context_for(family: Family, bindings: Mapping[str, str]) -> VariableContext:
    params: list[str] = []
    for slot in family.slots:
        try:
            names = identifiers(bindings[slot.name])
        except ParseError as exc:
            raise CatalogError(f"slot {slot.name}: {exc}") from exc
        for name in names:
            if name not in family.coordinates and name not in params:
                params.append(name)
    return VariableContext(family.coordinates, params, family.signature)


def _bind(family: Family, ctx: VariableContext, bindings: Mapping[str, str]) -> dict[str, RationalFunction]:
    values = {}
    for slot in family.slots:
        text = bindings[slot.name]
        try:
            val = parse_expression(text, ctx)
        except ParseError as exc:
            raise CatalogError(f"slot {slot.name}: {exc}") from exc
        allowed = {ctx.index(c) for c in slot.depends}
        used = {i for i in val.free_indices() if i < ctx.dim}
        bad = sorted(ctx.symbols[i].name for i in used - allowed)
        if bad:
            deps = ", ".join(slot.depends) or "no coordinates"
            raise CatalogError(
                f"slot {slot.name} may depend on ({deps}) only, but {text!r} involves {', '.join(bad)}"
            )
        values[slot.name] = val
    return values


def instantiate(family: Family, settings: Mapping[str, str] | None = None) -> FamilyInstance:
    settings = dict(settings or {})
    known = {s.name for s in family.slots}
    unknown = sorted(set(settings) - known)
    if unknown:
        raise CatalogError(f"family {family.name} has no slot(s) {', '.join(unknown)}")
    bindings = {s.name: settings.get(s.name, s.default) for s in family.slots}
    ctx = _context_for(family, bindings)
    values = _bind(family, ctx, bindings)

    def P(text: str) -> RationalFunction:
        return parse_expression(text, ctx)

    built = family.build(P, values)
    coframe = {
        role: tuple(c if isinstance(c, RationalFunction) else P(str(c)) for c in vec)
        for role, vec in built["coframe"].items()
    }
    roles = canonical_roles(*ctx.signature)
    if set(coframe) != set(roles):
        raise CatalogError(f"family {family.name} produced roles {sorted(coframe)}")
    coframe = {r: coframe[r] for r in roles}
    metric = metric_inverse(metric_from_coframe(ctx, coframe))
    frame = NullFrame.from_covectors(metric, coframe)
    report = validate_frame(frame, metric)
    if not report.ok:
        raise CatalogError(f"adapted frame of {family.name} is invalid: {report.violations}")
    return FamilyInstance(
        family.name, bindings, ctx, metric, frame, coframe, built.get("expected", {}), values
    )


def _d(f: RationalFunction, *names: str) -> RationalFunction:
    for x in names:
        f = f.diff_index(f.ctx.index(x))
    return f


def _walker_coframe(A, B, C, P) -> dict:
    one, zero = P("1"), P("0")
    return {
        "l1": (one, zero, zero, zero),
        "n1": (A, one, C, zero),
        "l2": (zero, zero, one, zero),
        "n2": (zero, zero, B, one),
    }


def _expect(walker=None, kundt=None, certified="all", refuted_at=None, note="") -> dict:
    out = {"walker_plane": walker, "kundt": kundt, "certified_through": certified, "refuted_at": refuted_at}
    if note:
        out["note"] = note
    return out


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def _flat4(P, v):
    zero = P("0")
    return {"coframe": _walker_coframe(zero, zero, zero, P), "expected": _expect(True, True)}


def _walker_general(P, v):
    return {
        "coframe": _walker_coframe(v["A"], v["B"], v["C"], P),
        "expected": _expect(walker=True, certified=None),
    }


def _vsi3(P, v):
    a = v["a"]
    refuted = 4 if a else None
    return {
        "coframe": _walker_coframe(P("V"), a * P("v^4"), P("0"), P),
        "expected": _expect(walker=True, certified=3 if a else "all", refuted_at=refuted),
    }


def _vsi1(P, v):
    a, b = v["a"], v["b"]
    nonflat = bool(a) or bool(b)
    return {
        "coframe": _walker_coframe(P("V"), a * P("V*v^2"), b * P("v^3"), P),
        "expected": _expect(walker=True, certified=1 if nonflat else "all", refuted_at=2 if nonflat else None),
    }


_UNUSED_AT_TIER = {
    1: ("B10", "B11", "B00", "B01", "B02", "B03", "C10", "C11", "C12"),
    2: ("B1", "C1", "B00", "B01", "B02", "B03"),
    3: ("B0", "B1", "C1"),
}


def _walker_cond(P, v):
    tier = v["tier"]
    if not tier.is_constant() or tier.constant_value() not in (1, 2, 3):
        raise CatalogError("tier must be 1, 2 or 3")
    tier = int(tier.constant_value())
    for name in _UNUSED_AT_TIER[tier]:
        if v[name]:
            raise CatalogError(f"slot {name} is not used at tier {tier}")
    vv, V = P("v"), P("V")
    A = vv * v["A1"] + V * v["A2"] + v["A0"]
    if tier >= 2:
        B1 = vv * v["B11"] + v["B10"]
        C1 = vv * vv * v["C12"] + vv * v["C11"] + v["C10"]
    else:
        B1, C1 = v["B1"], v["C1"]
    if tier >= 3:
        B0 = vv**3 * v["B03"] + vv**2 * v["B02"] + vv * v["B01"] + v["B00"]
    else:
        B0 = v["B0"]
    B = V * B1 + B0
    C = C1 + V * v["C2"] + v["C0"]
    A2 = v["A2"]
    if tier == 1:
        obstruction = A2 * _d(B1, "v", "v") or A2 * _d(C1, "v", "v", "v")
        expected = _expect(walker=True, certified=1, refuted_at=2 if obstruction else None)
        if not obstruction:
            expected["certified_through"] = None
            expected["note"] = "tier 1 without obstruction: only VSI_1 is guaranteed"
    elif tier == 2:
        obstruction = A2 * _d(B0, "v", "v", "v", "v")
        expected = _expect(walker=True, certified=3, refuted_at=4 if obstruction else None)
        if not obstruction:
            expected["note"] = "tier 2 without obstruction: only VSI_3 is guaranteed"
    else:
        expected = _expect(walker=True, certified="all")
    return {"coframe": _walker_coframe(A, B, C, P), "expected": expected}


def _kundt_null(P, v):
    vv = P("v")
    one, zero = P("1"), P("0")
    H = vv * v["H1"] + v["H0"]
    WU = vv * v["W1U"] + v["W0U"]
    WV = v["W0V"]
    return {
        "coframe": {
            "l1": (one, zero, zero, zero),
            "n1": (H, one, WU, WV),
            "l2": (zero, zero, one, zero),
            "n2": (zero, zero, zero, one),
        },
        "expected": _expect(kundt=True, certified="all"),
    }


def _kundt_st(P, v):
    eps = v["eps"]
    if not eps.is_constant() or eps.constant_value() not in (0, 1):
        raise CatalogError("eps must be 0 or 1")
    vv = P("v")
    one, zero = P("1"), P("0")
    W1 = eps * P("-2/X")
    H = vv * vv * W1 * W1 / 8 + vv * v["H1"] + v["H0"]
    WT = v["W0T"]
    WX = vv * W1 + v["W0X"]
    half = P("1/2")
    # coordinates (u, v, T, X); transverse part -dT^2 + dX^2 = 2 (dX - dT)(dX + dT)/2
    return {
        "coframe": {
            "l1": (one, zero, zero, zero),
            "n1": (H, one, WT, WX),
            "l2": (zero, zero, -one, one),
            "n2": (zero, zero, half, half),
        },
        "expected": _expect(kundt=True, certified="all"),
    }


def _kundt_general(P, v):
    one, zero = P("1"), P("0")
    if not v["P"]:
        raise CatalogError("slot P must be nonzero")
    # any 2D neutral transverse metric is locally 2dU(P dV + Q dU) in null coordinates
    return {
        "coframe": {
            "l1": (one, zero, zero, zero),
            "n1": (v["H"], one, v["WU"], v["WV"]),
            "l2": (zero, zero, one, zero),
            "n2": (zero, zero, v["Q"], v["P"]),
        },
        "expected": _expect(kundt=True, certified=None),
    }


def _six_d(P, v):
    one, zero = P("1"), P("0")
    z = (zero,) * 6

    def vec(**kw):
        out = list(z)
        for name, val in kw.items():
            out[SIX_D_COORDS.index(name)] = val
        return tuple(out)

    return {
        "coframe": {
            "l1": vec(u=one),
            "n1": vec(u=v["A"], v=one),
            "l2": vec(U=one),
            "n2": vec(U=v["B"], V=one),
            "l3": vec(U2=one),
            "n3": vec(U2=v["E"], V2=one),
        },
        "expected": _expect(walker=None, certified="all"),
    }


_ANY4 = WALKER_COORDS
_uU = ("u", "U")
_uvU = ("u", "v", "U")
_uUV = ("u", "U", "V")
_uTX = ("u", "T", "X")

FAMILIES: dict[str, Family] = {
    f.name: f
    for f in (
        Family("flat4", WALKER_COORDS, (2, 0), (), _flat4, "flat neutral metric 2du dv + 2dU dV"),
        Family(
            "walker-general",
            WALKER_COORDS,
            (2, 0),
            (Slot("A", _ANY4), Slot("B", _ANY4), Slot("C", _ANY4)),
            _walker_general,
            "2du(dv+A du+C dU)+2dU(dV+B dU)",
        ),
        Family("vsi3", WALKER_COORDS, (2, 0), (Slot("a", (), "a"),), _vsi3, "2du(dv+V du)+2dU(dV+a v^4 dU)"),
        Family(
            "vsi1",
            WALKER_COORDS,
            (2, 0),
            (Slot("a", _uU, "a"), Slot("b", _uU, "b")),
            _vsi1,
            "2du(dv+V du+b v^3 dU)+2dU(dV+a V v^2 dU)",
        ),
        Family(
            "walker-cond",
            WALKER_COORDS,
            (2, 0),
            (
                Slot("tier", (), "3"),
                Slot("A0", _uU),
                Slot("A1", _uU),
                Slot("A2", _uU, "1"),
                Slot("B0", _uvU, doc="tiers 1-2"),
                Slot("B1", _uvU, doc="tier 1"),
                Slot("B10", _uU, doc="tiers 2-3"),
                Slot("B11", _uU, doc="tiers 2-3"),
                Slot("B00", _uU, doc="tier 3"),
                Slot("B01", _uU, doc="tier 3"),
                Slot("B02", _uU, doc="tier 3"),
                Slot("B03", _uU, doc="tier 3"),
                Slot("C0", _uU),
                Slot("C1", _uvU, doc="tier 1"),
                Slot("C10", _uU, doc="tiers 2-3"),
                Slot("C11", _uU, doc="tiers 2-3"),
                Slot("C12", _uU, doc="tiers 2-3"),
                Slot("C2", _uU),
            ),
            _walker_cond,
            "Walker metric with A = vA1+VA2+A0, B = VB1+B0, C = C1+VC2+C0 at the given tier",
        ),
        Family(
            "kundt-null",
            WALKER_COORDS,
            (2, 0),
            (
                Slot("H0", _uUV),
                Slot("H1", _uUV),
                Slot("W0U", _uUV),
                Slot("W0V", _uUV),
                Slot("W1U", _uU),
            ),
            _kundt_null,
            "2du(dv+H du+W_U dU+W_V dV)+2dU dV with H = vH1+H0, W_U = vW1U+W0U, W_V = W0V",
        ),
        Family(
            "kundt-st",
            KUNDT_ST_COORDS,
            (2, 0),
            (
                Slot("eps", (), "1"),
                Slot("H0", _uTX),
                Slot("H1", _uTX),
                Slot("W0T", _uTX),
                Slot("W0X", _uTX),
            ),
            _kundt_st,
            "2du(dv+H du+W_T dT+W_X dX)-dT^2+dX^2 with W1 = -2 eps/X, H = v^2 W1^2/8+vH1+H0",
        ),
        Family(
            "kundt-general",
            WALKER_COORDS,
            (2, 0),
            (
                Slot("H", _ANY4),
                Slot("WU", _ANY4),
                Slot("WV", _ANY4),
                Slot("P", _uUV, "1"),
                Slot("Q", _uUV),
            ),
            _kundt_general,
            "2du(dv+H du+W_U dU+W_V dV)+2dU(P dV+Q dU), transverse part independent of v",
        ),
        Family(
            "six-d",
            SIX_D_COORDS,
            (3, 0),
            (Slot("A", ("V",), "V"), Slot("B", ("V2",), "V2"), Slot("E", ("v",), "v^7")),
            _six_d,
            "2du(dv+A du)+2dU(dV+B dU)+2dU2(dV2+E dU2), default A=V, B=V2, E=v^7",
        ),
    )
}


def build(name: str, settings: Mapping[str, str] | None = None) -> FamilyInstance:
    try:
        family = FAMILIES[name]
    except KeyError:
        raise CatalogError(f"unknown family {name!r}; known: {', '.join(sorted(FAMILIES))}") from None
    return instantiate(family, settings)


# Named constructors -------------------------------------------------------


def flat4() -> FamilyInstance:
    return build("flat4")


def walker_general(A: str = "0", B: str = "0", C: str = "0") -> FamilyInstance:
    return build("walker-general", {"A": A, "B": B, "C": C})


def walker_cond(tier: int, **bindings: str) -> FamilyInstance:
    return build("walker-cond", {"tier": str(tier), **bindings})


def kundt_vsi(case: str, **bindings: str) -> FamilyInstance:
    if case not in ("null", "spacelike_timelike"):
        raise CatalogError("case must be 'null' or 'spacelike_timelike'")
    return build("kundt-null" if case == "null" else "kundt-st", bindings)


def six_d_example(**bindings: str) -> FamilyInstance:
    return build("six-d", bindings)


def vsi3(a: str = "a") -> FamilyInstance:
    return build("vsi3", {"a": a})


def vsi1(a: str = "a", b: str = "b") -> FamilyInstance:
    return build("vsi1", {"a": a, "b": b})
