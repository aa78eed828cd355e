"""Coordinate-component tensors over the rational-function field.

Components are stored as a dict of the nonzero entries keyed by index tuples;
``T[idx]`` returns zero for absent keys, so indexing behaves like a dense
array of extent ``dim`` in every slot.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .expr import RationalFunction, VariableContext

UP = "u"
DOWN = "d"

Index = tuple[int, ...]


class TensorError(ValueError):
    pass


class SingularMetricError(TensorError):
    pass


def _check_valence(valence: Sequence[str]) -> tuple[str, ...]:
    valence = tuple(valence)
    for v in valence:
        if v not in (UP, DOWN):
            raise TensorError(f"slot variance must be {UP!r} or {DOWN!r}, got {v!r}")
    return valence


class Tensor:
    __slots__ = ("ctx", "valence", "components", "symmetry")

    def __init__(
        self,
        ctx: VariableContext,
        valence: Sequence[str],
        components: Mapping[Index, RationalFunction] | None = None,
        symmetry: str | None = None,
    ) -> None:
        self.ctx = ctx
        self.valence = _check_valence(valence)
        comps = {}
        if components:
            n = ctx.dim
            r = len(self.valence)
            for idx, val in components.items():
                idx = tuple(idx)
                if len(idx) != r or any(not 0 <= i < n for i in idx):
                    raise TensorError(f"index {idx} out of range for rank {r}, dim {n}")
                if not isinstance(val, RationalFunction):
                    val = RationalFunction.constant(ctx, val)
                if val:
                    comps[idx] = val
        self.components: dict[Index, RationalFunction] = comps
        self.symmetry = symmetry

    @classmethod
    def _raw(cls, ctx, valence, components, symmetry=None) -> Tensor:
        t = cls.__new__(cls)
        t.ctx = ctx
        t.valence = tuple(valence)
        t.components = components
        t.symmetry = symmetry
        return t

    @classmethod
    def zeros(cls, ctx: VariableContext, valence: Sequence[str]) -> Tensor:
        return cls(ctx, valence)

    @classmethod
    def from_function(
        cls,
        ctx: VariableContext,
        valence: Sequence[str],
        fn: Callable[..., RationalFunction | int],
        symmetry: str | None = None,
    ) -> Tensor:
        n = ctx.dim
        comps = {idx: fn(*idx) for idx in itertools.product(range(n), repeat=len(valence))}
        return cls(ctx, valence, comps, symmetry)

    @classmethod
    def from_matrix(
        cls, ctx: VariableContext, rows: Sequence[Sequence], valence=(DOWN, DOWN), symmetry=None
    ) -> Tensor:
        comps = {(i, j): v for i, row in enumerate(rows) for j, v in enumerate(row)}
        return cls(ctx, valence, comps, symmetry)

    @property
    def dim(self) -> int:
        return self.ctx.dim

    @property
    def rank(self) -> int:
        return len(self.valence)

    @property
    def nnz(self) -> int:
        return len(self.components)

    def __getitem__(self, idx) -> RationalFunction:
        if not isinstance(idx, tuple):
            idx = (idx,)
        val = self.components.get(idx)
        if val is None:
            if len(idx) != self.rank or any(not 0 <= i < self.dim for i in idx):
                raise IndexError(f"index {idx} out of range")
            return RationalFunction.zero(self.ctx)
        return val

    def items(self) -> Iterator[tuple[Index, RationalFunction]]:
        return iter(self.components.items())

    def indices(self) -> Iterator[Index]:
        return itertools.product(range(self.dim), repeat=self.rank)

    def is_zero(self) -> bool:
        return not self.components

    def matrix(self) -> list[list[RationalFunction]]:
        if self.rank != 2:
            raise TensorError("matrix() needs a rank-2 tensor")
        return [[self[i, j] for j in range(self.dim)] for i in range(self.dim)]

    def _same_shape(self, other: Tensor) -> None:
        if other.ctx != self.ctx:
            raise TensorError("tensors live in different variable contexts")
        if other.valence != self.valence:
            raise TensorError(f"valence mismatch {self.valence} vs {other.valence}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return (
            self.ctx == other.ctx
            and self.valence == other.valence
            and self.components == other.components
        )

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: Tensor) -> Tensor:
        self._same_shape(other)
        out = dict(self.components)
        for idx, val in other.components.items():
            s = out[idx] + val if idx in out else val
            if s:
                out[idx] = s
            else:
                out.pop(idx, None)
        return Tensor._raw(self.ctx, self.valence, out)

    def __neg__(self) -> Tensor:
        return Tensor._raw(self.ctx, self.valence, {i: -v for i, v in self.components.items()})

    def __sub__(self, other: Tensor) -> Tensor:
        return self + (-other)

    def scale(self, c) -> Tensor:
        out = {}
        for idx, val in self.components.items():
            p = val * c
            if p:
                out[idx] = p
        return Tensor._raw(self.ctx, self.valence, out)

    def map(self, fn: Callable[[RationalFunction], RationalFunction]) -> Tensor:
        out = {}
        for idx, val in self.components.items():
            w = fn(val)
            if w:
                out[idx] = w
        return Tensor._raw(self.ctx, self.valence, out, self.symmetry)

    def permute(self, order: Sequence[int]) -> Tensor:
        """New tensor whose slot ``s`` is slot ``order[s]`` of this one."""
        order = tuple(order)
        if sorted(order) != list(range(self.rank)):
            raise TensorError(f"{order} is not a permutation of the slots")
        valence = tuple(self.valence[o] for o in order)
        comps = {tuple(idx[o] for o in order): v for idx, v in self.components.items()}
        return Tensor._raw(self.ctx, valence, comps)

    def __repr__(self) -> str:
        return f"Tensor(valence={''.join(self.valence)}, nnz={self.nnz})"


@dataclass(frozen=True)
class Metric:
    g: Tensor
    g_inv: Tensor
    det: RationalFunction

    @property
    def ctx(self) -> VariableContext:
        return self.g.ctx

    @property
    def dim(self) -> int:
        return self.g.dim

    def rows(self) -> list[list[RationalFunction]]:
        return self.g.matrix()

    def inv_rows(self) -> list[list[RationalFunction]]:
        return self.g_inv.matrix()


def _gauss_jordan(
    ctx: VariableContext, rows: list[list[RationalFunction]]
) -> tuple[list[list[RationalFunction]], RationalFunction]:
    n = len(rows)
    zero = RationalFunction.zero(ctx)
    one = RationalFunction.one(ctx)
    a = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(rows)]
    det = one
    for col in range(n):
        pivot = None
        # prefer constant pivots, then short ones, to keep expressions small
        best = None
        for r in range(col, n):
            v = a[r][col]
            if v:
                size = 0 if v.is_constant() else len(v.num) + len(v.den)
                if best is None or size < best:
                    pivot, best = r, size
        if pivot is None:
            raise SingularMetricError("metric determinant is identically zero")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        p = a[col][col]
        det = det * p
        inv = p.inverse()
        a[col] = [x * inv if x else x for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y if y else x for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a], det


def metric_inverse(g: Tensor) -> Metric:
    """Exact inverse of a symmetric rank-2 covariant tensor."""
    if g.valence != (DOWN, DOWN):
        raise TensorError("metric must be a rank-2 covariant tensor")
    n = g.dim
    for i in range(n):
        for j in range(i + 1, n):
            if g[i, j] != g[j, i]:
                raise TensorError(f"metric is not symmetric at ({i}, {j})")
    inv, det = _gauss_jordan(g.ctx, g.matrix())
    g_inv = Tensor.from_matrix(g.ctx, inv, (UP, UP), symmetry="metric")
    g = Tensor._raw(g.ctx, g.valence, dict(g.components), "metric")
    return Metric(g, g_inv, det)


def tensor_product(T: Tensor, S: Tensor) -> Tensor:
    if T.ctx != S.ctx:
        raise TensorError("tensors live in different variable contexts")
    comps = {}
    for i, a in T.components.items():
        for j, b in S.components.items():
            comps[i + j] = a * b
    return Tensor._raw(T.ctx, T.valence + S.valence, comps)


def _accumulate(acc: dict, idx: Index, val: RationalFunction) -> None:
    cur = acc.get(idx)
    acc[idx] = val if cur is None else cur + val


def _prune(acc: dict) -> dict:
    return {k: v for k, v in acc.items() if v}


def contract(T: Tensor, i: int, j: int) -> Tensor:
    """Trace over slots ``i`` and ``j``, which must have opposite variance."""
    r = T.rank
    if not (0 <= i < r and 0 <= j < r) or i == j:
        raise TensorError(f"invalid slot pair ({i}, {j}) for rank {r}")
    if T.valence[i] == T.valence[j]:
        raise TensorError("contraction needs one upper and one lower slot; raise or lower first")
    i, j = min(i, j), max(i, j)
    acc: dict = {}
    for idx, val in T.components.items():
        if idx[i] == idx[j]:
            _accumulate(acc, idx[:i] + idx[i + 1 : j] + idx[j + 1 :], val)
    valence = T.valence[:i] + T.valence[i + 1 : j] + T.valence[j + 1 :]
    return Tensor._raw(T.ctx, valence, _prune(acc))


def apply_matrix(T: Tensor, slot: int, mat: list[list[RationalFunction]], variance: str) -> Tensor:
    # new[.., a, ..] = sum_b mat[a][b] * T[.., b, ..]
    n = T.dim
    cols: list[list[tuple[int, RationalFunction]]] = [
        [(a, mat[a][b]) for a in range(n) if mat[a][b]] for b in range(n)
    ]
    acc: dict = {}
    for idx, val in T.components.items():
        b = idx[slot]
        head, tail = idx[:slot], idx[slot + 1 :]
        for a, m in cols[b]:
            _accumulate(acc, head + (a,) + tail, m * val)
    valence = T.valence[:slot] + (variance,) + T.valence[slot + 1 :]
    return Tensor._raw(T.ctx, valence, _prune(acc))


def raise_lower(T: Tensor, slot: int, metric: Metric) -> Tensor:
    """Flip the variance of one slot using ``g`` or ``g_inv``."""
    if not 0 <= slot < T.rank:
        raise TensorError(f"slot {slot} out of range for rank {T.rank}")
    if T.valence[slot] == DOWN:
        return apply_matrix(T, slot, metric.inv_rows(), UP)
    return apply_matrix(T, slot, metric.rows(), DOWN)


def raise_all(T: Tensor, metric: Metric) -> Tensor:
    out = T
    for s, v in enumerate(T.valence):
        if v == DOWN:
            out = raise_lower(out, s, metric)
    return out


def lower_all(T: Tensor, metric: Metric) -> Tensor:
    out = T
    for s, v in enumerate(T.valence):
        if v == UP:
            out = raise_lower(out, s, metric)
    return out


def full_contraction(T: Tensor, S: Tensor, metric: Metric) -> RationalFunction:
    """All-slot pairing <T, S>, slot ``s`` of T against slot ``s`` of S."""
    if T.rank != S.rank:
        raise TensorError("full contraction needs equal ranks")
    Tl = lower_all(T, metric)
    Su = raise_all(S, metric)
    total = RationalFunction.zero(T.ctx)
    small, big = (Tl, Su) if Tl.nnz <= Su.nnz else (Su, Tl)
    for idx, val in small.components.items():
        other = big.components.get(idx)
        if other is not None:
            total = total + val * other
    return total


def kronecker(ctx: VariableContext) -> Tensor:
    one = RationalFunction.one(ctx)
    return Tensor._raw(ctx, (UP, DOWN), {(i, i): one for i in range(ctx.dim)})


def sum_rationals(ctx: VariableContext, values: Iterable[RationalFunction]) -> RationalFunction:
    total = RationalFunction.zero(ctx)
    for v in values:
        total = total + v
    return total
