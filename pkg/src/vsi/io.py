"""JSON metric and frame files.

A metric file holds ``coordinates``, ``parameters``, ``signature`` ``[k, m]``
and ``metric``, a matrix of expression strings. Either the full square matrix
or just its lower triangle (row ``i`` of length ``i + 1``) is accepted; the
matrix is symmetrized on load and always written back in full.

A frame file holds ``coordinates``, ``frame_kind`` (``"vectors"`` or
``"covectors"``) and ``frame``, an object mapping each role (``l1``, ``n1``,
..., ``m1``, ...) to its component strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from .expr import ExprError, RationalFunction, VariableContext, parse_expression
from .frame import FrameError, NullFrame, canonical_roles, validate_frame
from .tensor import DOWN, Metric, Tensor, TensorError, metric_inverse

FRAME_KINDS = ("vectors", "covectors")


class FileFormatError(ValueError):
    """A metric or frame file is malformed or inconsistent."""


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def _read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise FileFormatError(f"{path}: top level must be an object")
    return data


def _names(data: Mapping, key: str, where: str) -> list[str]:
    val = data.get(key, [] if key == "parameters" else None)
    if not isinstance(val, list) or not all(isinstance(x, str) for x in val):
        raise FileFormatError(f"{where}: {key!r} must be a list of names")
    return val


def _parse(text: Any, ctx: VariableContext, where: str) -> RationalFunction:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = str(text)
    if not isinstance(text, str):
        raise FileFormatError(f"{where}: expected an expression string, got {text!r}")
    try:
        return parse_expression(text, ctx)
    except ExprError as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


# ---------------------------------------------------------------------------
# Metric files
# ---------------------------------------------------------------------------


@dataclass
class MetricFile:
    ctx: VariableContext
    matrix: list[list[RationalFunction]]

    @property
    def coordinates(self) -> list[str]:
        return [s.name for s in self.ctx.coordinates]

    @property
    def parameters(self) -> list[str]:
        return [s.name for s in self.ctx.parameters]

    def metric(self) -> Metric:
        try:
            return metric_inverse(Tensor.from_matrix(self.ctx, self.matrix, (DOWN, DOWN)))
        except TensorError as exc:
            raise FileFormatError(f"metric: {exc}") from exc

    def to_json(self) -> dict:
        return {
            "coordinates": self.coordinates,
            "parameters": self.parameters,
            "signature": list(self.ctx.signature),
            "metric": [[str(v) for v in row] for row in self.matrix],
        }

    @classmethod
    def from_metric(cls, metric: Metric) -> MetricFile:
        return cls(metric.ctx, metric.rows())


def metric_file_from_json(data: Mapping, where: str = "metric file") -> MetricFile:
    coords = _names(data, "coordinates", where)
    params = _names(data, "parameters", where)
    sig = data.get("signature")
    if not (isinstance(sig, list) and len(sig) == 2 and all(isinstance(x, int) and x >= 0 for x in sig)):
        raise FileFormatError(f"{where}: 'signature' must be [k, m] with non-negative integers")
    try:
        ctx = VariableContext(coords, params, tuple(sig))
    except ValueError as exc:
        raise FileFormatError(f"{where}: {exc}") from exc
    rows = data.get("metric")
    n = ctx.dim
    if not isinstance(rows, list) or len(rows) != n or not all(isinstance(r, list) for r in rows):
        raise FileFormatError(f"{where}: 'metric' must be a list of {n} rows")
    lower = all(len(r) == i + 1 for i, r in enumerate(rows))
    if not lower and not all(len(r) == n for r in rows):
        raise FileFormatError(f"{where}: 'metric' rows must have length {n} or form a lower triangle")
    parsed = [[_parse(v, ctx, f"{where}: metric[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(rows)]
    M = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            M[i][j] = M[j][i] = parsed[i][j]
            if not lower and parsed[j][i] != parsed[i][j]:
                raise FileFormatError(
                    f"{where}: metric[{i}][{j}] = {parsed[i][j]} but metric[{j}][{i}] = {parsed[j][i]}"
                )
    return MetricFile(ctx, M)


def load_metric_file(path: str | Path) -> MetricFile:
    return metric_file_from_json(_read_json(path), str(path))


# ---------------------------------------------------------------------------
# Frame files
# ---------------------------------------------------------------------------


@dataclass
class FrameFile:
    ctx: VariableContext
    kind: str
    entries: dict[str, tuple[RationalFunction, ...]]

    def frame(self, metric: Metric) -> NullFrame:
        """The frame, validated against ``metric``."""
        try:
            if self.kind == "vectors":
                frame = NullFrame.from_vectors(self.ctx, self.entries)
            else:
                frame = NullFrame.from_covectors(metric, self.entries)
        except (FrameError, TensorError) as exc:
            raise FileFormatError(f"frame: {exc}") from exc
        report = validate_frame(frame, metric)
        if not report.ok:
            raise FileFormatError("frame does not match the metric: " + "; ".join(report.violations))
        return frame

    def to_json(self) -> dict:
        return {
            "coordinates": [s.name for s in self.ctx.coordinates],
            "frame_kind": self.kind,
            "frame": {r: [str(v) for v in self.entries[r]] for r in canonical_roles(*self.ctx.signature)},
        }

    @classmethod
    def from_covectors(cls, ctx: VariableContext, coframe: Mapping[str, Sequence[RationalFunction]]) -> FrameFile:
        return cls(ctx, "covectors", {r: tuple(v) for r, v in coframe.items()})

    @classmethod
    def from_frame(cls, frame: NullFrame) -> FrameFile:
        return cls(frame.ctx, "vectors", {r: tuple(v) for r, v in zip(frame.roles, frame.vectors)})


def frame_file_from_json(data: Mapping, ctx: VariableContext, where: str = "frame file") -> FrameFile:
    coords = data.get("coordinates")
    if coords is not None and coords != [s.name for s in ctx.coordinates]:
        raise FileFormatError(f"{where}: coordinates {coords} differ from the metric's")
    kind = data.get("frame_kind")
    if kind not in FRAME_KINDS:
        raise FileFormatError(f"{where}: 'frame_kind' must be one of {', '.join(FRAME_KINDS)}")
    entries = data.get("frame")
    if not isinstance(entries, dict):
        raise FileFormatError(f"{where}: 'frame' must map roles to component lists")
    roles = canonical_roles(*ctx.signature)
    if set(entries) != set(roles):
        raise FileFormatError(f"{where}: roles {sorted(entries)} but the signature needs {list(roles)}")
    out = {}
    for r in roles:
        vec = entries[r]
        if not isinstance(vec, list) or len(vec) != ctx.dim:
            raise FileFormatError(f"{where}: {r} must list {ctx.dim} components")
        out[r] = tuple(_parse(v, ctx, f"{where}: {r}[{i}]") for i, v in enumerate(vec))
    return FrameFile(ctx, kind, out)


def load_frame_file(path: str | Path, ctx: VariableContext) -> FrameFile:
    return frame_file_from_json(_read_json(path), ctx, str(path))


def write_json(path: str | Path, data: Any) -> None:
    Path(path).write_text(dumps(data), encoding="utf-8")
