"""Symbols and the variable context shared by every expression of a computation."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence


class SymbolKind(enum.Enum):
    COORDINATE = "coordinate"
    PARAMETER = "parameter"


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: SymbolKind

    @property
    def is_coordinate(self) -> bool:
        return self.kind is SymbolKind.COORDINATE

    def __str__(self) -> str:
        return self.name


class VariableContext:
    """Ordered coordinates followed by parameters, plus the signature ``(k, m)``.

    Coordinates come first so that coordinate ``i`` is variable ``i`` of every
    polynomial built in this context.
    """

    __slots__ = ("symbols", "signature", "_index", "__weakref__")

    def __init__(
        self,
        coordinates: Sequence[str],
        parameters: Iterable[str] = (),
        signature: tuple[int, int] | None = None,
    ) -> None:
        coordinates = list(coordinates)
        parameters = list(parameters)
        if signature is None:
            n = len(coordinates)
            signature = (n // 2, n % 2)
        k, m = signature
        if k < 0 or m < 0 or 2 * k + m != len(coordinates):
            raise ValueError(
                f"signature {signature} needs {2 * k + m} coordinates, got {len(coordinates)}"
            )
        syms = [Symbol(c, SymbolKind.COORDINATE) for c in coordinates]
        syms += [Symbol(p, SymbolKind.PARAMETER) for p in parameters]
        index: dict[str, int] = {}
        for i, s in enumerate(syms):
            if not _is_identifier(s.name):
                raise ValueError(f"invalid identifier {s.name!r}")
            if s.name in index:
                raise ValueError(f"duplicate symbol {s.name!r}")
            index[s.name] = i
        self.symbols: tuple[Symbol, ...] = tuple(syms)
        self.signature: tuple[int, int] = (k, m)
        self._index = index

    @property
    def nvars(self) -> int:
        return len(self.symbols)

    @property
    def dim(self) -> int:
        k, m = self.signature
        return 2 * k + m

    @property
    def coordinates(self) -> tuple[Symbol, ...]:
        return self.symbols[: self.dim]

    @property
    def parameters(self) -> tuple[Symbol, ...]:
        return self.symbols[self.dim :]

    def index(self, sym: Symbol | str) -> int:
        name = sym if isinstance(sym, str) else sym.name
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown identifier {name!r}") from None

    def __getitem__(self, name: str) -> Symbol:
        return self.symbols[self.index(name)]

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VariableContext):
            return NotImplemented
        return self.symbols == other.symbols and self.signature == other.signature

    def __hash__(self) -> int:
        return hash((self.symbols, self.signature))

    def __repr__(self) -> str:
        coords = ", ".join(s.name for s in self.coordinates)
        params = ", ".join(s.name for s in self.parameters)
        return f"VariableContext([{coords}], [{params}], signature={self.signature})"


def _is_identifier(name: str) -> bool:
    if not name or not name[0].isascii() or not name[0].isalpha():
        return False
    return all(ch.isascii() and (ch.isalnum() or ch == "_") for ch in name)
