"""Integer partitions, Ferrers-diagram surgery and bounded enumerators."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import ContractError


@dataclass(frozen=True, order=True)
class Partition:
    """A non-increasing tuple of positive integers."""

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(self.parts)
        object.__setattr__(self, "parts", parts)
        if any(not isinstance(p, int) or isinstance(p, bool) or p <= 0 for p in parts):
            raise ContractError(f"parts must be positive integers: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ContractError(f"parts must be non-increasing: {parts}")

    @classmethod
    def of(cls, *parts: int) -> "Partition":
        return cls(tuple(parts))

    @property
    def size(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __bool__(self) -> bool:
        return bool(self.parts)

    def __repr__(self) -> str:
        return f"Partition({self.parts})"

    def __str__(self) -> str:
        return "()" if not self.parts else "(" + ",".join(map(str, self.parts)) + ")"

    @property
    def largest(self) -> int:
        return self.parts[0] if self.parts else 0

    def multiplicity(self, k: int) -> int:
        if k < 1:
            raise ContractError("multiplicity is defined for k >= 1")
        return self.parts.count(k)

    def add_column(self, height: int) -> "Partition":
        """Prepend a column of ``height`` cells; rows missing from ``self`` become 1s."""
        if height < 0 or len(self) > height:
            raise ContractError(f"column of height {height} is not leftmost for {self}")
        padded = self.parts + (0,) * (height - len(self))
        return Partition(tuple(p + 1 for p in padded))

    def remove_column(self, height: int) -> "Partition":
        if len(self) != height:
            raise ContractError(f"first column of {self} has height {len(self)}, not {height}")
        return Partition(tuple(p - 1 for p in self.parts if p > 1))

    def add_part(self, size: int) -> "Partition":
        if size < 1:
            raise ContractError("parts must be positive")
        return Partition(tuple(sorted(self.parts + (size,), reverse=True)))

    def remove_part(self, size: int) -> "Partition":
        if size < 1 or size not in self.parts:
            raise ContractError(f"{self} has no part equal to {size}")
        parts = list(self.parts)
        parts.remove(size)
        return Partition(tuple(parts))

    def to_list(self) -> list[int]:
        return list(self.parts)

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, data) -> "Partition":
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, list):
            raise ContractError(f"partition must be a JSON array, got {data!r}")
        return cls(tuple(data))


EMPTY = Partition()


def _bounded(length: int, max_part: int, min_part: int, step: int,
             budget: Optional[int]) -> Iterator[tuple[int, ...]]:
    """Non-increasing tuples of exactly ``length`` values from
    ``{min_part, min_part+step, ..., <= max_part}`` with sum <= budget."""
    if length == 0:
        yield ()
        return
    if max_part < min_part:
        return
    if budget is not None and budget < length * min_part:
        return
    top = max_part
    if budget is not None:
        top = min(top, budget - (length - 1) * min_part)
    first = min_part + ((top - min_part) // step) * step if top >= min_part else None
    if first is None:
        return
    for head in range(min_part, first + 1, step):
        rest_budget = None if budget is None else budget - head
        for tail in _bounded(length - 1, head, min_part, step, rest_budget):
            yield (head,) + tail


def enumerate_box(rows: int, cols: int, max_size: Optional[int] = None) -> list[Partition]:
    """Partitions with at most ``rows`` parts, each at most ``cols``.

    Ordered by number of parts, then lexicographically.  ``max_size`` drops
    partitions whose size exceeds it.
    """
    if rows < 0 or cols < 0:
        return []
    out = []
    for length in range(0, rows + 1 if cols > 0 else 1):
        tuples = sorted(_bounded(length, cols, 1, 1, max_size))
        out.extend(Partition(t) for t in tuples)
    return out


def enumerate_even_exact(length: int, max_part: int,
                         max_size: Optional[int] = None) -> list[Partition]:
    """Partitions with exactly ``length`` parts, all even and in ``[2, max_part]``."""
    if max_part % 2:
        raise ContractError("max_part must be even")
    if length < 0:
        return []
    return [Partition(t) for t in sorted(_bounded(length, max_part, 2, 2, max_size))]


