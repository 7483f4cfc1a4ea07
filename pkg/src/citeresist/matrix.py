"""Condensed paper-by-paper distance matrix and its long-form CSV format."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from .errors import NodeLookupError, ParseError

CSV_HEADER = ["paper_a", "paper_b", "resistance", "lower", "upper", "iterations", "converged"]


def fmt(x: float) -> str:
    """Format a real with 12 significant digits, as in every CSV output."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def condensed_index(i: int, j: int, n: int) -> int:
    """Position of pair ``(i, j)``, ``i != j``, in row-major upper-triangle order."""
    if i > j:
        i, j = j, i
    return n * i - i * (i + 1) // 2 + (j - i - 1)


def pair_from_condensed(k: int, n: int) -> tuple[int, int]:
    """Inverse of :func:`condensed_index`."""
    # row i starts at n*i - i*(i+1)/2; solve for the largest such start <= k
    b = 2 * n - 1
    i = int((b - math.sqrt(b * b - 8 * k)) // 2)
    while n * i - i * (i + 1) // 2 > k:
        i -= 1
    while n * (i + 1) - (i + 1) * (i + 2) // 2 <= k:
        i += 1
    j = k - (n * i - i * (i + 1) // 2) + i + 1
    return i, j


@dataclass(eq=False)
class DistanceMatrix:
    """Symmetric matrix of pairwise distances between ``ids``, stored condensed.

    Entry ``k`` belongs to the pair returned by ``pair_from_condensed(k, n)``,
    i.e. pairs are ordered lexicographically with the first index smaller.
    """

    ids: tuple[str, ...]
    resistance: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray

    def __post_init__(self):
        m = len(self.ids) * (len(self.ids) - 1) // 2
        for name in ("resistance", "lower", "upper", "iterations", "converged"):
            if len(getattr(self, name)) != m:
                raise ValueError(f"{name} must have {m} entries")

    @classmethod
    def exact(cls, ids, values) -> DistanceMatrix:
        values = np.asarray(values, dtype=float)
        return cls(
            tuple(ids),
            values,
            values.copy(),
            values.copy(),
            np.zeros(len(values), dtype=np.int64),
            np.ones(len(values), dtype=bool),
        )

    @property
    def n(self) -> int:
        return len(self.ids)

    def __len__(self) -> int:
        return len(self.resistance)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.ids)}

    def position(self, paper) -> int:
        if isinstance(paper, (int, np.integer)):
            return int(paper)
        try:
            return self._index[paper]
        except KeyError:
            raise NodeLookupError(f"paper {paper!r} not in distance matrix") from None

    def get(self, a, b) -> float:
        i, j = self.position(a), self.position(b)
        if i == j:
            return 0.0
        return float(self.resistance[condensed_index(i, j, self.n)])

    def square(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, k=1)
        out[iu] = self.resistance
        out.T[iu] = self.resistance
        return out

    def pairs(self) -> Iterator[tuple[int, int]]:
        for i in range(self.n):
            for j in range(i + 1, self.n):
                yield i, j

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for k, (i, j) in enumerate(self.pairs()):
            writer.writerow(
                [
                    self.ids[i],
                    self.ids[j],
                    fmt(self.resistance[k]),
                    fmt(self.lower[k]),
                    fmt(self.upper[k]),
                    int(self.iterations[k]),
                    "true" if self.converged[k] else "false",
                ]
            )

    @classmethod
    def from_csv(cls, fh) -> DistanceMatrix:
        """Read the long-form CSV.  Papers are ordered by first appearance."""
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != CSV_HEADER[:3]:
            raise ParseError(1, f"expected header starting {','.join(CSV_HEADER[:3])}")
        rows = []
        order: dict[str, int] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(lineno, f"expected {len(header)} columns")
            a, b = row[0], row[1]
            if a == b:
                raise ParseError(lineno, "self pair")
            order.setdefault(a, len(order))
            order.setdefault(b, len(order))
            try:
                r = float(row[2])
                extra = (
                    (float(row[3]), float(row[4]), int(row[5]), row[6] == "true")
                    if len(row) >= 7
                    else (r, r, 0, True)
                )
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
            rows.append((lineno, a, b, r) + extra)

        n = len(order)
        m = n * (n - 1) // 2
        res = np.full(m, np.nan)
        lo, hi = np.empty(m), np.empty(m)
        it, conv = np.zeros(m, dtype=np.int64), np.zeros(m, dtype=bool)
        for lineno, a, b, r, l_, u_, i_, c_ in rows:
            k = condensed_index(order[a], order[b], n)
            if not np.isnan(res[k]):
                raise ParseError(lineno, f"duplicate pair {a},{b}")
            res[k], lo[k], hi[k], it[k], conv[k] = r, l_, u_, i_, c_
        if len(rows) != m:
            raise ParseError(len(rows) + 1, f"incomplete matrix: {len(rows)} of {m} pairs")
        return cls(tuple(order), res, lo, hi, it, conv)
