"""Bibliographic coupling measures derived from the first averaging sweep.

After one sweep from the zero start, a non-pole node ``i`` carries voltage
``w_ip / w_i``, so the current arriving at the grounded pole is
``w_pg + sum_i w_gi * w_ip / w_i``.  On a unit-weighted graph the neighbour
part reduces to the sum of inverse citation counts of the shared sources; on
a geometric-mean weighted graph it has the closed form implemented by
:func:`coupling_weighted`.

These are exposed as analytic checks and cheap pre-filters.  They are not a
replacement for the converged resistance distance.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError
from .graph import CitationGraph, Weighting, weigh
from .matrix import fmt


@dataclass(frozen=True)
class CouplingResult:
    first_iteration_current: float
    direct_term: float
    neighbor_term: float


def _row(g: CitationGraph, i: int) -> tuple[np.ndarray, np.ndarray]:
    a = g.adjacency
    lo, hi = a.indptr[i], a.indptr[i + 1]
    return a.indices[lo:hi], a.data[lo:hi]


def _common(g: CitationGraph, p: int, q: int):
    """Shared neighbours of p and q with the link weights to each."""
    np_, wp = _row(g, p)
    nq, wq = _row(g, q)
    common, ip, iq = np.intersect1d(np_, nq, assume_unique=True, return_indices=True)
    return common, wp[ip], wq[iq]


def _poles(g: CitationGraph, p, q) -> tuple[int, int]:
    ip, iq = g.node(p), g.node(q)
    if ip == iq:
        raise DomainError("poles must differ")
    return ip, iq


def first_iteration_current(g: CitationGraph, p, q) -> CouplingResult:
    ip, iq = _poles(g, p, q)
    nbrs, w = _row(g, iq)
    hit = np.flatnonzero(nbrs == ip)
    direct = float(w[hit[0]]) if len(hit) else 0.0
    common, wp, wq = _common(g, ip, iq)
    neighbor = float(np.sum(wq * wp / g.node_weight[common]))
    return CouplingResult(direct + neighbor, direct, neighbor)


def coupling_unweighted(g: CitationGraph, p, q) -> float:
    """Sum of ``1/k_i`` over the nodes both papers link to."""
    if g.weighting is not Weighting.UNIT:
        raise ContractError("unweighted coupling needs a unit-weighted graph")
    ip, iq = _poles(g, p, q)
    common, _, _ = _common(g, ip, iq)
    return float(np.sum(1.0 / g.degree[common]))


def coupling_weighted(g: CitationGraph, p, q) -> float:
    """Closed-form first-sweep current under geometric-mean degree weighting.

    ``1/sqrt(k_p k_q) * sum_i 1 / (sqrt(k_i) * sum_{j~i} 1/sqrt(k_j))`` over
    shared neighbours ``i``.  Only degrees are used, so the link weights held
    by ``g`` do not matter, but degrees must be those of the pruned graph.
    """
    if not g.pruned:
        raise ContractError("weighted coupling needs the pruned graph's degrees")
    ip, iq = _poles(g, p, q)
    common, _, _ = _common(g, ip, iq)
    k = g.degree.astype(float)
    total = 0.0
    for i in common:
        nbrs, _ = _row(g, i)
        total += 1.0 / (math.sqrt(k[i]) * np.sum(1.0 / np.sqrt(k[nbrs])))
    return total / math.sqrt(k[ip] * k[iq])


def cosine_coupling(g: CitationGraph, p, q) -> float:
    """Shared neighbours divided by ``sqrt(k_p k_q)``."""
    ip, iq = _poles(g, p, q)
    common, _, _ = _common(g, ip, iq)
    return len(common) / math.sqrt(g.degree[ip] * g.degree[iq])


def coupling_table(g: CitationGraph, pairs) -> list[tuple[str, str, float, float, float]]:
    """All three coupling measures for each pair, on a pruned graph."""
    unit = weigh(g, Weighting.UNIT)
    rows = []
    for a, b in pairs:
        rows.append(
            (
                g.ids[g.node(a)],
                g.ids[g.node(b)],
                coupling_unweighted(unit, a, b),
                coupling_weighted(g, a, b),
                cosine_coupling(g, a, b),
            )
        )
    return rows


def write_coupling_csv(fh, rows) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["paper_a", "paper_b", "coupling_unweighted", "coupling_weighted", "cosine"])
    for a, b, u, w, c in rows:
        writer.writerow([a, b, fmt(u), fmt(w), fmt(c)])
