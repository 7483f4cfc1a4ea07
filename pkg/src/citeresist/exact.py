"""Exact effective resistance from a dense grounded-Laplacian solve.

Intended as a correctness oracle and for small graphs only.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .errors import DisconnectedError, DomainError, NumericError, SizeCapError
from .graph import CitationGraph
from .matrix import DistanceMatrix
from .resistance import _component_graph

DEFAULT_SIZE_CAP = 2000
RESIDUAL_TOL = 1e-10


def laplacian(g: CitationGraph) -> np.ndarray:
    """Dense weighted Laplacian: node weights on the diagonal, ``-w_ij`` off it."""
    lap = -g.adjacency.toarray()
    lap[np.diag_indices_from(lap)] = g.node_weight
    return lap


def _grounded_inverse(lap: np.ndarray, ground: int, targets: np.ndarray) -> np.ndarray:
    """Solve ``L' x = e_t`` for each target, with row/column ``ground`` deleted.

    Returns an ``(n, len(targets))`` array whose ``ground`` row is zero.
    """
    n = lap.shape[0]
    keep = np.delete(np.arange(n), ground)
    reduced = lap[np.ix_(keep, keep)]
    cols = np.flatnonzero(targets != ground)
    rhs = np.zeros((n - 1, len(targets)))
    rhs[np.searchsorted(keep, targets[cols]), cols] = 1.0
    try:
        factor = linalg.cho_factor(reduced, lower=True, check_finite=False)
    except linalg.LinAlgError:
        raise DisconnectedError("grounded Laplacian is singular; graph is disconnected") from None
    sol = linalg.cho_solve(factor, rhs, check_finite=False)
    residual = np.abs(reduced @ sol - rhs).max()
    scale = max(1.0, np.abs(reduced).max() * np.abs(sol).max())
    if residual > RESIDUAL_TOL * scale:
        raise NumericError(f"linear solve residual {residual:.3g} too large")
    full = np.zeros((n, len(targets)))
    full[keep] = sol
    return full


def _restrict(g: CitationGraph, nodes, size_cap: int):
    sub, local = _component_graph(g, np.asarray(nodes, dtype=np.int64))
    if sub.n_nodes > size_cap:
        raise SizeCapError(
            f"component has {sub.n_nodes} nodes (cap {size_cap}); "
            "use the iterative solver instead"
        )
    return sub, local


def exact_resistance(g: CitationGraph, p, q, size_cap: int = DEFAULT_SIZE_CAP) -> float:
    """Ground ``q``, inject unit current at ``p`` and read off the voltage of ``p``."""
    ip, iq = g.node(p), g.node(q)
    if ip == iq:
        raise DomainError("poles must differ")
    sub, (ip, iq) = _restrict(g, [ip, iq], size_cap)
    x = _grounded_inverse(laplacian(sub), iq, np.array([ip]))
    return float(x[ip, 0])


def exact_all_pairs(
    g: CitationGraph, papers=None, size_cap: int = DEFAULT_SIZE_CAP
) -> DistanceMatrix:
    """Exact resistance for every pair of ``papers``, in the iterative layout.

    Uses one factorisation grounded at the first paper:
    ``R(a, b) = X_aa + X_bb - 2 X_ab`` with ``X`` the grounded inverse.
    """
    idx = g.papers if papers is None else np.unique([g.node(x) for x in papers])
    if len(idx) < 2:
        raise DomainError("need at least two papers")
    sub, local = _restrict(g, idx, size_cap)
    x = _grounded_inverse(laplacian(sub), int(local[0]), local)
    block = x[local]
    diag = np.diag(block)
    full = diag[:, None] + diag[None, :] - block - block.T
    ii, jj = np.triu_indices(len(local), k=1)
    return DistanceMatrix.exact(tuple(g.ids[i] for i in idx), full[ii, jj])
