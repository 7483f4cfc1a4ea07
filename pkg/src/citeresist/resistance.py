"""Two-pole effective resistance by iterative voltage averaging.

The positive pole is held at voltage 1 and the grounded pole at 0.  Starting
from all other voltages at zero, each sweep replaces a node's voltage by the
conductance-weighted mean of its neighbours' voltages.  The current leaving
the positive pole gives a lower bound on the resistance and the current
reaching the grounded pole an upper bound; iteration stops once the two
bounds are closer than ``epsilon``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DisconnectedError, DomainError
from .graph import CitationGraph
from .matrix import DistanceMatrix


class Sweep(enum.Enum):
    SIMULTANEOUS = "jacobi"
    IN_PLACE = "gauss-seidel"


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 0.1
    max_iterations: int = 100_000
    sweep: Sweep = Sweep.SIMULTANEOUS

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be at least 1")
        object.__setattr__(self, "sweep", Sweep(self.sweep))


@dataclass(frozen=True)
class VoltageState:
    voltages: np.ndarray
    pole_p: int
    pole_g: int
    iteration: int = 0

    @classmethod
    def initial(cls, g: CitationGraph, p, q) -> VoltageState:
        ip, iq = g.node(p), g.node(q)
        if ip == iq:
            raise DomainError("poles must differ")
        v = np.zeros(g.n_nodes)
        v[ip] = 1.0
        return cls(v, ip, iq, 0)


@dataclass(frozen=True)
class ResistanceResult:
    resistance: float
    lower_bound: float
    upper_bound: float
    iterations: int
    converged: bool
    history: np.ndarray | None = None


def iterate_voltages(
    g: CitationGraph, state: VoltageState, sweep: Sweep = Sweep.SIMULTANEOUS
) -> VoltageState:
    """Apply one averaging sweep to every non-pole node."""
    p, q = state.pole_p, state.pole_g
    w = g.node_weight
    if Sweep(sweep) is Sweep.SIMULTANEOUS:
        v = (g.adjacency @ state.voltages) / w
    else:
        a = g.adjacency
        v = state.voltages.copy()
        for i in range(g.n_nodes):
            if i not in (p, q):
                lo, hi = a.indptr[i], a.indptr[i + 1]
                v[i] = a.data[lo:hi] @ v[a.indices[lo:hi]] / w[i]
    v[p] = 1.0
    v[q] = 0.0
    return VoltageState(v, p, q, state.iteration + 1)


def current_bounds(g: CitationGraph, state: VoltageState) -> tuple[float, float]:
    """Current leaving the positive pole and current entering the grounded pole."""
    a = g.adjacency
    v = state.voltages
    p, q = state.pole_p, state.pole_g
    row_p = a.data[a.indptr[p] : a.indptr[p + 1]] @ v[a.indices[a.indptr[p] : a.indptr[p + 1]]]
    row_g = a.data[a.indptr[q] : a.indptr[q + 1]] @ v[a.indices[a.indptr[q] : a.indptr[q + 1]]]
    return float(g.node_weight[p] - row_p), float(row_g)


def _component_graph(g: CitationGraph, nodes: np.ndarray) -> tuple[CitationGraph, np.ndarray]:
    """Restrict ``g`` to the component holding all of ``nodes``.

    Returns the restricted graph and the new indices of ``nodes``.
    """
    labels = g.component_labels()
    comp = labels[nodes]
    if np.any(comp != comp[0]):
        groups: dict[int, list[str]] = {}
        for i, c in zip(nodes, comp):
            groups.setdefault(int(c), []).append(g.ids[i])
        raise DisconnectedError(
            f"nodes span {len(groups)} connected components; resistance is infinite",
            components=groups,
        )
    members = np.flatnonzero(labels == comp[0])
    if len(members) == g.n_nodes:
        return g, nodes
    return g.subgraph(members), np.searchsorted(members, nodes)


def _midpoint(lower: float, upper: float) -> float:
    return 0.5 * (lower + upper) if math.isfinite(upper) else math.inf


def resistance_between(
    g: CitationGraph,
    p,
    q,
    cfg: SolverConfig = SolverConfig(),
    record_history: bool = False,
) -> ResistanceResult:
    """Effective resistance between ``p`` and ``q``.

    With ``record_history`` the result carries an ``(iterations, 2)`` array of
    the lower and upper bound after every sweep.
    """
    ip, iq = g.node(p), g.node(q)
    if ip == iq:
        raise DomainError("poles must differ")
    sub, (ip, iq) = _component_graph(g, np.array([ip, iq]))
    indptr, indices, data = sub.csr_arrays()
    history = np.full((cfg.max_iterations if record_history else 0, 2), np.nan)
    lo, hi, it, conv = _kernels.solve_pair(
        indptr, indices, data, np.asarray(sub.node_weight, dtype=np.float64),
        int(ip), int(iq), float(cfg.epsilon), int(cfg.max_iterations),
        cfg.sweep is Sweep.IN_PLACE, history,
    )
    return ResistanceResult(
        _midpoint(lo, hi), lo, hi, int(it), bool(conv),
        history[:it].copy() if record_history else None,
    )


def solve_pairs(
    g: CitationGraph,
    ps: np.ndarray,
    qs: np.ndarray,
    cfg: SolverConfig,
    parallelism: int = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Solve many pole pairs on an already connected graph.

    Returns ``(lower, upper, iterations, converged)`` aligned with the inputs;
    the result does not depend on ``parallelism``.
    """
    ps = np.ascontiguousarray(ps, dtype=np.int64)
    qs = np.ascontiguousarray(qs, dtype=np.int64)
    m = len(ps)
    lower, upper = np.empty(m), np.empty(m)
    iters, conv = np.empty(m, dtype=np.int64), np.empty(m, dtype=np.bool_)
    indptr, indices, data = g.csr_arrays()
    node_w = np.asarray(g.node_weight, dtype=np.float64)
    args = (float(cfg.epsilon), int(cfg.max_iterations), cfg.sweep is Sweep.IN_PLACE)

    def run(lo, hi):
        _kernels.solve_pairs(
            indptr, indices, data, node_w, ps[lo:hi], qs[lo:hi], *args,
            lower[lo:hi], upper[lo:hi], iters[lo:hi], conv[lo:hi],
        )

    if parallelism <= 1 or m < 2:
        run(0, m)
    else:
        bounds = np.linspace(0, m, min(m, 4 * parallelism) + 1).astype(int)
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            list(pool.map(run, bounds[:-1], bounds[1:]))
    return lower, upper, iters, conv


def all_pairs_resistance(
    g: CitationGraph,
    papers=None,
    cfg: SolverConfig = SolverConfig(),
    parallelism: int = 1,
) -> DistanceMatrix:
    """Resistance for every unordered pair of ``papers`` (default: all papers).

    Papers are ordered by graph index and pairs lexicographically.
    """
    if parallelism < 1:
        raise DomainError("parallelism must be at least 1")
    if papers is None:
        idx = g.papers
    else:
        idx = np.unique([g.node(x) for x in papers])
    if len(idx) < 2:
        raise DomainError("need at least two papers")
    sub, local = _component_graph(g, idx)
    ii, jj = np.triu_indices(len(local), k=1)
    lower, upper, iters, conv = solve_pairs(sub, local[ii], local[jj], cfg, parallelism)
    mid = np.where(np.isfinite(upper), 0.5 * (lower + upper), np.inf)
    return DistanceMatrix(tuple(g.ids[i] for i in idx), mid, lower, upper, iters, conv)
