"""Citation graph construction, singleton-source pruning and link weighting.

Nodes are indexed in order of first appearance in the edge stream, so every
downstream output is reproducible for a given input file.
"""

from __future__ import annotations

import csv
import enum
import io
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import ContractError, InputError, NodeLookupError, ParseError


class NodeKind(enum.Enum):
    PAPER = "paper"
    SOURCE = "source"


class Weighting(enum.Enum):
    """Link weighting schemes.

    ``UNIT`` sets every conductance to 1.  ``GEOMETRIC_MEAN_DEGREE`` divides
    each link by the geometric mean of its end-point degrees, so a link from a
    paper with a long reference list to a highly cited source conducts poorly.
    """

    UNIT = "unit"
    GEOMETRIC_MEAN_DEGREE = "geodeg"


class SelfCitationWarning(UserWarning):
    pass


Edge = tuple[str, str]


def parse_edge_list(
    stream: IO[bytes] | IO[str] | bytes | str, delimiter: str = "\t"
) -> list[Edge]:
    """Parse a two-column ``citing<delim>cited`` edge list.

    Blank lines and lines starting with ``#`` are skipped.  Duplicate records
    are kept; they collapse when the graph is built.
    """
    if isinstance(stream, bytes):
        text = stream.decode("utf-8")
    elif isinstance(stream, str):
        text = stream
    else:
        data = stream.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data

    edges = []
    for lineno, line in enumerate(io.StringIO(text), start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split(delimiter)
        if len(cols) != 2:
            raise ParseError(lineno, f"expected 2 columns, got {len(cols)}")
        citing, cited = cols[0].strip(), cols[1].strip()
        if not citing or not cited:
            raise ParseError(lineno, "empty id field")
        edges.append((citing, cited))
    return edges


def read_edge_list(path, delimiter: str = "\t") -> list[Edge]:
    with open(path, "rb") as fh:
        return parse_edge_list(fh, delimiter)


@dataclass(frozen=True, eq=False)
class CitationGraph:
    """Immutable undirected weighted graph of papers and cited sources.

    ``edges`` holds each undirected link once as an index pair ``(u, v)`` with
    ``u < v``, sorted lexicographically; ``link_weight`` is aligned with it.
    ``weighting`` is ``None`` when weights were supplied explicitly.
    """

    ids: tuple[str, ...]
    is_paper: np.ndarray
    edges: np.ndarray
    link_weight: np.ndarray
    weighting: Weighting | None = Weighting.UNIT
    pruned: bool = False

    def __post_init__(self):
        for arr in (self.is_paper, self.edges, self.link_weight):
            arr.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def index(self) -> dict[str, int]:
        return {node_id: i for i, node_id in enumerate(self.ids)}

    @property
    def kinds(self) -> tuple[NodeKind, ...]:
        return tuple(NodeKind.PAPER if p else NodeKind.SOURCE for p in self.is_paper)

    @cached_property
    def papers(self) -> np.ndarray:
        """Indices of paper nodes, ascending."""
        return np.flatnonzero(self.is_paper)

    @cached_property
    def degree(self) -> np.ndarray:
        deg = np.bincount(self.edges.ravel(), minlength=self.n_nodes)
        deg.setflags(write=False)
        return deg

    @cached_property
    def node_weight(self) -> np.ndarray:
        w = np.bincount(self.edges[:, 0], self.link_weight, minlength=self.n_nodes)
        w += np.bincount(self.edges[:, 1], self.link_weight, minlength=self.n_nodes)
        w.setflags(write=False)
        return w

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric weighted adjacency matrix in CSR form, sorted indices."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.concatenate([self.link_weight, self.link_weight]).astype(float)
        mat = sparse.csr_matrix((data, (rows, cols)), shape=(self.n_nodes,) * 2)
        mat.sort_indices()
        return mat

    @cached_property
    def _csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a = self.adjacency
        return (
            a.indptr.astype(np.int64),
            a.indices.astype(np.int64),
            a.data.astype(np.float64),
        )

    def csr_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(indptr, indices, data)`` of the adjacency as int64/float64 arrays."""
        return self._csr

    def neighbors(self, node) -> np.ndarray:
        i = self.node(node)
        a = self.adjacency
        return a.indices[a.indptr[i] : a.indptr[i + 1]]

    def node(self, node) -> int:
        """Resolve a node id (or an index) to its index."""
        if isinstance(node, (int, np.integer)):
            if 0 <= node < self.n_nodes:
                return int(node)
            raise NodeLookupError(f"node index {node} out of range")
        try:
            return self.index[node]
        except KeyError:
            raise NodeLookupError(f"unknown node id {node!r}") from None

    def with_link_weights(self, weights: Sequence[float]) -> CitationGraph:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (self.n_edges,):
            raise ValueError("one weight per edge expected")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValueError("link weights must be positive and finite")
        return CitationGraph(
            self.ids, self.is_paper, self.edges, weights.copy(), None, self.pruned
        )

    def subgraph(self, nodes: Iterable[int]) -> CitationGraph:
        """Induced subgraph on ``nodes`` (indices); link weights are kept as is."""
        keep = np.unique(np.asarray(list(nodes), dtype=np.int64))
        remap = np.full(self.n_nodes, -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        mask = (remap[self.edges[:, 0]] >= 0) & (remap[self.edges[:, 1]] >= 0)
        edges = remap[self.edges[mask]]
        return CitationGraph(
            tuple(self.ids[i] for i in keep),
            self.is_paper[keep].copy(),
            edges.reshape(-1, 2),
            self.link_weight[mask].copy(),
            self.weighting,
            self.pruned,
        )

    def component_labels(self) -> np.ndarray:
        _, labels = csgraph.connected_components(self.adjacency, directed=False)
        return labels

    def edge_pairs(self) -> list[tuple[str, str]]:
        return [(self.ids[u], self.ids[v]) for u, v in self.edges]


def _graph_from_index_edges(ids, is_paper, pairs) -> CitationGraph:
    if pairs:
        edges = np.unique(np.array(sorted(pairs), dtype=np.int64), axis=0)
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    return CitationGraph(
        tuple(ids),
        np.asarray(is_paper, dtype=bool),
        edges,
        np.ones(len(edges)),
        Weighting.UNIT,
        False,
    )


def build_graph(edges: Iterable[Edge]) -> CitationGraph:
    """Build the undirected citation graph from ``(citing, cited)`` records.

    A node is a paper iff it cites something.  Self-citations are dropped with
    a :class:`SelfCitationWarning`; duplicate records collapse to one link.
    """
    index: dict[str, int] = {}
    citing: set[int] = set()
    pairs: set[tuple[int, int]] = set()
    n_self = 0
    n_records = 0
    for a, b in edges:
        n_records += 1
        if a == b:
            n_self += 1
            continue
        ia = index.setdefault(a, len(index))
        ib = index.setdefault(b, len(index))
        citing.add(ia)
        pairs.add((min(ia, ib), max(ia, ib)))
    if n_self:
        warnings.warn(
            f"dropped {n_self} self-citation record(s)", SelfCitationWarning, stacklevel=2
        )
    if not pairs:
        raise InputError("edge list is empty" if not n_records else "no usable edges")
    ids = list(index)
    is_paper = [i in citing for i in range(len(ids))]
    return _graph_from_index_edges(ids, is_paper, pairs)


@dataclass
class PruneReport:
    """Nodes removed by :func:`prune_singleton_sources`, in index order."""

    removed: list[tuple[str, str]] = field(default_factory=list)

    @property
    def singleton_sources(self) -> list[str]:
        return [n for n, r in self.removed if r == "singleton_source"]

    @property
    def isolated_papers(self) -> list[str]:
        return [n for n, r in self.removed if r == "isolated_paper"]

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_id", "reason"])
        writer.writerows(self.removed)


def prune_singleton_sources(g: CitationGraph) -> tuple[CitationGraph, PruneReport]:
    """Drop every source cited exactly once, in one sweep.

    Degrees are taken before the sweep.  Papers are never dropped for having
    degree one; a paper left without any link is removed and reported as
    isolated.  The result carries the ``pruned`` flag and unit weights.
    """
    deg = g.degree
    drop = (~g.is_paper) & (deg == 1)
    keep = ~drop
    mask = keep[g.edges[:, 0]] & keep[g.edges[:, 1]]
    new_deg = np.bincount(g.edges[mask].ravel(), minlength=g.n_nodes)
    isolated = keep & (new_deg == 0)
    keep &= ~isolated

    report = PruneReport()
    for i in np.flatnonzero(drop | isolated):
        if drop[i]:
            report.removed.append((g.ids[i], "singleton_source"))
        elif g.is_paper[i]:
            report.removed.append((g.ids[i], "isolated_paper"))
        else:
            report.removed.append((g.ids[i], "isolated_source"))

    sub = g.subgraph(np.flatnonzero(keep))
    pruned = CitationGraph(
        sub.ids, sub.is_paper, sub.edges, np.ones(sub.n_edges), Weighting.UNIT, True
    )
    return pruned, report


def weigh(g: CitationGraph, scheme: Weighting) -> CitationGraph:
    """Assign link weights; geometric-mean weighting needs a pruned graph."""
    scheme = Weighting(scheme)
    if scheme is Weighting.UNIT:
        w = np.ones(g.n_edges)
    else:
        if not g.pruned:
            raise ContractError(
                "geometric-mean degree weighting requires singleton sources "
                "to be pruned first"
            )
        k = g.degree.astype(float)
        w = 1.0 / np.sqrt(k[g.edges[:, 0]] * k[g.edges[:, 1]])
    return CitationGraph(g.ids, g.is_paper, g.edges, w, scheme, g.pruned)


def connected_component_of(g: CitationGraph, seed) -> np.ndarray:
    """Sorted indices of the connected component containing ``seed``."""
    s = g.node(seed)
    order = csgraph.breadth_first_order(
        g.adjacency, s, directed=False, return_predecessors=False
    )
    return np.sort(order)


def load_graph(
    path, delimiter: str = "\t", weighting: Weighting = Weighting.GEOMETRIC_MEAN_DEGREE
) -> tuple[CitationGraph, CitationGraph, PruneReport]:
    """Read, build, prune and weigh.  Returns ``(raw, weighted, report)``."""
    raw = build_graph(read_edge_list(path, delimiter))
    pruned, report = prune_singleton_sources(raw)
    return raw, weigh(pruned, weighting), report
