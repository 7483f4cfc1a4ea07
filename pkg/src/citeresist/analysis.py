"""Validation analytics over a distance matrix.

Ranking against a topic uses the ratio of a paper's median distance to the
topic members over its median distance to all papers.  The denominator
corrects for centrality: papers with long reference lists sit close to
almost everything.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, InputError, ParseError
from .matrix import DistanceMatrix, fmt


@dataclass(frozen=True)
class TopicSet:
    label: str
    members: frozenset[str]

    def __post_init__(self):
        if not self.members:
            raise DomainError(f"topic {self.label!r} has no members")


def read_topics(fh) -> dict[str, TopicSet]:
    """Read ``paper_id,topic_label`` rows; a paper may belong to several topics."""
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or [h.strip() for h in header[:2]] != ["paper_id", "topic_label"]:
        raise ParseError(1, "expected header paper_id,topic_label")
    groups: dict[str, set[str]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2 or not row[0].strip() or not row[1].strip():
            raise ParseError(lineno, "expected paper_id,topic_label")
        groups.setdefault(row[1].strip(), set()).add(row[0].strip())
    return {label: TopicSet(label, frozenset(ids)) for label, ids in groups.items()}


def median_distance(m: DistanceMatrix, paper, targets: Iterable) -> float:
    """Median distance from ``paper`` to ``targets``, leaving ``paper`` itself out."""
    i = m.position(paper)
    cols = sorted({m.position(t) for t in targets} - {i})
    if not cols:
        raise DomainError("no targets left after excluding the paper itself")
    return float(np.median([m.get(i, j) for j in cols]))


@dataclass(frozen=True)
class RankingResult:
    label: str
    papers: tuple[str, ...]
    scores: np.ndarray
    is_member: np.ndarray
    cumulative_topic_count: np.ndarray

    def auc(self) -> float:
        """Probability that a random member ranks above a random non-member."""
        n_pos = int(self.is_member.sum())
        n_neg = len(self.is_member) - n_pos
        if n_pos == 0 or n_neg == 0:
            raise DomainError("AUC needs both members and non-members")
        # each non-member counts the members ranked above it
        above = self.cumulative_topic_count[~self.is_member]
        return float(above.sum()) / (n_pos * n_neg)

    def ideal_curve(self) -> np.ndarray:
        ranks = np.arange(1, len(self.papers) + 1)
        return np.minimum(ranks, int(self.is_member.sum()))

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "paper_id", "score", "is_topic_member", "cumulative_topic_count"])
        for r, (p, s, mem, c) in enumerate(
            zip(self.papers, self.scores, self.is_member, self.cumulative_topic_count), start=1
        ):
            writer.writerow([r, p, fmt(s), "true" if mem else "false", int(c)])


def rank_by_topic(m: DistanceMatrix, topic: TopicSet) -> RankingResult:
    """Rank every paper by median distance to the topic over median distance to all.

    Ties are broken by matrix position.  A sole topic member has no other
    member to measure against; it gets score 0 and ranks first.
    """
    unknown = sorted(set(topic.members) - set(m.ids))
    if unknown:
        raise InputError(f"topic {topic.label!r} lists papers not in the matrix: {unknown[:5]}")
    d = m.square()
    n = m.n
    member = np.array([p in topic.members for p in m.ids])
    scores = np.empty(n)
    for i in range(n):
        others = np.arange(n) != i
        to_topic = member & others
        if not to_topic.any():
            scores[i] = 0.0
            continue
        scores[i] = np.median(d[i, to_topic]) / np.median(d[i, others])
    order = np.argsort(scores, kind="stable")
    is_member = member[order]
    return RankingResult(
        topic.label,
        tuple(m.ids[i] for i in order),
        scores[order],
        is_member,
        np.cumsum(is_member),
    )


@dataclass(frozen=True)
class Histogram:
    """Counts of ``ln(R)`` in equal-width bins; edges are in log units."""

    edges: np.ndarray
    counts: np.ndarray

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_left", "bin_right", "count"])
        for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts):
            writer.writerow([fmt(lo), fmt(hi), int(c)])


def log_histogram(m: DistanceMatrix, bins: int) -> Histogram:
    if bins < 1:
        raise DomainError("bins must be positive")
    r = np.asarray(m.resistance, dtype=float)
    if r.size == 0:
        raise DomainError("empty distance matrix")
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise DomainError("log histogram needs finite positive distances")
    logs = np.log(r)
    lo, hi = logs.min(), logs.max()
    if lo == hi:
        return Histogram(np.array([lo, hi]), np.array([len(logs)]))
    counts, edges = np.histogram(logs, bins=bins, range=(lo, hi))
    return Histogram(edges, counts)


class Linkage(enum.Enum):
    WARD = "ward"
    AVERAGE = "average"
    SINGLE = "single"
    COMPLETE = "complete"


@dataclass(frozen=True)
class Dendrogram:
    """Merge history in the usual linkage-matrix layout.

    Row ``t`` of ``merges`` is ``(cluster_a, cluster_b, height, size)``; leaves
    are ``0..n-1`` and the cluster created by row ``t`` is ``n + t``.
    """

    merges: np.ndarray
    leaf_order: np.ndarray

    @property
    def n_leaves(self) -> int:
        return len(self.merges) + 1

    def cut(self, k: int) -> np.ndarray:
        """Flat labels for ``k`` clusters, numbered by first appearance."""
        n = self.n_leaves
        if not 1 <= k <= n:
            raise DomainError(f"k must lie in [1, {n}]")
        parent = list(range(2 * n - 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for t in range(n - k):
            a, b = int(self.merges[t, 0]), int(self.merges[t, 1])
            parent[find(a)] = n + t
            parent[find(b)] = n + t
        roots = [find(i) for i in range(n)]
        relabel: dict[int, int] = {}
        return np.array([relabel.setdefault(r, len(relabel)) for r in roots])

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "cluster_a", "cluster_b", "height", "size"])
        for t, (a, b, h, s) in enumerate(self.merges):
            writer.writerow([t, int(a), int(b), fmt(h), int(s)])


def _lance_williams(method: Linkage, d_ki, d_kj, d_ij, ni, nj, nk):
    if method is Linkage.SINGLE:
        return np.minimum(d_ki, d_kj)
    if method is Linkage.COMPLETE:
        return np.maximum(d_ki, d_kj)
    if method is Linkage.AVERAGE:
        return (ni * d_ki + nj * d_kj) / (ni + nj)
    total = ni + nj + nk
    return ((ni + nk) * d_ki + (nj + nk) * d_kj - nk * d_ij) / total


def _leaf_order(merges: np.ndarray, n: int) -> np.ndarray:
    if n == 1:
        return np.array([0])
    out = []
    stack = [2 * n - 2]
    while stack:
        c = stack.pop()
        if c < n:
            out.append(c)
        else:
            a, b = merges[c - n, :2].astype(int)
            stack.extend([b, a])
    return np.array(out)


def agglomerate(
    m: DistanceMatrix,
    linkage: Linkage | str = Linkage.WARD,
    k: int = 2,
    ward_squared: bool = False,
) -> tuple[Dendrogram, np.ndarray]:
    """Agglomerative clustering with Lance-Williams updates.

    Ward's update is applied to the given dissimilarities as they are.  With
    ``ward_squared`` the inputs are squared first and merge heights reported
    as square roots, i.e. the inputs are treated as Euclidean distances.
    """
    method = Linkage(linkage)
    n = m.n
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in [1, {n}]")
    if ward_squared and method is not Linkage.WARD:
        raise DomainError("ward_squared only applies to Ward linkage")
    d = m.square()
    if ward_squared:
        d = d * d
    np.fill_diagonal(d, np.inf)
    size = np.ones(n)
    cluster_id = np.arange(n)
    active = np.ones(n, dtype=bool)
    merges = np.zeros((max(n - 1, 0), 4))
    for t in range(n - 1):
        flat = int(np.argmin(d))
        i, j = divmod(flat, n)
        if i > j:
            i, j = j, i
        h = d[i, j]
        ni, nj = size[i], size[j]
        others = active.copy()
        others[[i, j]] = False
        new = _lance_williams(method, d[i], d[j], h, ni, nj, size)
        d[i, others] = new[others]
        d[others, i] = new[others]
        d[j, :] = np.inf
        d[:, j] = np.inf
        active[j] = False
        a, b = sorted((cluster_id[i], cluster_id[j]))
        merges[t] = (a, b, np.sqrt(h) if ward_squared else h, ni + nj)
        size[i] = ni + nj
        cluster_id[i] = n + t
    dendro = Dendrogram(merges, _leaf_order(merges, n))
    return dendro, dendro.cut(k)


def precision_recall(
    found: Mapping[str, int], truth: Sequence[TopicSet]
) -> dict[str, tuple[float, float]]:
    """Per-topic precision and recall of the best-F1 cluster.

    A topic that no cluster touches gets ``(0.0, 0.0)``.
    """
    clusters: dict[int, set[str]] = {}
    for paper, c in found.items():
        clusters.setdefault(int(c), set()).add(paper)
    if not any(topic.members & found.keys() for topic in truth):
        raise DomainError("clustering and topics share no papers")
    out = {}
    for topic in truth:
        # members absent from the clustering count as misses
        best = (-1.0, 0.0, 0.0)
        for c in sorted(clusters):
            hit = len(clusters[c] & topic.members)
            prec = hit / len(clusters[c])
            rec = hit / len(topic.members)
            f1 = 2 * prec * rec / (prec + rec) if hit else 0.0
            if f1 > best[0]:
                best = (f1, prec, rec)
        out[topic.label] = (best[1], best[2])
    return out


def write_clusters_csv(fh, ids: Sequence[str], labels: np.ndarray) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["paper_id", "cluster"])
    for p, c in zip(ids, labels):
        writer.writerow([p, int(c)])
