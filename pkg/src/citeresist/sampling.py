"""Estimate the pairwise distance distribution from a random sample of pairs.

Pairs are visited in a seeded random order, so the first ``n`` distances are a
simple random sample without replacement.  The standard error of the sample
mean carries the finite-population correction, and sampling stops once that
error has stayed below ``epsilon / 10`` for ``streak`` consecutive updates.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import DomainError
from .graph import CitationGraph
from .matrix import fmt, pair_from_condensed
from .resistance import SolverConfig, _component_graph, solve_pairs


def _neumaier(total: float, comp: float, x: float) -> tuple[float, float]:
    t = total + x
    if abs(total) >= abs(x):
        comp += (total - t) + x
    else:
        comp += (x - t) + total
    return t, comp


def standard_error_sq(n: int, N: int, sum_r: float, sum_r2: float) -> float:
    """Squared standard error of the mean of ``n`` of ``N`` values drawn without replacement."""
    if n < 2:
        return math.inf
    if n >= N:
        return 0.0
    spread = max(sum_r2 - sum_r * sum_r / n, 0.0)
    return (N - n) / ((N - 1) * (n - 1) * n) * spread


@dataclass(frozen=True)
class SampleEstimate:
    """Running mean and finite-population standard error.

    The sums are kept with Neumaier compensation (``*_c`` fields) so that the
    variance difference does not lose precision on long runs.
    """

    N: int
    n: int = 0
    _sum: float = 0.0
    _sum_c: float = 0.0
    _sum2: float = 0.0
    _sum2_c: float = 0.0
    min_r: float = math.inf
    max_r: float = -math.inf

    @property
    def sum_R(self) -> float:
        return self._sum + self._sum_c

    @property
    def sum_R2(self) -> float:
        return self._sum2 + self._sum2_c

    @property
    def mean(self) -> float:
        if not self.n:
            return math.nan
        # rounding can push the quotient one ulp outside the sampled range
        return min(max(self.sum_R / self.n, self.min_r), self.max_r)

    @property
    def std_error(self) -> float:
        return math.sqrt(standard_error_sq(self.n, self.N, self.sum_R, self.sum_R2))


def update_estimate(e: SampleEstimate, r: float) -> SampleEstimate:
    if not (math.isfinite(r) and r >= 0):
        raise DomainError(f"distance must be finite and non-negative, got {r}")
    if e.n >= e.N:
        raise DomainError("sample already covers the whole population")
    s, sc = _neumaier(e._sum, e._sum_c, r)
    s2, s2c = _neumaier(e._sum2, e._sum2_c, r * r)
    return replace(
        e, n=e.n + 1, _sum=s, _sum_c=sc, _sum2=s2, _sum2_c=s2c,
        min_r=min(e.min_r, r), max_r=max(e.max_r, r),
    )


@dataclass(frozen=True)
class SamplerConfig:
    epsilon: float = 0.1
    streak: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if self.streak < 1:
            raise DomainError("streak must be at least 1")


def shuffle_pairs(papers: Sequence, seed: int) -> Iterator[tuple]:
    """Every unordered pair of ``papers`` exactly once, in seeded random order."""
    n = len(papers)
    if n < 2:
        raise DomainError("need at least two papers to form pairs")
    order = np.random.default_rng(seed).permutation(n * (n - 1) // 2)
    for k in order:
        i, j = pair_from_condensed(int(k), n)
        yield papers[i], papers[j]


def run_sampler(
    pairs: Iterator[tuple],
    N: int,
    distances: Callable[[list[tuple]], Sequence[float]],
    cfg: SamplerConfig,
    window: int = 1,
) -> tuple[SampleEstimate, list[tuple]]:
    """Consume ``pairs`` until the stopping rule fires or the stream ends.

    ``distances`` maps a batch of up to ``window`` pairs to their distances;
    updates are applied strictly in stream order, so the outcome does not
    depend on the window size.
    """
    threshold = cfg.epsilon / 10
    est = SampleEstimate(N)
    sampled: list[tuple] = []
    run = 0
    while True:
        batch = [pr for _, pr in zip(range(window), pairs)]
        if not batch:
            return est, sampled
        for pr, r in zip(batch, distances(batch)):
            est = update_estimate(est, float(r))
            sampled.append((pr[0], pr[1], float(r)))
            run = run + 1 if est.std_error < threshold else 0
            if run >= cfg.streak:
                return est, sampled


def estimate_distribution(
    g: CitationGraph,
    papers=None,
    cfg: SamplerConfig = SamplerConfig(),
    solver_cfg: SolverConfig = SolverConfig(),
    parallelism: int = 1,
) -> tuple[SampleEstimate, list[tuple[str, str, float]]]:
    """Sample pair resistances with the iterative solver until the mean is stable.

    Returns the estimate and the sampled ``(paper_a, paper_b, resistance)``
    rows in sampling order.
    """
    idx = g.papers if papers is None else np.unique([g.node(x) for x in papers])
    if len(idx) < 2:
        raise DomainError("need at least two papers to form pairs")
    sub, local = _component_graph(g, idx)
    to_local = dict(zip(idx.tolist(), local.tolist()))

    def distances(batch):
        ps = np.array([to_local[a] for a, _ in batch])
        qs = np.array([to_local[b] for _, b in batch])
        lower, upper, _, _ = solve_pairs(sub, ps, qs, solver_cfg, parallelism)
        return np.where(np.isfinite(upper), 0.5 * (lower + upper), np.inf)

    N = len(idx) * (len(idx) - 1) // 2
    window = 32 * max(parallelism, 1)
    est, rows = run_sampler(
        shuffle_pairs(idx.tolist(), cfg.rng_seed), N, distances, cfg, window
    )
    return est, [(g.ids[a], g.ids[b], r) for a, b, r in rows]


def write_estimate_csv(fh, est: SampleEstimate, seed: int) -> None:
    fh.write(f"# seed={seed}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["n", "N", "mean", "std_error"])
    writer.writerow([est.n, est.N, fmt(est.mean), fmt(est.std_error)])


def write_samples_csv(fh, rows, seed: int) -> None:
    fh.write(f"# seed={seed}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["paper_a", "paper_b", "resistance"])
    for a, b, r in rows:
        writer.writerow([a, b, fmt(r)])
