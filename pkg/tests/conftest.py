import numpy as np
import pytest

from citeresist.graph import build_graph


def make_graph(edges, weights=None):
    """Graph from ``(a, b)`` pairs; ``weights`` maps a pair (either order) to its conductance."""
    g = build_graph(edges)
    if weights is None:
        return g
    lookup = {frozenset(k): v for k, v in weights.items()}
    w = [lookup.get(frozenset(pair), 1.0) for pair in g.edge_pairs()]
    return g.with_link_weights(w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# (criterion, name, passed, detail) rows filled by test_acceptance.py
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:2d} {name}: {detail}")
