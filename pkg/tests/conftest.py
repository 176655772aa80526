"""Shared builders for small instances."""

from __future__ import annotations

import numpy as np
import pytest

from qsr.topology import Link, Network, Request


def single_link(cap: float = 100.0) -> Network:
    return Network(["a", "b"], [Link(0, "a", "b", cap, 1)])


def random_instance(seed: int, n_max: int = 8, q_max: int = 3, sr_max: int = 4, requests: int | None = None):
    """A strongly connected random digraph plus 1-3 requests with small N_r and Q_r."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, n_max + 1))
    nodes = [f"v{i}" for i in range(n)]
    edges: dict[tuple[int, int], None] = {}
    ring = rng.permutation(n)
    for i in range(n):
        edges[(int(ring[i]), int(ring[(i + 1) % n]))] = None
    for _ in range(int(rng.integers(n, 2 * n + 1))):
        u, v = (int(x) for x in rng.choice(n, 2, replace=False))
        edges[(u, v)] = None
    links = [
        Link(i, nodes[u], nodes[v], float(rng.integers(5, 21) * 5), int(rng.integers(1, 4)))
        for i, (u, v) in enumerate(edges)
    ]
    net = Network(nodes, links)
    reqs = []
    for i in range(requests or int(rng.integers(1, 4))):
        s, t = (nodes[int(x)] for x in rng.choice(n, 2, replace=False))
        others = [v for v in nodes if v not in (s, t)]
        k = int(rng.integers(1, min(sr_max, len(others)) + 1))
        sr = tuple(others[int(x)] for x in rng.choice(len(others), k, replace=False))
        q = int(rng.integers(1, min(q_max, k + 1) + 1))
        reqs.append(Request(i, s, t, float(rng.integers(1, 5) * 10), sr, q).check(net))
    return net, reqs


@pytest.fixture
def link_net():
    return single_link()


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
