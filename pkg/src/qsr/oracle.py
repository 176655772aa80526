"""Exact reference solutions for desk-scale instances.

Every SR-node list of every request is enumerated explicitly, turned into a
column g_r^k, and the path-based LPs are solved with the dense simplex in
``qsr.simplex``.  Nothing here uses the layered auxiliary graph, so results
are an independent check on the kernel and on both solvers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EnumerationTooLarge, SolverError
from .intra_segment import IntraTable
from .simplex import certify, simplex_max
from .topology import Network, Request

DEFAULT_CAP = 10**6
DEDUP_DECIMALS = 12
MAX_LP_COLUMNS = 20_000
ILP_MAX_REQUESTS = 15


def raw_list_count(r: Request) -> int:
    """|K_r| counting empty positions: (|N_r| + 1) ** (Q_r - 1)."""
    return (len(r.sr_nodes) + 1) ** (r.q_max - 1)


def raw_sr_lists(r: Request, cap: int = DEFAULT_CAP):
    """Every raw list (k_1..k_{Q-1}) with ``None`` for an empty position."""
    if raw_list_count(r) > cap:
        raise EnumerationTooLarge(f"{raw_list_count(r)} raw SR-lists exceed the cap of {cap}")
    return list(itertools.product([None, *r.sr_nodes], repeat=r.q_max - 1))


def collapse(raw) -> tuple[str, ...]:
    """Drop empty positions, then merge consecutive repeats (a zero-length segment)."""
    out: list[str] = []
    for k in raw:
        if k is not None and (not out or out[-1] != k):
            out.append(k)
    return tuple(out)


def unit_flow(table: IntraTable, src: str, dst: str, k: Sequence[str]) -> np.ndarray:
    """g(e) by summing the per-leg splits link by link."""
    acc: dict[int, float] = {}
    hops = [src, *k, dst]
    for u, v in zip(hops, hops[1:]):
        if u == v:
            continue
        for e, f in table[(u, v)].as_dict().items():
            acc[e] = acc.get(e, 0.0) + f
    g = np.zeros(table.net.m)
    for e, f in acc.items():
        g[e] = f
    return g


@dataclass
class Columns:
    request: Request
    lists: list[tuple[str, ...]]
    G: np.ndarray  # one row per distinct g vector
    enumerated: int  # lists generated before dedup


@dataclass
class EnumeratedColumns:
    per_request: list[Columns]

    @property
    def total(self) -> int:
        return sum(len(c.lists) for c in self.per_request)


def _lists_dfs(r: Request, table: IntraTable, cap: int):
    """Collapsed lists (no empties, no consecutive repeats) whose every leg is routable."""
    out: list[tuple[str, ...]] = []
    depth = r.q_max - 1

    def ok(u, v):
        return table.reachable(u, v)

    def walk(prefix: list[str]):
        last = prefix[-1] if prefix else r.src
        if ok(last, r.dst):
            out.append(tuple(prefix))
            if len(out) > cap:
                raise EnumerationTooLarge(f"more than {cap} SR-lists for request {r.id}; raise the cap")
        if len(prefix) == depth:
            return
        for k in r.sr_nodes:
            if k != last and ok(last, k):
                prefix.append(k)
                walk(prefix)
                prefix.pop()

    walk([])
    return out


def enumerate_sr_lists(r: Request, table: IntraTable, cap: int = DEFAULT_CAP, dedup: bool = True) -> Columns:
    """All distinct SR-functions of request ``r``.

    Lists are generated in collapsed form and legs without an IGP route are
    pruned, so ``cap`` bounds the lists actually generated.
    """
    lists = _lists_dfs(r, table, cap)
    rows, kept = [], []
    seen = set()
    for k in lists:
        g = unit_flow(table, r.src, r.dst, k)
        key = np.round(g, DEDUP_DECIMALS).tobytes()
        if dedup and key in seen:
            continue
        seen.add(key)
        rows.append(g)
        kept.append(k)
    return Columns(r, kept, np.vstack(rows), len(lists))


def enumerate_all(requests: Sequence[Request], table: IntraTable, cap: int = DEFAULT_CAP) -> EnumeratedColumns:
    return EnumeratedColumns([enumerate_sr_lists(r, table, cap) for r in requests])


@dataclass
class OfflineCertificate:
    lambda_star: float
    x: list[np.ndarray]  # flow per column, per request
    link_load: np.ndarray
    gap: float

    def throughput(self, r_index: int) -> float:
        return float(self.x[r_index].sum())


def _check_size(cols: int):
    if cols > MAX_LP_COLUMNS:
        raise SolverError(f"{cols} LP columns exceed the desk-scale limit {MAX_LP_COLUMNS}")


def solve_offline_exact(net: Network, requests: Sequence[Request], columns: EnumeratedColumns) -> OfflineCertificate:
    """max lambda  s.t.  sum_k x_rk >= lambda d_r,  sum g x <= c,  x >= 0."""
    per = columns.per_request
    sizes = [len(c.lists) for c in per]
    ncol = 1 + sum(sizes)
    _check_size(ncol)
    R = len(per)
    A = np.zeros((R + net.m, ncol))
    b = np.concatenate([np.zeros(R), net.capacity])
    obj = np.zeros(ncol)
    obj[0] = 1.0
    at = 1
    for i, (r, col) in enumerate(zip(requests, per)):
        span = slice(at, at + sizes[i])
        A[i, 0] = r.demand
        A[i, span] = -1.0
        A[R:, span] = col.G.T
        at += sizes[i]
    res = simplex_max(obj, A, b)
    gap = certify(obj, A, b, res)
    x = res.x
    flows, at = [], 1
    for s in sizes:
        flows.append(x[at:at + s].copy())
        at += s
    load = A[R:, 1:] @ x[1:]
    lam = min(float(f.sum()) / r.demand for f, r in zip(flows, requests))
    if load.max(initial=0.0) > 0 and np.any(load - net.capacity > 1e-9 * net.capacity.max()):
        raise SolverError("offline certificate exceeds a capacity")
    if abs(lam - res.objective) > 1e-9 * max(1.0, res.objective):
        raise SolverError("offline certificate does not realize lambda")
    return OfflineCertificate(res.objective, flows, load, gap)


def solve_online_hindsight(net: Network, trace: Sequence[Request], columns: EnumeratedColumns) -> float:
    """LP relaxation of the admission problem: an upper bound on accepted demand."""
    per = columns.per_request
    if not per:
        return 0.0
    sizes = [len(c.lists) for c in per]
    ncol = sum(sizes)
    _check_size(ncol)
    R = len(per)
    A = np.zeros((R + net.m, ncol))
    b = np.concatenate([np.ones(R), net.capacity])
    obj = np.zeros(ncol)
    at = 0
    for i, (r, col) in enumerate(zip(trace, per)):
        span = slice(at, at + sizes[i])
        A[i, span] = 1.0
        A[R:, span] = r.demand * col.G.T
        obj[span] = r.demand
        at += sizes[i]
    res = simplex_max(obj, A, b)
    certify(obj, A, b, res)
    return res.objective


def solve_online_integral(net: Network, trace: Sequence[Request], columns: EnumeratedColumns) -> float:
    """Exact 0/1 admission optimum by branch and bound; small traces only."""
    per = columns.per_request
    if len(per) > ILP_MAX_REQUESTS:
        raise SolverError(f"integral search is limited to {ILP_MAX_REQUESTS} requests")
    demands = [r.demand for r in trace]
    suffix = np.concatenate([np.cumsum(demands[::-1])[::-1], [0.0]])
    loads = [r.demand * c.G for r, c in zip(trace, per)]
    best = 0.0

    def go(i, residual, value):
        nonlocal best
        if value > best:
            best = value
        if i == len(per) or value + suffix[i] <= best:
            return
        for row in loads[i]:
            if np.all(row <= residual + 1e-12):
                go(i + 1, residual - row, value + demands[i])
        go(i + 1, residual, value)

    go(0, net.capacity.astype(float).copy(), 0.0)
    return best
