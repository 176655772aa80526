"""Intra-segment flow splitting: the fraction f_uv(e) of a unit u->v flow on each link.

The only built-in policy is IGP shortest-path routing with per-hop ECMP.  Other
link-state policies plug in as any callable with the ``compute_ecmp_split``
signature.
"""

from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import MissingPairError, NoSuchLinkError, UnreachableError
from .topology import Network, Request


@dataclass(frozen=True)
class FlowSplit:
    src: str
    dst: str
    link_ids: np.ndarray  # sorted, int64
    fractions: np.ndarray  # aligned with link_ids, all > 0

    def fraction(self, link_id: int) -> float:
        pos = np.searchsorted(self.link_ids, link_id)
        if pos < len(self.link_ids) and self.link_ids[pos] == link_id:
            return float(self.fractions[pos])
        return 0.0

    def dense(self, m: int) -> np.ndarray:
        out = np.zeros(m)
        out[self.link_ids] = self.fractions
        return out

    def as_dict(self) -> dict[int, float]:
        return {int(e): float(f) for e, f in zip(self.link_ids, self.fractions)}

    def total(self) -> float:
        return float(self.fractions.sum())


SplitPolicy = Callable[[Network, str, str], FlowSplit]


def _dist_to(net: Network, v: int) -> list[float]:
    """Exact integer IGP distance from every node to ``v`` (inf if unreachable)."""
    dist = [float("inf")] * net.n
    dist[v] = 0
    heap = [(0, v)]
    while heap:
        d, x = heapq.heappop(heap)
        if d > dist[x]:
            continue
        for e in net.in_links[x]:
            y = int(net.src[e])
            nd = d + int(net.weight[e])
            if nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist


def _ecmp_from(net: Network, dist: list[float], u: int, v: int) -> FlowSplit:
    if dist[u] == float("inf"):
        raise UnreachableError(net.nodes[u], net.nodes[v])
    mass = {u: 1.0}
    frac: dict[int, float] = {}
    # Every shortest-DAG link strictly decreases the distance, so decreasing
    # distance order is a topological order.
    heap = [(-dist[u], u)]
    queued = {u}
    while heap:
        _, x = heapq.heappop(heap)
        if x == v:
            continue
        nxt = [e for e in net.out_links[x] if dist[int(net.dst[e])] + int(net.weight[e]) == dist[x]]
        share = mass[x] / len(nxt)
        for e in nxt:
            y = int(net.dst[e])
            frac[e] = frac.get(e, 0.0) + share
            mass[y] = mass.get(y, 0.0) + share
            if y not in queued:
                queued.add(y)
                heapq.heappush(heap, (-dist[y], y))
    ids = np.array(sorted(frac), dtype=np.int64)
    vals = np.array([frac[e] for e in ids], dtype=float)
    return FlowSplit(net.nodes[u], net.nodes[v], ids, vals)


def compute_ecmp_split(net: Network, u: str, v: str) -> FlowSplit:
    """Route one unit from ``u`` to ``v`` over all IGP shortest paths, splitting
    equally among the shortest next hops at every node."""
    if u == v:
        raise ValueError("u and v must differ")
    iv = net.index[v]
    return _ecmp_from(net, _dist_to(net, iv), net.index[u], iv)


@dataclass(frozen=True)
class IntraTable:
    """Closed-world map (u, v) -> FlowSplit.

    Pairs with no IGP route are recorded in ``unreachable``; looking them up
    raises UnreachableError, and any other miss raises MissingPairError.
    """

    net: Network
    entries: Mapping[tuple[str, str], FlowSplit]
    unreachable: frozenset = field(default_factory=frozenset)
    policy_tag: str = "ecmp"

    def __getitem__(self, pair: tuple[str, str]) -> FlowSplit:
        try:
            return self.entries[pair]
        except KeyError:
            if pair in self.unreachable:
                raise UnreachableError(*pair) from None
            raise MissingPairError(*pair) from None

    def __contains__(self, pair) -> bool:
        return pair in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def covers(self, pair) -> bool:
        return pair in self.entries or pair in self.unreachable

    def reachable(self, u: str, v: str) -> bool:
        if (u, v) in self.entries:
            return True
        if (u, v) in self.unreachable:
            return False
        raise MissingPairError(u, v)


def request_pairs(r: Request) -> list[tuple[str, str]]:
    """Ordered pairs over N_r + {s_r, t_r} that can appear as a segment."""
    heads = [r.src, *r.sr_nodes]
    tails = [*r.sr_nodes, r.dst]
    return [(u, v) for u in heads for v in tails if u != v]


def build_intra_table(
    net: Network,
    requests: Iterable[Request],
    policy: SplitPolicy | None = None,
    strict: bool = False,
) -> IntraTable:
    """Precompute f_uv for every segment pair any request can use.

    With ``strict`` every pair must be reachable; otherwise unreachable SR-node
    pairs are recorded and only a request whose own target is unreachable is an
    error.
    """
    pairs: dict[tuple[str, str], None] = {}
    endpoints = []
    for r in requests:
        endpoints.append((r.src, r.dst))
        for p in request_pairs(r):
            pairs.setdefault(p)

    entries: dict[tuple[str, str], FlowSplit] = {}
    unreachable = set()
    if policy is None:
        by_target: dict[str, list[str]] = {}
        for u, v in pairs:
            by_target.setdefault(v, []).append(u)
        for v, sources in by_target.items():
            iv = net.index[v]
            dist = _dist_to(net, iv)
            for u in sources:
                if dist[net.index[u]] == float("inf"):
                    unreachable.add((u, v))
                else:
                    entries[(u, v)] = _ecmp_from(net, dist, net.index[u], iv)
    else:
        for u, v in pairs:
            try:
                entries[(u, v)] = policy(net, u, v)
            except UnreachableError:
                unreachable.add((u, v))

    for pair in sorted(unreachable):
        if strict or pair in endpoints:
            raise UnreachableError(*pair)
    ordered = {p: entries[p] for p in pairs if p in entries}
    tag = "ecmp" if policy is None else getattr(policy, "__name__", "custom")
    return IntraTable(net, ordered, frozenset(unreachable), tag)


def merge_tables(*tables: IntraTable) -> IntraTable:
    entries: dict = {}
    unreachable: set = set()
    for t in tables:
        entries.update(t.entries)
        unreachable |= t.unreachable
    return IntraTable(tables[0].net, entries, frozenset(unreachable - set(entries)), tables[0].policy_tag)


def apply_adjacency_override(table: IntraTable, u: str, v: str) -> IntraTable:
    """Force segment u->v onto the single link u->v (an adjacency segment)."""
    net = table.net
    if (u, v) not in net.link_id:
        raise NoSuchLinkError(f"no link {u}->{v} for an adjacency segment")
    e = net.link_id[(u, v)]
    split = FlowSplit(u, v, np.array([e], dtype=np.int64), np.array([1.0]))
    entries = dict(table.entries)
    entries[(u, v)] = split
    return IntraTable(net, entries, table.unreachable - {(u, v)}, table.policy_tag)


def dump_csv(table: IntraTable, fh) -> None:
    """Write ``u,v,link_src,link_dst,fraction`` rows, one per nonzero fraction."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["u", "v", "link_src", "link_dst", "fraction"])
    net = table.net
    for (u, v), split in table.entries.items():
        for e, f in zip(split.link_ids, split.fractions):
            link = net.links[int(e)]
            w.writerow([u, v, link.src, link.dst, repr(float(f))])
