"""Min-cost SR-path kernel shared by the offline and online solvers.

For a request r the auxiliary graph has the source, ``q_max - 1`` layers holding
a copy of every SR-node, and the target.  A layer-to-layer link u->v costs the
dual length of the intra-segment split f_uv; u->u is a free pass-through, which
is how lists shorter than ``q_max - 1`` are represented.  A direct s->t link
covers the empty list.  A shortest s->t path in this DAG is a min-cost SR-path.

Ties are broken deterministically: the direct link wins, then each layer takes
the smallest node index (by network order) that still completes a minimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import MissingPairError, UnreachableError
from .intra_segment import IntraTable
from .topology import Request

INF = float("inf")


def sr_function(table: IntraTable, src: str, dst: str, k: Sequence[str], m: int | None = None) -> np.ndarray:
    """g(e) for one unit routed s -> k_1 -> ... -> t (consecutive repeats are free)."""
    if m is None:
        m = table.net.m
    g = np.zeros(m)
    hops = [src, *k, dst]
    for u, v in zip(hops, hops[1:]):
        if u == v:
            continue
        split = table[(u, v)]
        g[split.link_ids] += split.fractions
    return g


@dataclass(frozen=True)
class SrPathResult:
    k_star: tuple[str, ...]
    g: np.ndarray  # dense, indexed by link id
    L: float

    def g_sparse(self) -> dict[int, float]:
        nz = np.flatnonzero(self.g)
        return {int(e): float(self.g[e]) for e in nz}


@dataclass(frozen=True)
class LegCosts:
    """Array form of the APFSC restricted to one auxiliary graph."""

    direct: float
    head: np.ndarray  # s -> member
    mid: np.ndarray  # member -> member, 0 on the diagonal
    tail: np.ndarray  # member -> t


class AuxGraph:
    """Layered auxiliary graph for one request; built once and reused."""

    def __init__(self, table: IntraTable, r: Request):
        if r.q_max < 1:
            raise ValueError("q_max must be >= 1")
        if r.q_max >= 2 and not r.sr_nodes:
            raise ValueError("q_max >= 2 needs a nonempty SR-node set")
        net = table.net
        self.table = table
        self.request = r
        self.layers = r.q_max - 1
        members = sorted(r.sr_nodes, key=net.index.__getitem__) if self.layers else []
        self.members: tuple[str, ...] = tuple(members)
        k = len(self.members)

        rows: list[np.ndarray] = []
        pairs: list[tuple[str, str]] = []

        def row_for(u, v):
            if not table.reachable(u, v):
                return -1
            split = table[(u, v)]
            rows.append(split.dense(net.m))
            pairs.append((u, v))
            return len(rows) - 1

        self.direct_row = row_for(r.src, r.dst)
        if self.direct_row < 0:
            raise UnreachableError(r.src, r.dst)
        self.head_rows = np.array([row_for(r.src, u) for u in self.members], dtype=np.int64)
        self.tail_rows = np.array([row_for(u, r.dst) for u in self.members], dtype=np.int64)
        mid = np.full((k, k), -1, dtype=np.int64)
        if self.layers >= 2:
            for i, u in enumerate(self.members):
                for j, v in enumerate(self.members):
                    if i != j:
                        mid[i, j] = row_for(u, v)
        self.mid_rows = mid
        self.pairs = tuple(pairs)
        self.F = np.vstack(rows) if rows else np.zeros((0, net.m))
        self.F.flags.writeable = False

    @property
    def aux_links(self) -> list[tuple[tuple[int, str], tuple[int, str]]]:
        """Structural aux links as ((layer, node), (layer, node)); s is layer 0, t is layer q_max."""
        r, q = self.request, self.request.q_max
        out = [((0, r.src), (q, r.dst))]
        if self.layers == 0:
            return out
        out += [((0, r.src), (1, u)) for u in self.members]
        for i in range(1, self.layers):
            out += [((i, u), (i + 1, v)) for u in self.members for v in self.members]
        out += [((self.layers, u), (q, r.dst)) for u in self.members]
        return out

    def leg_costs(self, lengths: np.ndarray) -> LegCosts:
        c = self.F @ np.asarray(lengths, dtype=float)
        c = np.append(c, INF)  # row -1 -> unreachable
        mid = c[self.mid_rows]
        np.fill_diagonal(mid, 0.0)
        return LegCosts(float(c[self.direct_row]), c[self.head_rows], mid, c[self.tail_rows])


def build_aux_graph(table: IntraTable, r: Request) -> AuxGraph:
    return AuxGraph(table, r)


def apfsc(table: IntraTable, lengths: np.ndarray, pairs: Iterable[tuple[str, str]]) -> dict[tuple[str, str], float]:
    """c(u, v) = sum_e l_e f_uv(e); c(u, u) = 0 and unreachable pairs cost inf."""
    lengths = np.asarray(lengths, dtype=float)
    out = {}
    for u, v in pairs:
        if u == v:
            out[(u, v)] = 0.0
        elif not table.reachable(u, v):
            out[(u, v)] = INF
        else:
            split = table[(u, v)]
            out[(u, v)] = float(split.fractions @ lengths[split.link_ids])
    return out


def _as_leg_costs(aux: AuxGraph, costs) -> LegCosts:
    if isinstance(costs, LegCosts):
        return costs
    r, mem = aux.request, aux.members

    def get(u, v):
        if u == v:
            return 0.0
        try:
            return float(costs[(u, v)])
        except KeyError:
            raise MissingPairError(u, v) from None

    head = np.array([get(r.src, u) for u in mem])
    tail = np.array([get(u, r.dst) for u in mem])
    k = len(mem)
    mid = np.zeros((k, k))
    if aux.layers >= 2:
        mid = np.array([[get(u, v) for v in mem] for u in mem]).reshape(k, k)
    return LegCosts(get(r.src, r.dst), head, mid, tail)


def mincost_sr_path(aux: AuxGraph, costs: LegCosts | Mapping[tuple[str, str], float]) -> SrPathResult:
    """Shortest s->t path over the layers; returns the SR-list, its g and cost."""
    c = _as_leg_costs(aux, costs)
    r = aux.request
    m = aux.table.net.m
    if aux.layers == 0 or not len(aux.members):
        return SrPathResult((), sr_function(aux.table, r.src, r.dst, (), m), c.direct)

    # cost-to-go from each layer to t; togo[i][u] is for layer i+1
    togo = [c.tail]
    for _ in range(aux.layers - 1):
        togo.append(np.min(c.mid + togo[-1][None, :], axis=1))
    togo.reverse()
    via = c.head + togo[0]
    best = float(np.min(via))
    if c.direct <= best:
        return SrPathResult((), sr_function(aux.table, r.src, r.dst, (), m), c.direct)

    u = int(np.flatnonzero(via == best)[0])
    seq = [u]
    for i in range(1, aux.layers):
        step = c.mid[u] + togo[i]
        u = int(np.flatnonzero(step == togo[i - 1][u])[0])
        seq.append(u)
    k_star = []
    for u in seq:
        name = aux.members[u]
        if not k_star or k_star[-1] != name:
            k_star.append(name)
    k_star = tuple(k_star)
    return SrPathResult(k_star, sr_function(aux.table, r.src, r.dst, k_star, m), best)


def min_cost_sr_path(aux: AuxGraph, lengths: np.ndarray) -> SrPathResult:
    """APFSC under ``lengths`` followed by the layered shortest path."""
    return mincost_sr_path(aux, aux.leg_costs(lengths))


def sr_path_links(result: SrPathResult) -> np.ndarray:
    return np.flatnonzero(result.g > 0)
