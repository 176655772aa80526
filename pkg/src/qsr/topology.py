"""Directed capacitated network model, file ingestion and test-network generators.

Node names are strings on the outside and dense integer indices inside.  Both
networks and requests are immutable once built.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, ValidationError

FORMAT_VERSION = 1

# Stand-in for "unlimited" capacity; keeps every quantity finite.
UNLIMITED_CAPACITY = 1e9


@dataclass(frozen=True)
class Link:
    id: int
    src: str
    dst: str
    capacity: float
    igp_weight: int = 1


class Network:
    """Directed graph with per-link capacity and integer IGP weight."""

    def __init__(self, nodes: Sequence[str], links: Iterable[Link]):
        self.nodes: tuple[str, ...] = tuple(str(v) for v in nodes)
        self.links: tuple[Link, ...] = tuple(links)
        self.index = {name: i for i, name in enumerate(self.nodes)}
        self._validate()

        self.n = len(self.nodes)
        self.m = len(self.links)
        self.src = np.array([self.index[l.src] for l in self.links], dtype=np.int64)
        self.dst = np.array([self.index[l.dst] for l in self.links], dtype=np.int64)
        self.capacity = np.array([l.capacity for l in self.links], dtype=float)
        self.weight = np.array([l.igp_weight for l in self.links], dtype=np.int64)
        for arr in (self.src, self.dst, self.capacity, self.weight):
            arr.flags.writeable = False

        self.link_id = {(l.src, l.dst): l.id for l in self.links}
        self.out_links: list[list[int]] = [[] for _ in range(self.n)]
        self.in_links: list[list[int]] = [[] for _ in range(self.n)]
        for l in self.links:
            self.out_links[self.index[l.src]].append(l.id)
            self.in_links[self.index[l.dst]].append(l.id)

    def _validate(self):
        if len(self.index) != len(self.nodes):
            raise ValidationError("duplicate node names")
        if len(self.nodes) < 2:
            raise ValidationError("a network needs at least 2 nodes")
        if not self.links:
            raise ValidationError("a network needs at least 1 link")
        seen = set()
        for i, l in enumerate(self.links):
            if l.id != i:
                raise ValidationError(f"link ids must be dense and ordered; got {l.id} at {i}")
            for end in (l.src, l.dst):
                if end not in self.index:
                    raise ValidationError(f"link {l.src}->{l.dst} has dangling endpoint {end!r}")
            if l.src == l.dst:
                raise ValidationError(f"self-loop at {l.src!r}")
            if (l.src, l.dst) in seen:
                raise ValidationError(f"duplicate link {l.src}->{l.dst}")
            seen.add((l.src, l.dst))
            if not (isinstance(l.capacity, (int, float)) and math.isfinite(l.capacity) and l.capacity > 0):
                raise ValidationError(f"link {l.src}->{l.dst} has nonpositive capacity {l.capacity!r}")
            if isinstance(l.igp_weight, bool) or not isinstance(l.igp_weight, (int, np.integer)) or l.igp_weight < 1:
                raise ValidationError(f"link {l.src}->{l.dst} needs an integer weight >= 1, got {l.igp_weight!r}")

    def link(self, u: str, v: str) -> Link:
        return self.links[self.link_id[(u, v)]]

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.nodes == other.nodes and self.links == other.links

    def __hash__(self):
        return hash((self.nodes, self.links))

    def __repr__(self):
        return f"Network(n={self.n}, m={self.m})"

    def digest(self) -> str:
        """sha256 of the canonical serialization; used for provenance."""
        blob = json.dumps(network_to_doc(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class Request:
    id: int
    src: str
    dst: str
    demand: float
    sr_nodes: tuple[str, ...] = field(default=())
    q_max: int = 1

    def check(self, net: Network | None = None) -> "Request":
        if self.src == self.dst:
            raise ValidationError(f"request {self.id}: source equals target")
        if not (math.isfinite(self.demand) and self.demand > 0):
            raise ValidationError(f"request {self.id}: demand must be positive")
        if int(self.q_max) != self.q_max or self.q_max < 1:
            raise ValidationError(f"request {self.id}: q_max must be an integer >= 1")
        if self.src in self.sr_nodes or self.dst in self.sr_nodes:
            raise ValidationError(f"request {self.id}: endpoints may not be SR-nodes")
        if len(set(self.sr_nodes)) != len(self.sr_nodes):
            raise ValidationError(f"request {self.id}: repeated SR-node")
        if self.q_max - 1 > len(self.sr_nodes):
            raise ValidationError(
                f"request {self.id}: q_max - 1 = {self.q_max - 1} exceeds |N_r| = {len(self.sr_nodes)}"
            )
        if net is not None:
            for v in (self.src, self.dst, *self.sr_nodes):
                if v not in net.index:
                    raise ValidationError(f"request {self.id}: unknown node {v!r}")
        return self

    def with_q(self, q_max: int) -> "Request":
        return Request(self.id, self.src, self.dst, self.demand, self.sr_nodes, q_max)


def all_sr_nodes(net: Network, src: str, dst: str) -> tuple[str, ...]:
    return tuple(v for v in net.nodes if v not in (src, dst))


# ---------------------------------------------------------------- documents

def _read_doc(doc):
    if isinstance(doc, (str, Path)):
        text = Path(doc).read_text() if not str(doc).lstrip().startswith(("{", "[")) else str(doc)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    version = doc.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {version!r}")
    return doc


def load_network(doc) -> Network:
    """Build a validated Network from a topology document (dict, JSON text or path).

    Links flagged ``bidirectional`` become two independent directed links.
    Ordering follows the document.
    """
    doc = _read_doc(doc)
    try:
        nodes = [str(v) for v in doc["nodes"]]
        raw_links = list(doc["links"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"topology document needs 'nodes' and 'links': {exc}") from exc

    links = []
    for entry in raw_links:
        if not isinstance(entry, dict):
            raise ParseError(f"link entry must be an object, got {entry!r}")
        try:
            u, v = str(entry["src"]), str(entry["dst"])
            cap = entry["capacity"]
        except KeyError as exc:
            raise ParseError(f"link entry missing field {exc}") from exc
        if isinstance(cap, bool) or not isinstance(cap, (int, float)):
            raise ValidationError(f"link {u}->{v}: capacity must be a number")
        w = entry.get("weight", 1)
        if isinstance(w, float) and w.is_integer():
            w = int(w)
        pairs = [(u, v), (v, u)] if entry.get("bidirectional", False) else [(u, v)]
        for a, b in pairs:
            links.append(Link(len(links), a, b, float(cap), w))
    return Network(nodes, links)


def network_to_doc(net: Network) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "nodes": list(net.nodes),
        "links": [
            {"src": l.src, "dst": l.dst, "capacity": l.capacity, "weight": int(l.igp_weight)}
            for l in net.links
        ],
    }


def load_requests(doc, net: Network | None = None) -> list[Request]:
    """Parse a request document; ``sr_nodes: "all"`` needs ``net`` to expand."""
    doc = _read_doc(doc)
    try:
        entries = list(doc["requests"])
    except (KeyError, TypeError) as exc:
        raise ParseError("request document needs a 'requests' list") from exc
    out = []
    for i, entry in enumerate(entries):
        try:
            src, dst = str(entry["src"]), str(entry["dst"])
            demand = float(entry["demand"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"request {i}: {exc}") from exc
        sr = entry.get("sr_nodes", [])
        if sr == "all":
            if net is None:
                raise ParseError('sr_nodes "all" requires a network')
            sr = all_sr_nodes(net, src, dst)
        elif not isinstance(sr, list):
            raise ParseError(f"request {i}: sr_nodes must be a list or \"all\"")
        q = entry.get("q_max", 1)
        out.append(Request(int(entry.get("id", i)), src, dst, demand, tuple(str(v) for v in sr), q).check(net))
    return out


def requests_to_doc(requests: Sequence[Request]) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "requests": [
            {"id": r.id, "src": r.src, "dst": r.dst, "demand": r.demand,
             "sr_nodes": list(r.sr_nodes), "q_max": r.q_max}
            for r in requests
        ],
    }


# --------------------------------------------------------------- generators

def generate_parallel_chains(chains: int, interior_hops: int, capacity: float = 100.0) -> Network:
    """``chains`` link-disjoint s->t paths, each with ``interior_hops`` interior nodes.

    Interior node ``c{i}_{j}`` is the j-th hop of chain i.  All weights are 1, so
    every chain has the same IGP length.
    """
    if chains < 1 or interior_hops < 1:
        raise ValueError("chains and interior_hops must be >= 1")
    nodes = ["s"]
    links: list[Link] = []
    for i in range(1, chains + 1):
        path = ["s"] + [f"c{i}_{j}" for j in range(1, interior_hops + 1)] + ["t"]
        nodes.extend(path[1:-1])
        for u, v in zip(path, path[1:]):
            links.append(Link(len(links), u, v, float(capacity), 1))
    nodes.append("t")
    return Network(nodes, links)


def generate_example2(w_direct: int, capacity: float = UNLIMITED_CAPACITY) -> Network:
    """Five-node network with a single SR-node ``k`` and two direct links of weight ``w_direct``."""
    if w_direct < 1:
        raise ValueError("w_direct must be >= 1")
    spec = [("s", "a", 1), ("a", "b", 1), ("b", "k", 1), ("k", "a", 1), ("b", "t", 1),
            ("s", "k", w_direct), ("k", "t", w_direct)]
    links = [Link(i, u, v, float(capacity), int(w)) for i, (u, v, w) in enumerate(spec)]
    return Network(["s", "a", "b", "k", "t"], links)


# SR-node candidates of the two-SR counterexample; the chain interiors u*, v*
# are plain routers.
COUNTEREXAMPLE_SR_NODES = ("k1", "k2", "k3", "k4", "k5", "k6", "k7", "k8")


def generate_two_sr_counterexample(capacity: float = 100.0) -> Network:
    """Three disjoint s->t routes where every single-waypoint route crosses k3->k6.

    Route A is s->k3->k6->t.  Routes B and C are s->k1->u1->u2->u3->k4->t and
    s->k2->v1->v2->v3->k5->t.  Shortcuts k1,k2 -> k7 -> k3 and k6 -> k8 -> k4,k5
    make the IGP send k1->t and s->k4 (and every other one-waypoint leg pair)
    over k3->k6, while k1->k4 still follows its own chain.  With unit weights
    and equal capacities the throughput is one capacity for 2 segments and
    three capacities for 3 segments.
    """
    spec = [
        ("s", "k3"), ("k3", "k6"), ("k6", "t"),
        ("s", "k1"), ("k1", "u1"), ("u1", "u2"), ("u2", "u3"), ("u3", "k4"), ("k4", "t"),
        ("s", "k2"), ("k2", "v1"), ("v1", "v2"), ("v2", "v3"), ("v3", "k5"), ("k5", "t"),
        ("k1", "k7"), ("k2", "k7"), ("k7", "k3"),
        ("k6", "k8"), ("k8", "k4"), ("k8", "k5"),
    ]
    nodes = ["s", "k1", "k2", "k3", "k4", "k5", "k6", "k7", "k8",
             "u1", "u2", "u3", "v1", "v2", "v3", "t"]
    links = [Link(i, u, v, float(capacity), 1) for i, (u, v) in enumerate(spec)]
    return Network(nodes, links)


def load_bundled(name: str) -> Network:
    """Named networks: ``abilene``, ``example1``, ``example2[:w]``, ``chains[:c,h]``."""
    base, _, arg = name.partition(":")
    if base == "abilene":
        text = resources.files("qsr.data").joinpath("abilene.json").read_text()
        return load_network(json.loads(text))
    if base == "example1":
        return generate_two_sr_counterexample()
    if base == "example2":
        return generate_example2(int(arg) if arg else 1)
    if base == "chains":
        c, h = (int(x) for x in arg.split(",")) if arg else (5, 7)
        return generate_parallel_chains(c, h)
    raise KeyError(name)


def resolve_topology(ref: str) -> Network:
    """Accept a bundled network name or a path to a topology document."""
    try:
        return load_bundled(ref)
    except KeyError:
        pass
    path = Path(ref)
    if not path.exists():
        raise FileNotFoundError(ref)
    return load_network(path)
