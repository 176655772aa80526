"""Request generation, parameter sweeps and provenance for reproducible runs."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import QsrError
from .fptas import FptasParams, params_from_omega, run_fptas
from .intra_segment import build_intra_table
from .online import OnlineParams, run_trace
from .topology import COUNTEREXAMPLE_SR_NODES, Network, Request, all_sr_nodes, load_requests, resolve_topology

MODES = ("random_pairs", "single_pair", "per_node")
AXES = ("q_r", "epsilon", "phi")


def version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _reachable_from(net: Network, u: str) -> set[str]:
    seen = {net.index[u]}
    stack = [net.index[u]]
    while stack:
        x = stack.pop()
        for e in net.out_links[x]:
            y = int(net.dst[e])
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return {net.nodes[i] for i in seen}


def _sr_set(net: Network, src: str, dst: str, sr_nodes) -> tuple[str, ...]:
    if sr_nodes == "all":
        return all_sr_nodes(net, src, dst)
    return tuple(v for v in sr_nodes if v not in (src, dst))


def gen_requests(
    net: Network,
    count: int,
    demand: float,
    mode: str = "random_pairs",
    seed: int = 0,
    src: str | None = None,
    dst: str | None = None,
    sr_nodes="all",
    q_max: int = 1,
) -> list[Request]:
    """Deterministic request sets.

    ``random_pairs`` draws ordered pairs uniformly over distinct reachable
    pairs; ``per_node`` lets every node in turn pick a random reachable target
    (cycling over nodes when count > n); ``single_pair`` repeats src -> dst.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    rng = np.random.default_rng(seed)
    reach = {v: sorted(_reachable_from(net, v) - {v}, key=net.index.__getitem__) for v in net.nodes}
    pairs: list[tuple[str, str]] = []
    if mode == "single_pair":
        if src is None or dst is None:
            raise ValueError("single_pair needs src and dst")
        pairs = [(src, dst)] * count
    elif mode == "random_pairs":
        universe = [(u, v) for u in net.nodes for v in reach[u]]
        picks = rng.integers(len(universe), size=count)
        pairs = [universe[i] for i in picks]
    else:
        for i in range(count):
            u = net.nodes[i % net.n]
            if not reach[u]:
                continue
            pairs.append((u, reach[u][int(rng.integers(len(reach[u])))]))
    out = []
    for i, (u, v) in enumerate(pairs):
        sr = _sr_set(net, u, v, sr_nodes)
        out.append(Request(i, u, v, float(demand), sr, min(q_max, len(sr) + 1)).check(net))
    return out


def default_requests(ref: str, net: Network, online: bool, seed: int) -> list[Request]:
    """The simulation settings for the bundled networks."""
    base = ref.partition(":")[0]
    if base == "abilene":
        if online:
            return gen_requests(net, 100, 5.0, "random_pairs", seed)
        return gen_requests(net, 12, 20.0, "per_node", seed)
    if base in ("chains", "example1", "example2"):
        sr = COUNTEREXAMPLE_SR_NODES if base == "example1" else "all"
        return gen_requests(net, 100 if online else 1, 5.0 if online else 100.0,
                            "single_pair", seed, "s", "t", sr)
    raise QsrError(f"no default requests for topology {ref!r}; pass --requests")


def override(requests: Sequence[Request], net: Network, q_r: int | None = None, sr_nodes=None) -> list[Request]:
    out = []
    for r in requests:
        sr = r.sr_nodes if sr_nodes is None else _sr_set(net, r.src, r.dst, sr_nodes)
        q = r.q_max if q_r is None else q_r
        out.append(Request(r.id, r.src, r.dst, r.demand, sr, q).check(net))
    return out


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class SweepSpec:
    axis: str
    values: list
    topology: str = "chains"
    requests: str | None = None
    mode: str | None = None  # offline | online; defaults from the axis
    epsilon: float = 0.1
    omega: float | None = None
    phi: float = 10.0
    q_r: int | None = None
    sr_nodes: object = None
    seed: int = 0
    baseline: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        diffs = np.diff(np.asarray(self.values, dtype=float))
        if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("sweep values must be strictly monotone")
        if self.axis == "epsilon" and not all(0 < v < 1 for v in self.values):
            raise ValueError("epsilon values must lie in (0, 1)")
        if self.axis == "phi" and not all(v > 0 for v in self.values):
            raise ValueError("phi values must be positive")
        if self.axis == "q_r" and not all(int(v) == v and v >= 1 for v in self.values):
            raise ValueError("q_r values must be integers >= 1")
        if self.mode is None:
            self.mode = "online" if self.axis == "phi" else "offline"
        if self.mode not in ("offline", "online"):
            raise ValueError("mode must be offline or online")
        if self.axis == "epsilon" and self.mode != "offline":
            raise ValueError("the epsilon axis needs the offline solver")
        if self.axis == "phi" and self.mode != "online":
            raise ValueError("the phi axis needs the online solver")


def _load_base(spec: SweepSpec):
    net = resolve_topology(spec.topology)
    if spec.requests:
        reqs = load_requests(Path(spec.requests), net)
    else:
        reqs = default_requests(spec.topology, net, spec.mode == "online", spec.seed)
    return net, override(reqs, net, spec.q_r, spec.sr_nodes)


def run_offline(net, requests, params: FptasParams):
    table = build_intra_table(net, requests)
    return run_fptas(net, requests, table, params)


def run_online(net, trace, phi: float):
    table = build_intra_table(net, trace)
    return run_trace(trace, table, OnlineParams.for_trace(phi, trace))


SWEEP_COLUMNS = {
    "offline": ["lambda", "phases", "steps"],
    "online": ["acceptance_ratio", "violation_ratio", "accepted_demand"],
}


def sweep(spec: SweepSpec) -> list[dict]:
    """One row per axis value; failing rows are kept with ``status = failed``."""
    net, base = _load_base(spec)
    rows = []
    for value in spec.values:
        row = {spec.axis: value, "status": "ok"}
        t0 = time.perf_counter()
        try:
            reqs = base
            if spec.axis == "q_r":
                reqs = override(base, net, int(value))
            if spec.mode == "offline":
                eps = value if spec.axis == "epsilon" else spec.epsilon
                params = (params_from_omega(spec.omega, net.m) if spec.omega and spec.axis != "epsilon"
                          else FptasParams.from_epsilon(eps, net.m))
                res = run_offline(net, reqs, params)
                row.update({"lambda": res.lambda_, "phases": res.phases, "steps": res.steps})
            else:
                phi = value if spec.axis == "phi" else spec.phi
                res = run_online(net, reqs, phi)
                row.update({"acceptance_ratio": res.acceptance_ratio,
                            "violation_ratio": res.violation_ratio,
                            "accepted_demand": res.accepted_demand})
        except (QsrError, ValueError) as exc:
            row["status"] = "failed"
            row["error"] = str(exc)
        row["wall_time_s"] = time.perf_counter() - t0
        rows.append(row)

    base_value = spec.baseline
    if base_value is None:
        base_value = 0.1 if spec.axis == "epsilon" and 0.1 in spec.values else spec.values[0]
    ref = next((r["wall_time_s"] for r in rows if r[spec.axis] == base_value), None)
    for r in rows:
        r["normalized_time"] = r["wall_time_s"] / ref if ref else float("nan")
    return rows


def sweep_csv(spec: SweepSpec, rows: list[dict]) -> str:
    cols = [spec.axis, *SWEEP_COLUMNS[spec.mode], "wall_time_s", "normalized_time", "status"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r.get(k, "") for k in cols})
    return buf.getvalue()


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n"
