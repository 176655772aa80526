"""Primal-dual FPTAS for maximum concurrent throughput under Q-SR routing.

Phases route every request's full demand along successive min-cost SR-paths,
growing link lengths multiplicatively, until the dual objective reaches 1.
Flows are routed against the original (not residual) capacities; feasibility
comes from dividing by log_{1+eps}(1/delta) at the end.

Only phases completed while D(l) < 1 held are scaled and reported: those are
the flows whose per-link scaling factor is provably below log_{1+eps}(1/delta),
and they correspond exactly to lambda = (phases - 1) / log_{1+eps}(1/delta).
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import PhaseLimitExceeded
from .intra_segment import IntraTable
from .sr_path import AuxGraph, SrPathResult, min_cost_sr_path, sr_function
from .topology import Network, Request

SAFETY_FACTOR = 10


@dataclass(frozen=True)
class FptasParams:
    epsilon: float
    delta: float
    omega: float | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    @classmethod
    def from_epsilon(cls, epsilon: float, m: int) -> "FptasParams":
        """delta = ((1 - eps) / m) ** (1 / eps), the choice giving a (1 - eps)^-3 ratio."""
        return cls(epsilon, ((1 - epsilon) / m) ** (1 / epsilon))

    @property
    def log_scale(self) -> float:
        return math.log(1 / self.delta) / math.log1p(self.epsilon)

    @property
    def ratio(self) -> float:
        """Guaranteed OPT / lambda bound, (1 - eps)^-3."""
        return (1 - self.epsilon) ** -3


def params_from_omega(omega: float, m: int) -> FptasParams:
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if m < 1:
        raise ValueError("m must be >= 1")
    eps = 1 - (1 + omega) ** (-1 / 3)
    return FptasParams(eps, ((1 - eps) / m) ** (1 / eps), omega)


def dual_objective(lengths: np.ndarray, net: Network) -> float:
    return float(np.dot(lengths, net.capacity))


def scale_solution(raw_flows: np.ndarray, epsilon: float, delta: float, phases: int):
    """Divide flows and (phases - 1) by log_{1+eps}(1/delta)."""
    if phases < 1:
        raise ValueError("phases must be >= 1")
    factor = math.log(1 / delta) / math.log1p(epsilon)
    return np.asarray(raw_flows, dtype=float) / factor, (phases - 1) / factor


@dataclass
class FptasResult:
    lambda_: float
    flows: np.ndarray
    raw_flows: np.ndarray
    phases: int
    steps: int
    per_request_routed: dict[int, float]
    kappa: np.ndarray
    epsilon: float
    delta: float
    demand_scale: float = 1.0
    final_dual: float = float("nan")
    final_raw_flows: np.ndarray | None = None
    wall_time_ms: float = 0.0
    paths: dict[int, dict[tuple[str, ...], float]] = field(default_factory=dict)

    @property
    def log_scale(self) -> float:
        return math.log(1 / self.delta) / math.log1p(self.epsilon)

    def summary(self, net: Network) -> dict:
        util = self.flows / net.capacity
        return {
            "lambda": self.lambda_,
            "phases": self.phases,
            "steps": self.steps,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "demand_scale": self.demand_scale,
            "per_link_utilization": {
                f"{l.src}->{l.dst}": float(u) for l, u in zip(net.links, util)
            },
            "per_request_routed": {str(k): v for k, v in self.per_request_routed.items()},
            "wall_time_ms": self.wall_time_ms,
        }


def _shortest_route_lower_bound(net: Network, requests, table: IntraTable) -> float:
    """lambda achieved by sending every request on its plain IGP route (a feasible point)."""
    load = np.zeros(net.m)
    for r in requests:
        load += r.demand * sr_function(table, r.src, r.dst, (), net.m)
    used = load > 0
    return float(np.min(net.capacity[used] / load[used]))


def phase_guard(net: Network, requests: Sequence[Request], params: FptasParams) -> int:
    """Ten times the phase count implied by a crude upper bound on lambda*."""
    env = os.environ.get("QSR_MAX_PHASES")
    if env:
        return int(env)
    beta_ub = min(
        sum(net.capacity[e] for e in net.out_links[net.index[r.src]]) / r.demand for r in requests
    )
    return SAFETY_FACTOR * (math.ceil(max(beta_ub, 1.0) * params.log_scale) + 1)


def run_fptas(
    net: Network,
    requests: Sequence[Request],
    table: IntraTable,
    params: FptasParams,
    max_phases: int | None = None,
    normalize_demands: bool = True,
    on_step: Callable[[int, int, float, SrPathResult], None] | None = None,
) -> FptasResult:
    """Approximate the maximum concurrent throughput lambda.

    With ``normalize_demands`` the demands are first shrunk by a feasible lower
    bound on lambda* whenever that bound is below 1, so the run starts with
    lambda* >= 1; the reported lambda and flows refer to the original demands.
    ``on_step(phase, request_index, delta, path)`` observes every step.
    """
    t0 = time.perf_counter()
    requests = list(requests)
    if not requests:
        raise ValueError("at least one request is required")
    auxes = [AuxGraph(table, r) for r in requests]
    eps, delta = params.epsilon, params.delta
    cap = net.capacity

    scale = 1.0
    if normalize_demands:
        lb = _shortest_route_lower_bound(net, requests, table)
        if lb < 1.0:
            scale = lb
    demands = [r.demand * scale for r in requests]
    if max_phases is None:
        scaled = [Request(r.id, r.src, r.dst, d, r.sr_nodes, r.q_max) for r, d in zip(requests, demands)]
        max_phases = phase_guard(net, scaled, params)

    lengths = delta / cap
    flows = np.zeros(net.m)
    kappa = np.zeros(net.m)
    routed = np.zeros(len(requests))
    kept_flows, kept_kappa, kept_routed = flows.copy(), kappa.copy(), routed.copy()
    paths: dict[int, dict[tuple[str, ...], float]] = {}
    kept_paths: dict[int, dict[tuple[str, ...], float]] = {}
    phases = steps = 0
    dual = dual_objective(lengths, net)

    while dual < 1:
        if phases >= max_phases:
            raise PhaseLimitExceeded(
                f"no termination after {phases} phases (D(l) = {dual:.6g}, eps = {eps}, "
                f"delta = {delta:.3g}); raise QSR_MAX_PHASES to continue"
            )
        for i, aux in enumerate(auxes):
            d = demands[i]
            while d > 0:
                path = min_cost_sr_path(aux, lengths)
                g = path.g
                on = g > 0
                bottleneck = float(np.min(cap[on] / g[on]))
                step = min(d, bottleneck)
                d -= step
                load = g * step / cap
                flows += g * step
                kappa += load
                lengths = lengths * (1 + eps * load)
                routed[i] += step
                per = paths.setdefault(requests[i].id, {})
                per[path.k_star] = per.get(path.k_star, 0.0) + step
                steps += 1
                if on_step is not None:
                    on_step(phases, i, step, path)
        phases += 1
        dual = dual_objective(lengths, net)
        if dual < 1:
            kept_flows, kept_kappa, kept_routed = flows.copy(), kappa.copy(), routed.copy()
            kept_paths = {k: dict(v) for k, v in paths.items()}

    scaled_flows, lam = scale_solution(kept_flows, eps, delta, phases)
    factor = params.log_scale
    return FptasResult(
        lambda_=lam * scale,
        flows=scaled_flows,
        raw_flows=kept_flows,
        phases=phases,
        steps=steps,
        per_request_routed={r.id: float(x / factor) for r, x in zip(requests, kept_routed)},
        kappa=kept_kappa,
        epsilon=eps,
        delta=delta,
        demand_scale=scale,
        final_dual=dual,
        final_raw_flows=flows,
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
        paths={k: {p: x / factor for p, x in v.items()} for k, v in kept_paths.items()},
    )
