"""Online primal-dual admission of SR requests.

Requests arrive one at a time.  Each is priced on its min-cost SR-path under
the current link lengths; it is rejected when that cost exceeds 1 and
otherwise routed whole, after which the lengths on its path grow.  Nothing is
ever rerouted or released.  Capacities are not enforced at admission time, so
the routed flow may exceed them by a bounded factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .intra_segment import IntraTable
from .sr_path import AuxGraph, min_cost_sr_path
from .topology import Request


@dataclass(frozen=True)
class OnlineParams:
    phi: float
    q_cap: int

    def __post_init__(self):
        if not self.phi > 0:
            raise ValueError("phi must be positive")
        if int(self.q_cap) != self.q_cap or self.q_cap < 1:
            raise ValueError("q_cap must be an integer >= 1")

    @classmethod
    def for_trace(cls, phi: float, trace: Iterable[Request]) -> "OnlineParams":
        return cls(phi, max(r.q_max for r in trace))


@dataclass
class Decision:
    request: Request
    accepted: bool
    k_star: tuple[str, ...]
    L: float
    z: float = 0.0
    g: np.ndarray | None = None
    dual_increase: float = 0.0
    primal_increase: float = 0.0
    lengths_before: np.ndarray | None = None


@dataclass
class OnlineState:
    lengths: np.ndarray
    flows: np.ndarray
    decisions: list[Decision] = field(default_factory=list)
    keep_lengths: bool = False
    _aux: dict = field(default_factory=dict, repr=False)

    @classmethod
    def empty(cls, m: int, keep_lengths: bool = False) -> "OnlineState":
        return cls(np.zeros(m), np.zeros(m), keep_lengths=keep_lengths)


def _aux_for(state: OnlineState, table: IntraTable, r: Request) -> AuxGraph:
    key = (r.src, r.dst, r.sr_nodes, r.q_max)
    aux = state._aux.get(key)
    if aux is None or aux.table is not table:
        aux = state._aux[key] = AuxGraph(table, r)
    return aux


def process_request(state: OnlineState, r: Request, table: IntraTable, params: OnlineParams) -> Decision:
    """Admit or reject ``r``; an admitted request updates lengths and flows in place."""
    net = table.net
    path = min_cost_sr_path(_aux_for(state, table, r), state.lengths)
    before = state.lengths.copy() if state.keep_lengths else None
    if path.L > 1:
        dec = Decision(r, False, path.k_star, path.L, lengths_before=before)
        state.decisions.append(dec)
        return dec

    load = path.g * r.demand / net.capacity
    old = state.lengths
    new = old * (1 + load) + params.phi / (params.q_cap * net.n) * load
    z = r.demand * (1 - path.L)
    dual_inc = z + float(np.dot(net.capacity, new - old))
    state.lengths = new
    state.flows = state.flows + path.g * r.demand
    dec = Decision(r, True, path.k_star, path.L, z, path.g, dual_inc, r.demand, before)
    state.decisions.append(dec)
    return dec


@dataclass
class OnlineResult:
    acceptance_ratio: float
    violation_ratio: float
    accepted_demand: float
    per_step_dual_increase: list[float]
    per_step_primal_increase: list[float]
    state: OnlineState
    params: OnlineParams

    def summary(self) -> dict:
        return {
            "acceptance_ratio": self.acceptance_ratio,
            "violation_ratio": self.violation_ratio,
            "accepted_demand": self.accepted_demand,
            "phi": self.params.phi,
            "q": self.params.q_cap,
            "per_request_decisions": [
                {"id": d.request.id, "accepted": d.accepted, "k_star": list(d.k_star),
                 "L": d.L, "z": d.z}
                for d in self.state.decisions
            ],
        }


def violation_ratio(flows: np.ndarray, capacity: np.ndarray) -> float:
    return float(np.max(flows / capacity))


def summarize(state: OnlineState, table: IntraTable, params: OnlineParams) -> OnlineResult:
    decs = state.decisions
    acc = [d for d in decs if d.accepted]
    return OnlineResult(
        acceptance_ratio=len(acc) / len(decs) if decs else 0.0,
        violation_ratio=violation_ratio(state.flows, table.net.capacity),
        accepted_demand=float(sum(d.request.demand for d in acc)),
        per_step_dual_increase=[d.dual_increase for d in acc],
        per_step_primal_increase=[d.primal_increase for d in acc],
        state=state,
        params=params,
    )


def run_trace(
    trace: Sequence[Request],
    table: IntraTable,
    params: OnlineParams,
    keep_lengths: bool = False,
) -> OnlineResult:
    """Feed ``trace`` through ``process_request`` in arrival order."""
    if not trace:
        raise ValueError("trace must be nonempty")
    state = OnlineState.empty(table.net.m, keep_lengths)
    for r in trace:
        process_request(state, r, table, params)
    return summarize(state, table, params)


@dataclass
class AuditRow:
    request_id: int
    dual_increase: float
    primal_increase: float
    ratio: float
    ok: bool


@dataclass
class AuditReport:
    rows: list[AuditRow]
    bound: float
    g_min: float
    B: float
    violation_ratio: float
    violation_bound: float

    @property
    def competitive_ok(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def violation_ok(self) -> bool:
        return self.violation_ratio <= self.violation_bound


def violation_log_bound(g_min: float, phi: float, q: int, n: int, guard: float = 1.0) -> tuple[float, float]:
    """(B, guard * ln(B Q n / phi + 1)) with B = 1/g_min + phi/(Q n)."""
    B = 1 / g_min + phi / (q * n)
    return B, guard * math.log(B * q * n / phi + 1)


def competitive_audit(
    state: OnlineState,
    params: OnlineParams,
    n: int,
    capacity: np.ndarray,
    slack: float = 1e-9,
    guard: float = 1.0,
) -> AuditReport:
    """Per accepted request check dD/dP <= 1 + phi, and the capacity-violation bound.

    ``g_min`` is the smallest positive g over all accepted paths; ``guard``
    multiplies the logarithmic bound.
    """
    rows = []
    g_min = math.inf
    for d in state.decisions:
        if not d.accepted:
            continue
        ratio = d.dual_increase / d.primal_increase
        rows.append(AuditRow(d.request.id, d.dual_increase, d.primal_increase, ratio,
                             ratio <= 1 + params.phi + slack))
        pos = d.g[d.g > 0]
        if len(pos):
            g_min = min(g_min, float(pos.min()))
    viol = violation_ratio(state.flows, capacity)
    if rows:
        B, vb = violation_log_bound(g_min, params.phi, params.q_cap, n, guard)
        vb += slack
    else:
        B, vb = math.nan, math.inf
    return AuditReport(rows, 1 + params.phi, g_min, B, viol, vb)


def exact_violation_bound(state: OnlineState, params: OnlineParams, n: int, capacity: np.ndarray) -> np.ndarray:
    """Per-link bound that holds without the 1 + x ~ e^x step.

    A link's length equals a * (prod(1 + x_i) - 1) with a = phi/(Qn) and x_i the
    per-admission loads, and before the last admission its length was at most
    1/g.  Returns, per link, ln(1 + l_max/a) where l_max bounds the final
    length; sum_i ln(1 + x_i) never exceeds it.
    """
    a = params.phi / (params.q_cap * n)
    bound = np.zeros(len(capacity))
    for d in state.decisions:
        if not d.accepted:
            continue
        on = d.g > 0
        x = d.g[on] * d.request.demand / capacity[on]
        cap_len = (1 / d.g[on]) * (1 + x) + a * x
        bound[on] = np.maximum(bound[on], np.log1p(cap_len / a))
    return bound
