import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsr.intra_segment import build_intra_table
from qsr.online import (
    OnlineParams, OnlineState, competitive_audit, exact_violation_bound, process_request, run_trace,
)
from qsr.oracle import enumerate_all, solve_online_hindsight
from qsr.topology import Request, all_sr_nodes, generate_parallel_chains

from conftest import random_instance, single_link


def link_setup(cap, phi, d=5.0, count=2):
    net = single_link(cap)
    trace = [Request(i, "a", "b", d) for i in range(count)]
    return net, trace, build_intra_table(net, trace), OnlineParams(phi, 1)


def random_trace(seed, length=12):
    net, reqs = random_instance(seed, requests=3)
    rng = np.random.default_rng(seed + 1)
    trace = []
    for i in range(length):
        r = reqs[int(rng.integers(len(reqs)))]
        trace.append(Request(i, r.src, r.dst, float(rng.integers(1, 6) * 5), r.sr_nodes, r.q_max))
    return net, trace


def test_single_link_example():
    net, trace, table, params = link_setup(5.0, 10.0)
    state = OnlineState.empty(net.m)
    first = process_request(state, trace[0], table, params)
    assert first.accepted and first.L == 0.0 and first.z == 5.0
    assert state.lengths[0] == 5.0
    assert first.dual_increase == 30.0
    second = process_request(state, trace[1], table, params)
    assert not second.accepted and second.L == 5.0
    audit = competitive_audit(state, params, net.n, net.capacity)
    assert audit.competitive_ok and audit.rows[0].ratio == 6.0 <= 11


def test_rejection_leaves_state():
    net, trace, table, params = link_setup(5.0, 2.4)  # first admission leaves l = 1.2
    state = OnlineState.empty(net.m)
    process_request(state, trace[0], table, params)
    lengths, flows = state.lengths.copy(), state.flows.copy()
    dec = process_request(state, trace[1], table, params)
    assert not dec.accepted and dec.L == pytest.approx(1.2)
    assert np.array_equal(lengths, state.lengths) and np.array_equal(flows, state.flows)


def test_cost_exactly_one_is_accepted():
    net, trace, table, params = link_setup(5.0, 2.0)
    state = OnlineState.empty(net.m)
    process_request(state, trace[0], table, params)
    dec = process_request(state, trace[1], table, params)
    assert dec.L == 1.0 and dec.accepted and dec.z == 0.0
    assert competitive_audit(state, params, net.n, net.capacity).competitive_ok


def test_empty_audit():
    net, trace, table, params = link_setup(5.0, 1.0, d=50.0)
    state = OnlineState.empty(net.m)
    report = competitive_audit(state, params, net.n, net.capacity)
    assert report.rows == [] and report.competitive_ok and report.violation_ok


def test_single_request_accepted():
    net, trace, table, params = link_setup(100.0, 10.0, count=1)
    res = run_trace(trace, table, params)
    assert res.acceptance_ratio == 1.0


def test_hindsight_link():
    net, trace, table, params = link_setup(5.0, 10.0)
    cols = enumerate_all(trace, table)
    assert solve_online_hindsight(net, trace, cols) == pytest.approx(5.0)
    assert solve_online_hindsight(net, [], enumerate_all([], table)) == 0.0


def test_chains_acceptance_not_decreasing_in_q():
    net = generate_parallel_chains(5, 3, 100)
    sr = all_sr_nodes(net, "s", "t")
    prev = 0.0
    for q in (1, 2, 4):
        trace = [Request(i, "s", "t", 5.0, sr, q) for i in range(100)]
        res = run_trace(trace, build_intra_table(net, trace), OnlineParams(10.0, q))
        assert res.acceptance_ratio >= prev - 1e-12
        prev = res.acceptance_ratio


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.5, 1.0, 10.0, 50.0]))
def test_trace_invariants(seed, phi):
    net, trace = random_trace(seed)
    table = build_intra_table(net, trace)
    params = OnlineParams.for_trace(phi, trace)
    state = OnlineState.empty(net.m)
    cols = enumerate_all(trace, table)
    for i, r in enumerate(trace):
        before_l, before_f = state.lengths.copy(), state.flows.copy()
        dec = process_request(state, r, table, params)
        assert np.all(state.lengths >= before_l)
        if dec.accepted:
            np.testing.assert_allclose(state.flows - before_f, r.demand * dec.g, atol=1e-12)
        else:
            assert np.array_equal(state.flows, before_f) and np.array_equal(state.lengths, before_l)
        # dual feasibility against every SR-list of every request seen so far
        for d, c in zip(state.decisions, cols.per_request[: i + 1]):
            lhs = d.z
            rhs = d.request.demand * (1 - c.G @ state.lengths)
            assert np.all(lhs >= rhs - 1e-9)
    audit = competitive_audit(state, params, net.n, net.capacity)
    assert audit.competitive_ok
    # primal is within 1 + phi of the hindsight LP
    accepted = sum(d.request.demand for d in state.decisions if d.accepted)
    assert accepted * (1 + phi) >= solve_online_hindsight(net, trace, cols) * (1 - 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([1.0, 10.0]))
def test_exact_violation_bound_holds(seed, phi):
    net, trace = random_trace(seed, length=20)
    table = build_intra_table(net, trace)
    params = OnlineParams.for_trace(phi, trace)
    res = run_trace(trace, table, params)
    bound = exact_violation_bound(res.state, params, net.n, net.capacity)
    logsum = np.zeros(net.m)
    for d in res.state.decisions:
        if d.accepted:
            logsum += np.log1p(d.g * d.request.demand / net.capacity)
    assert np.all(logsum <= bound + 1e-9)


def test_params_validation():
    with pytest.raises(ValueError):
        OnlineParams(0.0, 1)
    with pytest.raises(ValueError):
        OnlineParams(1.0, 0)
    with pytest.raises(ValueError):
        run_trace([], None, OnlineParams(1.0, 1))
