import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsr.errors import MissingPairError, NoSuchLinkError, UnreachableError
from qsr.intra_segment import (
    apply_adjacency_override, build_intra_table, compute_ecmp_split, dump_csv,
    merge_tables, request_pairs,
)
from qsr.topology import Request, all_sr_nodes, generate_example2, generate_parallel_chains

from conftest import random_instance, single_link


def on_links(net, split):
    return {(net.links[int(e)].src, net.links[int(e)].dst): float(f)
            for e, f in zip(split.link_ids, split.fractions)}


def check_conservation(net, split):
    f = split.dense(net.m)
    assert np.all(f >= 0) and np.all(f <= 1 + 1e-12)
    balance = np.zeros(net.n)
    np.add.at(balance, net.src, f)
    np.subtract.at(balance, net.dst, f)
    expect = np.zeros(net.n)
    expect[net.index[split.src]] = 1.0
    expect[net.index[split.dst]] = -1.0
    np.testing.assert_allclose(balance, expect, atol=1e-12)
    # every node-cut around the source delivers exactly one unit
    out_u = sum(f[e] for e in net.out_links[net.index[split.src]])
    assert out_u == pytest.approx(1.0, abs=1e-12)
    assert split.total() <= net.n


def test_example2_w5_three_hop_only():
    net = generate_example2(5)
    assert on_links(net, compute_ecmp_split(net, "s", "k")) == {("s", "a"): 1.0, ("a", "b"): 1.0, ("b", "k"): 1.0}
    assert on_links(net, compute_ecmp_split(net, "k", "t")) == {("k", "a"): 1.0, ("a", "b"): 1.0, ("b", "t"): 1.0}


def test_example2_w3_even_split():
    net = generate_example2(3)
    split = compute_ecmp_split(net, "s", "k")
    assert on_links(net, split) == {("s", "k"): 0.5, ("s", "a"): 0.5, ("a", "b"): 0.5, ("b", "k"): 0.5}


def test_example2_w1_direct_only():
    net = generate_example2(1)
    assert on_links(net, compute_ecmp_split(net, "s", "k")) == {("s", "k"): 1.0}
    assert on_links(net, compute_ecmp_split(net, "k", "t")) == {("k", "t"): 1.0}


def test_single_link():
    net = single_link()
    split = compute_ecmp_split(net, "a", "b")
    assert split.fraction(0) == 1.0
    with pytest.raises(UnreachableError):
        compute_ecmp_split(net, "b", "a")


def test_split_lookup_off_dag_is_zero():
    net = generate_example2(5)
    split = compute_ecmp_split(net, "s", "k")
    assert split.fraction(net.link_id[("s", "k")]) == 0.0


def test_table_size_bound():
    net = generate_parallel_chains(2, 2)
    r = Request(0, "s", "t", 1.0, ("c1_1", "c2_2"), 2).check(net)
    table = build_intra_table(net, [r])
    assert len(table) + len(table.unreachable) <= 12
    assert set(request_pairs(r)) == set(table.entries) | set(table.unreachable)


def test_shared_pairs_computed_once():
    net = generate_parallel_chains(2, 2)
    sr = all_sr_nodes(net, "s", "t")
    a = Request(0, "s", "t", 1.0, sr, 2)
    b = Request(1, "s", "t", 7.0, sr, 3)
    t1 = build_intra_table(net, [a])
    t2 = build_intra_table(net, [a, b])
    assert set(t1.entries) == set(t2.entries)
    for p in t1.entries:
        assert t1[p] is not t2[p] and np.array_equal(t1[p].fractions, t2[p].fractions)


def test_chains_common_chain_fraction_one():
    net = generate_parallel_chains(5, 7)
    r = Request(0, "s", "t", 100.0, all_sr_nodes(net, "s", "t"), 2).check(net)
    table = build_intra_table(net, [r])
    split = table[("c2_1", "c2_5")]
    assert on_links(net, split) == {(f"c2_{j}", f"c2_{j + 1}"): 1.0 for j in range(1, 5)}
    # backwards along a chain, or across chains, has no route
    assert not table.reachable("c2_5", "c2_1")
    with pytest.raises(UnreachableError):
        table[("c1_1", "c2_1")]
    with pytest.raises(MissingPairError):
        table[("t", "s")]


def test_unreachable_endpoint_is_an_error():
    net = generate_parallel_chains(2, 1)
    with pytest.raises(UnreachableError):
        build_intra_table(net, [Request(0, "t", "s", 1.0)])


def test_strict_mode():
    net = generate_parallel_chains(2, 1)
    r = Request(0, "s", "t", 1.0, ("c1_1", "c2_1"), 2)
    build_intra_table(net, [r])
    with pytest.raises(UnreachableError):
        build_intra_table(net, [r], strict=True)


def test_override():
    net = generate_example2(5)
    r = Request(0, "s", "t", 1.0, ("k",), 2)
    table = build_intra_table(net, [r])
    new = apply_adjacency_override(table, "s", "k")
    assert on_links(net, new[("s", "k")]) == {("s", "k"): 1.0}
    assert new[("k", "t")] is table[("k", "t")]
    # the original table is untouched
    assert on_links(net, table[("s", "k")]) == {("s", "a"): 1.0, ("a", "b"): 1.0, ("b", "k"): 1.0}
    with pytest.raises(NoSuchLinkError):
        apply_adjacency_override(table, "s", "b")


def test_merge_tables():
    net = generate_example2(3)
    t1 = build_intra_table(net, [Request(0, "s", "k", 1.0)])
    t2 = build_intra_table(net, [Request(0, "k", "t", 1.0)])
    merged = merge_tables(t1, t2)
    assert set(merged.entries) == {("s", "k"), ("k", "t")}


def test_dump_csv():
    net = generate_example2(3)
    table = build_intra_table(net, [Request(0, "s", "k", 1.0)])
    buf = io.StringIO()
    dump_csv(table, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "u,v,link_src,link_dst,fraction"
    assert len(lines) == 5 and "s,k,s,k,0.5" in lines


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_conservation_random(seed):
    net, reqs = random_instance(seed)
    table = build_intra_table(net, reqs)
    for split in table.entries.values():
        check_conservation(net, split)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 100_000))
def test_deterministic(seed):
    net, reqs = random_instance(seed)
    a = build_intra_table(net, reqs)
    b = build_intra_table(net, reqs)
    assert list(a.entries) == list(b.entries)
    for p in a.entries:
        assert a[p].fractions.tobytes() == b[p].fractions.tobytes()
        assert a[p].link_ids.tobytes() == b[p].link_ids.tobytes()
