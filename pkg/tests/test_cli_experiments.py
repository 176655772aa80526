import hashlib
import json

import pytest

from qsr import cli
from qsr.experiments import SweepSpec, gen_requests, sweep, sweep_csv
from qsr.topology import load_bundled, load_requests, requests_to_doc


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def strip_timing(doc):
    doc.pop("timing", None)
    doc.get("result", {}).pop("wall_time_ms", None)
    return doc


def test_gen_requests_reproducible():
    net = load_bundled("abilene")
    a = gen_requests(net, 12, 20.0, "random_pairs", seed=1)
    b = gen_requests(net, 12, 20.0, "random_pairs", seed=1)
    assert len(a) == 12
    assert json.dumps(requests_to_doc(a)) == json.dumps(requests_to_doc(b))
    c = gen_requests(net, 12, 20.0, "random_pairs", seed=2)

    def h(reqs):
        return hashlib.sha256(repr(sorted((r.src, r.dst) for r in reqs)).encode()).hexdigest()

    assert h(a) != h(c)


def test_gen_requests_modes():
    net = load_bundled("chains:2,2")
    reqs = gen_requests(net, 100, 5.0, "single_pair", 0, "s", "t")
    assert len(reqs) == 100 and {(r.src, r.dst) for r in reqs} == {("s", "t")}
    abil = load_bundled("abilene")
    per = gen_requests(abil, 12, 20.0, "per_node", 3)
    assert [r.src for r in per] == list(abil.nodes)
    with pytest.raises(ValueError):
        gen_requests(net, 0, 1.0)
    with pytest.raises(ValueError):
        gen_requests(net, 1, 1.0, "single_pair")


def test_sweep_spec_validation():
    for bad in (dict(axis="x", values=[1]), dict(axis="q_r", values=[]),
                dict(axis="q_r", values=[1, 3, 2]), dict(axis="epsilon", values=[0.1, 1.2]),
                dict(axis="phi", values=[0, 1]), dict(axis="q_r", values=[1.5]),
                dict(axis="epsilon", values=[0.1], mode="online")):
        with pytest.raises(ValueError):
            SweepSpec(**bad)
    assert SweepSpec(axis="phi", values=[1]).mode == "online"


def test_single_value_sweep():
    spec = SweepSpec(axis="epsilon", values=[0.3], topology="chains:3,2", q_r=2)
    rows = sweep(spec)
    assert len(rows) == 1 and rows[0]["normalized_time"] == 1.0
    assert sweep_csv(spec, rows).splitlines()[0] == "epsilon,lambda,phases,steps,wall_time_s,normalized_time,status"


def test_sweep_failed_row_continues():
    spec = SweepSpec(axis="q_r", values=[1, 2, 9], topology="chains:2,2")
    rows = sweep(spec)
    assert [r["status"] for r in rows] == ["ok", "ok", "failed"]


def test_sweep_baseline_eps():
    spec = SweepSpec(axis="epsilon", values=[0.3, 0.2, 0.1], topology="chains:2,2")
    rows = sweep(spec)
    assert rows[2]["normalized_time"] == 1.0


def test_cli_oracle_example1(tmp_path, capsys):
    code, out = run(["oracle", "--topology", "example1", "--qr", "3", "--out-dir", str(tmp_path)], capsys)
    assert code == 0 and float(out.out) == pytest.approx(300)
    doc = json.loads((tmp_path / "oracle.json").read_text())
    assert doc["oracle"] is True
    assert doc["result"]["throughput"] == pytest.approx(300)
    prov = doc["provenance"]
    assert prov["topology_sha256"] == load_bundled("example1").digest()
    assert {"version", "seed", "topology"} <= set(prov)


def test_cli_offline_deterministic(tmp_path, capsys):
    req_path = tmp_path / "r12.json"
    req_path.write_text(json.dumps(requests_to_doc(gen_requests(load_bundled("abilene"), 12, 20.0, "per_node", 1))))
    docs = []
    for i in range(2):
        out = tmp_path / f"o{i}"
        code, _ = run(["offline", "--topology", "abilene", "--requests", str(req_path), "--epsilon", "0.2",
                       "--qr", "2", "--sr-nodes", "all", "--out-dir", str(out), "--format", "both"], capsys)
        assert code == 0
        docs.append(strip_timing(json.loads((out / "offline.json").read_text())))
        assert (out / "offline.csv").exists()
    assert docs[0] == docs[1]
    util = docs[0]["result"]["per_link_utilization"]
    assert len(util) == 30 and max(util.values()) <= 1 + 1e-9
    assert docs[0]["provenance"]["requests_sha256"]


def test_cli_online_and_seed(tmp_path, capsys):
    outs = []
    for seed in (0, 0, 5):
        code, out = run(["online", "--topology", "abilene", "--qr", "2", "--phi", "10",
                         "--seed", str(seed), "--out-dir", str(tmp_path / str(seed))], capsys)
        assert code == 0
        outs.append(json.loads((tmp_path / str(seed) / "online.json").read_text())["result"])
    assert outs[0] == outs[1]
    pairs = [[d["id"] for d in o["per_request_decisions"]] for o in outs]
    assert len(pairs[0]) == 100


def test_cli_sweep_writes_csv(tmp_path, capsys):
    code, out = run(["sweep", "--axis", "epsilon", "--values", "0.3,0.2", "--topology", "chains:3,2",
                     "--qr", "3", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    assert (tmp_path / "sweep_epsilon.csv").read_text() == out.out
    assert len(out.out.splitlines()) == 3


def test_cli_gen_commands(tmp_path, capsys):
    code, out = run(["gen-topology", "--topology", "chains:2,3", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    assert load_bundled("chains:2,3").digest() == cli.resolve_topology(out.out.strip()).digest()
    code, out = run(["gen-requests", "--topology", "abilene", "--count", "12", "--demand", "20",
                     "--seed", "1", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    first = (tmp_path / "requests.json").read_bytes()
    run(["gen-requests", "--topology", "abilene", "--count", "12", "--demand", "20",
         "--seed", "1", "--out-dir", str(tmp_path)], capsys)
    assert (tmp_path / "requests.json").read_bytes() == first
    assert len(load_requests(tmp_path / "requests.json", load_bundled("abilene"))) == 12


def test_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["bogus"])
    assert exc.value.code == 2
    assert run(["offline", "--topology", "abilene", "--epsilon", "2"], capsys)[0] == 2
    assert run(["offline", "--topology", str(tmp_path / "missing.json")], capsys)[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert run(["offline", "--topology", str(bad)], capsys)[0] == 3
    assert run(["sweep", "--axis", "epsilon", "--values", "0.1,0.3,0.2", "--topology", "chains"], capsys)[0] == 2


def test_exit_code_solver(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QSR_MAX_PHASES", "1")
    code, out = run(["offline", "--topology", "chains:2,2", "--out-dir", str(tmp_path)], capsys)
    assert code == 4 and "QSR_MAX_PHASES" in out.err
