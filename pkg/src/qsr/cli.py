"""Command-line front end.

    qsr offline  --topology abilene --epsilon 0.1 --qr 2
    qsr online   --topology chains:5,7 --phi 10 --qr 5
    qsr oracle   --topology example1 --qr 3
    qsr sweep    --axis epsilon --values 0.3,0.2,0.1,0.05 --topology chains:5,7 --qr 5
    qsr gen-topology  --topology chains:5,7
    qsr gen-requests  --topology abilene --count 12 --demand 20 --mode per_node --seed 1

Exit codes: 0 ok, 2 usage, 3 input files, 4 solver.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import (EnumerationTooLarge, ParseError, QsrError, SolverError,
                     TopologyError, UnreachableError, ValidationError)
from .experiments import (MODES, SweepSpec, default_requests, dumps, file_digest,
                          gen_requests, override, run_offline, run_online, sweep,
                          sweep_csv, version_string)
from .fptas import FptasParams, params_from_omega
from .intra_segment import build_intra_table
from .oracle import enumerate_all, solve_offline_exact
from .topology import load_requests, network_to_doc, requests_to_doc, resolve_topology

EXIT_USAGE, EXIT_FILE, EXIT_SOLVER = 2, 3, 4


class UsageError(Exception):
    pass


def _sr_arg(text):
    if text is None or text == "all":
        return text
    return [v for v in text.split(",") if v]


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsr", description="Q-SR segment-routing traffic engineering")
    p.add_argument("--version", action="version", version=f"qsr {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, requests=True):
        sp.add_argument("--topology", required=True,
                        help="bundled name (abilene, example1, example2[:w], chains[:c,h]) or a path")
        if requests:
            sp.add_argument("--requests", help="request/trace file; defaults to the bundled setting")
            sp.add_argument("--qr", type=int, help="override every request's segment budget")
            sp.add_argument("--sr-nodes", type=_sr_arg, help="'all' or a comma list of SR-nodes")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out-dir", default=".")
        sp.add_argument("--format", choices=("json", "csv", "both"), default="json")

    sp = sub.add_parser("offline", help="FPTAS for maximum concurrent throughput")
    common(sp)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--omega", type=float, help="target approximation; overrides --epsilon")

    sp = sub.add_parser("online", help="online primal-dual admission over a trace")
    common(sp)
    sp.add_argument("--phi", type=float, default=10.0)

    sp = sub.add_parser("oracle", help="exact LP optimum by enumeration (small instances)")
    common(sp)

    sp = sub.add_parser("sweep", help="parameter sweep written as CSV + JSON")
    common(sp)
    sp.add_argument("--axis", choices=("q_r", "epsilon", "phi"), required=True)
    sp.add_argument("--values", type=_floats, required=True)
    sp.add_argument("--mode", choices=("offline", "online"))
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--omega", type=float)
    sp.add_argument("--phi", type=float, default=10.0)
    sp.add_argument("--baseline", type=float, help="axis value used to normalize wall time")

    sp = sub.add_parser("gen-topology", help="write a bundled/generated topology document")
    common(sp, requests=False)

    sp = sub.add_parser("gen-requests", help="write a deterministic request file")
    common(sp, requests=False)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--demand", type=float, default=1.0)
    sp.add_argument("--mode", choices=MODES, default="random_pairs")
    sp.add_argument("--src")
    sp.add_argument("--dst")
    sp.add_argument("--sr-nodes", type=_sr_arg, default="all")
    sp.add_argument("--qr", type=int, default=1)
    return p


def _provenance(args, net, extra=None) -> dict:
    doc = {
        "version": version_string(),
        "command": args.command,
        "topology": args.topology,
        "topology_sha256": net.digest(),
        "seed": args.seed,
    }
    if getattr(args, "requests", None):
        doc["requests_sha256"] = file_digest(args.requests)
    doc.update(extra or {})
    return doc


def _requests(args, net, online: bool):
    if args.requests:
        reqs = load_requests(Path(args.requests), net)
    else:
        reqs = default_requests(args.topology, net, online, args.seed)
    try:
        return override(reqs, net, args.qr, args.sr_nodes)
    except ValidationError as exc:
        raise UsageError(str(exc)) from exc


def _write(args, stem: str, doc: dict | None = None, csv_text: str | None = None) -> list[Path]:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if doc is not None and args.format in ("json", "both"):
        path = out / f"{stem}.json"
        path.write_text(dumps(doc))
        written.append(path)
    if csv_text is not None and args.format in ("csv", "both"):
        path = out / f"{stem}.csv"
        path.write_text(csv_text)
        written.append(path)
    return written


def _rows_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(repr(v) if isinstance(v, float) else str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def cmd_offline(args) -> int:
    net = resolve_topology(args.topology)
    reqs = _requests(args, net, online=False)
    params = params_from_omega(args.omega, net.m) if args.omega else FptasParams.from_epsilon(args.epsilon, net.m)
    res = run_offline(net, reqs, params)
    summary = res.summary(net)
    wall = summary.pop("wall_time_ms")
    doc = {"provenance": _provenance(args, net, {"epsilon": params.epsilon, "delta": params.delta,
                                                 "omega": params.omega}),
           "result": summary, "timing": {"wall_time_ms": wall}}
    rows = [(l.src, l.dst, float(f), float(f / l.capacity)) for l, f in zip(net.links, res.flows)]
    _write(args, "offline", doc, _rows_csv(["src", "dst", "flow", "utilization"], rows))
    print(f"lambda={res.lambda_:.6g} phases={res.phases} steps={res.steps}")
    return 0


def cmd_online(args) -> int:
    net = resolve_topology(args.topology)
    trace = _requests(args, net, online=True)
    res = run_online(net, trace, args.phi)
    doc = {"provenance": _provenance(args, net, {"phi": args.phi}), "result": res.summary()}
    rows = [(d.request.id, d.request.src, d.request.dst, int(d.accepted), " ".join(d.k_star), d.L)
            for d in res.state.decisions]
    _write(args, "online", doc, _rows_csv(["id", "src", "dst", "accepted", "k_star", "L"], rows))
    print(f"acceptance_ratio={res.acceptance_ratio:.6g} violation_ratio={res.violation_ratio:.6g}")
    return 0


def cmd_oracle(args) -> int:
    net = resolve_topology(args.topology)
    reqs = _requests(args, net, online=False)
    table = build_intra_table(net, reqs)
    cols = enumerate_all(reqs, table)
    cert = solve_offline_exact(net, reqs, cols)
    throughput = sum(cert.lambda_star * r.demand for r in reqs)
    doc = {"provenance": _provenance(args, net), "oracle": True,
           "result": {"lambda": cert.lambda_star, "throughput": throughput, "columns": cols.total,
                      "per_request_routed": {str(r.id): cert.throughput(i) for i, r in enumerate(reqs)}}}
    _write(args, "oracle", doc, _rows_csv(["lambda", "throughput"], [(cert.lambda_star, throughput)]))
    print(f"{throughput:.10g}")
    return 0


def cmd_sweep(args) -> int:
    try:
        spec = SweepSpec(axis=args.axis, values=args.values, topology=args.topology,
                         requests=args.requests, mode=args.mode, epsilon=args.epsilon,
                         omega=args.omega, phi=args.phi, q_r=args.qr, sr_nodes=args.sr_nodes,
                         seed=args.seed, baseline=args.baseline)
    except ValueError as exc:
        raise UsageError(str(exc))
    rows = sweep(spec)
    net = resolve_topology(args.topology)
    timing = [{spec.axis: r[spec.axis], "wall_time_s": r.pop("wall_time_s"),
               "normalized_time": r.pop("normalized_time")} for r in rows]
    doc = {"provenance": _provenance(args, net, {"axis": spec.axis, "values": spec.values,
                                                 "mode": spec.mode, "epsilon": spec.epsilon,
                                                 "phi": spec.phi, "q_r": spec.q_r}),
           "rows": rows, "timing": timing}
    for r, t in zip(rows, timing):
        r.update(t)
    args.format = "both" if args.format == "json" else args.format
    _write(args, f"sweep_{spec.axis}", doc, sweep_csv(spec, rows))
    sys.stdout.write(sweep_csv(spec, rows))
    return 0


def cmd_gen_topology(args) -> int:
    net = resolve_topology(args.topology)
    args.format = "json"
    name = args.topology.replace(":", "_").replace(",", "_").replace("/", "_")
    paths = _write(args, f"topology_{Path(name).stem}", network_to_doc(net))
    print(paths[0])
    return 0


def cmd_gen_requests(args) -> int:
    net = resolve_topology(args.topology)
    try:
        reqs = gen_requests(net, args.count, args.demand, args.mode, args.seed,
                            args.src, args.dst, args.sr_nodes, args.qr)
    except ValueError as exc:
        raise UsageError(str(exc))
    args.format = "json"
    paths = _write(args, "requests", requests_to_doc(reqs))
    print(paths[0])
    return 0


COMMANDS = {
    "offline": cmd_offline, "online": cmd_online, "oracle": cmd_oracle, "sweep": cmd_sweep,
    "gen-topology": cmd_gen_topology, "gen-requests": cmd_gen_requests,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"qsr: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, NotADirectoryError, IsADirectoryError, PermissionError, ParseError, TopologyError,
            json.JSONDecodeError) as exc:
        print(f"qsr: input error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except (SolverError, EnumerationTooLarge, UnreachableError, QsrError) as exc:
        print(f"qsr: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
