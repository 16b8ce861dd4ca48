"""Batch front end: solve request files, compare results, simulate, serve.

Request files use the same JSON schema as the REST body. Exit codes: 0 on
success, 1 on invalid input or system errors, 2 when no chain meets the
availability target.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import socket
import sys
from pathlib import Path
from typing import Sequence

from .domain import (
    EvalMode,
    OptimizationRequest,
    RequestValidationError,
    chain_cost,
    validate_chain_config,
    validate_request,
)
from .encoding import dumps_canonical, format_availability, format_cost, result_payload
from .markov import chain_availability
from .optimize import OptimizationResult, optimize
from .simulate import SimConfig, simulate_chain

COMPARE_COLUMNS = ["label", "availability", "unavailability", "cost", "feasible"]
SOLVE_CSV_COLUMNS = ["rank", "availability", "cost", "config"]


def _load_request(path: str, mode_override: str | None = None) -> OptimizationRequest:
    with open(path, "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    request = validate_request(raw)
    if mode_override is not None:
        request = dataclasses.replace(request, eval_mode=EvalMode(mode_override))
    return request


def _print_validation_errors(path: str, exc: RequestValidationError) -> None:
    for e in exc.errors:
        print(f"{path}: {e.field}: {e.message}", file=sys.stderr)


def _config_column(request: OptimizationRequest, chain) -> str:
    parts = []
    for spec, config in zip(request.nodes, chain.config.node_configs):
        padded = ",".join(str(c) for c in config.padded(request.max_nr))
        parts.append(f"{spec.name}=[{padded}]")
    return ";".join(parts)


def _print_table(request: OptimizationRequest, result: OptimizationResult) -> None:
    names = [spec.name for spec in request.nodes]
    rows = []
    for rank, chain in enumerate(result.chains, start=1):
        cells = [str(rank), str(format_cost(chain.cost)), format_availability(chain.availability)]
        for config in chain.config.node_configs:
            cells.append("[" + ",".join(str(c) for c in config.padded(request.max_nr)) + "]")
        rows.append(cells)
    header = ["SFC", "cost", "availability"] + names
    widths = [
        max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]
    print("  ".join(h.rjust(w) for h, w in zip(header, widths)))
    for cells in rows:
        print("  ".join(c.rjust(w) for c, w in zip(cells, widths)))
    report = result.search_report
    print(
        f"search: raw={report.raw_chain_count} ({float(report.raw_chain_count):.3e})"
        f"  pruned={report.pruned_chain_count}"
        f"  explored={report.explored_nodes}"
        f"  wall={report.wall_time_seconds:.2f}s"
    )


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        request = _load_request(args.request, args.mode)
    except RequestValidationError as exc:
        _print_validation_errors(args.request, exc)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"{args.request}: {exc}", file=sys.stderr)
        return 1

    result = optimize(request)

    if args.format == "json":
        print(dumps_canonical(result_payload(request, result)))
    elif args.format == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(SOLVE_CSV_COLUMNS)
        for rank, chain in enumerate(result.chains, start=1):
            writer.writerow(
                [
                    rank,
                    format_availability(chain.availability),
                    format_cost(chain.cost),
                    _config_column(request, chain),
                ]
            )
    else:
        _print_table(request, result)

    if not result.feasible:
        print(
            "no chain meets availability target "
            f"{request.availability_target}; maximum achievable: "
            f"{format_availability(result.max_achievable_availability)}",
            file=sys.stderr,
        )
        return 2
    return 0


def _relaxed_retry(request: OptimizationRequest) -> OptimizationResult:
    """Re-target an infeasible request just below its best achievable value."""
    probe = optimize(request)
    if probe.feasible:
        return probe
    adjusted = math.nextafter(probe.max_achievable_availability, 0.0)
    relaxed = dataclasses.replace(request, availability_target=adjusted)
    return optimize(relaxed)


def cmd_compare(args: argparse.Namespace) -> int:
    rows: list[list[str]] = []
    had_errors = False
    for path in args.requests:
        try:
            request = _load_request(path, args.mode)
        except RequestValidationError as exc:
            _print_validation_errors(path, exc)
            had_errors = True
            continue
        except (OSError, json.JSONDecodeError) as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            had_errors = True
            continue
        result = _relaxed_retry(request) if args.relaxed else optimize(request)
        label_base = Path(path).stem
        for rank, chain in enumerate(result.chains, start=1):
            feasible = chain.availability >= request.availability_target
            rows.append(
                [
                    f"{label_base}#{rank}",
                    format_availability(chain.availability),
                    f"{1.0 - chain.availability:.6e}",
                    str(format_cost(chain.cost)),
                    "true" if feasible else "false",
                ]
            )

    out = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8", newline="")
    try:
        writer = csv.writer(out)
        writer.writerow(COMPARE_COLUMNS)
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return 1 if had_errors else 0


def _parse_chain_arg(text: str) -> list[list[int]]:
    counts_per_node = []
    for node_part in text.split(";"):
        node_part = node_part.strip()
        if not node_part:
            raise ValueError("empty node config")
        counts_per_node.append([int(c) for c in node_part.split(",")])
    return counts_per_node


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        request = _load_request(args.request)
    except RequestValidationError as exc:
        _print_validation_errors(args.request, exc)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"{args.request}: {exc}", file=sys.stderr)
        return 1
    try:
        counts = _parse_chain_arg(args.chain)
        chain_config = validate_chain_config(request, counts)
    except (ValueError, RequestValidationError) as exc:
        print(f"invalid --chain: {exc}", file=sys.stderr)
        return 1

    analytic = chain_availability(request.nodes, chain_config, request.eval_mode)
    estimate = simulate_chain(
        request.nodes,
        chain_config,
        SimConfig(
            horizon=args.horizon,
            seed=args.seed,
            replications=args.replications,
            warmup=args.warmup,
        ),
    )
    cost = chain_cost(request.nodes, chain_config)
    print(f"chain cost:             {format_cost(cost)}")
    print(f"analytic availability:  {format_availability(analytic)}")
    print(
        f"simulated availability: {format_availability(estimate.mean)}"
        f" (std error {estimate.std_error:.3e}, {estimate.replications} replications)"
    )
    if estimate.std_error > 0:
        print(f"z-score: {(estimate.mean - analytic) / estimate.std_error:.3f}")
    else:
        print("z-score: n/a (zero standard error)")
    if estimate.no_event_warning:
        print("warning: horizon too short, no failure/repair event occurred", file=sys.stderr)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import ServiceConfig, create_app

    host, _, port_text = args.listen.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"invalid --listen address {args.listen!r}, expected host:port", file=sys.stderr)
        return 1
    port = int(port_text)

    # Probe the port first so "already in use" is a clean exit, not a traceback.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        print(f"cannot listen on {args.listen}: {exc}", file=sys.stderr)
        return 1
    finally:
        probe.close()

    import uvicorn

    app = create_app(
        ServiceConfig(
            workers=args.workers,
            queue_limit=args.queue_limit,
            cache_capacity=args.cache_size,
        )
    )
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfcavail",
        description="Availability-aware redundancy planning for service function chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="optimize one request file")
    solve.add_argument("--request", required=True, help="JSON request file")
    solve.add_argument("--format", choices=["table", "csv", "json"], default="table")
    solve.add_argument("--mode", choices=["exact", "structural"], default=None)
    solve.set_defaults(func=cmd_solve)

    compare = sub.add_parser("compare", help="tabulate top chains across request files")
    compare.add_argument("--requests", nargs="*", required=True, help="JSON request files")
    compare.add_argument("--out", required=True, help="output CSV path, or - for stdout")
    compare.add_argument(
        "--relaxed",
        action="store_true",
        help="for infeasible requests, report the best achievable chains instead of nothing",
    )
    compare.add_argument("--mode", choices=["exact", "structural"], default=None)
    compare.set_defaults(func=cmd_compare)

    simulate = sub.add_parser("simulate", help="cross-check one chain config by simulation")
    simulate.add_argument("--request", required=True, help="JSON request file")
    simulate.add_argument(
        "--chain",
        required=True,
        help="per-node instance counts, e.g. '3,3;3,3;1,1,1,1;2,2,2'",
    )
    simulate.add_argument("--horizon", type=float, default=1e6, help="simulated hours")
    simulate.add_argument("--seed", type=int, default=1)
    simulate.add_argument("--replications", type=int, default=10)
    simulate.add_argument("--warmup", type=float, default=None)
    simulate.set_defaults(func=cmd_simulate)

    serve = sub.add_parser("serve", help="run the REST service")
    serve.add_argument("--listen", default="127.0.0.1:8080", help="host:port")
    serve.add_argument("--workers", type=int, default=None)
    serve.add_argument("--cache-size", type=int, default=128)
    serve.add_argument("--queue-limit", type=int, default=64)
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
