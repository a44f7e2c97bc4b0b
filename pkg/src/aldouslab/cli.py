"""Command-line client for the batch jobs.

Every subcommand builds the same request the HTTP service accepts.  By
default the job runs in-process (no server needed, reproducible files for
batch use); with --server URL the request is POSTed to a running service
instead.  Exit codes: 0 success, 1 a mathematically asserted inequality
failed (violation records are in the JSON output), 2 usage or resource
errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, jobs
from .operators import CapExceeded
from .spectral import SolverError

COMMANDS = ["gap", "spectrum", "aldous-check", "trace-fuzz", "sequence",
            "ratio-table", "containment"]

DEFAULTS = {
    "gap": {"process": "rw", "tol": 1e-9, "ip_mode": "auto", "method": "auto",
            "seed": 0},
    "spectrum": {"process": "rw"},
    "aldous-check": {"exhaustive_z2": False, "max_vertices": 6, "tol": 1e-8,
                     "ip_method": "auto", "seed": 0},
    "trace-fuzz": {"trials_1d": 10000, "trials_nd": 1000, "d_max": 3,
                   "n_max": 5, "seed": 0, "negative_control": False},
    "sequence": {},
    "ratio-table": {"ip_cap": 8, "tol": 1e-9, "jobs": 1, "seed": 0},
    "containment": {"n_min": 3, "n_max": 6, "trials": 50, "tol": 1e-8,
                    "seed": 0},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aldouslab",
        description="spectral-gap laboratory: random walk vs interchange process")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON job config; flags override its params")
        p.add_argument("--server", help="base URL of a running service; "
                                        "without it the job runs in-process")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--tol", type=float)
        p.add_argument("--seed", type=int)

    def graph_opts(p):
        p.add_argument("--graph", choices=["hypercube"],
                       help="named graph family (with --d/--n)")
        p.add_argument("--d", type=int, help="lattice dimension")
        p.add_argument("--n", type=int, help="hypercube side length")
        p.add_argument("--rates-file", help="rate-function JSON file")

    p = sub.add_parser("gap", help="spectral gap of one generator")
    common(p)
    graph_opts(p)
    p.add_argument("--process", choices=["rw", "ip"])
    p.add_argument("--method", choices=["auto", "dense", "lanczos"])
    p.add_argument("--ip-mode", choices=["auto", "dense", "matrix_free"])

    p = sub.add_parser("spectrum", help="full spectrum of one generator")
    common(p)
    graph_opts(p)
    p.add_argument("--process", choices=["rw", "ip"])

    p = sub.add_parser("aldous-check", help="compare the two gaps")
    common(p)
    graph_opts(p)
    p.add_argument("--exhaustive-z2", action="store_true", default=None,
                   help="all connected induced lattice subgraphs up to translation")
    p.add_argument("--max-vertices", type=int)
    p.add_argument("--ip-method", choices=["auto", "dense", "lanczos"])

    p = sub.add_parser("trace-fuzz", help="fuzz the trace inequalities")
    common(p)
    p.add_argument("--trials-1d", type=int)
    p.add_argument("--trials-nd", type=int)
    p.add_argument("--d-max", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--negative-control", action="store_true", default=None,
                   help="also evaluate the engineered non-traceable case "
                        "(reports its expected failure as a violation)")

    p = sub.add_parser("sequence", help="emit a traceable vertex-set sequence")
    common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)

    p = sub.add_parser("ratio-table", help="gap table along a traceable sequence")
    common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--ip-cap", type=int)
    p.add_argument("--jobs", type=int, help="worker threads for the gap column")

    p = sub.add_parser("containment", help="random-walk spectrum inside the "
                                           "interchange spectrum, random rates")
    common(p)
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--N", type=int, help="single size (sets n-min = n-max = N)")
    p.add_argument("--trials", type=int)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _graph_from_args(args, params: dict) -> dict | None:
    if getattr(args, "rates_file", None):
        with open(args.rates_file) as fh:
            return {"kind": "rates", **json.load(fh)}
    if getattr(args, "graph", None) == "hypercube":
        if args.d is None or args.n is None:
            raise ValueError("--graph hypercube needs --d and --n")
        return {"kind": "hypercube", "d": args.d, "n": args.n}
    return params.get("graph")


def _merge(command: str, args, keys: list[str]) -> dict:
    params = dict(DEFAULTS.get(command, {}))
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if "schema_version" not in cfg:
            raise ValueError("config file must carry a schema_version field")
        if cfg.get("command", command) != command:
            raise ValueError(
                f"config is for command {cfg['command']!r}, not {command!r}")
        params.update(cfg.get("params", {}))
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    return params


def _run_remote(server: str, command: str, params: dict) -> tuple[dict, int]:
    import httpx

    url = server.rstrip("/") + "/v1/" + command
    resp = httpx.post(url, json=params, timeout=3600.0)
    if resp.status_code != 200:
        raise ValueError(f"server returned {resp.status_code}: {resp.text}")
    body = resp.json()
    return body["result"], 0 if body["ok"] else 1


def _run_local(command: str, params: dict) -> tuple[dict, int]:
    fn = {
        "gap": jobs.job_gap,
        "spectrum": jobs.job_spectrum,
        "aldous-check": jobs.job_aldous_check,
        "trace-fuzz": jobs.job_trace_fuzz,
        "sequence": jobs.job_sequence,
        "ratio-table": jobs.job_ratio_table,
        "containment": jobs.job_containment,
    }[command]
    res = fn(**params)
    return res.payload, res.exit_code


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dispatch(args) -> int:
    command = args.command
    if command == "serve":
        import uvicorn

        uvicorn.run("aldouslab.service:app", host=args.host, port=args.port)
        return 0

    key_map = {
        "gap": ["process", "tol", "ip_mode", "method", "seed"],
        "spectrum": ["process"],
        "aldous-check": ["exhaustive_z2", "max_vertices", "tol", "ip_method", "seed"],
        "trace-fuzz": ["trials_1d", "trials_nd", "d_max", "n_max", "seed",
                       "negative_control"],
        "sequence": ["d", "n_max"],
        "ratio-table": ["d", "n_max", "ip_cap", "tol", "jobs", "seed"],
        "containment": ["n_min", "n_max", "trials", "tol", "seed"],
    }
    params = _merge(command, args, key_map[command])
    if command in ("gap", "spectrum", "aldous-check"):
        graph = _graph_from_args(args, params)
        if graph is not None:
            params["graph"] = graph
        if command in ("gap", "spectrum") and "graph" not in params:
            raise ValueError("no graph given: use --graph/--d/--n or --rates-file")
    if command == "containment" and getattr(args, "N", None) is not None:
        params["n_min"] = params["n_max"] = args.N

    if args.server:
        payload, code = _run_remote(args.server, command, params)
    else:
        payload, code = _run_local(command, params)

    if args.format == "csv":
        csv = jobs.render_csv(command, payload)
        if csv is None:
            raise ValueError(f"command {command!r} has no CSV rendering")
        _emit(csv, args.out)
    else:
        _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)

    for v in payload.get("violations", []):
        print(f"violation: {v['module']}.{v['operation']}: {v['message']} "
              f"(residual={v['residual']})", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CapExceeded, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
