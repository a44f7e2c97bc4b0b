"""Batch jobs shared by the HTTP service and the command-line client.

Each job validates its inputs, runs the computation, and returns a
``JobResult`` whose payload is JSON-ready.  Inequalities the job asserts are
reported as violation records (module, operation, inputs, residual) rather
than exceptions, so a caller can persist them and exit nonzero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .aldous import aldous_exhaustive_z2, is_aldous, ratio_table
from .lattice import (
    RateFunction,
    VertexSet,
    induced_rates,
    is_traceable,
    make_hypercube,
    random_traceable_fill,
    sequence_is_increasing,
    traceable_sequence,
)
from .operators import ip_generator, rw_generator
from .spectral import full_spectrum, spectral_gap
from .trace_bounds import trace_1d, trace_nd

DEFAULT_TOLERANCES = {
    "gap_solver": 1e-9,
    "aldous_dense": 1e-8,
    "aldous_lanczos": 1e-6,
    "containment": 1e-8,
    "trace_slack": -1e-12,
    "bound_slack": 1e-12,
}


@dataclass
class JobResult:
    ok: bool
    exit_code: int
    payload: dict
    violations: list[dict] = field(default_factory=list)


def _violation(module: str, operation: str, inputs: dict, residual: float,
               message: str) -> dict:
    return {
        "module": module,
        "operation": operation,
        "inputs": inputs,
        "residual": residual,
        "message": message,
    }


def _finish(payload: dict, violations: list[dict]) -> JobResult:
    payload = dict(payload)
    payload["violations"] = violations
    payload["tolerances"] = DEFAULT_TOLERANCES
    payload["version"] = __version__
    ok = not violations
    return JobResult(ok=ok, exit_code=0 if ok else 1, payload=payload,
                     violations=violations)


def _g17(x: float) -> str:
    return "%.17g" % float(x)


def render_csv(command: str, payload: dict) -> str | None:
    """CSV rendering of a job payload; None for commands without a table."""
    if command == "containment":
        lines = ["N,trial,ok"]
        lines += [f"{r['N']},{r['trial']},{int(r['ok'])}" for r in payload["rows"]]
        return "\n".join(lines) + "\n"
    if command == "aldous-check" and payload.get("mode") == "exhaustive-z2":
        lines = ["size,points,gap_rw,gap_ip,abs_diff,holds"]
        for r in payload["rows"]:
            pts = ";".join(f"{p[0]} {p[1]}" for p in r["points"])
            lines.append(f"{r['size']},{pts},{_g17(r['gap_rw'])},"
                         f"{_g17(r['gap_ip'])},{_g17(r['abs_diff'])},{int(r['holds'])}")
        return "\n".join(lines) + "\n"
    if command == "trace-fuzz":
        lines = ["seed,d,n,size,lhs,rhs,slack"]
        for r in payload["rows"]:
            lines.append(f"{r['seed']},{r['d']},{r['n']},{r['size']},"
                         f"{_g17(r['lhs'])},{_g17(r['rhs'])},{_g17(r['slack'])}")
        return "\n".join(lines) + "\n"
    if command == "ratio-table":
        from .aldous import CSV_COLUMNS, _fmt
        lines = [",".join(CSV_COLUMNS)]
        for r in payload["report"]["rows"]:
            lines.append(",".join(_fmt(r[c]) for c in CSV_COLUMNS))
        return "\n".join(lines) + "\n"
    return None


def rates_from_graph(graph: dict) -> RateFunction:
    kind = graph.get("kind")
    if kind == "hypercube":
        return induced_rates(make_hypercube(int(graph["d"]), int(graph["n"])))
    if kind == "rates":
        return RateFunction.from_json_dict(graph)
    raise ValueError(f"unknown graph kind {kind!r}")


def job_gap(graph: dict, process: str = "rw", tol: float = 1e-9,
            ip_mode: str = "auto", method: str = "auto", seed: int = 0) -> JobResult:
    q = rates_from_graph(graph)
    if process == "rw":
        G = rw_generator(q)
    elif process == "ip":
        G = ip_generator(q, mode=ip_mode)
    else:
        raise ValueError(f"unknown process {process!r}")
    res = spectral_gap(G, tol=tol, method=method, seed=seed)
    payload = {"process": process, "size": q.size, "dimension": G.dimension,
               **res.to_json_dict()}
    return _finish(payload, [])


def job_spectrum(graph: dict, process: str = "rw") -> JobResult:
    q = rates_from_graph(graph)
    G = rw_generator(q) if process == "rw" else ip_generator(q, mode="dense")
    vals = full_spectrum(G)
    payload = {"process": process, "size": q.size, "dimension": G.dimension,
               "eigenvalues": [float(v) for v in vals]}
    return _finish(payload, [])


def job_containment(n_min: int = 3, n_max: int = 6, trials: int = 50,
                    tol: float = 1e-8, seed: int = 0) -> JobResult:
    from .lattice import random_rate_function
    from .spectral import spectrum_containment

    rng = np.random.default_rng(seed)
    rows = []
    violations = []
    for n in range(n_min, n_max + 1):
        for trial in range(trials):
            q = random_rate_function(n, rng)
            ok = spectrum_containment(q, tol=tol)
            rows.append({"N": n, "trial": trial, "ok": ok})
            if not ok:
                violations.append(_violation(
                    "spectral", "spectrum_containment",
                    {"N": n, "trial": trial, "seed": seed, "pairs": q.pairs()},
                    math.nan,
                    "random-walk eigenvalue missing from interchange spectrum"))
    return _finish({"rows": rows, "trials": trials, "seed": seed}, violations)


def job_aldous_check(exhaustive_z2: bool = False, max_vertices: int = 6,
                     graph: dict | None = None, tol: float = 1e-8,
                     ip_method: str = "auto", seed: int = 0) -> JobResult:
    violations = []
    if exhaustive_z2:
        out = aldous_exhaustive_z2(max_vertices, tol=tol)
        rows = out["rows"]
        for r in rows:
            if not (r["holds"] and r["one_sided_ok"]):
                violations.append(_violation(
                    "aldous", "is_aldous",
                    {"points": r["points"], "tol": tol},
                    r["abs_diff"], "gap equality failed"))
        payload = {"mode": "exhaustive-z2", "max_vertices": max_vertices,
                   "count": len(rows), "rows": rows}
        return _finish(payload, violations)
    if graph is None:
        raise ValueError("need either exhaustive_z2 or a graph")
    q = rates_from_graph(graph)
    verdict = is_aldous(q, tol=tol, ip_method=ip_method, seed=seed)
    if not (verdict.holds and verdict.one_sided_ok):
        violations.append(_violation(
            "aldous", "is_aldous", {"graph": graph, "tol": tol},
            verdict.abs_diff, "gap equality failed"))
    return _finish({"mode": "single", **verdict.to_json_dict()}, violations)


def job_trace_fuzz(trials_1d: int = 10000, trials_nd: int = 1000,
                   d_max: int = 3, n_max: int = 5, seed: int = 0,
                   negative_control: bool = False) -> JobResult:
    """Fuzz the two trace inequalities.  One CSV row per trial:
    seed, d, n, size, lhs, rhs, slack.

    Per (d, n) cell, ``trials_nd`` trials take a random prefix of one random
    traceable fill; every prefix's traceability is verified once up front,
    edges are tracked incrementally, and a sample of trials is cross-checked
    against the reference trace_nd evaluation.

    negative_control also evaluates the bound on an engineered
    non-traceable set, where it must fail; the failure is reported as a
    violation (exercising the violation pathway on purpose)."""
    rng = np.random.default_rng(seed)
    rows = []
    violations = []

    def record(d, n, size, lhs, rhs, operation, inputs):
        slack = rhs - lhs
        rows.append({"seed": seed, "d": d, "n": n, "size": size,
                     "lhs": lhs, "rhs": rhs, "slack": slack})
        if slack < DEFAULT_TOLERANCES["trace_slack"] * max(1.0, rhs):
            violations.append(_violation(
                "trace_bounds", operation, inputs, slack,
                "trace inequality violated"))

    for _ in range(trials_1d):
        n = int(rng.integers(1, 21))
        f = rng.standard_normal(n + 1) * float(rng.random() * 9 + 1)
        rep = trace_1d(f, n)
        record(1, n, n + 1, rep.lhs, rep.rhs, "trace_1d", {"n": n, "seed": seed})

    per_cell = max(0, trials_nd)
    for d in range(1, d_max + 1):
        for n in range(1, n_max + 1):
            if per_cell == 0:
                break
            cube = make_hypercube(d, n).points
            fill = random_traceable_fill(d, n, rng)
            points = list(cube) + fill
            pos = {p: idx for idx, p in enumerate(points)}
            n_cube = len(cube)

            # edges_by_take[t] = edge count prefix: edges among cube+fill[:t]
            edges: list[tuple[int, int]] = []
            for a_idx in range(n_cube):
                pa = points[a_idx]
                for axis in range(d):
                    nb = pa[:axis] + (pa[axis] + 1,) + pa[axis + 1:]
                    b_idx = pos.get(nb)
                    if b_idx is not None and b_idx < n_cube:
                        edges.append((a_idx, b_idx))
            edge_count_at = [len(edges)]
            for t, p in enumerate(fill):
                idx = n_cube + t
                for axis in range(d):
                    for delta in (-1, 1):
                        nb = p[:axis] + (p[axis] + delta,) + p[axis + 1:]
                        b_idx = pos.get(nb)
                        if b_idx is not None and b_idx < idx:
                            edges.append((idx, b_idx))
                edge_count_at.append(len(edges))
                if not is_traceable(VertexSet(dim=d, points=tuple(points[: idx + 1])), d, n):
                    raise RuntimeError("random fill produced a non-traceable prefix")
            edge_a = np.array([e[0] for e in edges], dtype=np.int64)
            edge_b = np.array([e[1] for e in edges], dtype=np.int64)

            crosscheck = set(
                int(v) for v in rng.integers(0, per_cell, size=min(3, per_cell))
            ) if per_cell else set()
            for trial in range(per_cell):
                take = int(rng.integers(0, len(fill) + 1))
                size = n_cube + take
                f = rng.standard_normal(size)
                ne = edge_count_at[take]
                energy = float(np.sum((f[edge_a[:ne]] - f[edge_b[:ne]]) ** 2))
                lhs = float(np.sum(f[n_cube:] ** 2))
                rhs = (2.0 * d / n) * float(f @ f) + 2.0 * n * energy
                if trial in crosscheck:
                    V = VertexSet(dim=d, points=tuple(points[:size]))
                    ref = trace_nd(V, d, n, f)
                    if abs(ref.lhs - lhs) > 1e-9 or abs(ref.rhs - rhs) > 1e-9:
                        raise RuntimeError("fast fuzz path disagrees with trace_nd")
                record(d, n, size, lhs, rhs, "trace_nd",
                       {"d": d, "n": n, "size": size, "seed": seed})

    control_failed = False
    if negative_control:
        # isolated corner of the next cube: non-traceable, and with n > 2d
        # the bulk term alone cannot cover the boundary mass
        V = VertexSet(dim=2, points=tuple(make_hypercube(2, 5).points) + ((6, 6),))
        f = np.zeros(len(V))
        f[V.position((6, 6))] = 1.0
        rep = trace_nd(V, 2, 5, f, enforce_traceable=False)
        control_failed = rep.slack < 0
        rows.append({"seed": seed, "d": 2, "n": 5, "size": len(V),
                     "lhs": rep.lhs, "rhs": rep.rhs, "slack": rep.slack})
        if control_failed:
            violations.append(_violation(
                "trace_bounds", "trace_nd",
                {"d": 2, "n": 5, "negative_control": True},
                rep.slack,
                "expected failure: bound evaluated without its hypothesis"))

    payload = {"trials": len(rows), "seed": seed, "rows": rows,
               "negative_control_failed": control_failed}
    return _finish(payload, violations)


def job_sequence(d: int, n_max: int) -> JobResult:
    sets = traceable_sequence(d, n_max)
    violations = []
    for V in sets:
        n = 1
        while (n + 1) ** d <= len(V):
            n += 1
        if not is_traceable(V, d, n):
            violations.append(_violation(
                "lattice", "traceable_sequence",
                {"d": d, "n_max": n_max, "N": len(V)}, math.nan,
                "constructed set is not traceable"))
    rates = [induced_rates(V) for V in sets]
    if not sequence_is_increasing(rates):
        violations.append(_violation(
            "lattice", "sequence_is_increasing", {"d": d, "n_max": n_max},
            math.nan, "induced rates are not increasing"))
    payload = {"d": d, "n_max": n_max, "count": len(sets),
               "sets": [V.to_json_dict() for V in sets]}
    return _finish(payload, violations)


def job_ratio_table(d: int, n_max: int, ip_cap: int = 8, tol: float = 1e-9,
                    jobs: int = 1, seed: int = 0) -> JobResult:
    report = ratio_table(d, n_max, ip_cap=ip_cap, tol=tol, jobs=jobs, seed=seed)
    violations = []
    for row in report.rows:
        if row.gap_ip is not None:
            lan = math.factorial(row.N) > 720
            tol_eq = DEFAULT_TOLERANCES["aldous_lanczos" if lan else "aldous_dense"]
            diff = abs(row.gap_ip - row.gap_rw)
            if diff > tol_eq * max(1.0, row.gap_rw):
                violations.append(_violation(
                    "aldous", "ratio_table",
                    {"d": d, "N": row.N}, diff, "gap equality failed on a row"))
            if row.gap_ip > row.gap_rw + tol_eq:
                violations.append(_violation(
                    "aldous", "ratio_table", {"d": d, "N": row.N},
                    row.gap_ip - row.gap_rw,
                    "interchange gap exceeds random-walk gap"))
        slack = DEFAULT_TOLERANCES["bound_slack"]
        if row.n >= 2 and not math.isnan(row.lower_bound):
            if row.lower_bound > 0 and row.gap_rw < row.lower_bound - slack:
                violations.append(_violation(
                    "trace_bounds", "sandwich", {"d": d, "N": row.N, "n": row.n},
                    row.lower_bound - row.gap_rw, "gap below sandwich lower bound"))
            if row.gap_rw > row.upper_bound + slack:
                violations.append(_violation(
                    "trace_bounds", "sandwich", {"d": d, "N": row.N, "n": row.n},
                    row.gap_rw - row.upper_bound, "gap above sandwich upper bound"))
    return _finish({"report": report.to_json_dict()}, violations)
