"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; plain `pytest` runs them silently as ordinary tests.
"""

import itertools
import math

import numpy as np
import pytest

from aldouslab import jobs
from aldouslab.aldous import (
    aldous_exhaustive_z2,
    build_equalized_sequence,
    find_tk,
    is_aldous,
    verify_corollary,
)
from aldouslab.lattice import (
    RateFunction,
    VertexSet,
    face_vertices,
    induced_rates,
    is_traceable,
    make_hypercube,
    random_rate_function,
    traceable_sequence,
)
from aldouslab.operators import ip_generator, rw_generator
from aldouslab.spectral import (
    hypercube_eigenpair,
    hypercube_gap_closed_form,
    spectral_gap,
    spectrum_containment,
)
from aldouslab.trace_bounds import gap_lower_bound, sandwich


def conclude(num: int, name: str, failures: list):
    status = "PASS" if not failures else "FAIL"
    print(f"ACCEPTANCE {num:2d} [{name}]: {status}")
    assert not failures, f"criterion {num} ({name}): {failures[:5]}"


def dense_rw_gap(V: VertexSet) -> float:
    return spectral_gap(rw_generator(induced_rates(V))).gap


def test_criterion_01_closed_form_gap():
    failures = []
    for d in (1, 2, 3):
        for n in range(2, 6):
            got = dense_rw_gap(make_hypercube(d, n))
            want = hypercube_gap_closed_form(d, n)
            if abs(got - want) > 1e-10:
                failures.append((d, n, got, want))
    for n in range(6, 201):
        got = dense_rw_gap(make_hypercube(1, n))
        want = hypercube_gap_closed_form(1, n)
        if abs(got - want) > 1e-10:
            failures.append((1, n, got, want))
    conclude(1, "closed-form hypercube gap", failures)


def test_criterion_02_eigenbasis():
    failures = []
    for d in (1, 2):
        for n in range(2, 5):
            G = rw_generator(induced_rates(make_hypercube(d, n)))
            vecs = []
            for k in np.ndindex(*([n] * d)):
                lam, vec = hypercube_eigenpair(d, n, k)
                if np.linalg.norm(G.matvec(vec) - lam * vec) > 1e-10:
                    failures.append(("residual", d, n, k))
                vecs.append(vec)
            gram = np.array(vecs) @ np.array(vecs).T
            if np.max(np.abs(gram - np.eye(n**d))) > 1e-10:
                failures.append(("gram", d, n))
    conclude(2, "closed-form eigenbasis", failures)


def test_criterion_03_spectrum_containment():
    rng = np.random.default_rng(20250803)
    failures = []
    for n in (3, 4, 5, 6):
        for trial in range(50):
            q = random_rate_function(n, rng)
            if not spectrum_containment(q, tol=1e-8):
                failures.append((n, trial))
    conclude(3, "spectrum containment, 50 random rates per size", failures)


def test_criterion_04_aldous_equality_desk_scale():
    failures = []
    out = aldous_exhaustive_z2(6, tol=1e-8)
    sizes = [len([r for r in out["rows"] if r["size"] == s]) for s in range(2, 7)]
    if sizes != [2, 6, 19, 63, 216]:
        failures.append(("enumeration counts", sizes))
    for r in out["rows"]:
        if r["abs_diff"] > 1e-8 or not r["one_sided_ok"]:
            failures.append(("z2", r["points"], r["abs_diff"]))
    # the lattice sequence through N = 8, interchange side via Lanczos
    for V in traceable_sequence(2, 3)[:7]:
        q = induced_rates(V)
        v = is_aldous(q, tol=1e-6, ip_method="lanczos")
        if v.abs_diff > 1e-6 or not v.one_sided_ok:
            failures.append(("sequence", len(V), v.abs_diff))
        ratio = v.gap_ip / v.gap_rw
        if abs(ratio - 1.0) > 1e-6:
            failures.append(("ratio", len(V), ratio))
    conclude(4, "gap equality at desk scale", failures)


def test_criterion_05_trace_inequalities():
    res = jobs.job_trace_fuzz(trials_1d=10000, trials_nd=1000, d_max=3,
                              n_max=5, seed=20250805, negative_control=True)
    failures = []
    control = res.payload["rows"][-1]
    for row in res.payload["rows"][:-1]:
        if row["slack"] < -1e-12 * max(1.0, row["rhs"]):
            failures.append(row)
    if not res.payload["negative_control_failed"] or control["slack"] >= 0:
        failures.append(("control did not violate", control))
    expected_trials = 10000 + 1000 * 15 + 1
    if res.payload["trials"] != expected_trials:
        failures.append(("trial count", res.payload["trials"], expected_trials))
    conclude(5, "trace inequality fuzz + negative control", failures)


def _traceable_supersets_masked(n: int):
    cube = make_hypercube(2, n).points
    boundary = face_vertices(2, n, 1).points + face_vertices(2, n, 2).points
    out = []
    for mask in range(1 << len(boundary)):
        extra = tuple(p for b, p in enumerate(boundary) if mask >> b & 1)
        V = VertexSet(2, cube + extra)
        if is_traceable(V, 2, n):
            out.append((mask, V))
    return out


def test_criterion_06_gap_comparison_exhaustive():
    failures = []
    for n in (2, 3, 4):
        sets = _traceable_supersets_masked(n)
        gaps = {mask: dense_rw_gap(V) for mask, V in sets}
        sizes = {mask: len(V) for mask, V in sets}
        for mask_v, _ in sets:
            for mask_vp, _ in sets:
                if mask_v & ~mask_vp:
                    continue
                bound = gap_lower_bound(2, n, sizes[mask_v], sizes[mask_vp],
                                        gaps[mask_v])
                if gaps[mask_vp] < bound - 1e-12:
                    failures.append((n, mask_v, mask_vp, gaps[mask_vp], bound))
    conclude(6, "comparison bound on all traceable pairs", failures)


def test_criterion_07_sandwich_asymptotics():
    failures = []
    widths = []
    for n in (20, 30, 40):
        order = (make_hypercube(2, n).points
                 + face_vertices(2, n, 1).points
                 + face_vertices(2, n, 2).points)
        max_width = 0.0
        for N in range(n * n, (n + 1) * (n + 1) + 1):
            V = VertexSet(2, order[:N])
            if not is_traceable(V, 2, n):
                failures.append(("not traceable", n, N))
                continue
            rep = sandwich(2, n, N)
            gap = dense_rw_gap(V)
            if not (rep.lower <= gap <= rep.upper):
                failures.append(("enclosure", n, N, rep.lower, gap, rep.upper))
            ratio = gap * N / math.pi**2
            lo, hi = rep.lower * N / math.pi**2, rep.upper * N / math.pi**2
            if not (lo <= ratio <= hi):
                failures.append(("ratio envelope", n, N, lo, ratio, hi))
            max_width = max(max_width, hi - lo)
        widths.append(max_width)
    if not (widths[0] > widths[1] > widths[2]):
        failures.append(("envelope widths not shrinking", widths))
    conclude(7, "sandwich bounds enclose the sequence", failures)


def test_criterion_08_equalization_pipeline():
    failures = []
    rates = [induced_rates(V) for V in traceable_sequence(1, 6)]
    target = 4 * math.sin(math.pi / 12) ** 2
    out = build_equalized_sequence(rates, tol=1e-10)
    for q_t, q in zip(out, rates):
        gap = spectral_gap(rw_generator(q_t)).gap
        if abs(gap - target) > 1e-10:
            failures.append(("gap", q_t.size, gap))
        for pair, w in q_t.weights.items():
            if w > q.rate(*pair) + 1e-12:
                failures.append(("pointwise", q_t.size, pair))
    from aldouslab.lattice import sequence_is_increasing
    if not sequence_is_increasing(out):
        failures.append("not increasing")
    rep = verify_corollary(rates, tol=1e-8)
    if not rep["ok"]:
        failures.append(("corollary", rep))
    conclude(8, "equalized-sequence pipeline", failures)


def test_criterion_09_bisection_analytic_case():
    t = find_tk(RateFunction(2, {(1, 2): 1.0}), 2, 1.0, tol=1e-10)
    failures = [] if abs(t - 0.5) <= 1e-10 else [t]
    conclude(9, "bisection analytic case t=1/2", failures)


def test_criterion_10_solver_cross_validation():
    rng = np.random.default_rng(20250810)
    failures = []
    for trial in range(100):
        if trial % 4 == 3:
            n = int(rng.integers(3, 7))
            q = random_rate_function(n, rng)
            G = ip_generator(q, mode="dense")
        else:
            n = int(rng.integers(3, 301))
            q = random_rate_function(n, rng, density=float(rng.random() * 0.5 + 0.1))
            G = rw_generator(q)
        dense = spectral_gap(G, method="dense")
        lan = spectral_gap(G, method="lanczos", tol=1e-10, seed=trial)
        if abs(dense.gap - lan.gap) > 1e-8 * max(1.0, dense.gap):
            failures.append(("agreement", trial, dense.gap, lan.gap))
        for res in (dense, lan):
            v = res.eigenvector
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                failures.append(("norm", trial, res.method))
            if abs(v.sum()) > 1e-8 * math.sqrt(G.dimension):
                failures.append(("mean", trial, res.method))
            certified = np.linalg.norm(-G.matvec(v) - res.gap * v)
            if certified > max(res.residual * 1.01, 1e-12):
                failures.append(("certificate", trial, res.method, certified))
    conclude(10, "dense vs Lanczos cross-validation", failures)
