"""Aldous-condition testing and the gap-equalization induction machinery.

"Aldous's condition" for a rate function is equality of the random-walk and
interchange-process spectral gaps.  Along an increasing sequence of rate
functions whose random-walk gaps attain their running minimum at the last
element, the condition can be certified by rescaling each element's newest
vertex until all gaps agree; this module implements that rescaling, the
bisection it needs, the bookkeeping columns for running minima, and ratio
tables along traceable lattice sequences.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .lattice import (
    RateFunction,
    VertexSet,
    induced_rates,
    sequence_is_increasing,
    traceable_sequence,
)
from .operators import DENSE_STATE_CAP, IP_MATRIX_FREE_MAX_N, rw_generator
from .spectral import ip_gap, rw_gap, spectral_gap
from .trace_bounds import sandwich

EQUALITY_REL_TOL = 1e-12  # float equality for running-min bookkeeping


@dataclass
class AldousVerdict:
    gap_rw: float
    gap_ip: float
    abs_diff: float
    tol: float
    holds: bool

    @property
    def one_sided_ok(self) -> bool:
        """The unconditional inequality: interchange gap <= random-walk gap."""
        return self.gap_ip <= self.gap_rw + self.tol

    def to_json_dict(self) -> dict:
        return {
            "gap_rw": self.gap_rw,
            "gap_ip": self.gap_ip,
            "abs_diff": self.abs_diff,
            "tol": self.tol,
            "holds": self.holds,
            "one_sided_ok": self.one_sided_ok,
        }


def is_aldous(q: RateFunction, tol: float = 1e-8, ip_method: str = "auto",
              lanczos_tol: float = 1e-9, seed: int = 0) -> AldousVerdict:
    """Compare the two gaps for one rate function.

    ip_method: "auto" (dense while N! fits under the dense cap, Lanczos
    after), or an explicit "dense" / "lanczos".
    """
    n = q.size
    if n > IP_MATRIX_FREE_MAX_N:
        raise ValueError(f"interchange gap computable up to N={IP_MATRIX_FREE_MAX_N}, got {n}")
    grw = rw_gap(q).gap
    if ip_method == "auto":
        ip_method = "dense" if math.factorial(n) <= DENSE_STATE_CAP else "lanczos"
    if ip_method == "dense":
        gip = ip_gap(q, ip_mode="dense", method="dense").gap
    elif ip_method == "lanczos":
        gip = ip_gap(q, ip_mode="matrix_free", method="lanczos",
                     tol=lanczos_tol, seed=seed).gap
    else:
        raise ValueError(f"unknown ip_method {ip_method!r}")
    diff = abs(gip - grw)
    return AldousVerdict(gap_rw=grw, gap_ip=gip, abs_diff=diff, tol=tol,
                         holds=diff <= tol * max(1.0, grw))


def interpolate_rate(q: RateFunction, k: int, t: float) -> RateFunction:
    """Scale by t exactly the pairs containing index k; leave the rest."""
    if q.size != k:
        raise ValueError(f"rate function has size {q.size}, expected {k}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} outside [0, 1]")
    weights = {
        (i, j): (t * w if k in (i, j) else w) for (i, j), w in q.weights.items()
    }
    return RateFunction(size=k, weights=weights)


def find_tk(q: RateFunction, k: int, target_gap: float, tol: float = 1e-10,
            max_iter: int = 60) -> float:
    """Bisection for t in [0,1] with gap(interpolate_rate(q, k, t)) = target.

    The gap is continuous and non-decreasing in t (rates only grow), zero at
    t=0 (vertex k disconnects), so any target below the t=1 gap is attained.
    Plateaus make t non-unique; the bisection limit point is returned.
    """
    if target_gap < -tol:
        raise ValueError(f"target gap must be >= 0, got {target_gap}")
    gap_at_one = rw_gap(q).gap
    if target_gap > gap_at_one + tol:
        raise ValueError(
            f"target {target_gap} above the attainable gap {gap_at_one}")
    if abs(gap_at_one - target_gap) <= tol:
        return 1.0
    if target_gap <= tol:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if rw_gap(interpolate_rate(q, k, mid)).gap < target_gap:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    achieved = rw_gap(interpolate_rate(q, k, t)).gap
    if abs(achieved - target_gap) > tol:
        raise RuntimeError(
            f"bisection stalled at t={t}: gap {achieved} vs target {target_gap}")
    return t


def _check_increasing_with_positive_gaps(rates: list[RateFunction], tol: float):
    if len(rates) < 1:
        raise ValueError("empty sequence")
    if not sequence_is_increasing(rates):
        raise ValueError("rate sequence is not increasing on nested pairs")
    gaps = [rw_gap(q).gap for q in rates]
    for idx, g in enumerate(gaps):
        if g <= tol:
            raise ValueError(
                f"sequence element of size {idx + 2} has zero spectral gap "
                "(disconnected); the induction needs positive gaps")
    return gaps


def build_equalized_sequence(rates: list[RateFunction], tol: float = 1e-10) -> list[RateFunction]:
    """Rescale each element's newest vertex so every random-walk gap equals
    the final element's gap.

    Requires an increasing input whose final gap is the running minimum.
    The output is verified before returning: gaps equal within tol, output
    rates pointwise <= input rates, output sequence increasing.
    """
    gaps = _check_increasing_with_positive_gaps(rates, tol)
    target = gaps[-1]
    for idx, g in enumerate(gaps):
        if g < target - tol:
            raise ValueError(
                f"running-minimum hypothesis fails: element of size {idx + 2} "
                f"has gap {g} below the final gap {target}")
    out = []
    for idx, q in enumerate(rates[:-1]):
        k = idx + 2
        out.append(interpolate_rate(q, k, find_tk(q, k, target, tol=tol)))
    out.append(rates[-1])

    for q_tilde, q in zip(out, rates):
        for pair, w in q_tilde.weights.items():
            if w > q.rate(*pair) + tol:
                raise RuntimeError("equalized rates exceed the input rates")
    if not sequence_is_increasing(out):
        raise RuntimeError("equalized sequence lost the increasing property")
    for q_tilde in out:
        if abs(rw_gap(q_tilde).gap - target) > tol:
            raise RuntimeError("equalized sequence gaps are not all equal")
    return out


def verify_corollary(rates: list[RateFunction], tol: float = 1e-8,
                     seed: int = 0) -> dict:
    """Certify the induction's conclusion on a concrete sequence: the final
    element satisfies Aldous's condition and the minimum interchange gap over
    the sequence sits at the final element and equals the final random-walk
    gap.  All three quantities are computed, not assumed."""
    gaps_rw = _check_increasing_with_positive_gaps(rates, tol)
    target = gaps_rw[-1]
    for idx, g in enumerate(gaps_rw):
        if g < target - tol:
            raise ValueError(
                f"running-minimum hypothesis fails at element of size {idx + 2}")
    gaps_ip = [
        is_aldous(q, tol=tol, seed=seed).gap_ip for q in rates
    ]
    min_ip = min(gaps_ip)
    res_min = abs(min_ip - gaps_ip[-1])
    res_aldous = abs(gaps_ip[-1] - target)
    scale = max(1.0, target)
    return {
        "sizes": [q.size for q in rates],
        "gaps_rw": gaps_rw,
        "gaps_ip": gaps_ip,
        "min_ip_equals_final_ip": res_min <= tol * scale,
        "final_ip_equals_final_rw": res_aldous <= tol * scale,
        "aldous_holds_at_final": res_aldous <= tol * scale,
        "residual_min_ip": res_min,
        "residual_aldous": res_aldous,
        "ok": res_min <= tol * scale and res_aldous <= tol * scale,
    }


def gap_bookkeeping(gaps: list[float], rel_tol: float = EQUALITY_REL_TOL):
    """Running minimum, local-minimum flags, and K(N) columns for a gap
    sequence indexed N = 2, 3, ...

    K(N) is the largest k <= N whose gap equals the running minimum at N
    (float equality up to rel_tol)."""
    running, local_flags, K = [], [], []
    best = math.inf
    for idx, g in enumerate(gaps):
        best = min(best, g)
        running.append(best)
        local_flags.append(abs(g - best) <= rel_tol * max(1.0, best))
        k_of_n = max(
            j for j in range(idx + 1)
            if abs(gaps[j] - best) <= rel_tol * max(1.0, best)
        )
        K.append(k_of_n + 2)  # list position j holds size j+2
    return running, local_flags, K


@dataclass
class SequenceRow:
    N: int
    n: int
    gap_rw: float
    gap_ip: float | None
    running_min: float
    is_local_min: bool
    K_of_N: int
    lower_bound: float
    upper_bound: float
    ratio: float

    def to_json_dict(self) -> dict:
        return {
            "N": self.N,
            "n": self.n,
            "gap_rw": self.gap_rw,
            "gap_ip": self.gap_ip,
            "running_min": self.running_min,
            "is_local_min": self.is_local_min,
            "K_of_N": self.K_of_N,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "ratio": self.ratio,
        }


CSV_COLUMNS = ["N", "n", "gap_rw", "gap_ip", "running_min", "is_local_min",
               "K_of_N", "lower_bound", "upper_bound", "ratio"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


@dataclass
class SequenceReport:
    d: int
    n_max: int
    ip_cap: int
    rows: list[SequenceRow]

    @property
    def asymptote_constant(self) -> float:
        return math.pi**2

    @property
    def exponent(self) -> float:
        return 2.0 / self.d

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "n_max": self.n_max,
            "ip_cap": self.ip_cap,
            "asymptote_constant": self.asymptote_constant,
            "exponent": self.exponent,
            "rows": [r.to_json_dict() for r in self.rows],
        }

    def to_csv(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for r in self.rows:
            d = r.to_json_dict()
            lines.append(",".join(_fmt(d[c]) for c in CSV_COLUMNS))
        return "\n".join(lines) + "\n"


def _integer_root(N: int, d: int) -> int:
    """Largest n with n^d <= N."""
    n = max(1, int(round(N ** (1.0 / d))))
    while n**d > N:
        n -= 1
    while (n + 1) ** d <= N:
        n += 1
    return n


def ratio_table(d: int, n_max: int, ip_cap: int = 8, tol: float = 1e-9,
                jobs: int = 1, rw_dense_cap: int = 4096,
                seed: int = 0) -> SequenceReport:
    """Walk the traceable sequence up to the side-n_max cube and tabulate,
    per N: both gaps (interchange only up to ip_cap), running-minimum
    bookkeeping, sandwich bounds, and the ratio gap * N^(2/d) / pi^2."""
    if d < 1 or n_max < 2:
        raise ValueError("need d >= 1 and n_max >= 2")
    if ip_cap > IP_MATRIX_FREE_MAX_N:
        raise ValueError(f"ip_cap exceeds the matrix-free limit {IP_MATRIX_FREE_MAX_N}")
    sets = traceable_sequence(d, n_max)

    def rw_of(V: VertexSet) -> float:
        q = induced_rates(V)
        return spectral_gap(rw_generator(q, sparse_over=rw_dense_cap), tol=tol).gap

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            gaps_rw = list(ex.map(rw_of, sets))
    else:
        gaps_rw = [rw_of(V) for V in sets]

    gaps_ip: list[float | None] = []
    for V in sets:
        if len(V) <= ip_cap:
            gaps_ip.append(is_aldous(induced_rates(V), seed=seed).gap_ip)
        else:
            gaps_ip.append(None)

    running, local_flags, K = gap_bookkeeping(gaps_rw)
    rows = []
    for idx, V in enumerate(sets):
        N = idx + 2
        n = _integer_root(N, d)
        if n >= 2:
            rep = sandwich(d, n, N)
            lower, upper = rep.lower, rep.upper
        else:
            lower, upper = math.nan, math.inf
        rows.append(SequenceRow(
            N=N, n=n, gap_rw=gaps_rw[idx], gap_ip=gaps_ip[idx],
            running_min=running[idx], is_local_min=local_flags[idx],
            K_of_N=K[idx], lower_bound=lower, upper_bound=upper,
            ratio=gaps_rw[idx] * N ** (2.0 / d) / math.pi**2,
        ))
    return SequenceReport(d=d, n_max=n_max, ip_cap=ip_cap, rows=rows)


def enumerate_z2_connected(max_vertices: int) -> dict[int, list[VertexSet]]:
    """Connected induced subgraphs of Z^2 with up to max_vertices vertices,
    exhaustively, up to translation.  Counts per size match the fixed
    polyomino numbers 1, 2, 6, 19, 63, 216, ..."""
    if max_vertices < 1:
        raise ValueError("max_vertices must be >= 1")

    def normalize(cells: frozenset) -> frozenset:
        mx = min(x for x, _ in cells)
        my = min(y for _, y in cells)
        return frozenset((x - mx, y - my) for x, y in cells)

    by_size: dict[int, set[frozenset]] = {1: {frozenset({(0, 0)})}}
    for s in range(2, max_vertices + 1):
        grown = set()
        for shape in by_size[s - 1]:
            for (x, y) in shape:
                for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    c = (x + dx, y + dy)
                    if c not in shape:
                        grown.add(normalize(shape | {c}))
        by_size[s] = grown

    out = {}
    for s, shapes in by_size.items():
        vsets = []
        for shape in sorted(shapes, key=sorted):
            pts = tuple(sorted((x + 1, y + 1) for x, y in shape))
            vsets.append(VertexSet(dim=2, points=pts))
        out[s] = vsets
    return out


def aldous_exhaustive_z2(max_vertices: int, tol: float = 1e-8) -> dict:
    """Run the gap comparison on every connected induced subgraph of Z^2
    with 2..max_vertices vertices (exhaustive up to translation)."""
    if max_vertices > 6:
        raise ValueError("exhaustive campaign capped at 6 vertices (dense states)")
    shapes = enumerate_z2_connected(max_vertices)
    rows = []
    for s in range(2, max_vertices + 1):
        for V in shapes[s]:
            verdict = is_aldous(induced_rates(V), tol=tol)
            rows.append({
                "size": s,
                "points": [list(p) for p in V.points],
                **verdict.to_json_dict(),
            })
    return {"rows": rows, "ok": all(r["holds"] and r["one_sided_ok"] for r in rows)}
