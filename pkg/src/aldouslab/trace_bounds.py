"""Discrete trace inequalities and spectral-gap comparison bounds.

The trace inequality bounds the squared mass of a function on the boundary
layer of a traceable vertex set by its bulk norm plus Dirichlet energy,
with constants (2d, 2).  The comparison bounds pin the random-walk gap of a
set between scaled gaps of the hypercubes it sandwiches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import (
    VertexSet,
    adjacency_edges,
    is_traceable,
    make_hypercube,
)


@dataclass
class TraceReport:
    lhs: float  # boundary mass sum |f(x)|^2
    rhs: float  # bound value
    slack: float  # rhs - lhs, >= 0 whenever the hypothesis holds
    constants_used: tuple[float, float]

    def to_json_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "constants": list(self.constants_used),
        }


@dataclass
class GapBoundReport:
    lower: float
    upper: float  # +inf when the upper prefactor is nonpositive
    lower_vacuous: bool
    upper_vacuous: bool
    inputs: dict

    def to_json_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "lower_vacuous": self.lower_vacuous,
            "upper_vacuous": self.upper_vacuous,
            "inputs": self.inputs,
        }


def trace_1d(f, n: int) -> TraceReport:
    """Endpoint bound on a path of n+1 points:
    |f(n+1)|^2 <= (2/n) sum_{k<=n} |f(k)|^2 + 2n sum_{k<=n} |f(k+1)-f(k)|^2."""
    f = np.asarray(f, dtype=float)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if f.shape != (n + 1,):
        raise ValueError(f"vector has shape {f.shape}, expected ({n + 1},)")
    lhs = float(f[n] ** 2)
    bulk = float(np.sum(f[:n] ** 2))
    energy = float(np.sum(np.diff(f) ** 2))
    rhs = (2.0 / n) * bulk + 2.0 * n * energy
    return TraceReport(lhs=lhs, rhs=rhs, slack=rhs - lhs, constants_used=(2.0, 2.0))


def dirichlet_energy(V: VertexSet, f) -> float:
    """sum over nearest-neighbor pairs in V of |f(x) - f(y)|^2."""
    f = np.asarray(f, dtype=float)
    if f.shape != (len(V),):
        raise ValueError(f"vector has shape {f.shape}, expected ({len(V)},)")
    return float(sum((f[a] - f[b]) ** 2 for a, b in adjacency_edges(V)))


def trace_nd(V: VertexSet, d: int, n: int, f, enforce_traceable: bool = True) -> TraceReport:
    """Boundary-layer bound on a traceable V inside the side-(n+1) cube:
    sum over V minus the side-n cube of |f|^2 <= (2d/n) ||f||^2 + 2n E(f),
    E the Dirichlet energy of the induced graph.

    With enforce_traceable=False the two sides are evaluated without the
    hypothesis; the inequality can then fail (used as a negative control).
    """
    if enforce_traceable and not is_traceable(V, d, n):
        raise ValueError("vertex set is not traceable; the bound's hypothesis fails")
    f = np.asarray(f, dtype=float)
    if f.shape != (len(V),):
        raise ValueError(f"vector has shape {f.shape}, expected ({len(V)},)")
    inner = make_hypercube(d, n).as_set()
    boundary = [idx for idx, p in enumerate(V.points) if p not in inner]
    lhs = float(np.sum(f[boundary] ** 2))
    rhs = (2.0 * d / n) * float(f @ f) + 2.0 * n * dirichlet_energy(V, f)
    return TraceReport(lhs=lhs, rhs=rhs, slack=rhs - lhs, constants_used=(2.0 * d, 2.0))


def gap_lower_bound(d: int, n: int, sizeV: int, sizeVprime: int, gapV: float) -> float:
    """Gap of a traceable superset V' in terms of the gap of V:
    (1 - 2d/n - |V'\\V|/|V|) gap(V) / (1 + 2n gap(V)).
    May be <= 0 for small n; callers treat nonpositive values as vacuous."""
    if not sizeVprime >= sizeV >= 1:
        raise ValueError(f"need sizeVprime >= sizeV >= 1, got {sizeVprime}, {sizeV}")
    if gapV < 0 or n < 1:
        raise ValueError("gapV must be >= 0 and n >= 1")
    extra = sizeVprime - sizeV
    return (1.0 - 2.0 * d / n - extra / sizeV) * gapV / (1.0 + 2.0 * n * gapV)


def _upper_prefactor(d: int, n: int) -> float:
    return 1.0 - (2.0 * d + 2.0 * math.pi**2 + (2.0**d - 1.0)) / n


def gap_upper_bound(d: int, n: int, sizeV: int, gap_next: float) -> float:
    """Gap of an intermediate set in terms of the next cube's gap:
    gap_next / (1 - [2d + 2 pi^2 + (2^d - 1)]/n).
    Returns +inf when the prefactor is nonpositive (vacuous bound)."""
    if not n**d <= sizeV <= (n + 1) ** d:
        raise ValueError(f"size {sizeV} outside [{n**d}, {(n + 1) ** d}]")
    pref = _upper_prefactor(d, n)
    if pref <= 0.0:
        return math.inf
    return gap_next / pref


def sandwich(d: int, n: int, N: int) -> GapBoundReport:
    """Lower/upper bounds for the random-walk gap of the N-th set on a
    traceable sequence between the side-n and side-(n+1) cubes."""
    if not n**d <= N <= (n + 1) ** d:
        raise ValueError(f"N={N} outside [{n**d}, {(n + 1) ** d}]")
    gap_n = 4.0 * math.sin(math.pi / (2 * n)) ** 2
    gap_next = 4.0 * math.sin(math.pi / (2 * (n + 1))) ** 2
    lower = ((1.0 - (2.0 * d + 2.0**d - 1.0) / n)
             / (1.0 + 2.0 * math.pi**2 / n)) * gap_n
    upper = gap_upper_bound(d, n, N, gap_next)
    return GapBoundReport(
        lower=lower,
        upper=upper,
        lower_vacuous=lower <= 0.0,
        upper_vacuous=math.isinf(upper),
        inputs={"d": d, "n": n, "N": N, "gap_cube": gap_n, "gap_next_cube": gap_next},
    )


def first_valid_sandwich_n(d: int, n_limit: int = 1000) -> int:
    """Smallest n at which both sandwich bounds are non-vacuous."""
    for n in range(2, n_limit + 1):
        rep = sandwich(d, n, n**d)
        if not rep.lower_vacuous and not rep.upper_vacuous:
            return n
    raise ValueError(f"no valid n found up to {n_limit}")
