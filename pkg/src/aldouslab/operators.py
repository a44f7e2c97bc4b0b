"""Markov generators for the random walk and the interchange process.

Both generators are driven by one rate function q on index pairs:

* random walk on X_N = {1..N}:   (Of)(i)  = sum_j q({i,j}) (f(j) - f(i))
* interchange process on S_N:    (Of)(pi) = sum_{i<j} q({i,j}) (f((i,j).pi) - f(pi))

Each is symmetric, negative semi-definite, kills constants and has
nonnegative off-diagonal entries.  Dense storage is used up to
``DENSE_STATE_CAP`` states; above that the interchange generator is applied
matrix-free through precomputed rank-space transposition tables.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .lattice import RateFunction
from . import permutations as perms

# Full-matrix storage threshold (N=6 for the interchange process); beyond it
# a 5040^2 array of doubles buys nothing over an index-local matvec.
DENSE_STATE_CAP = 720
IP_DENSE_MAX_N = 7
IP_MATRIX_FREE_MAX_N = 9


class CapExceeded(RuntimeError):
    """A requested construction exceeds its resource guard."""


@dataclass
class SymmetricGenerator:
    """Symmetric Markov generator, stored dense, sparse, or as a
    (pair, rate) action list applied via rank-space transpositions."""

    dimension: int
    space: str  # "vertices" or "permutations"
    dense: np.ndarray | None = None
    sparse: sp.csr_matrix | None = None
    pair_actions: tuple[tuple[tuple[int, int], float], ...] | None = None
    ground_n: int = 0  # N of the underlying rate function, if any
    _tables: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def storage(self) -> str:
        if self.dense is not None:
            return "dense"
        if self.sparse is not None:
            return "sparse"
        return "matrix_free"

    def _action_tables(self) -> list[np.ndarray]:
        if not self._tables:
            self._tables = [
                perms.transposition_ranks(self.ground_n, i, j)
                for (i, j), _ in self.pair_actions
            ]
        return self._tables

    def matvec(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.dimension,):
            raise ValueError(f"vector has shape {f.shape}, expected ({self.dimension},)")
        if self.dense is not None:
            return self.dense @ f
        if self.sparse is not None:
            return self.sparse @ f
        out = -self.total_rate() * f
        for table, ((_, _), w) in zip(self._action_tables(), self.pair_actions):
            out += w * f[table]
        return out

    def total_rate(self) -> float:
        if self.pair_actions is not None:
            return sum(w for _, w in self.pair_actions)
        raise ValueError("total_rate needs an action list")

    def max_diagonal_magnitude(self) -> float:
        if self.dense is not None:
            return float(np.max(np.abs(np.diag(self.dense))))
        if self.sparse is not None:
            return float(np.max(np.abs(self.sparse.diagonal())))
        # every transposition displaces every permutation, so the diagonal
        # is constantly -(total rate)
        return self.total_rate()

    def to_dense(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        if self.sparse is not None:
            return self.sparse.toarray()
        D = self.dimension
        M = np.zeros((D, D))
        rows = np.arange(D)
        for table, ((_, _), w) in zip(self._action_tables(), self.pair_actions):
            M[rows, table] += w
        M[rows, rows] -= self.total_rate()
        return M

    def export_dense_csv(self, path) -> None:
        if self.dense is None:
            raise ValueError("CSV export is for dense generators")
        np.savetxt(path, self.dense, delimiter=",", fmt="%.17g")

    def action_list_json(self) -> dict:
        if self.pair_actions is None:
            raise ValueError("action-list export is for matrix-free generators")
        return {
            "size": self.ground_n,
            "pairs": [[i, j, w] for (i, j), w in self.pair_actions],
        }


def rw_generator(q: RateFunction, sparse_over: int = 4096) -> SymmetricGenerator:
    """Random-walk generator on N vertices; dense up to ``sparse_over``."""
    n = q.size
    triples = q.pairs()
    if n <= sparse_over:
        M = np.zeros((n, n))
        for i, j, w in triples:
            M[i - 1, j - 1] += w
            M[j - 1, i - 1] += w
            M[i - 1, i - 1] -= w
            M[j - 1, j - 1] -= w
        return SymmetricGenerator(dimension=n, space="vertices", dense=M, ground_n=n)
    rows, cols, vals = [], [], []
    for i, j, w in triples:
        rows += [i - 1, j - 1, i - 1, j - 1]
        cols += [j - 1, i - 1, i - 1, j - 1]
        vals += [w, w, -w, -w]
    M = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return SymmetricGenerator(dimension=n, space="vertices", sparse=M, ground_n=n)


def ip_generator(q: RateFunction, mode: str = "auto") -> SymmetricGenerator:
    """Interchange-process generator on N! permutations.

    mode: "dense" (N <= 7), "matrix_free" (N <= 9), or "auto" (dense while
    N! fits under DENSE_STATE_CAP, matrix-free after).
    """
    n = q.size
    if mode == "auto":
        mode = "dense" if math.factorial(n) <= DENSE_STATE_CAP else "matrix_free"
    if mode == "dense":
        if n > IP_DENSE_MAX_N:
            raise CapExceeded(f"dense interchange generator capped at N={IP_DENSE_MAX_N}, got {n}")
        D = math.factorial(n)
        M = np.zeros((D, D))
        rows = np.arange(D)
        total = 0.0
        for i, j, w in q.pairs():
            table = perms.transposition_ranks(n, i, j)
            M[rows, table] += w
            total += w
        M[rows, rows] -= total
        return SymmetricGenerator(dimension=D, space="permutations", dense=M, ground_n=n)
    if mode == "matrix_free":
        if n > IP_MATRIX_FREE_MAX_N:
            raise CapExceeded(
                f"matrix-free interchange generator capped at N={IP_MATRIX_FREE_MAX_N}, got {n}"
            )
        actions = tuple(((i, j), w) for i, j, w in q.pairs())
        return SymmetricGenerator(
            dimension=math.factorial(n),
            space="permutations",
            pair_actions=actions,
            ground_n=n,
        )
    raise ValueError(f"unknown mode {mode!r}")


def _u_matrix(p: perms.Perm) -> np.ndarray:
    """Left-regular action on vertex functions: (U(p) f)(i) = f((p^{-1})_i)."""
    n = len(p)
    inv = perms.invert(p)
    M = np.zeros((n, n))
    for i in range(n):
        M[i, inv[i] - 1] = 1.0
    return M


def delta_general(r: dict, N: int) -> SymmetricGenerator:
    """Generator sum_p r(p) (-I + (U(p) + U(p^{-1}))/2) on N vertices."""
    M = np.zeros((N, N))
    for p, w in r.items():
        w = float(w)
        if w < 0:
            raise ValueError(f"negative rate {w} on permutation {p}")
        p = perms._check_perm(p)
        if len(p) != N:
            raise ValueError(f"permutation {p} does not have size {N}")
        M += w * (-np.eye(N) + 0.5 * _u_matrix(p) + 0.5 * _u_matrix(perms.invert(p)))
    return SymmetricGenerator(dimension=N, space="vertices", dense=M, ground_n=N)


def _left_compose_ranks(p: perms.Perm, n: int) -> np.ndarray:
    """Index array B with B[r] = rank(p^{-1} . unrank(r))."""
    table = perms.perm_table(n)
    inv = np.array(perms.invert(p), dtype=np.int8)
    composed = inv[table - 1]
    return perms.rank_rows(composed)


def delta_hat_general(r: dict, N: int) -> SymmetricGenerator:
    """Generator sum_p r(p) (-I + (V(p) + V(p^{-1}))/2) on N! permutations,
    where V is the left regular representation.  Dense only."""
    if N > IP_DENSE_MAX_N:
        raise CapExceeded(f"dense permutation-space generator capped at N={IP_DENSE_MAX_N}")
    D = math.factorial(N)
    M = np.zeros((D, D))
    rows = np.arange(D)
    for p, w in r.items():
        w = float(w)
        if w < 0:
            raise ValueError(f"negative rate {w} on permutation {p}")
        p = perms._check_perm(p)
        if len(p) != N:
            raise ValueError(f"permutation {p} does not have size {N}")
        M[rows, _left_compose_ranks(p, N)] += 0.5 * w
        M[rows, _left_compose_ranks(perms.invert(p), N)] += 0.5 * w
        M[rows, rows] -= w
    return SymmetricGenerator(dimension=D, space="permutations", dense=M, ground_n=N)


@dataclass(frozen=True)
class LiftOperator:
    """Maps vertex functions to permutation functions: (T f)(pi) = f(pi_i)."""

    size: int
    slot: int

    def __post_init__(self):
        if not 1 <= self.slot <= self.size:
            raise ValueError(f"slot {self.slot} out of range 1..{self.size}")


def lift_apply(T: LiftOperator, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (T.size,):
        raise ValueError(f"vector has shape {f.shape}, expected ({T.size},)")
    table = perms.perm_table(T.size)
    return f[table[:, T.slot - 1].astype(np.int64) - 1]


def lift_adjoint_apply(T: LiftOperator, g) -> np.ndarray:
    """Adjoint of the lift: (T* g)(j) = sum over permutations with pi_i = j."""
    g = np.asarray(g, dtype=float)
    D = math.factorial(T.size)
    if g.shape != (D,):
        raise ValueError(f"vector has shape {g.shape}, expected ({D},)")
    slot_values = perms.perm_table(T.size)[:, T.slot - 1].astype(np.int64)
    out = np.zeros(T.size)
    np.add.at(out, slot_values - 1, g)
    return out


def verify_intertwining(q: RateFunction, i: int, trials: int = 20,
                        tol: float = 1e-12, seed: int = 0) -> bool:
    """Check that lifting commutes with the generators:
    ip_generator(q) . T_i == T_i . rw_generator(q) on random vectors."""
    n = q.size
    if n > IP_DENSE_MAX_N:
        raise CapExceeded(f"intertwining check capped at N={IP_DENSE_MAX_N}")
    T = LiftOperator(size=n, slot=i)
    rw = rw_generator(q)
    ip = ip_generator(q, mode="matrix_free")
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        f = rng.standard_normal(n)
        lhs = ip.matvec(lift_apply(T, f))
        rhs = lift_apply(T, rw.matvec(f))
        if np.linalg.norm(lhs - rhs) > tol * max(1.0, np.linalg.norm(f)):
            return False
    return True


def is_markov_generator(G: SymmetricGenerator, tol: float = 1e-12,
                        spot_checks: int = 25, seed: int = 0) -> bool:
    """Generator axioms: symmetry, zero row sums, nonnegative off-diagonals.

    Dense/sparse storage is checked entrywise; matrix-free storage is checked
    through matvecs (constants in the kernel, adjoint agreement on random
    vectors, off-diagonal signs on sampled basis vectors).
    """
    D = G.dimension
    if G.dense is not None or G.sparse is not None:
        M = G.dense if G.dense is not None else G.sparse.toarray()
        if np.max(np.abs(M - M.T)) > tol:
            return False
        if np.max(np.abs(M.sum(axis=1))) > tol * D:
            return False
        off = M - np.diag(np.diag(M))
        return bool(np.min(off) >= -tol)
    ones = np.ones(D)
    if np.max(np.abs(G.matvec(ones))) > tol * D:
        return False
    rng = np.random.default_rng(seed)
    for _ in range(3):
        f = rng.standard_normal(D)
        g = rng.standard_normal(D)
        if abs(f @ G.matvec(g) - G.matvec(f) @ g) > tol * D:
            return False
    for k in rng.integers(0, D, size=min(spot_checks, D)):
        e = np.zeros(D)
        e[k] = 1.0
        col = G.matvec(e)
        col[k] = 0.0
        if np.min(col) < -tol:
            return False
    return True


def quadratic_form(G: SymmetricGenerator, f) -> float:
    """Dirichlet energy <f, -G f>."""
    f = np.asarray(f, dtype=float)
    return float(f @ (-G.matvec(f)))


def save_action_list(G: SymmetricGenerator, path) -> None:
    with open(path, "w") as fh:
        json.dump(G.action_list_json(), fh)
