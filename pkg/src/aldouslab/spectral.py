"""Spectral gaps and spectra of symmetric Markov generators.

The gap is the smallest eigenvalue of -G restricted to the mean-zero
subspace.  Two routes are provided:

* dense: reflect the constant direction onto the first coordinate with a
  Householder matrix, drop that row/column, and take the smallest eigenpair
  of the (D-1)-dimensional block.  Exact deflation, no iteration.
* lanczos: run Lanczos with full reorthogonalization on the shifted operator
  f -> c f + G f (c a Gershgorin bound for -G, so the wanted eigenvalue maps
  to the top of the spectrum), subtracting the mean after every matvec.

Every returned eigenpair carries a residual computed from one extra matvec,
so results are certifiable without trusting the solver.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .lattice import RateFunction, make_hypercube
from .operators import (
    CapExceeded,
    SymmetricGenerator,
    ip_generator,
    rw_generator,
)

FULL_SPECTRUM_CAP = 5040


class SolverError(RuntimeError):
    """Iterative solver did not converge; carries diagnostics, never a value."""

    def __init__(self, message: str, *, iterations: int, best_value: float,
                 residual_estimate: float):
        super().__init__(
            f"{message} (iterations={iterations}, best_value={best_value!r}, "
            f"residual_estimate={residual_estimate!r})"
        )
        self.iterations = iterations
        self.best_value = best_value
        self.residual_estimate = residual_estimate


@dataclass
class SpectralResult:
    gap: float
    method: str
    residual: float
    iterations: int
    eigenvector: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "gap": self.gap,
            "method": self.method,
            "residual": self.residual,
            "iterations": self.iterations,
        }

    def save_eigenvector(self, path) -> None:
        """Little-endian float64 array with an 8-byte length header."""
        if self.eigenvector is None:
            raise ValueError("result carries no eigenvector")
        arr = np.asarray(self.eigenvector, dtype="<f8")
        with open(path, "wb") as fh:
            fh.write(struct.pack("<Q", arr.size))
            fh.write(arr.tobytes())


def load_eigenvector(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (size,) = struct.unpack("<Q", fh.read(8))
        return np.frombuffer(fh.read(8 * size), dtype="<f8").copy()


def _householder_deflate(A: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Return (M, u, uu) where M is A conjugated by the reflector sending the
    normalized constant vector to e_1, restricted to coordinates 2..D."""
    D = A.shape[0]
    u = np.full(D, 1.0 / math.sqrt(D))
    u[0] -= 1.0
    uu = float(u @ u)
    B = A - np.outer(u, (u @ A)) * (2.0 / uu)
    B -= np.outer(B @ u, u) * (2.0 / uu)
    M = B[1:, 1:]
    return 0.5 * (M + M.T), u, uu


def _dense_gap(G: SymmetricGenerator) -> SpectralResult:
    A = -G.to_dense()
    D = G.dimension
    if D < 2:
        raise ValueError("spectral gap needs at least 2 states")
    M, u, uu = _householder_deflate(A)
    vals, vecs = sla.eigh(M, subset_by_index=[0, 0])
    lam = float(vals[0])
    z = np.concatenate(([0.0], vecs[:, 0]))
    v = z - u * (u @ z) * (2.0 / uu)
    v -= v.mean()
    v /= np.linalg.norm(v)
    gap = max(lam, 0.0)
    residual = float(np.linalg.norm(A @ v - gap * v))
    return SpectralResult(gap=gap, method="dense", residual=residual,
                          iterations=0, eigenvector=v)


def _lanczos_gap(G: SymmetricGenerator, tol: float, max_iter: int,
                 seed: int) -> SpectralResult:
    D = G.dimension
    if D < 2:
        raise ValueError("spectral gap needs at least 2 states")
    c = 2.0 * G.max_diagonal_magnitude()
    if c == 0.0:
        # zero generator: gap 0, any mean-zero unit vector certifies it
        v = np.zeros(D)
        v[0], v[1] = 1.0, -1.0
        v /= np.linalg.norm(v)
        return SpectralResult(gap=0.0, method="lanczos", residual=0.0,
                              iterations=0, eigenvector=v)

    def shifted(f: np.ndarray) -> np.ndarray:
        out = c * f + G.matvec(f)
        out -= out.mean()  # deflate the constant direction
        return out

    rng = np.random.default_rng(seed)
    q = rng.standard_normal(D)
    q -= q.mean()
    q /= np.linalg.norm(q)

    limit = min(max_iter, D - 1)
    Q = np.empty((min(limit, 32), D))  # grown by doubling as needed
    Q[0] = q
    alphas: list[float] = []
    betas: list[float] = []
    theta_prev = None
    stable = 0
    breakdown = 1e-14 * c

    for it in range(1, limit + 1):
        j = it - 1  # index of the newest basis vector
        w = shifted(Q[j])
        alpha = float(Q[j] @ w)
        alphas.append(alpha)
        w -= alpha * Q[j]
        if j > 0:
            w -= betas[-1] * Q[j - 1]
        basis = Q[: j + 1]
        for _ in range(2):  # full reorthogonalization, twice is enough
            w -= basis.T @ (basis @ w)
        w -= w.mean()
        beta = float(np.linalg.norm(w))

        if it == 1:
            theta = alphas[0]
            y = np.array([1.0])
        else:
            vals, vecs = sla.eigh_tridiagonal(
                np.asarray(alphas), np.asarray(betas),
                select="i", select_range=(it - 1, it - 1))
            theta = float(vals[0])
            y = vecs[:, 0]
        res_est = abs(beta * y[-1])

        if theta_prev is not None and abs(theta - theta_prev) <= 1e-12 * max(1.0, abs(theta)):
            stable += 1
        else:
            stable = 0
        theta_prev = theta

        if beta <= breakdown or (res_est <= tol and stable >= 3) or it == limit:
            v = basis.T @ y
            v -= v.mean()
            v /= np.linalg.norm(v)
            gap = max(c - theta, 0.0)
            residual = float(np.linalg.norm(-G.matvec(v) - gap * v))
            if residual <= tol or beta <= breakdown:
                return SpectralResult(gap=gap, method="lanczos", residual=residual,
                                      iterations=it, eigenvector=v)
            if it == limit:
                raise SolverError(
                    "Lanczos did not converge",
                    iterations=it, best_value=gap, residual_estimate=residual)
        betas.append(beta)
        if it >= Q.shape[0]:
            Q = np.vstack([Q, np.empty_like(Q)])
        Q[it] = w / beta

    raise SolverError("Lanczos did not converge", iterations=limit,
                      best_value=float("nan"), residual_estimate=float("inf"))


def spectral_gap(G: SymmetricGenerator, tol: float = 1e-9, method: str = "auto",
                 max_iter: int = 500, seed: int = 0) -> SpectralResult:
    """Smallest eigenvalue of -G on the complement of constants.

    method "auto" picks the dense route whenever full storage is available
    and the Lanczos route for matrix-free generators.
    """
    if method == "auto":
        method = "dense" if G.storage == "dense" else "lanczos"
    if method == "dense":
        if G.dimension > FULL_SPECTRUM_CAP:
            raise CapExceeded(f"dense gap capped at {FULL_SPECTRUM_CAP} states")
        return _dense_gap(G)
    if method == "lanczos":
        return _lanczos_gap(G, tol=tol, max_iter=max_iter, seed=seed)
    raise ValueError(f"unknown method {method!r}")


def full_spectrum(G: SymmetricGenerator) -> np.ndarray:
    """All eigenvalues of -G, ascending."""
    if G.dimension > FULL_SPECTRUM_CAP:
        raise CapExceeded(f"full spectrum capped at {FULL_SPECTRUM_CAP} states")
    return np.linalg.eigvalsh(-G.to_dense())


def multiset_contained(sub, sup, tol: float) -> bool:
    """Greedy containment of one sorted multiset in another, up to tol."""
    sub = np.sort(np.asarray(sub, dtype=float))
    sup = np.sort(np.asarray(sup, dtype=float))
    ptr = 0
    for val in sub:
        while ptr < len(sup) and sup[ptr] < val - tol:
            ptr += 1
        if ptr == len(sup) or abs(sup[ptr] - val) > tol:
            return False
        ptr += 1
    return True


def spectrum_containment(q: RateFunction, tol: float = 1e-8) -> bool:
    """Multiset containment (up to tol) of the random-walk spectrum inside
    the interchange-process spectrum, matched greedily on sorted lists."""
    rw_vals = np.linalg.eigvalsh(rw_generator(q).to_dense())
    ip_vals = np.linalg.eigvalsh(ip_generator(q, mode="dense").to_dense())
    return multiset_contained(rw_vals, ip_vals, tol)


def hypercube_gap_closed_form(d: int, n: int) -> float:
    """Random-walk gap of the side-n cube: 4 sin^2(pi/(2n)), any dimension."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if n < 2:
        raise ValueError(f"side length must be >= 2 for a spectral gap, got {n}")
    return 4.0 * math.sin(math.pi / (2 * n)) ** 2


def _axis_mode(x: np.ndarray, k: int, n: int) -> np.ndarray:
    if k == 0:
        return np.full(x.shape, n ** -0.5)
    return math.sqrt(2.0 / n) * np.cos(math.pi * k * (x - 0.5) / n)


def hypercube_eigenpair(d: int, n: int, k) -> tuple[float, np.ndarray]:
    """Closed-form eigenpair of the side-n cube's random-walk generator.

    k is a d-vector of cosine mode numbers in [0, n-1]; the eigenvalue is the
    sum of the per-axis values -4 sin^2(pi k_i / (2n)) and the eigenvector is
    the product of the per-axis cosine modes, unit norm, indexed by the
    lexicographic cube enumeration.
    """
    k = [int(v) for v in k]
    if len(k) != d:
        raise ValueError(f"mode index has length {len(k)}, expected {d}")
    for v in k:
        if not 0 <= v <= n - 1:
            raise ValueError(f"mode number {v} outside [0, {n - 1}]")
    coords = np.array(make_hypercube(d, n).points, dtype=float)
    vec = np.ones(coords.shape[0])
    lam = 0.0
    for i in range(d):
        vec *= _axis_mode(coords[:, i], k[i], n)
        lam += -4.0 * math.sin(math.pi * k[i] / (2 * n)) ** 2
    return lam, vec


def rw_gap(q: RateFunction, tol: float = 1e-9, method: str = "auto",
           seed: int = 0) -> SpectralResult:
    return spectral_gap(rw_generator(q), tol=tol, method=method, seed=seed)


def ip_gap(q: RateFunction, tol: float = 1e-9, ip_mode: str = "auto",
           method: str = "auto", seed: int = 0) -> SpectralResult:
    return spectral_gap(ip_generator(q, mode=ip_mode), tol=tol, method=method, seed=seed)
