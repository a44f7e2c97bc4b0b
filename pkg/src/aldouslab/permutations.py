"""Permutation arithmetic and Lehmer-code ranking.

Permutations are one-line tuples (pi_1, ..., pi_N) of the values 1..N.
Ranks index the N!-dimensional interchange-process state space; the lex
Lehmer code is used so that ranking needs no lookup tables and any two
implementations agree on test vectors.

The transposition action used throughout is LEFT multiplication: acting by
(i, j) swaps the values i and j wherever they appear in one-line notation.
"""

from __future__ import annotations

import itertools
import math
import os
from functools import lru_cache

import numpy as np

# 12! ~ 4.8e8 already exceeds what ranked enumeration is for; practical
# interchange-process computations stop well before this.
MAX_RANKED_N = 12

Perm = tuple[int, ...]


def _check_perm(p) -> Perm:
    p = tuple(int(v) for v in p)
    n = len(p)
    if n == 0 or sorted(p) != list(range(1, n + 1)):
        raise ValueError(f"{p} is not a permutation of 1..{n} in one-line notation")
    return p


def identity(n: int) -> Perm:
    return tuple(range(1, n + 1))


def rank(p) -> int:
    """Lex Lehmer rank in [0, N!-1]; the identity ranks 0."""
    p = _check_perm(p)
    n = len(p)
    if n > MAX_RANKED_N:
        raise ValueError(f"ranking capped at N={MAX_RANKED_N}, got {n}")
    r = 0
    for i in range(n):
        smaller_later = sum(1 for j in range(i + 1, n) if p[j] < p[i])
        r += smaller_later * math.factorial(n - 1 - i)
    return r


def unrank(r: int, n: int) -> Perm:
    """Inverse of rank for permutations of 1..n."""
    if n < 1 or n > MAX_RANKED_N:
        raise ValueError(f"size must be in [1, {MAX_RANKED_N}], got {n}")
    if not 0 <= r < math.factorial(n):
        raise ValueError(f"rank {r} out of range [0, {n}!)")
    avail = list(range(1, n + 1))
    out = []
    for i in range(n):
        f = math.factorial(n - 1 - i)
        digit, r = divmod(r, f)
        out.append(avail.pop(digit))
    return tuple(out)


def compose(a, b) -> Perm:
    """(a o b)(x) = a(b(x)); one-line entry i is a_{b_i}."""
    a, b = _check_perm(a), _check_perm(b)
    if len(a) != len(b):
        raise ValueError(f"size mismatch: {len(a)} vs {len(b)}")
    return tuple(a[v - 1] for v in b)


def invert(p) -> Perm:
    p = _check_perm(p)
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v - 1] = i + 1
    return tuple(out)


def transposition(n: int, i: int, j: int) -> Perm:
    if not (1 <= i < j <= n):
        raise ValueError(f"need 1 <= i < j <= {n}, got ({i},{j})")
    out = list(range(1, n + 1))
    out[i - 1], out[j - 1] = j, i
    return tuple(out)


def apply_transposition(p, i: int, j: int) -> Perm:
    """Left multiplication by (i, j): swap the values i and j in one-line form."""
    p = _check_perm(p)
    if not (1 <= i < j <= len(p)):
        raise ValueError(f"need 1 <= i < j <= {len(p)}, got ({i},{j})")
    swap = {i: j, j: i}
    return tuple(swap.get(v, v) for v in p)


def position_of(p, i: int) -> int:
    """The value pi_i in slot i of one-line notation."""
    p = _check_perm(p)
    if not 1 <= i <= len(p):
        raise ValueError(f"slot {i} out of range 1..{len(p)}")
    return p[i - 1]


# ---------------------------------------------------------------------------
# Vectorized whole-group tables.  These back the interchange-process
# operators, where per-element Python loops over N! would dominate.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def perm_table(n: int) -> np.ndarray:
    """(n!, n) array of all permutations of 1..n in lex (= rank) order."""
    if n < 1 or n > MAX_RANKED_N:
        raise ValueError(f"size must be in [1, {MAX_RANKED_N}], got {n}")
    table = np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int8)
    table.setflags(write=False)
    return table


def rank_rows(P: np.ndarray) -> np.ndarray:
    """Lehmer ranks of each row of a (m, n) array of one-line permutations."""
    m, n = P.shape
    out = np.zeros(m, dtype=np.int64)
    for i in range(n - 1):
        smaller_later = (P[:, i + 1 :] < P[:, i : i + 1]).sum(axis=1)
        out += smaller_later.astype(np.int64) * math.factorial(n - 1 - i)
    return out


def _cache_dir() -> str | None:
    return os.environ.get("ALDOUS_LAB_CACHE")


@lru_cache(maxsize=256)
def transposition_ranks(n: int, i: int, j: int) -> np.ndarray:
    """Index array A with A[r] = rank((i,j) . unrank(r)); an involution of
    [0, n!) with no fixed points.

    If ALDOUS_LAB_CACHE names a directory, tables are persisted there.
    """
    if not (1 <= i < j <= n):
        raise ValueError(f"need 1 <= i < j <= {n}, got ({i},{j})")
    cache = _cache_dir()
    path = None
    if cache:
        path = os.path.join(cache, f"tau_n{n}_{i}_{j}.npy")
        if os.path.exists(path):
            arr = np.load(path)
            arr.setflags(write=False)
            return arr
    P = perm_table(n)
    Q = P.copy()
    mask_i = P == i
    mask_j = P == j
    Q[mask_i] = j
    Q[mask_j] = i
    arr = rank_rows(Q)
    if path:
        os.makedirs(cache, exist_ok=True)
        np.save(path, arr)
    arr.setflags(write=False)
    return arr
