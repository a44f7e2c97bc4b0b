"""Lattice geometry: hypercubes, boundary faces, lines, traceable vertex sets.

Vertices live on the integer lattice Z^d with nearest-neighbor adjacency
(L1 distance 1).  A ``VertexSet`` carries an explicit enumeration order;
that order is part of its identity because rate-function indices refer to it.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

Point = tuple[int, ...]


def _as_point(coords) -> Point:
    return tuple(int(c) for c in coords)


@dataclass(frozen=True)
class VertexSet:
    """Ordered finite subset of Z^d; the enumeration x_1..x_N is significant."""

    dim: int
    points: tuple[Point, ...]
    _index: dict[Point, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if len(self.points) < 1:
            raise ValueError("vertex set must be nonempty")
        for p in self.points:
            if len(p) != self.dim:
                raise ValueError(f"point {p} does not have dimension {self.dim}")
        index = {p: i for i, p in enumerate(self.points)}
        if len(index) != len(self.points):
            raise ValueError("duplicate points in vertex set")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, p) -> bool:
        return _as_point(p) in self._index

    def position(self, p) -> int:
        """0-based position of a point in the enumeration."""
        return self._index[_as_point(p)]

    def as_set(self) -> frozenset[Point]:
        return frozenset(self.points)

    def to_json_dict(self) -> dict:
        return {"dim": self.dim, "points": [list(p) for p in self.points]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "VertexSet":
        return cls(dim=int(d["dim"]), points=tuple(_as_point(p) for p in d["points"]))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load(cls, path) -> "VertexSet":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class RateFunction:
    """Symmetric nonnegative rates on unordered index pairs {i,j}, 1 <= i < j <= size."""

    size: int
    weights: dict[tuple[int, int], float]

    def __post_init__(self):
        if self.size < 2:
            raise ValueError(f"rate function needs size >= 2, got {self.size}")
        clean = {}
        for (i, j), w in self.weights.items():
            if not (1 <= i < j <= self.size):
                raise ValueError(f"pair ({i},{j}) out of range for size {self.size}")
            w = float(w)
            if w < 0:
                raise ValueError(f"negative rate {w} on pair ({i},{j})")
            if w != 0.0:
                clean[(i, j)] = w
        object.__setattr__(self, "weights", clean)

    def rate(self, i: int, j: int) -> float:
        if i == j:
            raise ValueError("pairs must have distinct indices")
        if i > j:
            i, j = j, i
        return self.weights.get((i, j), 0.0)

    def pairs(self):
        """Sorted (i, j, rate) triples with nonzero rate."""
        return [(i, j, w) for (i, j), w in sorted(self.weights.items())]

    def total_rate(self) -> float:
        return sum(self.weights.values())

    def max_row_rate(self) -> float:
        """Largest total rate incident to a single index (diagonal magnitude)."""
        row = [0.0] * (self.size + 1)
        for (i, j), w in self.weights.items():
            row[i] += w
            row[j] += w
        return max(row)

    def to_json_dict(self) -> dict:
        return {"size": self.size, "pairs": [[i, j, w] for i, j, w in self.pairs()]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "RateFunction":
        weights = {(int(i), int(j)): float(w) for i, j, w in d["pairs"]}
        return cls(size=int(d["size"]), weights=weights)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load(cls, path) -> "RateFunction":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def make_hypercube(d: int, n: int) -> VertexSet:
    """All n^d points with coordinates in [1, n], in lexicographic order."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if n < 1:
        raise ValueError(f"side length must be >= 1, got {n}")
    pts = tuple(itertools.product(range(1, n + 1), repeat=d))
    return VertexSet(dim=d, points=pts)


def face_vertices(d: int, n: int, k: int) -> VertexSet:
    """Face k of the decomposition of the side-(n+1) cube into the side-n cube
    plus d faces: coordinates 1..k-1 range over [1, n+1], coordinate k is
    pinned to n+1, coordinates k+1..d range over [1, n]."""
    if not 1 <= k <= d:
        raise ValueError(f"face index k={k} outside [1, {d}]")
    ranges = [range(1, n + 2)] * (k - 1) + [(n + 1,)] + [range(1, n + 1)] * (d - k)
    pts = tuple(itertools.product(*ranges))
    return VertexSet(dim=d, points=pts)


def in_face(p: Point, d: int, n: int, k: int) -> bool:
    if len(p) != d:
        return False
    head = all(1 <= p[i] <= n + 1 for i in range(k - 1))
    tail = all(1 <= p[i] <= n for i in range(k, d))
    return head and p[k - 1] == n + 1 and tail


def line_vertices(d: int, n: int, k: int, x) -> VertexSet:
    """The n+1 points obtained from a face-k point x by letting coordinate k
    run over 1..n+1; x itself is the last element."""
    x = _as_point(x)
    if not in_face(x, d, n, k):
        raise ValueError(f"point {x} is not in face k={k} of the side-{n} cube")
    pts = tuple(x[: k - 1] + (j,) + x[k:] for j in range(1, n + 2))
    return VertexSet(dim=d, points=pts)


def is_traceable(V: VertexSet, d: int, n: int) -> bool:
    """True iff every face point of V has its full lattice line back to the
    side-n cube inside V.  V must be a subset of the side-(n+1) cube."""
    vset = V.as_set()
    for p in vset:
        if not all(1 <= c <= n + 1 for c in p):
            raise ValueError(f"point {p} lies outside the side-{n + 1} cube")
    for k in range(1, d + 1):
        for x in vset:
            if not in_face(x, d, n, k):
                continue
            for y in line_vertices(d, n, k, x).points:
                if y not in vset:
                    return False
    return True


def traceable_sequence(d: int, n_max: int) -> list[VertexSet]:
    """Nested vertex sets V_2 c V_3 c ... c V_{n_max^d}, one point added at a
    time, hitting every hypercube exactly (V_{n^d} is the side-n cube) and
    staying traceable at every intermediate size.

    Growth rule between cubes: faces are filled in increasing k; within a
    face, points in lexicographic order.  Filling faces in increasing k means
    each appended face point already has its full line present (the line's
    interior lies in the side-n cube or in lower faces), so every prefix is
    traceable.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    order: list[Point] = [(1,) * d]
    for n in range(1, n_max):
        for k in range(1, d + 1):
            order.extend(face_vertices(d, n, k).points)
    prefix = tuple(order)
    return [VertexSet(dim=d, points=prefix[:N]) for N in range(2, n_max**d + 1)]


def random_traceable_fill(d: int, n: int, rng) -> list[Point]:
    """Random append order for the boundary of the side-(n+1) cube such that
    the side-n cube plus any prefix is traceable.

    At each step the candidates are the missing boundary points whose line
    interior is already present; the minimal incomplete face always supplies
    at least one, so the fill never stalls.
    """
    present = set(make_hypercube(d, n).points)
    missing = [
        (k, x) for k in range(1, d + 1) for x in face_vertices(d, n, k).points
    ]
    out: list[Point] = []
    while missing:
        candidates = []
        for k, x in missing:
            line = x[: k - 1] + (0,) + x[k:]
            interior = [line[: k - 1] + (j,) + line[k:] for j in range(1, n + 1)]
            if all(p in present for p in interior):
                candidates.append((k, x))
        k, x = candidates[rng.integers(len(candidates))]
        present.add(x)
        out.append(x)
        missing.remove((k, x))
    return out


def induced_rates(V: VertexSet) -> RateFunction:
    """Canonical unit rates of the subgraph induced by V in Z^d: rate 1 on
    index pairs whose points are at L1 distance 1, rate 0 otherwise."""
    if len(V) < 2:
        raise ValueError("need at least 2 vertices to form a rate function")
    weights = {}
    for a in range(len(V)):
        pa = V.points[a]
        for b in range(a + 1, len(V)):
            pb = V.points[b]
            if sum(abs(u - v) for u, v in zip(pa, pb)) == 1:
                weights[(a + 1, b + 1)] = 1.0
    return RateFunction(size=len(V), weights=weights)


def sequence_is_increasing(rates: list[RateFunction]) -> bool:
    """True iff consecutive rate functions never decrease on nested pairs.
    Position m of the list must have size m+2 (sizes 2, 3, ...)."""
    for m, q in enumerate(rates):
        if q.size != m + 2:
            raise ValueError(
                f"rate function at position {m} has size {q.size}, expected {m + 2}"
            )
    for q_k, q_next in zip(rates, rates[1:]):
        for i in range(1, q_k.size + 1):
            for j in range(i + 1, q_k.size + 1):
                if q_next.rate(i, j) < q_k.rate(i, j):
                    return False
    return True


def random_rate_function(n: int, rng, density: float = 0.7, scale: float = 2.0) -> RateFunction:
    """Seeded random rate function for fuzz campaigns."""
    weights = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.random() < density:
                weights[(i, j)] = float(rng.random() * scale)
    return RateFunction(size=n, weights=weights)


def adjacency_edges(V: VertexSet) -> list[tuple[int, int]]:
    """0-based index pairs of nearest-neighbor points in V."""
    if len(V) < 2:
        return []
    return [(i - 1, j - 1) for i, j, _ in induced_rates(V).pairs()]


def is_connected(V: VertexSet) -> bool:
    """BFS connectivity of the induced nearest-neighbor graph."""
    n = len(V)
    if n == 1:
        return True
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in adjacency_edges(V):
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    queue = [0]
    while queue:
        a = queue.pop()
        for b in adj[a]:
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return len(seen) == n
