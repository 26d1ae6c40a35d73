"""Graph substrates walks run on.

A substrate is an immutable undirected simple graph stored in
compressed-sparse form over half-edges.  Each vertex owns a sequence of
ports (its incident half-edges, in a fixed order); the walk modules index
coin states by port or by geometric direction.

Lattice-built substrates additionally carry a direction label per
half-edge (axis a, sign s -> label 2*a + s with s=0 for the negative
direction).  Direction labels survive percolation, so a percolated line
still knows which of a vertex's remaining edges points left.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (
    InvalidEdgeError,
    InvalidParameterError,
    InvalidSizeError,
    OutOfRangeError,
)
from .rng import make_rng


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class PercolationMode(str, Enum):
    BOND = "bond"
    SITE = "site"


@dataclass(frozen=True)
class PercolationSpec:
    """Keep probability p applied per edge (bond) or per vertex (site)."""

    mode: PercolationMode
    p: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "mode", PercolationMode(self.mode))
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParameterError(f"percolation p must be in [0, 1], got {self.p}")


@dataclass(frozen=True, eq=False)
class Substrate:
    """Immutable half-edge graph.

    indptr[v]:indptr[v+1] delimits vertex v's ports in `neighbors`;
    `mirror[h]` is the index of the reverse half-edge of h.  `directions`
    is None for graphs without geometric structure.
    """

    n_vertices: int
    indptr: np.ndarray
    neighbors: np.ndarray
    mirror: np.ndarray
    boundary: Boundary
    provenance: Mapping
    directions: Optional[np.ndarray] = None
    n_directions: int = 0
    dims: Optional[tuple[int, ...]] = None

    # -- structural queries -------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.neighbors) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n_vertices else 0

    @property
    def coin_dimension(self) -> int:
        """Coin-space dimension the discrete walk uses on this substrate."""
        if self.directions is not None:
            return self.n_directions
        return max(self.max_degree, 1)

    @cached_property
    def edge_set(self) -> frozenset:
        src = np.repeat(np.arange(self.n_vertices), self.degrees)
        lo = np.minimum(src, self.neighbors)
        hi = np.maximum(src, self.neighbors)
        return frozenset(zip(lo.tolist(), hi.tolist()))

    def ports(self, v: int) -> np.ndarray:
        """Neighbors of v in port order."""
        self._check_vertex(v)
        return self.neighbors[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self.indptr[v + 1] - self.indptr[v])

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n_vertices:
            raise OutOfRangeError(
                f"vertex {v} out of range for substrate with {self.n_vertices} vertices"
            )

    def half_edge_sources(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_vertices), self.degrees)

    def __eq__(self, other) -> bool:
        """Structural equality: vertex count, boundary, and port lists."""
        if not isinstance(other, Substrate):
            return NotImplemented
        return (
            self.n_vertices == other.n_vertices
            and self.boundary == other.boundary
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.neighbors, other.neighbors)
        )

    __hash__ = None

    def __repr__(self) -> str:
        gen = self.provenance.get("generator", "?") if self.provenance else "?"
        return (
            f"Substrate({gen}, n={self.n_vertices}, edges={self.n_edges}, "
            f"boundary={self.boundary.value})"
        )


# -- construction helpers ----------------------------------------------------


def _build_mirror(n: int, indptr: np.ndarray, neighbors: np.ndarray) -> np.ndarray:
    """Pair each half-edge with its reverse.

    Sorting half-edges by canonical edge key (lo, hi) makes the two halves
    of every edge adjacent; within a pair, source order disambiguates.
    """
    src = np.repeat(np.arange(n), np.diff(indptr))
    lo = np.minimum(src, neighbors)
    hi = np.maximum(src, neighbors)
    order = np.lexsort((src, hi, lo))
    mirror = np.empty(len(neighbors), dtype=np.int64)
    a = order[0::2]
    b = order[1::2]
    mirror[a] = b
    mirror[b] = a
    return mirror


def _edge_ids(n: int, indptr: np.ndarray, neighbors: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Canonical (lexicographic) edge index per half-edge.

    Returns (edge_id per half-edge, edge_lo, edge_hi) with edges sorted by
    (lo, hi).  The canonical order defines the per-edge random draws during
    bond percolation.
    """
    src = np.repeat(np.arange(n), np.diff(indptr))
    lo = np.minimum(src, neighbors)
    hi = np.maximum(src, neighbors)
    order = np.lexsort((src, hi, lo))
    edge_id = np.empty(len(neighbors), dtype=np.int64)
    edge_id[order] = np.arange(len(neighbors)) // 2
    edge_lo = lo[order[0::2]]
    edge_hi = hi[order[0::2]]
    return edge_id, edge_lo, edge_hi


def _finish(
    n: int,
    indptr: np.ndarray,
    neighbors: np.ndarray,
    boundary: Boundary,
    provenance: Mapping,
    directions: Optional[np.ndarray],
    n_directions: int,
    dims: Optional[tuple[int, ...]],
) -> Substrate:
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    neighbors = np.ascontiguousarray(neighbors, dtype=np.int64)
    indptr.setflags(write=False)
    neighbors.setflags(write=False)
    mirror = _build_mirror(n, indptr, neighbors)
    mirror.setflags(write=False)
    if directions is not None:
        directions = np.ascontiguousarray(directions, dtype=np.int64)
        directions.setflags(write=False)
    return Substrate(
        n_vertices=n,
        indptr=indptr,
        neighbors=neighbors,
        mirror=mirror,
        boundary=boundary,
        provenance=provenance,
        directions=directions,
        n_directions=n_directions,
        dims=dims,
    )


def make_lattice(dims: Sequence[int], boundary: Union[Boundary, str] = Boundary.OPEN) -> Substrate:
    """Hypercubic lattice in 1 to 3 dimensions, row-major vertex indexing.

    Ports at every vertex are ordered (-axis0, +axis0, -axis1, ...), so the
    direction label of a half-edge equals its port meaning everywhere.
    Periodic boundaries need every axis length >= 3; length 2 would create
    a double edge and this graph type is simple.
    """
    boundary = Boundary(boundary)
    dims = tuple(int(d) for d in dims)
    if not 1 <= len(dims) <= 3:
        raise InvalidSizeError(f"lattice supports 1 to 3 dimensions, got {len(dims)}")
    if any(d < 2 for d in dims):
        raise InvalidSizeError(f"every lattice axis needs >= 2 sites, got {dims}")
    if boundary is Boundary.PERIODIC and any(d < 3 for d in dims):
        raise InvalidSizeError(
            f"periodic boundaries need every axis >= 3 sites (length-2 rings "
            f"would duplicate edges), got {dims}"
        )
    ndim = len(dims)
    n = int(np.prod(dims))
    n_dir = 2 * ndim
    coords = np.unravel_index(np.arange(n), dims)
    strides = [int(np.prod(dims[a + 1:])) for a in range(ndim)]

    # slot[v, 2a+s] = neighbor of v in that direction, or -1 at an open face
    slot = np.full((n, n_dir), -1, dtype=np.int64)
    vidx = np.arange(n)
    for a in range(ndim):
        ia = coords[a]
        if boundary is Boundary.PERIODIC:
            slot[:, 2 * a] = vidx + ((ia - 1) % dims[a] - ia) * strides[a]
            slot[:, 2 * a + 1] = vidx + ((ia + 1) % dims[a] - ia) * strides[a]
        else:
            m = ia > 0
            slot[m, 2 * a] = vidx[m] - strides[a]
            m = ia < dims[a] - 1
            slot[m, 2 * a + 1] = vidx[m] + strides[a]

    present = slot >= 0
    neighbors = slot[present]
    directions = np.broadcast_to(np.arange(n_dir), (n, n_dir))[present]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(present.sum(axis=1), out=indptr[1:])
    provenance = {
        "generator": "lattice",
        "dims": list(dims),
        "boundary": boundary.value,
    }
    return _finish(n, indptr, neighbors, boundary, provenance, directions, n_dir, dims)


def make_line(n_sites: int, boundary: Union[Boundary, str] = Boundary.OPEN) -> Substrate:
    """Line (path or cycle) of n_sites vertices; ports ordered (left, right)."""
    if n_sites < 2:
        raise InvalidSizeError(f"line needs >= 2 sites, got {n_sites}")
    sub = make_lattice([n_sites], boundary)
    provenance = {
        "generator": "line",
        "n_sites": int(n_sites),
        "boundary": Boundary(boundary).value,
    }
    return dataclasses.replace(sub, provenance=provenance)


def from_adjacency(edges: Iterable[Sequence[int]], n_vertices: int) -> Substrate:
    """Arbitrary simple graph from an undirected edge list.

    Ports at each vertex are sorted by neighbor index.  Vertices named in
    no edge are kept as isolated degree-0 vertices.
    """
    n = int(n_vertices)
    if n < 1:
        raise InvalidSizeError(f"graph needs >= 1 vertex, got {n}")
    pairs = [(int(u), int(v)) for u, v in edges]
    if pairs:
        arr = np.asarray(pairs, dtype=np.int64)
        if arr.min() < 0 or arr.max() >= n:
            bad = arr[(arr < 0) | (arr >= n)]
            raise OutOfRangeError(
                f"edge endpoint {int(bad.flat[0])} out of range for {n} vertices"
            )
        u, v = arr[:, 0], arr[:, 1]
        if np.any(u == v):
            w = int(u[u == v][0])
            raise InvalidEdgeError(f"self-loop at vertex {w} is not allowed")
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        key = lo * n + hi
        uniq, counts = np.unique(key, return_counts=True)
        if np.any(counts > 1):
            k = int(uniq[counts > 1][0])
            raise InvalidEdgeError(f"duplicate edge ({k // n}, {k % n})")
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        neighbors = dst
    else:
        indptr = np.zeros(n + 1, dtype=np.int64)
        neighbors = np.empty(0, dtype=np.int64)
    provenance = {"generator": "adjacency", "n_vertices": n, "n_edges": len(pairs)}
    return _finish(n, indptr, neighbors, Boundary.OPEN, provenance, None, 0, None)


def percolate(base: Substrate, spec: PercolationSpec, rep: Optional[int] = None) -> Substrate:
    """Random subgraph of `base` drawn from its own Philox stream.

    Bond mode draws one Bernoulli(p) keep decision per edge in canonical
    (lexicographically sorted) edge order; site mode draws one per vertex
    and keeps an edge iff both endpoints survive.  Removed vertices stay
    in place as isolated vertices, so vertex indexing never changes.
    Surviving ports keep their relative order and their direction labels.

    `rep` selects repetition rep of an ensemble: the draw stream is keyed
    (spec.seed,) for a single realization and (spec.seed, rep) otherwise,
    so ensembles are reproducible and independent of evaluation order.
    """
    rng = make_rng((spec.seed,) if rep is None else (spec.seed, int(rep)))
    edge_id, edge_lo, edge_hi = _edge_ids(base.n_vertices, base.indptr, base.neighbors)
    n_edges = base.n_edges
    if spec.mode is PercolationMode.BOND:
        keep_edge = rng.random(n_edges) < spec.p
    else:
        keep_vertex = rng.random(base.n_vertices) < spec.p
        keep_edge = keep_vertex[edge_lo] & keep_vertex[edge_hi]
    keep_half = keep_edge[edge_id] if n_edges else np.zeros(0, dtype=bool)

    src = base.half_edge_sources()
    neighbors = base.neighbors[keep_half]
    counts = np.bincount(src[keep_half], minlength=base.n_vertices)
    indptr = np.zeros(base.n_vertices + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    directions = (
        base.directions[keep_half] if base.directions is not None else None
    )
    provenance = {
        "generator": "percolation",
        "mode": spec.mode.value,
        "p": spec.p,
        "seed": int(spec.seed),
        "base": dict(base.provenance),
    }
    if rep is not None:
        provenance["rep"] = int(rep)
    return _finish(
        base.n_vertices,
        indptr,
        neighbors,
        base.boundary,
        provenance,
        directions,
        base.n_directions,
        base.dims,
    )


# -- adjacency text format -----------------------------------------------------


def write_adjacency(sub: Substrate, path: Union[str, Path]) -> None:
    """Plain-text graph file: first line is the vertex count, then one
    "u v" line per edge with u < v, sorted lexicographically."""
    _, lo, hi = _edge_ids(sub.n_vertices, sub.indptr, sub.neighbors)
    lines = [str(sub.n_vertices)]
    lines.extend(f"{int(u)} {int(v)}" for u, v in zip(lo, hi))
    Path(path).write_text("\n".join(lines) + "\n")


def read_adjacency(path: Union[str, Path]) -> Substrate:
    """Parse the text format written by `write_adjacency`."""
    raw = Path(path).read_text().split()
    if not raw:
        raise InvalidSizeError(f"adjacency file {path} is empty")
    n = int(raw[0])
    body = raw[1:]
    if len(body) % 2:
        raise InvalidEdgeError(f"adjacency file {path} has a dangling endpoint")
    it = iter(body)
    edges = [(int(u), int(v)) for u, v in zip(it, it)]
    return from_adjacency(edges, n)
