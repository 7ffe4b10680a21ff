"""Finite graph substrates: integer segments, boxes in Z^2, and half-plane strips.

Geometry conventions used throughout the package:

* Vertices carry integer coordinates ``(x, y)`` and are indexed in sorted
  ``(x, y)`` order, so index 0 is the lexicographically smallest coordinate
  (the "anchor" vertex used by solvers).
* Edges join nearest neighbors (L1 distance 1), are stored as ``(u, v)`` with
  ``u < v`` (vertex indices), and are indexed in lexicographic ``(u, v)``
  order.  Rebuilding a lattice from the same spec reproduces the indexing
  byte for byte.
* Faces are the unit squares of planar kinds, listed bottom-left first.
* A ``halfplane_strip(w, h)`` is a box whose bottom row sits on the x-axis;
  there are no edges below y=0 (free bottom boundary) and its dual lattice
  keeps a row of vertices at y=-1/2 so that paths crossing the x-axis are
  representable.

The dual lattice of a planar kind places a dual vertex at every half-integer
point ``(i+1/2, j+1/2)`` for ``i in [-1, w-1]``, ``j in [-1, h-1]`` (interior
face centers plus one full outer ring) and one dual edge crossing each primal
edge: a horizontal primal edge is crossed by a vertical dual edge and vice
versa.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import SizingError, StructuralError, UnsupportedKindError

VERTEX_CAP = 1024

KINDS = ("segment", "box", "halfplane_strip")

Coord = tuple[int, int]


class Lattice:
    """Immutable finite lattice; safe to share across concurrent readers."""

    __slots__ = (
        "kind",
        "dims",
        "coords",
        "edges",
        "coord_index",
        "adjacency",
        "neighbors",
        "faces",
        "_edge_index",
    )

    def __init__(self, kind: str, dims: tuple[int, ...], coords: tuple[Coord, ...],
                 edges: tuple[tuple[int, int], ...], faces: tuple[tuple[int, int, int, int], ...]):
        self.kind = kind
        self.dims = dims
        self.coords = coords
        self.edges = edges
        self.faces = faces
        self.coord_index = {c: i for i, c in enumerate(coords)}
        adjacency: list[list[int]] = [[] for _ in coords]
        neighbors: list[list[int]] = [[] for _ in coords]
        for eid, (u, v) in enumerate(edges):
            adjacency[u].append(eid)
            adjacency[v].append(eid)
            neighbors[u].append(v)
            neighbors[v].append(u)
        self.adjacency = tuple(tuple(a) for a in adjacency)
        self.neighbors = tuple(tuple(n) for n in neighbors)
        self._edge_index = {e: i for i, e in enumerate(edges)}

    # Lattices built from the same spec are interchangeable.
    def __eq__(self, other):
        return isinstance(other, Lattice) and self.kind == other.kind and self.dims == other.dims

    def __hash__(self):
        return hash((self.kind, self.dims))

    def __repr__(self):
        return f"Lattice({self.spec_string()!r}, |V|={self.n_vertices}, |E|={self.n_edges})"

    @property
    def n_vertices(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def spec_string(self) -> str:
        return f"{self.kind}:{','.join(str(d) for d in self.dims)}"

    def edge_index(self, pair: tuple[int, int]) -> int:
        """Edge id for an unordered vertex-index pair."""
        u, v = pair
        key = (u, v) if u < v else (v, u)
        eid = self._edge_index.get(key)
        if eid is None:
            raise StructuralError(f"no edge between vertices {u} and {v}")
        return eid

    def edge_between(self, c1: Coord, c2: Coord) -> int:
        """Edge id for an unordered coordinate pair."""
        try:
            return self.edge_index((self.coord_index[tuple(c1)], self.coord_index[tuple(c2)]))
        except KeyError as exc:
            raise StructuralError(f"coordinate {exc.args[0]} not in lattice") from exc

    def edge_coords(self, eid: int) -> tuple[Coord, Coord]:
        u, v = self.edges[eid]
        return self.coords[u], self.coords[v]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dims": list(self.dims),
            "vertices": [list(c) for c in self.coords],
            "edges": [list(e) for e in self.edges],
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


def canonical_json(obj) -> str:
    """Deterministic JSON encoding used for serialization and fingerprints."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def parse_spec(spec: str) -> tuple[str, tuple[int, ...]]:
    """Parse a lattice spec string such as ``box:4,4`` or ``segment:8``."""
    kind, _, rest = spec.partition(":")
    if kind not in KINDS or not rest:
        raise StructuralError(f"bad lattice spec {spec!r}; expected kind:dims with kind in {KINDS}")
    try:
        dims = tuple(int(p) for p in rest.split(","))
    except ValueError as exc:
        raise StructuralError(f"bad lattice dims in {spec!r}") from exc
    return kind, dims


def build_lattice(kind: str, dims: Sequence[int], cap: int = VERTEX_CAP) -> Lattice:
    """Build a lattice deterministically from its spec.

    ``segment(L)`` is a path of L vertices on the x-axis; ``box(w, h)`` and
    ``halfplane_strip(w, h)`` are w-by-h grids (the strip differing only in
    its dual construction and x-axis semantics).
    """
    dims = tuple(int(d) for d in dims)
    if kind not in KINDS:
        raise StructuralError(f"unknown lattice kind {kind!r}")
    if kind == "segment":
        if len(dims) != 1:
            raise StructuralError("segment takes a single length")
        (length,) = dims
        if length < 1:
            raise SizingError("segment length must be >= 1")
        n_vertices = length
        coords = tuple((x, 0) for x in range(length))
    else:
        if len(dims) != 2:
            raise StructuralError(f"{kind} takes width,height")
        w, h = dims
        if w < 1 or h < 1:
            raise SizingError("box dimensions must be >= 1")
        n_vertices = w * h
        coords = tuple(sorted((x, y) for x in range(w) for y in range(h)))
    if n_vertices > cap:
        raise SizingError(f"lattice has {n_vertices} vertices, exceeding cap {cap}")

    index = {c: i for i, c in enumerate(coords)}
    edge_set = []
    for (x, y), u in index.items():
        for nb in ((x + 1, y), (x, y + 1)):
            v = index.get(nb)
            if v is not None:
                edge_set.append((u, v) if u < v else (v, u))
    edges = tuple(sorted(edge_set))

    faces: tuple[tuple[int, int, int, int], ...] = ()
    if kind != "segment":
        w, h = dims
        edge_of = {e: i for i, e in enumerate(edges)}

        def eid(c1: Coord, c2: Coord) -> int:
            a, b = index[c1], index[c2]
            return edge_of[(a, b) if a < b else (b, a)]

        face_list = []
        for y in range(h - 1):
            for x in range(w - 1):
                # cyclic order: bottom, right, top, left
                face_list.append((
                    eid((x, y), (x + 1, y)),
                    eid((x + 1, y), (x + 1, y + 1)),
                    eid((x, y + 1), (x + 1, y + 1)),
                    eid((x, y), (x, y + 1)),
                ))
        faces = tuple(face_list)

    return Lattice(kind, dims, coords, edges, faces)


@dataclass(frozen=True)
class Region:
    """A subset of a lattice's vertices (may be empty)."""

    lattice: Lattice
    vertices: frozenset[int]

    def __post_init__(self):
        n = self.lattice.n_vertices
        for v in self.vertices:
            if not (0 <= v < n):
                raise StructuralError(f"vertex index {v} out of range for {self.lattice!r}")

    @classmethod
    def of(cls, lattice: Lattice, vertices: Iterable[int]) -> "Region":
        return cls(lattice, frozenset(int(v) for v in vertices))

    @classmethod
    def of_coords(cls, lattice: Lattice, coords: Iterable[Coord]) -> "Region":
        try:
            return cls(lattice, frozenset(lattice.coord_index[tuple(c)] for c in coords))
        except KeyError as exc:
            raise StructuralError(f"coordinate {exc.args[0]} not in lattice") from exc

    @classmethod
    def box(cls, lattice: Lattice, x0: int, y0: int, w: int, h: int) -> "Region":
        return cls.of_coords(lattice, ((x, y) for x in range(x0, x0 + w) for y in range(y0, y0 + h)))

    @classmethod
    def full(cls, lattice: Lattice) -> "Region":
        return cls(lattice, frozenset(range(lattice.n_vertices)))

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v: int):
        return v in self.vertices

    def sorted(self) -> list[int]:
        return sorted(self.vertices)

    def issubset(self, other: "Region") -> bool:
        return self.vertices <= other.vertices

    def complement_in(self, other: "Region") -> "Region":
        return Region(self.lattice, other.vertices - self.vertices)

    def bounding_box(self) -> tuple[int, int, int, int]:
        """(xmin, ymin, xmax, ymax) over member coordinates."""
        if not self.vertices:
            raise StructuralError("empty region has no bounding box")
        xs = [self.lattice.coords[v][0] for v in self.vertices]
        ys = [self.lattice.coords[v][1] for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def is_rectangle(self) -> bool:
        if not self.vertices:
            return False
        x0, y0, x1, y1 = self.bounding_box()
        return len(self.vertices) == (x1 - x0 + 1) * (y1 - y0 + 1)

    def to_list(self) -> list[int]:
        return self.sorted()


def boundary_edges(lattice: Lattice, region: Region) -> frozenset[int]:
    """Edges with exactly one endpoint in the region (edge boundary in the lattice)."""
    if region.lattice != lattice:
        raise StructuralError("region belongs to a different lattice")
    members = region.vertices
    out = []
    for eid, (u, v) in enumerate(lattice.edges):
        if (u in members) != (v in members):
            out.append(eid)
    return frozenset(out)


def external_boundary(lattice: Lattice, region: Region) -> list[int]:
    """Vertices outside the region adjacent to it, in canonical (sorted) order."""
    members = region.vertices
    seen = set()
    for v in members:
        for u in lattice.neighbors[v]:
            if u not in members:
                seen.add(u)
    return sorted(seen)


def enumerate_faces(lattice: Lattice) -> list[tuple[int, int, int, int]]:
    """All unit-square faces, each as 4 edge ids in cyclic order."""
    if lattice.kind == "segment":
        raise UnsupportedKindError("segment lattices have no faces")
    return list(lattice.faces)


class DualGraph:
    """Dual lattice of a planar kind; dual edge i crosses primal edge i."""

    __slots__ = ("lattice", "dual_coords", "dual_index", "dual_edges", "adjacency",
                 "tether_edges", "n_dual_vertices")

    def __init__(self, lattice: Lattice, dual_coords, dual_edges, tether_edges):
        self.lattice = lattice
        self.dual_coords = dual_coords
        self.dual_index = {c: i for i, c in enumerate(dual_coords)}
        self.dual_edges = dual_edges
        self.tether_edges = tether_edges
        self.n_dual_vertices = len(dual_coords)
        adjacency: list[list[tuple[int, int]]] = [[] for _ in dual_coords]
        for eid, (a, b) in enumerate(dual_edges):
            adjacency[a].append((eid, b))
            adjacency[b].append((eid, a))
        self.adjacency = tuple(tuple(a) for a in adjacency)

    def crossing_of(self, primal_edge: int) -> tuple[int, int]:
        return self.dual_edges[primal_edge]


def build_dual(lattice: Lattice) -> DualGraph:
    """Construct the dual graph of a planar lattice.

    Dual vertices live at ``(i + 0.5, j + 0.5)`` for ``i in [-1, w-1]`` and
    ``j in [-1, h-1]``.  For a half-plane strip the ``j = -1`` row sits below
    the x-axis, so a wall crossing the axis is visible as a dual edge with an
    endpoint at ``y = -0.5``.
    """
    if lattice.kind == "segment":
        raise UnsupportedKindError("segment lattices have no dual")
    w, h = lattice.dims
    dual_coords = tuple((i + 0.5, j + 0.5) for i in range(-1, w) for j in range(-1, h))
    dindex = {c: i for i, c in enumerate(dual_coords)}

    dual_edges = []
    tether = []
    for eid in range(lattice.n_edges):
        (x1, y1), (x2, y2) = lattice.edge_coords(eid)
        if y1 == y2:  # horizontal primal -> vertical dual
            a = dindex[(x1 + 0.5, y1 - 0.5)]
            b = dindex[(x1 + 0.5, y1 + 0.5)]
            if lattice.kind == "halfplane_strip" and y1 == 0:
                tether.append(eid)
        else:  # vertical primal -> horizontal dual
            a = dindex[(x1 - 0.5, y1 + 0.5)]
            b = dindex[(x1 + 0.5, y1 + 0.5)]
        dual_edges.append((a, b) if a < b else (b, a))

    return DualGraph(lattice, dual_coords, tuple(dual_edges), frozenset(tether))
