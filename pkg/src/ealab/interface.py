"""Two-replica interfaces, dual-lattice domain walls, parity, and rungs.

The interface of two spin configurations is the set of edges whose bond
products differ; it is represented in the dual lattice by the edges crossing
it.  A domain wall is a connected component of that dual edge set.  On a
half-plane strip, a wall is *tethered* when it crosses the x-axis, i.e. it
contains the dual edge of a bottom-row horizontal primal edge (the only dual
edges with an endpoint below y = 0).

Sanity accounting distinguishes the bulk from the rim: parity forces an even
interface degree at every dual vertex whose four surrounding primal edges
all carry defined bond products in both replicas, so degree-1 (dangling) and
degree-3 vertices are only counted there.  Walls may legitimately terminate
at the lattice rim or where the configurations stop being defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .couplings import CouplingConfig
from .errors import PreconditionError, SizingError, StructuralError, UnsupportedKindError
from .groundstate import SpinConfig
from .lattice import DualGraph, Region

MAX_RUNG_LEN = 12


def interface(sigma: SpinConfig, sigma_prime: SpinConfig) -> frozenset[int]:
    """Edges where the two replicas' bond products differ (both defined)."""
    if sigma.lattice != sigma_prime.lattice:
        raise StructuralError("replicas live on different lattices")
    out = []
    for eid in range(sigma.lattice.n_edges):
        a = sigma.bond(eid)
        b = sigma_prime.bond(eid)
        if a is not None and b is not None and a != b:
            out.append(eid)
    return frozenset(out)


def observed_edges(sigma: SpinConfig, sigma_prime: SpinConfig) -> frozenset[int]:
    """Edges whose bond product is defined in both replicas."""
    return frozenset(eid for eid in range(sigma.lattice.n_edges)
                     if sigma.bond(eid) is not None and sigma_prime.bond(eid) is not None)


@dataclass(frozen=True)
class Wall:
    wall_id: int
    dual_edges: tuple[int, ...]
    tethered: bool


@dataclass
class InterfaceDecomposition:
    dual: DualGraph
    interface_edges: frozenset[int]
    walls: list[Wall]
    sanity: dict

    @property
    def lattice(self):
        return self.dual.lattice

    def to_dict(self) -> dict:
        return {
            "interface_edges": [list(self.lattice.edges[e]) for e in sorted(self.interface_edges)],
            "walls": [{"dual_edges": list(w.dual_edges), "tethered": w.tethered}
                      for w in self.walls],
            "sanity": self.sanity,
        }


def decompose(interface_edges: Iterable[int], dual: DualGraph,
              observed: Optional[frozenset[int]] = None) -> InterfaceDecomposition:
    """Split an interface into domain walls (connected components in the dual)."""
    lattice = dual.lattice
    edges = frozenset(int(e) for e in interface_edges)
    for e in edges:
        if not (0 <= e < lattice.n_edges):
            raise StructuralError(f"edge id {e} out of range")
    if observed is None:
        observed = frozenset(range(lattice.n_edges))

    # component search over dual vertices touched by the interface
    incident: dict[int, list[tuple[int, int]]] = {}
    for e in edges:
        a, b = dual.dual_edges[e]
        incident.setdefault(a, []).append((e, b))
        incident.setdefault(b, []).append((e, a))

    seen_v: set[int] = set()
    comps: list[list[int]] = []
    for start in incident:
        if start in seen_v:
            continue
        comp_edges: set[int] = set()
        stack = [start]
        seen_v.add(start)
        while stack:
            v = stack.pop()
            for e, nb in incident[v]:
                comp_edges.add(e)
                if nb not in seen_v:
                    seen_v.add(nb)
                    stack.append(nb)
        comps.append(sorted(comp_edges))
    comps.sort(key=lambda c: c[0])

    walls = []
    loops = 0
    double_crossings = 0
    for wid, comp in enumerate(comps):
        verts = set()
        for e in comp:
            verts.update(dual.dual_edges[e])
        loops += max(0, len(comp) - (len(verts) - 1))
        tether_hits = sum(1 for e in comp if e in dual.tether_edges)
        double_crossings += max(0, tether_hits - 1)
        walls.append(Wall(wall_id=wid, dual_edges=tuple(comp), tethered=tether_hits > 0))

    degree: dict[int, int] = {v: len(lst) for v, lst in
                              ((v, [e for e, _ in lst]) for v, lst in incident.items())}
    hist: dict[int, int] = {}
    for d in degree.values():
        hist[d] = hist.get(d, 0) + 1

    dangling = 0
    branch3 = 0
    for v, d in degree.items():
        around = dual.adjacency[v]
        if len(around) == 4 and all(e in observed for e, _ in around):
            if d == 1:
                dangling += 1
            elif d == 3:
                branch3 += 1

    sanity = {
        "loops": loops,
        "dangling": dangling,
        "branch3": branch3,
        "double_crossings": double_crossings,
        "branch_hist": {str(k): v for k, v in sorted(hist.items())},
    }
    return InterfaceDecomposition(dual=dual, interface_edges=edges, walls=walls,
                                  sanity=sanity)


def count_tethered(decomp: InterfaceDecomposition, n: int, k: int) -> int:
    """Distinct tethered walls crossing the centered segment [-n, n] x {k}."""
    lattice = decomp.lattice
    if lattice.kind != "halfplane_strip":
        raise UnsupportedKindError("tethered counting requires a halfplane_strip")
    if n < 0:
        raise SizingError("segment half-length must be >= 0")
    w, h = lattice.dims
    xc = (w - 1) / 2.0
    lo, hi = xc - n, xc + n
    if lo < -0.5 or hi > w - 0.5 or not (0 <= k <= h - 1):
        raise SizingError("segment extends outside the strip")
    count = 0
    for wall in decomp.walls:
        if not wall.tethered:
            continue
        for e in wall.dual_edges:
            (x1, y1), (x2, y2) = lattice.edge_coords(e)
            if y1 == y2 == k and lo <= x1 + 0.5 <= hi:
                count += 1
                break
    return count


def parity_check(J: CouplingConfig, sigma: SpinConfig, cycle: Iterable[int]) -> bool:
    """Parity of negative couplings on a cycle vs parity of unsatisfied edges."""
    lattice = J.lattice
    cyc = [J._eid(e) for e in cycle]
    if not cyc:
        raise StructuralError("empty cycle")
    deg: dict[int, int] = {}
    for e in cyc:
        for v in lattice.edges[e]:
            deg[v] = deg.get(v, 0) + 1
    if any(d % 2 for d in deg.values()):
        raise StructuralError("edge set is not a closed cycle")
    neg = 0
    unsat = 0
    for e in cyc:
        j = float(J.values[e])
        if j == 0.0:
            raise StructuralError("zero coupling on cycle; parity undefined")
        b = sigma.bond(e)
        if b is None:
            raise PreconditionError("sigma undefined on a cycle vertex")
        if j < 0:
            neg += 1
        if b != (1 if j > 0 else -1):
            unsat += 1
    return neg % 2 == unsat % 2


@dataclass(frozen=True)
class Rung:
    """A dual path joining two distinct walls, touching walls only at its ends."""

    dual_vertices: tuple[int, ...]
    dual_edges: tuple[int, ...]
    walls: tuple[int, int]
    energy: float

    def to_dict(self, dual: DualGraph) -> dict:
        return {
            "dual_vertices": [list(dual.dual_coords[v]) for v in self.dual_vertices],
            "dual_edges": list(self.dual_edges),
            "walls": list(self.walls),
            "energy": self.energy,
        }


def _dual_vertex_in_region(dual: DualGraph, vid: int, members_coords: set) -> bool:
    a, b = dual.dual_coords[vid]
    i, j = int(np.floor(a)), int(np.floor(b))
    return all(c in members_coords for c in
               ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)))


def box_restricted_walls(decomp: InterfaceDecomposition, box_j: Region,
                         box_l: Region) -> list[tuple[int, ...]]:
    """Wall fragments visible in the inner box, with connectivity judged in the outer box."""
    if not box_j.issubset(box_l):
        raise StructuralError("inner box must be contained in the outer box")
    dual = decomp.dual
    lattice = decomp.lattice
    coords_j = {lattice.coords[v] for v in box_j.vertices}
    coords_l = {lattice.coords[v] for v in box_l.vertices}
    dv_j = {v for v in range(dual.n_dual_vertices)
            if _dual_vertex_in_region(dual, v, coords_j)}
    dv_l = {v for v in range(dual.n_dual_vertices)
            if _dual_vertex_in_region(dual, v, coords_l)}

    inside_l = [e for e in sorted(decomp.interface_edges)
                if dual.dual_edges[e][0] in dv_l and dual.dual_edges[e][1] in dv_l]
    incident: dict[int, list[tuple[int, int]]] = {}
    for e in inside_l:
        a, b = dual.dual_edges[e]
        incident.setdefault(a, []).append((e, b))
        incident.setdefault(b, []).append((e, a))
    seen: set[int] = set()
    walls = []
    for start in sorted(incident):
        if start in seen:
            continue
        comp = set()
        stack = [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            for e, nb in incident[v]:
                comp.add(e)
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        visible = tuple(sorted(e for e in comp
                               if dual.dual_edges[e][0] in dv_j and dual.dual_edges[e][1] in dv_j))
        if visible:
            walls.append(visible)
    walls.sort(key=lambda c: c[0])
    return walls


def enumerate_rungs(decomp: InterfaceDecomposition, J: CouplingConfig, sigma: SpinConfig,
                    box_j: Region, box_l: Region, max_len: int) -> list[Rung]:
    """All non-self-intersecting dual paths of bounded length joining two distinct
    box-restricted walls, touching walls only at their endpoints."""
    if max_len > MAX_RUNG_LEN:
        raise SizingError(f"rung length cap is {MAX_RUNG_LEN}")
    if max_len < 1:
        raise SizingError("rung length must be >= 1")
    dual = decomp.dual
    lattice = decomp.lattice
    walls = box_restricted_walls(decomp, box_j, box_l)
    if len(walls) < 2:
        return []

    coords_j = {lattice.coords[v] for v in box_j.vertices}
    dv_j = {v for v in range(dual.n_dual_vertices)
            if _dual_vertex_in_region(dual, v, coords_j)}

    wall_of: dict[int, int] = {}
    for wid, comp in enumerate(walls):
        for e in comp:
            for v in dual.dual_edges[e]:
                wall_of[v] = wid

    # path edges: inside the inner box, off the interface, with defined bond energy
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in range(lattice.n_edges):
        a, b = dual.dual_edges[e]
        if a not in dv_j or b not in dv_j:
            continue
        if e in decomp.interface_edges:
            continue
        if sigma.bond(e) is None:
            continue
        adj.setdefault(a, []).append((e, b))
        adj.setdefault(b, []).append((e, a))

    found: dict[tuple[int, ...], Rung] = {}

    def record(verts: list[int], edges: list[int]):
        key = tuple(verts)
        rkey = tuple(reversed(verts))
        if rkey < key:
            key = rkey
            edges = list(reversed(edges))
        if key in found:
            return
        energy = 0.0
        for e in edges:
            energy += float(J.values[e]) * sigma.bond(e)
        found[key] = Rung(dual_vertices=key, dual_edges=tuple(edges),
                          walls=(wall_of[key[0]], wall_of[key[-1]]), energy=energy)

    def dfs(verts: list[int], edges: list[int], visited: set[int]):
        v = verts[-1]
        for e, nb in adj.get(v, ()):
            if nb in visited:
                continue
            wid = wall_of.get(nb)
            if wid is not None:
                if wid != wall_of[verts[0]]:
                    record(verts + [nb], edges + [e])
                continue  # own wall or any wall: cannot pass through
            if len(edges) + 1 < max_len:
                visited.add(nb)
                dfs(verts + [nb], edges + [e], visited)
                visited.remove(nb)
            elif len(edges) + 1 == max_len:
                pass  # interior vertex at the cap: nothing can complete the path

    start_vertices = sorted({v for comp in walls for e in comp for v in dual.dual_edges[e]})
    for sv in start_vertices:
        dfs([sv], [], {sv})

    return [found[k] for k in sorted(found)]


@dataclass(frozen=True)
class RungInfima:
    """Minima of rung energies over three subfamilies; None marks an empty family."""

    touching_wall: Optional[float]
    touching_wall_avoiding_edge: Optional[float]
    through_edge: Optional[float]

    def to_dict(self) -> dict:
        return {
            "inf_touching_wall": self.touching_wall,
            "inf_touching_wall_avoiding_edge": self.touching_wall_avoiding_edge,
            "inf_through_edge": self.through_edge,
        }


def rung_infima(rungs: list[Rung], wall_id: int, f_edge: int) -> RungInfima:
    """Energy infima over rungs touching a wall, those avoiding f*, and those through f*."""
    touching = [r.energy for r in rungs if wall_id in r.walls]
    avoiding = [r.energy for r in rungs
                if wall_id in r.walls and f_edge not in r.dual_edges]
    through = [r.energy for r in rungs if f_edge in r.dual_edges]
    pick = lambda xs: min(xs) if xs else None
    return RungInfima(touching_wall=pick(touching),
                      touching_wall_avoiding_edge=pick(avoiding),
                      through_edge=pick(through))
