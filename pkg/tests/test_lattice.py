import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ealab.errors import SizingError, StructuralError, UnsupportedKindError
from ealab.lattice import (Region, boundary_edges, build_dual, build_lattice,
                           enumerate_faces, external_boundary, parse_spec)


def test_segment_counts():
    lat = build_lattice("segment", (3,))
    assert lat.n_vertices == 3
    assert lat.n_edges == 2
    assert lat.faces == ()


def test_box22_counts():
    lat = build_lattice("box", (2, 2))
    assert lat.n_vertices == 4
    assert lat.n_edges == 4
    assert len(lat.faces) == 1


def test_box43_counts():
    # 3 horizontal per row x 3 rows + 2 vertical per column x 4 columns
    lat = build_lattice("box", (4, 3))
    assert lat.n_vertices == 12
    assert lat.n_edges == 17
    assert len(lat.faces) == 6


@pytest.mark.parametrize("dims,expected", [((2, 2), 1), ((3, 3), 4), ((5, 2), 4)])
def test_face_counts(dims, expected):
    lat = build_lattice("box", dims)
    assert len(enumerate_faces(lat)) == expected


def test_faces_are_cycles():
    lat = build_lattice("box", (4, 3))
    for face in lat.faces:
        assert len(face) == 4
        # consecutive edges share a vertex
        for i in range(4):
            a = set(lat.edges[face[i]])
            b = set(lat.edges[face[(i + 1) % 4]])
            assert a & b


def test_edges_are_nearest_neighbor_and_canonical():
    lat = build_lattice("box", (4, 4))
    prev = None
    for u, v in lat.edges:
        assert u < v
        (x1, y1), (x2, y2) = lat.coords[u], lat.coords[v]
        assert abs(x1 - x2) + abs(y1 - y2) == 1
        if prev is not None:
            assert prev < (u, v)
        prev = (u, v)
    assert max(len(a) for a in lat.adjacency) <= 4


def test_degree_sum_equals_twice_edges():
    for spec in ("segment:5", "box:4,3", "halfplane_strip:5,4"):
        lat = build_lattice(*parse_spec(spec))
        assert sum(len(a) for a in lat.adjacency) == 2 * lat.n_edges


def test_boundary_trivial_cases():
    lat = build_lattice("box", (3, 3))
    assert boundary_edges(lat, Region.full(lat)) == frozenset()
    center = Region.of_coords(lat, [(1, 1)])
    assert len(boundary_edges(lat, center)) == 4


def test_boundary_two_adjacent_interior():
    lat = build_lattice("box", (4, 4))
    region = Region.of_coords(lat, [(1, 1), (2, 1)])
    assert len(boundary_edges(lat, region)) == 6


@settings(max_examples=80, deadline=None)
@given(st.sets(st.integers(min_value=0, max_value=15)))
def test_boundary_complement_symmetry(vertices):
    lat = build_lattice("box", (4, 4))
    region = Region.of(lat, vertices)
    comp = region.complement_in(Region.full(lat))
    assert boundary_edges(lat, region) == boundary_edges(lat, comp)


def test_external_boundary():
    lat = build_lattice("box", (4, 4))
    inner = Region.box(lat, 1, 1, 2, 2)
    ext = external_boundary(lat, inner)
    assert len(ext) == 8
    assert all(v not in inner.vertices for v in ext)


def test_dual_box22():
    lat = build_lattice("box", (2, 2))
    dual = build_dual(lat)
    assert dual.n_dual_vertices == 9  # one face center plus the outer ring
    assert len(dual.dual_edges) == lat.n_edges


def test_dual_orientation_rule():
    lat = build_lattice("box", (3, 3))
    dual = build_dual(lat)
    for eid in range(lat.n_edges):
        (x1, y1), (x2, y2) = lat.edge_coords(eid)
        (a1, b1), (a2, b2) = (dual.dual_coords[v] for v in dual.dual_edges[eid])
        if y1 == y2:  # horizontal primal -> vertical dual
            assert a1 == a2 and b1 != b2
        else:
            assert b1 == b2 and a1 != a2


def test_strip_dual_reaches_below_axis():
    lat = build_lattice("halfplane_strip", (3, 2))
    dual = build_dual(lat)
    assert dual.tether_edges
    for eid in dual.tether_edges:
        ys = [dual.dual_coords[v][1] for v in dual.dual_edges[eid]]
        assert min(ys) < 0


def test_box_has_no_tether_edges():
    assert build_dual(build_lattice("box", (3, 3))).tether_edges == frozenset()


def test_rebuild_is_byte_identical():
    a = build_lattice("box", (4, 3)).to_json()
    b = build_lattice("box", (4, 3)).to_json()
    assert a == b


def test_sizing_and_kind_errors():
    with pytest.raises(SizingError):
        build_lattice("box", (0, 4))
    with pytest.raises(SizingError):
        build_lattice("box", (40, 40), cap=100)
    with pytest.raises(UnsupportedKindError):
        build_dual(build_lattice("segment", (4,)))
    with pytest.raises(UnsupportedKindError):
        enumerate_faces(build_lattice("segment", (4,)))
    with pytest.raises(StructuralError):
        build_lattice("torus", (3, 3))


def test_region_validation():
    lat = build_lattice("box", (2, 2))
    with pytest.raises(StructuralError):
        Region.of(lat, [99])
    with pytest.raises(StructuralError):
        Region.of_coords(lat, [(7, 7)])
    assert len(Region.of(lat, [])) == 0


def test_region_rectangle_detection():
    lat = build_lattice("box", (4, 4))
    assert Region.box(lat, 1, 1, 2, 3).is_rectangle()
    ragged = Region.of_coords(lat, [(0, 0), (1, 0), (0, 1)])
    assert not ragged.is_rectangle()
