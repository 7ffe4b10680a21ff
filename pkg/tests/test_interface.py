import itertools

import numpy as np
import pytest

from ealab.couplings import DistributionSpec, manual_couplings, modify, sample_couplings
from ealab.errors import SizingError, StructuralError, UnsupportedKindError
from ealab.groundstate import (BoundaryCondition, SpinConfig, solve_ground_state)
from ealab.interface import (box_restricted_walls, count_tethered, decompose,
                             enumerate_rungs, interface, observed_edges, parity_check,
                             rung_infima)
from ealab.lattice import Region, build_dual, build_lattice, external_boundary

STD = DistributionSpec.standard()


def all_plus(lat):
    return SpinConfig(lat, np.ones(lat.n_vertices, dtype=np.int8))


def test_interface_of_flip_pair_is_empty():
    lat = build_lattice("box", (3, 3))
    s = all_plus(lat)
    assert interface(s, s.flipped()) == frozenset()
    assert interface(s, s) == frozenset()


def test_interface_single_flipped_vertex():
    lat = build_lattice("box", (4, 4))
    s = all_plus(lat)
    t = s.flip_region(Region.of_coords(lat, [(1, 2)]))
    ie = interface(s, t)
    assert len(ie) == 4
    assert all((1, 2) in lat.edge_coords(e) for e in ie)


def test_interface_symmetries():
    lat = build_lattice("box", (3, 3))
    rng = np.random.default_rng(3)
    a = SpinConfig(lat, rng.choice((-1, 1), size=9).astype(np.int8))
    b = SpinConfig(lat, rng.choice((-1, 1), size=9).astype(np.int8))
    assert interface(a, b) == interface(b, a)
    assert interface(a, b) == interface(a.flipped(), b)


def test_interface_matches_direct_bond_comparison():
    lat = build_lattice("box", (4, 4))
    J = sample_couplings(lat, STD, 8)
    region = Region.full(lat)
    s1 = solve_ground_state(J, region, BoundaryCondition.free()).sigma
    J2 = modify(J, 3, -float(J.values[3]) * 5)
    s2 = solve_ground_state(J2, region, BoundaryCondition.free()).sigma
    expected = {e for e in range(lat.n_edges) if s1.bond(e) != s2.bond(e)}
    assert interface(s1, s2) == expected


def test_interface_lattice_mismatch():
    a = all_plus(build_lattice("box", (3, 3)))
    b = all_plus(build_lattice("box", (4, 4)))
    with pytest.raises(StructuralError):
        interface(a, b)


def test_decompose_empty():
    lat = build_lattice("box", (3, 3))
    dec = decompose([], build_dual(lat))
    assert dec.walls == []
    assert dec.sanity["loops"] == 0


def test_decompose_flags_loop_for_non_ground_input():
    lat = build_lattice("box", (4, 4))
    dual = build_dual(lat)
    s = all_plus(lat)
    t = s.flip_region(Region.of_coords(lat, [(1, 1)]))
    dec = decompose(interface(s, t), dual)
    assert len(dec.walls) == 1
    assert len(dec.walls[0].dual_edges) == 4
    assert dec.sanity["loops"] == 1


def test_walls_partition_interface_edges():
    lat = build_lattice("box", (5, 4))
    dual = build_dual(lat)
    s = all_plus(lat)
    t = s.flip_region(Region.of_coords(lat, [(1, 1), (3, 2)]))
    dec = decompose(interface(s, t), dual)
    union = [e for w in dec.walls for e in w.dual_edges]
    assert sorted(union) == sorted(dec.interface_edges)
    assert len(dec.walls) == 2


def test_tethered_flag_and_counting():
    lat = build_lattice("halfplane_strip", (5, 3))
    dual = build_dual(lat)
    s = all_plus(lat)
    # flipping a full column cuts two vertical dual lines through the axis
    t = s.flip_region(Region.of_coords(lat, [(2, y) for y in range(3)]))
    dec = decompose(interface(s, t), dual)
    assert len(dec.walls) == 2
    assert all(w.tethered for w in dec.walls)
    assert count_tethered(dec, 2, 0) == 2
    # odd width: the centered zero-length segment misses the half-integer dual lines
    assert count_tethered(dec, 0, 0) == 0
    assert count_tethered(dec, 1, 0) == 2  # walls at offsets +-0.5 from center
    # monotone in n
    prev = 0
    for n in range(0, 3):
        cur = count_tethered(dec, n, 0)
        assert cur >= prev
        prev = cur
    with pytest.raises(SizingError):
        count_tethered(dec, 40, 0)
    with pytest.raises(SizingError):
        count_tethered(dec, 1, 9)


def test_count_tethered_requires_strip():
    lat = build_lattice("box", (4, 4))
    dec = decompose([], build_dual(lat))
    with pytest.raises(UnsupportedKindError):
        count_tethered(dec, 1, 0)


def test_parity_trivial_ferromagnet():
    lat = build_lattice("box", (3, 3))
    J = manual_couplings(lat, np.linspace(0.5, 1.5, lat.n_edges))
    s = all_plus(lat)
    assert all(parity_check(J, s, face) for face in lat.faces)


def test_parity_frustrated_plaquette():
    # one negative coupling on a face forces an odd number of unsatisfied edges
    lat = build_lattice("box", (2, 2))
    values = np.array([1.0, 1.0, 1.0, -1.0])
    J = manual_couplings(lat, values)
    face = lat.faces[0]
    for cfg in itertools.product((-1, 1), repeat=4):
        sigma = SpinConfig(lat, np.array(cfg, dtype=np.int8))
        unsat = sum(1 for e in face
                    if sigma.bond(e) != (1 if J.values[e] > 0 else -1))
        assert unsat % 2 == 1
        assert parity_check(J, sigma, face)


def test_parity_on_ground_states():
    lat = build_lattice("box", (4, 4))
    for seed in range(20):
        J = sample_couplings(lat, STD, 800 + seed)
        sol = solve_ground_state(J, Region.full(lat), BoundaryCondition.free())
        assert all(parity_check(J, sol.sigma, face) for face in lat.faces)


def test_parity_rejects_non_cycle():
    lat = build_lattice("box", (3, 3))
    J = sample_couplings(lat, STD, 1)
    s = all_plus(lat)
    with pytest.raises(StructuralError):
        parity_check(J, s, [0, 1])
    with pytest.raises(StructuralError):
        parity_check(J, s, [])


@pytest.fixture
def two_wall_instance():
    lat = build_lattice("box", (5, 3))
    dual = build_dual(lat)
    J = sample_couplings(lat, STD, 9)
    s = all_plus(lat)
    t = s.flip_region(Region.of_coords(lat, [(2, y) for y in range(3)]))
    dec = decompose(interface(s, t), dual)
    return lat, dual, J, s, dec


def test_rungs_between_parallel_walls(two_wall_instance):
    lat, dual, J, s, dec = two_wall_instance
    full = Region.full(lat)
    rungs = enumerate_rungs(dec, J, s, full, full, 4)
    short = [r for r in rungs if len(r.dual_edges) == 1]
    assert len(short) == 2
    for r in short:
        e = r.dual_edges[0]
        assert r.energy == float(J.values[e])  # all-plus replica
        assert set(lat.edge_coords(e)) == {(2, 0), (2, 1)} or \
            set(lat.edge_coords(e)) == {(2, 1), (2, 2)}
    assert all(set(r.dual_edges).isdisjoint(dec.interface_edges) for r in rungs)
    assert all(r.walls[0] != r.walls[1] for r in rungs)


def test_rungs_fewer_than_two_walls():
    lat = build_lattice("box", (4, 4))
    dual = build_dual(lat)
    J = sample_couplings(lat, STD, 2)
    s = all_plus(lat)
    dec = decompose([], dual)
    assert enumerate_rungs(dec, J, s, Region.full(lat), Region.full(lat), 4) == []


def test_rung_length_cap(two_wall_instance):
    lat, dual, J, s, dec = two_wall_instance
    full = Region.full(lat)
    with pytest.raises(SizingError):
        enumerate_rungs(dec, J, s, full, full, 13)


def test_rung_infima_families(two_wall_instance):
    lat, dual, J, s, dec = two_wall_instance
    full = Region.full(lat)
    rungs = enumerate_rungs(dec, J, s, full, full, 4)
    f = lat.edge_between((2, 0), (2, 1))
    inf = rung_infima(rungs, 0, f)
    assert inf.touching_wall == min(r.energy for r in rungs if 0 in r.walls)
    through = [r.energy for r in rungs if f in r.dual_edges]
    assert inf.through_edge == min(through)
    empty = rung_infima([], 0, f)
    assert empty.touching_wall is None
    assert empty.through_edge is None
    assert empty.to_dict()["inf_touching_wall"] is None


def test_rung_infimum_shifts_linearly(two_wall_instance):
    lat, dual, J, s, dec = two_wall_instance
    full = Region.full(lat)
    f = lat.edge_between((2, 0), (2, 1))
    base = rung_infima(enumerate_rungs(dec, J, s, full, full, 4), 0, f)
    delta = 0.41
    J2 = modify(J, f, float(J.values[f]) + delta)
    shifted = rung_infima(enumerate_rungs(dec, J2, s, full, full, 4), 0, f)
    assert abs(shifted.through_edge - (base.through_edge + delta)) < 1e-12


def test_box_restricted_walls_merge_with_larger_outer_box():
    # a U-shaped flipped region: its wall enters the inner box as two fragments
    lat = build_lattice("box", (7, 5))
    dual = build_dual(lat)
    s = all_plus(lat)
    u_region = [(2, y) for y in range(4)] + [(4, y) for y in range(4)] + [(3, 0)]
    t = s.flip_region(Region.of_coords(lat, u_region))
    dec = decompose(interface(s, t), dual)
    inner = Region.box(lat, 1, 2, 5, 3)
    counts = []
    for outer in (inner, Region.box(lat, 1, 1, 5, 4), Region.full(lat)):
        counts.append(len(box_restricted_walls(dec, inner, outer)))
    assert counts[0] >= counts[-1]
    assert counts[0] == 2 and counts[-1] == 1
    with pytest.raises(StructuralError):
        box_restricted_walls(dec, Region.full(lat), inner)


def test_ground_state_pair_walls_are_clean_on_strip():
    lat = build_lattice("halfplane_strip", (8, 6))
    dual = build_dual(lat)
    band = Region.box(lat, 1, 0, 6, 4)
    ext = external_boundary(lat, band)
    rng = np.random.default_rng(0)
    for seed in range(20):
        J = sample_couplings(lat, STD, 900 + seed)
        a = {v: int(rng.choice((-1, 1))) for v in ext}
        xs = [lat.coords[v][0] for v in ext]
        cx = (min(xs) + max(xs)) / 2
        b = {v: (-sv if lat.coords[v][0] > cx else sv) for v, sv in a.items()}
        s1 = solve_ground_state(J, band, BoundaryCondition.fixed(a)).sigma
        s2 = solve_ground_state(J, band, BoundaryCondition.fixed(b)).sigma
        dec = decompose(interface(s1, s2), dual, observed_edges(s1, s2))
        assert dec.sanity["loops"] == 0
        assert dec.sanity["dangling"] == 0
        assert dec.sanity["branch3"] == 0
        assert dec.sanity["double_crossings"] == 0
