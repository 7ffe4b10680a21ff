"""Solver oracles: every exact claim is cross-checked against naive enumeration."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ealab.couplings import DistributionSpec, manual_couplings, sample_couplings
from ealab.errors import (DegenerateDisorderError, PreconditionError, SizingError,
                          StructuralError)
from ealab.groundstate import (BoundaryCondition, SpinConfig,
                               enumerate_window_ground_states, hamiltonian,
                               is_ground_state, sample_replica_pair,
                               solve_ground_state, uniform_measure)
from ealab.lattice import Region, build_lattice, external_boundary

STD = DistributionSpec.standard()


def brute_force_minimum(J, region, assignment=None):
    """Independent oracle: evaluate every configuration with a fresh sum."""
    lattice = J.lattice
    assignment = assignment or {}
    order = region.sorted()
    free = [v for v in order if v not in assignment]
    if assignment == {}:
        # quotient the global flip exactly like the solver does
        anchor = order[0]
        assignment = {anchor: 1}
        free = [v for v in order if v != anchor]
    known = set(order) | set(assignment)
    objective = [eid for eid, (u, v) in enumerate(lattice.edges)
                 if u in known and v in known and (u in region.vertices or
                                                   v in region.vertices)]
    best = None
    for cfg in itertools.product((1, -1), repeat=len(free)):
        spins = dict(assignment)
        spins.update(zip(free, cfg))
        e = 0.0
        for eid in objective:
            u, v = lattice.edges[eid]
            e -= J.values[eid] * spins[u] * spins[v]
        if best is None or e < best[0]:
            best = (e, dict(spins))
    return best


def test_hamiltonian_zero_couplings():
    lat = build_lattice("box", (2, 2))
    J = manual_couplings(lat, [0.0] * 4)
    sigma = SpinConfig(lat, np.ones(4, dtype=np.int8))
    assert hamiltonian(J, Region.full(lat), sigma) == 0.0


def test_hamiltonian_single_satisfied_bond():
    lat = build_lattice("segment", (2,))
    J = manual_couplings(lat, [1.0])
    sigma = SpinConfig.from_string(lat, [0, 1], "++")
    assert hamiltonian(J, Region.full(lat), sigma) == -1.0


def test_segment3_worked_example():
    lat = build_lattice("segment", (3,))
    J = manual_couplings(lat, [1.5, -2.0])
    full = Region.full(lat)
    sigma = SpinConfig.from_string(lat, [0, 1, 2], "++-")
    assert hamiltonian(J, full, sigma) == -3.5
    ok, _ = is_ground_state(J, sigma, full)
    assert ok
    bad = SpinConfig.from_string(lat, [0, 1, 2], "+++")
    ok, worst = is_ground_state(J, bad, full)
    assert not ok
    # the most negative boundary sum is -2.0; {2} and {0,1} both attain it
    from ealab.lattice import boundary_edges
    scan_sum = sum(J.values[e] * bad.bond(e) for e in boundary_edges(lat, worst))
    assert scan_sum == -2.0

    sol = solve_ground_state(J, full, BoundaryCondition.free())
    assert sol.energy == -3.5
    assert tuple(sol.sigma.spins) == (1, 1, -1)
    assert tuple(sol.flip_partner.spins) == (-1, -1, 1)


def test_ferromagnetic_box22():
    lat = build_lattice("box", (2, 2))
    J = manual_couplings(lat, [1.0] * 4)
    sol = solve_ground_state(J, Region.full(lat), BoundaryCondition.free())
    assert sol.energy == -4.0
    assert len(set(sol.sigma.spins.tolist())) == 1


def test_all_positive_couplings_all_plus_is_ground_state():
    lat = build_lattice("box", (3, 3))
    J = manual_couplings(lat, np.linspace(0.5, 2.0, lat.n_edges))
    sigma = SpinConfig(lat, np.ones(9, dtype=np.int8))
    for window in (Region.full(lat), Region.box(lat, 0, 0, 2, 2)):
        ok, _ = is_ground_state(J, sigma, window)
        assert ok


@pytest.mark.parametrize("seed", range(12))
def test_gray_solver_matches_brute_force(seed):
    # non-rectangular region forces the Gray-code path
    lat = build_lattice("box", (4, 3))
    drop = lat.coord_index[(3, 2)]
    region = Region.of(lat, [v for v in range(lat.n_vertices) if v != drop])
    J = sample_couplings(lat, STD, 4000 + seed)
    sol = solve_ground_state(J, region, BoundaryCondition.free())
    energy, spins = brute_force_minimum(J, region)
    assert sol.energy == energy
    assert all(sol.sigma.spins[v] == s for v, s in spins.items())


@pytest.mark.parametrize("seed", range(4))
def test_dp_solver_matches_brute_force(seed):
    # 4x4 box: 15 free spins after pinning, at the column-sweep threshold
    lat = build_lattice("box", (4, 4))
    J = sample_couplings(lat, STD, 4100 + seed)
    sol = solve_ground_state(J, Region.full(lat), BoundaryCondition.free())
    energy, spins = brute_force_minimum(J, Region.full(lat))
    assert sol.energy == energy
    assert all(sol.sigma.spins[v] == s for v, s in spins.items())


@pytest.mark.parametrize("seed", range(6))
def test_fixed_bc_solver_matches_brute_force(seed):
    lat = build_lattice("box", (4, 4))
    inner = Region.box(lat, 1, 1, 2, 2)
    rng = np.random.default_rng(seed)
    assignment = {v: int(rng.choice((-1, 1))) for v in external_boundary(lat, inner)}
    J = sample_couplings(lat, STD, 4200 + seed)
    sol = solve_ground_state(J, inner, BoundaryCondition.fixed(assignment))
    energy, spins = brute_force_minimum(J, inner, assignment)
    assert sol.energy == energy
    assert all(sol.sigma.spins[v] == s for v, s in spins.items())


def test_solver_output_passes_ground_state_test():
    for seed in range(10):
        lat = build_lattice("box", (3, 3))
        J = sample_couplings(lat, STD, 4300 + seed)
        sol = solve_ground_state(J, Region.full(lat), BoundaryCondition.free())
        ok, _ = is_ground_state(J, sol.sigma, Region.full(lat))
        assert ok


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_hamiltonian_flip_symmetry(seed):
    lat = build_lattice("box", (3, 3))
    J = sample_couplings(lat, STD, seed)
    rng = np.random.default_rng(seed)
    sigma = SpinConfig(lat, rng.choice((-1, 1), size=9).astype(np.int8))
    region = Region.box(lat, 0, 0, 3, 2)
    assert hamiltonian(J, region, sigma) == hamiltonian(J, region, sigma.flipped())


def test_fixed_bc_consistent_with_free_minimizer():
    lat = build_lattice("box", (4, 4))
    J = sample_couplings(lat, STD, 17)
    full_sol = solve_ground_state(J, Region.full(lat), BoundaryCondition.free())
    inner = Region.box(lat, 1, 1, 2, 2)
    bc = BoundaryCondition.fixed(
        {v: int(full_sol.sigma.spins[v]) for v in external_boundary(lat, inner)})
    inner_sol = solve_ground_state(J, inner, bc)
    for v in inner.sorted():
        assert inner_sol.sigma.spins[v] == full_sol.sigma.spins[v]


def test_degenerate_disorder_is_rejected():
    lat = build_lattice("segment", (2,))
    J = manual_couplings(lat, [0.0])
    with pytest.raises(DegenerateDisorderError):
        solve_ground_state(J, Region.full(lat), BoundaryCondition.free())


def test_sizing_caps():
    lat = build_lattice("box", (8, 8))
    J = sample_couplings(lat, STD, 1)
    with pytest.raises(SizingError):
        solve_ground_state(J, Region.full(lat), BoundaryCondition.free())
    with pytest.raises(SizingError):
        is_ground_state(J, SpinConfig(lat, np.ones(64, dtype=np.int8)),
                        Region.full(lat))


def test_enumeration_1d_has_two_states():
    lat = build_lattice("segment", (6,))
    J = sample_couplings(lat, STD, 5)
    full = Region.full(lat)
    gs = enumerate_window_ground_states(J, full, full)
    assert gs.count == 2
    assert gs.flip_partner == [1, 0]
    for st_ in gs.states:
        sigma = SpinConfig.from_string(lat, full.sorted(), st_.spins)
        for eid in range(lat.n_edges):
            assert sigma.bond(eid) == (1 if J.values[eid] > 0 else -1)


def test_enumeration_ferromagnet_center_window():
    lat = build_lattice("box", (3, 3))
    J = manual_couplings(lat, np.linspace(1.0, 2.0, lat.n_edges))
    full = Region.full(lat)
    window = Region.of_coords(lat, [(1, 1)])
    gs = enumerate_window_ground_states(J, full, window)
    assert gs.count == 2
    assert sorted(st_.spins for st_ in gs.states) == ["+", "-"]


def test_enumeration_flip_closure_and_multiplicities():
    lat = build_lattice("box", (4, 4))
    J = sample_couplings(lat, STD, 21)
    outer = Region.box(lat, 1, 1, 2, 2)
    gs = enumerate_window_ground_states(J, outer, outer)
    assert gs.count % 2 == 0
    assert gs.count <= 2 ** len(outer)
    sig = gs.signature()
    total = sum(sig.values())
    assert total == 2 ** len(external_boundary(lat, outer))
    for i, st_ in enumerate(gs.states):
        j = gs.flip_partner[i]
        flipped = st_.spins.translate(str.maketrans("+-", "-+"))
        assert gs.states[j].spins == flipped
        assert gs.states[j].multiplicity == st_.multiplicity


def test_enumeration_caps():
    lat = build_lattice("box", (8, 8))
    J = sample_couplings(lat, STD, 2)
    inner = Region.box(lat, 1, 1, 6, 6)  # 20 boundary vertices
    with pytest.raises(SizingError):
        enumerate_window_ground_states(J, inner, inner)
    with pytest.raises(StructuralError):
        enumerate_window_ground_states(J, Region.box(lat, 0, 0, 2, 2),
                                       Region.box(lat, 4, 4, 2, 2))


def test_uniform_measure_and_pair_sampling():
    lat = build_lattice("box", (4, 4))
    J = sample_couplings(lat, STD, 33)
    outer = Region.box(lat, 1, 1, 2, 2)
    gs = enumerate_window_ground_states(J, outer, outer)
    mu = uniform_measure(gs)
    assert np.allclose(mu.weights, 1.0 / gs.count)

    k = gs.count
    draws = 100_000
    rng = np.random.default_rng(0)
    win = gs.window.sorted()
    equal = sum(
        1 for _ in range(draws)
        if (lambda pair: pair[0].restrict_str(win) == pair[1].restrict_str(win))(
            sample_replica_pair(mu, rng)))
    p = equal / draws
    se = np.sqrt((1 / k) * (1 - 1 / k) / draws)
    assert abs(p - 1 / k) < 3 * se


def test_spin_config_guards():
    lat = build_lattice("segment", (3,))
    with pytest.raises(StructuralError):
        SpinConfig(lat, np.array([2, 0, 0], dtype=np.int8))
    partial = SpinConfig.from_values(lat, {0: 1})
    assert partial.bond(0) is None
    with pytest.raises(PreconditionError):
        hamiltonian(manual_couplings(lat, [1.0, 1.0]), Region.full(lat), partial)
