"""Named verification suites for the finitely checkable lemmas.

Hard suites (exact statements) fail on any counterexample and dump a replica
record for replay.  Statistical suites (measure inequalities) fail only when
the empirical inequality is violated beyond three Wilson-interval widths.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .couplings import SUM_TOL, DistributionSpec, modify, sample_couplings, \
    translated_couplings
from .criticality import (ORACLE_TOL, critical_droplets, critical_value,
                          critical_value_bisection, droplet_flip, flexibility,
                          super_satisfied_values)
from .errors import ConfigError, InconsistencyError, VerificationError
from .experiments import (ExperimentSpec, _antipodal_pair, _built, derive_seed,
                          make_record, summary_sweep, wall_statistics,
                          wilson_halfwidth)
from .groundstate import (BoundaryCondition, SpinConfig,
                          enumerate_window_ground_states, solve_ground_state)
from .interface import decompose, interface, observed_edges, parity_check
from .lattice import Region, boundary_edges, build_dual, build_lattice

MAX_DUMPS = 5


@dataclass
class SuiteReport:
    suite: str
    params: dict
    passed: bool
    checks: list[dict] = field(default_factory=list)
    counterexamples: list[dict] = field(default_factory=list)
    elapsed_s: float = 0.0

    def to_dict(self) -> dict:
        return {"suite": self.suite, "params": self.params, "passed": self.passed,
                "checks": self.checks, "counterexamples": self.counterexamples,
                "elapsed_s": round(self.elapsed_s, 3)}


SUITES: dict[str, tuple] = {}


def _suite(name, **defaults):
    def deco(fn):
        SUITES[name] = (fn, defaults)
        return fn
    return deco


def verify_suite(name: str, params: dict | None = None) -> SuiteReport:
    """Run a registered suite; unknown names are configuration errors."""
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    fn, defaults = SUITES[name]
    merged = dict(defaults)
    merged.update(params or {})
    t0 = time.time()
    report = fn(merged)
    report.elapsed_s = time.time() - t0
    return report


def _dump(J, sigma, extra) -> dict:
    d = {"couplings": J.to_dict(), "sigma": sigma.to_dict()}
    d.update(extra)
    return d


def _bond_from_restriction(window_sorted, spins, u, v) -> int:
    su = 1 if spins[window_sorted.index(u)] == "+" else -1
    sv = 1 if spins[window_sorted.index(v)] == "+" else -1
    return su * sv


def _box33(seed, t, dist="gaussian:0,1"):
    lattice = build_lattice("box", (3, 3))
    J = sample_couplings(lattice, DistributionSpec.parse(dist),
                         derive_seed(seed, t, "disorder"))
    sol = solve_ground_state(J, Region.full(lattice), BoundaryCondition.free())
    return lattice, J, sol


# -- exact suites ---------------------------------------------------------------

@_suite("onedim", lengths=tuple(range(3, 13)), seeds_per_length=200, seed=0)
def _sv_onedim(p):
    report = SuiteReport("onedim", p, True)
    bad = 0
    for length in p["lengths"]:
        lattice = build_lattice("segment", (int(length),))
        full = Region.full(lattice)
        for s in range(p["seeds_per_length"]):
            J = sample_couplings(lattice, DistributionSpec.standard(),
                                 derive_seed(p["seed"], length, s))
            gs = enumerate_window_ground_states(J, full, full)
            ok = gs.count == 2 and gs.flip_partner == [1, 0]
            for st in gs.states:
                sigma = SpinConfig.from_string(lattice, full.sorted(), st.spins)
                for eid in range(lattice.n_edges):
                    if sigma.bond(eid) != (1 if J.values[eid] > 0 else -1):
                        ok = False
            if not ok:
                bad += 1
                if len(report.counterexamples) < MAX_DUMPS:
                    report.counterexamples.append(
                        {"couplings": J.to_dict(), "states": [st.spins for st in gs.states]})
    report.checks.append({"name": "count_2_and_sign_identity", "violations": bad})
    report.passed = bad == 0
    return report


@_suite("oracle", trials=1000, seed=0)
def _sv_oracle(p):
    report = SuiteReport("oracle", p, True)
    bad = 0
    worst = 0.0
    for t in range(p["trials"]):
        lattice, J, sol = _box33(p["seed"], t)
        rng = np.random.default_rng(derive_seed(p["seed"], t, "edge"))
        eid = int(rng.integers(0, lattice.n_edges))
        region = Region.full(lattice)
        c = critical_value(J, sol.sigma, eid, region)
        cb = critical_value_bisection(J, sol.sigma, eid, region)
        f = flexibility(J, sol.sigma, eid, region)
        gap = abs(c - cb)
        flex_gap = abs(f - abs(float(J.values[eid]) - c))
        worst = max(worst, gap)
        if gap > ORACLE_TOL or flex_gap > SUM_TOL:
            bad += 1
            if len(report.counterexamples) < MAX_DUMPS:
                report.counterexamples.append(_dump(J, sol.sigma, {
                    "edge": list(lattice.edges[eid]), "C": c, "C_bisect": cb, "F": f}))
    report.checks.append({"name": "oracle_agreement", "violations": bad,
                          "worst_gap": worst})
    report.passed = bad == 0
    return report


@_suite("bound", trials=500, seed=0)
def _sv_bound(p):
    report = SuiteReport("bound", p, True)
    bad = 0
    for t in range(p["trials"]):
        lattice, J, sol = _box33(p["seed"], t)
        region = Region.full(lattice)
        for eid in range(lattice.n_edges):
            c = critical_value(J, sol.sigma, eid, region)
            s = super_satisfied_values(J, eid).value
            if abs(c) > s + SUM_TOL:
                bad += 1
                if len(report.counterexamples) < MAX_DUMPS:
                    report.counterexamples.append(_dump(J, sol.sigma, {
                        "edge": list(lattice.edges[eid]), "C": c, "S": s}))
    report.checks.append({"name": "critical_within_supersat", "violations": bad})
    report.passed = bad == 0
    return report


@_suite("supersat_stability", trials=200, seed=0)
def _sv_supersat_stability(p):
    spec = ExperimentSpec()
    lattice, dist, outer, window, eid = _built(spec)
    u, v = lattice.edges[eid]
    win_sorted = window.sorted()
    report = SuiteReport("supersat_stability", p, True)
    bad = 0
    for t in range(p["trials"]):
        J = sample_couplings(lattice, dist, derive_seed(p["seed"], t, "disorder"))
        s = super_satisfied_values(J, eid).value
        for sign in (1, -1):
            g1 = enumerate_window_ground_states(modify(J, eid, sign * (s + 1.0)),
                                                outer, window)
            g2 = enumerate_window_ground_states(modify(J, eid, sign * (s + 10.0)),
                                                outer, window)
            ok = g1.signature() == g2.signature()
            ok &= all(_bond_from_restriction(win_sorted, st.spins, u, v) == sign
                      for st in g1.states)
            if not ok:
                bad += 1
                if len(report.counterexamples) < MAX_DUMPS:
                    report.counterexamples.append({
                        "couplings": J.to_dict(), "sign": sign,
                        "set_low": g1.signature(), "set_high": g2.signature()})
    report.checks.append({"name": "set_stability_and_forced_sign", "violations": bad})
    report.passed = bad == 0
    return report


@_suite("droplet_pair", trials=300, seed=0)
def _sv_droplet_pair(p):
    report = SuiteReport("droplet_pair", p, True)
    bad = 0
    for t in range(p["trials"]):
        lattice, J, sol = _box33(p["seed"], t)
        rng = np.random.default_rng(derive_seed(p["seed"], t, "edge"))
        eid = int(rng.integers(0, lattice.n_edges))
        region = Region.full(lattice)
        droplets = critical_droplets(J, sol.sigma, eid, region)
        try:
            for d in droplets:
                droplet_flip(J, sol.sigma, eid, d, region)
        except VerificationError as exc:
            bad += 1
            if len(report.counterexamples) < MAX_DUMPS:
                report.counterexamples.append(_dump(J, sol.sigma, {
                    "edge": list(lattice.edges[eid]), "error": str(exc)}))
    report.checks.append({"name": "flip_lands_in_opposite_sector", "violations": bad})
    report.passed = bad == 0
    return report


@_suite("droplet_avoid", trials=300, seed=0)
def _sv_droplet_avoid(p):
    report = SuiteReport("droplet_avoid", p, True)
    bad = 0
    for t in range(p["trials"]):
        lattice, J, _ = _box33(p["seed"], t)
        rng = np.random.default_rng(derive_seed(p["seed"], t, "pick"))
        eid = int(rng.integers(0, lattice.n_edges))
        e_ends = set(lattice.edges[eid])
        candidates = [d for d in range(lattice.n_edges)
                      if d != eid and not set(lattice.edges[d]) <= e_ends
                      and any(w not in e_ends for w in lattice.edges[d])]
        did = int(candidates[int(rng.integers(0, len(candidates)))])
        ss = super_satisfied_values(J, did)
        x = next(w for w in ss.endpoints if w not in e_ends)
        sval = ss.at_x if x == ss.endpoints[0] else ss.at_y
        sign = 1 if rng.random() < 0.5 else -1
        J2 = modify(J, did, sign * (sval + 1.0 + float(rng.exponential())))
        sol = solve_ground_state(J2, Region.full(lattice), BoundaryCondition.free())
        droplets = critical_droplets(J2, sol.sigma, eid, Region.full(lattice))
        for d in droplets:
            if did in boundary_edges(lattice, d):
                bad += 1
                if len(report.counterexamples) < MAX_DUMPS:
                    report.counterexamples.append(_dump(J2, sol.sigma, {
                        "edge": list(lattice.edges[eid]),
                        "blocked_edge": list(lattice.edges[did]),
                        "droplet": d.to_list()}))
    report.checks.append({"name": "droplet_avoids_supersatisfied_edges", "violations": bad})
    report.passed = bad == 0
    return report


@_suite("droplet_unique", trials=1000, min_unique=999, seed=0)
def _sv_droplet_unique(p):
    report = SuiteReport("droplet_unique", p, True)
    unique = 0
    for t in range(p["trials"]):
        lattice, J, sol = _box33(p["seed"], t)
        rng = np.random.default_rng(derive_seed(p["seed"], t, "edge"))
        eid = int(rng.integers(0, lattice.n_edges))
        droplets = critical_droplets(J, sol.sigma, eid, Region.full(lattice))
        if len(droplets) == 1:
            unique += 1
    report.checks.append({"name": "unique_canonical_droplet", "unique": unique,
                          "trials": p["trials"]})
    report.passed = unique >= p["min_unique"]
    return report


@_suite("parity", trials=500, seed=0)
def _sv_parity(p):
    lattice = build_lattice("box", (4, 4))
    full = Region.full(lattice)
    report = SuiteReport("parity", p, True)
    bad = 0
    for t in range(p["trials"]):
        J = sample_couplings(lattice, DistributionSpec.standard(),
                             derive_seed(p["seed"], t, "disorder"))
        gs = enumerate_window_ground_states(J, full, full)
        for st in gs.states:
            sigma = SpinConfig.from_string(lattice, full.sorted(), st.spins)
            for face in lattice.faces:
                if not parity_check(J, sigma, face):
                    bad += 1
                    if len(report.counterexamples) < MAX_DUMPS:
                        report.counterexamples.append(_dump(J, sigma, {
                            "face": [list(lattice.edges[e]) for e in face]}))
    report.checks.append({"name": "face_parity", "violations": bad})
    report.passed = bad == 0
    return report


@_suite("monotone", trials=300, seed=0)
def _sv_monotone(p):
    spec = ExperimentSpec()
    lattice, dist, outer, window, eid = _built(spec)
    u, v = lattice.edges[eid]
    win_sorted = window.sorted()
    report = SuiteReport("monotone", p, True)
    bad = 0
    for t in range(p["trials"]):
        J = sample_couplings(lattice, dist, derive_seed(p["seed"], t, "disorder"))
        rng = np.random.default_rng(derive_seed(p["seed"], t, "delta"))
        delta = 0.5 + float(rng.exponential())
        base = enumerate_window_ground_states(J, outer, window)
        up = enumerate_window_ground_states(modify(J, eid, float(J.values[eid]) + delta),
                                            outer, window)
        down = enumerate_window_ground_states(modify(J, eid, float(J.values[eid]) - delta),
                                              outer, window)
        up_set = set(up.signature())
        down_set = set(down.signature())
        for st in base.states:
            b = _bond_from_restriction(win_sorted, st.spins, u, v)
            if b == 1 and st.spins not in up_set:
                bad += 1
            if b == -1 and st.spins not in down_set:
                bad += 1
        if bad and len(report.counterexamples) < MAX_DUMPS:
            report.counterexamples.append({"couplings": J.to_dict(), "delta": delta,
                                           "base": base.signature(),
                                           "up": up.signature(),
                                           "down": down.signature()})
    report.checks.append({"name": "set_inclusion_under_modification", "violations": bad})
    report.passed = bad == 0
    return report


@_suite("cylinder", trials=300, seed=0)
def _sv_cylinder(p):
    lattice = build_lattice("box", (3, 3))
    full = Region.full(lattice)
    f = lattice.edge_between((1, 1), (1, 2))
    e1 = lattice.edge_between((0, 1), (0, 2))
    e2 = lattice.edge_between((2, 1), (2, 2))
    blockers = [
        (lattice.edge_between((0, 1), (1, 1)), lattice.coord_index[(0, 1)]),
        (lattice.edge_between((1, 1), (2, 1)), lattice.coord_index[(2, 1)]),
        (lattice.edge_between((1, 0), (1, 1)), lattice.coord_index[(1, 0)]),
        (lattice.edge_between((0, 2), (1, 2)), lattice.coord_index[(0, 2)]),
        (lattice.edge_between((1, 2), (2, 2)), lattice.coord_index[(2, 2)]),
    ]
    blocked = {b for b, _ in blockers}

    # the separating property is combinatorial; verify it once by enumeration
    for mask in range(1, 1 << 9):
        region = Region.of(lattice, [i for i in range(9) if (mask >> i) & 1])
        cut = boundary_edges(lattice, region)
        if f in cut and not (cut & blocked) and e1 not in cut and e2 not in cut:
            raise InconsistencyError("separating-set construction is wrong")

    report = SuiteReport("cylinder", p, True)
    bad = 0
    for t in range(p["trials"]):
        J = sample_couplings(lattice, DistributionSpec.standard(),
                             derive_seed(p["seed"], t, "disorder"))
        rng = np.random.default_rng(derive_seed(p["seed"], t, "mods"))
        for b, x in blockers:
            ss = super_satisfied_values(J, b)
            sval = ss.at_x if x == ss.endpoints[0] else ss.at_y
            sign = 1 if rng.random() < 0.5 else -1
            J = modify(J, b, sign * (sval + 1.0 + float(rng.exponential())))
        for b, x in blockers:
            ss = super_satisfied_values(J, b)
            sval = ss.at_x if x == ss.endpoints[0] else ss.at_y
            if abs(float(J.values[b])) <= sval:
                raise InconsistencyError("blocker lost its margin; setup bug")
        sol = solve_ground_state(J, full, BoundaryCondition.free())
        ff = flexibility(J, sol.sigma, f, full)
        f1 = flexibility(J, sol.sigma, e1, full)
        f2 = flexibility(J, sol.sigma, e2, full)
        if ff < min(f1, f2) - SUM_TOL:
            bad += 1
            if len(report.counterexamples) < MAX_DUMPS:
                report.counterexamples.append(_dump(J, sol.sigma, {
                    "F_f": ff, "F_e1": f1, "F_e2": f2}))
    report.checks.append({"name": "flexibility_channelled_through_gates", "violations": bad})
    report.passed = bad == 0
    return report


@_suite("covariance", trials=60, seed=0)
def _sv_covariance(p):
    lattice = build_lattice("box", (6, 4))
    base_outer = Region.box(lattice, 1, 1, 2, 2)
    shifted_outer = Region.box(lattice, 2, 1, 2, 2)
    report = SuiteReport("covariance", p, True)
    bad = 0
    for t in range(p["trials"]):
        J = sample_couplings(lattice, DistributionSpec.standard(),
                             derive_seed(p["seed"], t, "disorder"))
        J_shift = translated_couplings(J, 1, 0)
        g0 = enumerate_window_ground_states(J, base_outer, base_outer)
        g1 = enumerate_window_ground_states(J_shift, shifted_outer, shifted_outer)
        if g0.signature() != g1.signature():
            bad += 1
            if len(report.counterexamples) < MAX_DUMPS:
                report.counterexamples.append({"couplings": J.to_dict(),
                                               "base": g0.signature(),
                                               "shifted": g1.signature()})
    report.checks.append({"name": "shifted_disorder_shifts_the_set", "violations": bad})
    report.passed = bad == 0
    return report


@_suite("interface_sanity", trials=300, seed=0)
def _sv_interface_sanity(p):
    lattice = build_lattice("halfplane_strip", (8, 6))
    dual = build_dual(lattice)
    band = Region.box(lattice, 1, 0, 6, 4)
    report = SuiteReport("interface_sanity", p, True)
    bad = 0
    for t in range(p["trials"]):
        J = sample_couplings(lattice, DistributionSpec.standard(),
                             derive_seed(p["seed"], t, "disorder"))
        rng = np.random.default_rng(derive_seed(p["seed"], t, "bc"))
        s1, s2 = _antipodal_pair(lattice, J, band, rng)
        dec = decompose(interface(s1, s2), dual, observed_edges(s1, s2))
        s = dec.sanity
        if s["loops"] or s["dangling"] or s["branch3"] or s["double_crossings"]:
            bad += 1
            if len(report.counterexamples) < MAX_DUMPS:
                report.counterexamples.append({"couplings": J.to_dict(),
                                               "sanity": s})
    report.checks.append({"name": "loopless_no_dangling_single_crossing", "violations": bad})
    report.passed = bad == 0
    return report


# -- statistical suites -----------------------------------------------------------

@_suite("increasing", trials=400, delta=1.0, seed=0)
def _sv_increasing(p):
    spec = ExperimentSpec()
    lattice, dist, outer, window, eid = _built(spec)
    u, v = lattice.edges[eid]
    win_sorted = window.sorted()
    base_vals, up_vals = [], []
    for t in range(p["trials"]):
        J = sample_couplings(lattice, dist, derive_seed(p["seed"], t, "disorder"))
        g0 = enumerate_window_ground_states(J, outer, window)
        g1 = enumerate_window_ground_states(
            modify(J, eid, float(J.values[eid]) + p["delta"]), outer, window)

        def plus_frac(g):
            hits = sum(1 for st in g.states
                       if _bond_from_restriction(win_sorted, st.spins, u, v) == 1)
            return hits / g.count

        base_vals.append(plus_frac(g0))
        up_vals.append(plus_frac(g1))
    base = np.asarray(base_vals)
    up = np.asarray(up_vals)
    n = p["trials"]
    slack = 3.0 * math.sqrt(base.var(ddof=1) / n + up.var(ddof=1) / n)
    passed = float(up.mean()) >= float(base.mean()) - slack
    report = SuiteReport("increasing", p, passed)
    report.checks.append({"name": "uniform_weight_monotone_in_coupling",
                          "base_mean": float(base.mean()), "up_mean": float(up.mean()),
                          "slack": slack})
    return report


def _statistical_spec(p) -> ExperimentSpec:
    return ExperimentSpec(strategy=p.get("strategy", "uniform"))


@_suite("sstypemod", trials=10_000, lam=0.5, seed=0)
def _sv_sstypemod(p):
    spec = _statistical_spec(p)
    dist = DistributionSpec.parse(spec.dist)
    sweep = summary_sweep(spec, p["trials"], p["seed"])
    n = len(sweep)
    lam = p["lam"]
    n_a = sum(1 for s in sweep if s["bond_e"] == 1)
    n_ab = sum(1 for s in sweep if s["bond_e"] == 1 and s["je"] >= lam)
    tail = dist.tail_prob(lam)
    lhs = n_ab / n
    rhs = 0.5 * tail * (n_a / n)
    slack = 3.0 * (wilson_halfwidth(n_ab, n) + 0.5 * tail * wilson_halfwidth(n_a, n))
    passed = lhs >= rhs - slack
    report = SuiteReport("sstypemod", p, passed)
    report.checks.append({"name": "mass_above_threshold", "lhs": lhs, "rhs": rhs,
                          "slack": slack, "nu_tail": tail})
    if not passed:
        report.counterexamples.append(make_record(spec, p["seed"], 0).to_dict())
    return report


@_suite("backmodify", trials=10_000, c=0.2, d=1.0, seed=0)
def _sv_backmodify(p):
    spec = _statistical_spec(p)
    dist = DistributionSpec.parse(spec.dist)
    sweep = summary_sweep(spec, p["trials"], p["seed"])
    n = len(sweep)
    c, d = p["c"], p["d"]
    in_a = [s for s in sweep if s["bond_e"] == 1 and s["ce"] <= c]
    n_ge = sum(1 for s in in_a if s["je"] >= c)
    n_cd = sum(1 for s in in_a if c <= s["je"] <= d)
    nu_cd = dist.interval_prob(c, d)
    lhs = n_cd / n
    rhs = nu_cd * (n_ge / n)
    slack = 3.0 * (wilson_halfwidth(n_cd, n) + nu_cd * wilson_halfwidth(n_ge, n))
    passed = lhs >= rhs - slack
    report = SuiteReport("backmodify", p, passed)
    report.checks.append({"name": "mass_near_critical", "lhs": lhs, "rhs": rhs,
                          "slack": slack, "nu_interval": nu_cd})
    if not passed:
        report.counterexamples.append(make_record(spec, p["seed"], 0).to_dict())
    return report


@_suite("decoupling", trials=10_000, seed=0)
def _sv_decoupling(p):
    spec = _statistical_spec(p)
    sweep = summary_sweep(spec, p["trials"], p["seed"])
    hits = [s for s in sweep if abs(s["ce"] - s["je"]) <= SUM_TOL]
    report = SuiteReport("decoupling", p, not hits)
    report.checks.append({"name": "critical_never_equals_coupling",
                          "successes": len(hits), "trials": len(sweep)})
    for s in hits[:MAX_DUMPS]:
        report.counterexamples.append(make_record(spec, p["seed"], s["t"]).to_dict())
    return report


@_suite("estimator_consistency", trials=2000, seed=0)
def _sv_estimator_consistency(p):
    spec = _statistical_spec(p)
    sweep = summary_sweep(spec, p["trials"], p["seed"])
    n = len(sweep)
    p_hat = sum(1 for s in sweep if s["equal"]) / n
    inv_k = np.asarray([1.0 / s["gs_count"] for s in sweep])
    exact = float(inv_k.mean())
    se = math.sqrt(p_hat * (1 - p_hat) / n + inv_k.var(ddof=1) / n)
    passed = abs(p_hat - exact) <= 3.0 * se
    report = SuiteReport("estimator_consistency", p, passed)
    report.checks.append({"name": "pair_equality_matches_inverse_count",
                          "estimate": p_hat, "exact_mean": exact, "stderr": se})
    return report


@_suite("tethered_subadditive", trials=2000, seed=0, strip="halfplane_strip:16,8",
        n_values=tuple(range(1, 7)), k_values=(0, 1), strategy="antipodal")
def _sv_tethered(p):
    table = wall_statistics(p["strip"], p["strategy"], p["n_values"], p["k_values"],
                            p["trials"], p["seed"])
    by_nk = {(r["n"], r["k"]): r["mean"] for r in table.rows}
    monotone_ok = all(by_nk[(n, k)] <= by_nk[(n + 1, k)] + 1e-12
                      for k in p["k_values"]
                      for n in p["n_values"] if (n + 1, k) in by_nk)
    passed = table.subadditive and monotone_ok
    report = SuiteReport("tethered_subadditive", p, passed)
    report.checks.append({"name": "subadditive_within_slack",
                          "violations": table.violations, "rows": table.rows,
                          "monotone_in_n": monotone_ok})
    return report
