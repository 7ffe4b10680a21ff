"""Monte-Carlo harness over disorder: event estimates, translation averaging,
lemma-verification suites, and tethered-wall statistics.

Every trial is reproducible from ``(seed, trial index)``: the disorder seed
and all auxiliary random choices are derived by hashing, so parallel and
serial runs agree exactly.  Statistical inequality checks compare point
estimates with a slack of three Wilson 95% interval halfwidths; exact lemma
checks tolerate nothing and dump a full replica-pair record for replay on
the first violations.

Event predicates and per-window statistics form closed registered catalogs,
so monotonicity annotations needed by the coupling-modification inequalities
are trusted by construction.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .couplings import (SUM_TOL, CouplingConfig, DistributionSpec, manual_couplings,
                        modify, sample_couplings, translated_couplings)
from .criticality import (ORACLE_TOL, critical_droplets, critical_value,
                          critical_value_bisection, droplet_flip, flexibility,
                          super_satisfied_values)
from .errors import ConfigError, SizingError, StructuralError
from .groundstate import (BoundaryCondition, GroundStateSet, SpinConfig,
                          enumerate_window_ground_states, sample_replica_pair,
                          solve_ground_state, uniform_measure)
from .interface import count_tethered, decompose, interface, observed_edges, parity_check
from .lattice import (Region, boundary_edges, build_dual, build_lattice, canonical_json,
                      external_boundary, parse_spec)

Z95 = 1.959963984540054


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ConfigError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # round-off at p in {0, 1} must not push the estimate outside the interval
    return max(0.0, min(p, center - half)), min(1.0, max(p, center + half))


def wilson_halfwidth(successes: int, trials: int) -> float:
    lo, hi = wilson_interval(successes, trials)
    return (hi - lo) / 2.0


def derive_seed(*parts) -> int:
    raw = hashlib.sha256("/".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(raw[:8], "little") & (2**63 - 1)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LAB_THREADS", "1")))
    except ValueError:
        return 1


# -- experiment configuration --------------------------------------------------

BoxSpec = tuple[int, int, int, int]  # x0, y0, w, h


@dataclass(frozen=True)
class ExperimentSpec:
    """One two-replica sampling setup: lattice, disorder, regions, declared edge."""

    lattice: str = "box:3,3"
    dist: str = "gaussian:0,1"
    outer: BoxSpec = (1, 1, 2, 2)
    window: BoxSpec = (1, 1, 2, 2)
    edge: tuple[tuple[int, int], tuple[int, int]] = ((1, 1), (1, 2))
    strategy: str = "uniform"

    def to_dict(self) -> dict:
        return {"lattice": self.lattice, "dist": self.dist, "outer": list(self.outer),
                "window": list(self.window), "edge": [list(c) for c in self.edge],
                "strategy": self.strategy}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        return cls(lattice=d["lattice"], dist=d["dist"], outer=tuple(d["outer"]),
                   window=tuple(d["window"]),
                   edge=(tuple(d["edge"][0]), tuple(d["edge"][1])),
                   strategy=d["strategy"])

    def fingerprint(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()[:16]


@lru_cache(maxsize=64)
def _built(spec: ExperimentSpec):
    kind, dims = parse_spec(spec.lattice)
    lattice = build_lattice(kind, dims)
    dist = DistributionSpec.parse(spec.dist)
    outer = Region.box(lattice, *spec.outer)
    window = Region.box(lattice, *spec.window)
    eid = lattice.edge_between(*spec.edge)
    return lattice, dist, outer, window, eid


def _antipodal_pair(lattice, J, region, rng) -> tuple[SpinConfig, SpinConfig]:
    """Two solves whose boundary conditions disagree on the right half of the rim."""
    ext = external_boundary(lattice, region)
    base = {v: int(rng.choice((-1, 1))) for v in ext}
    xs = [lattice.coords[v][0] for v in ext]
    cx = (min(xs) + max(xs)) / 2.0
    mirrored = {v: (-s if lattice.coords[v][0] > cx else s) for v, s in base.items()}
    s1 = solve_ground_state(J, region, BoundaryCondition.fixed(base)).sigma
    s2 = solve_ground_state(J, region, BoundaryCondition.fixed(mirrored)).sigma
    return s1, s2


def _trial_objects(spec: ExperimentSpec, seed: int, t: int):
    lattice, dist, outer, window, eid = _built(spec)
    J = sample_couplings(lattice, dist, derive_seed(seed, t, "disorder"))
    rng = np.random.default_rng(derive_seed(seed, t, "pair"))
    gs = None
    if spec.strategy == "uniform":
        gs = enumerate_window_ground_states(J, outer, window)
        sigma, sigma_p = sample_replica_pair(uniform_measure(gs), rng)
    elif spec.strategy == "antipodal":
        sigma, sigma_p = _antipodal_pair(lattice, J, outer, rng)
    else:
        raise ConfigError(f"unknown replica strategy {spec.strategy!r}")
    return J, sigma, sigma_p, gs


@dataclass
class ReplicaPairRecord:
    """One sampled triple (J, sigma, sigma') with its per-edge critical values.

    Carries the derived flexibilities, the replica minimum F_min(e), and the
    replica maximum C_max(e) used by the coupling-modification lemmas.
    """

    couplings: CouplingConfig
    sigma: SpinConfig
    sigma_prime: SpinConfig
    window: Region
    region: Region
    edges: list[int]
    critical: dict[int, float]
    critical_prime: dict[int, float]
    gs_count: Optional[int] = None

    def flex(self, e: int) -> float:
        return abs(self.couplings.values[e] - self.critical[e])

    def flex_prime(self, e: int) -> float:
        return abs(self.couplings.values[e] - self.critical_prime[e])

    def flex_min(self, e: int) -> float:
        return min(self.flex(e), self.flex_prime(e))

    def critical_max(self, e: int) -> float:
        return max(self.critical[e], self.critical_prime[e])

    def to_dict(self) -> dict:
        return {
            "couplings": self.couplings.to_dict(),
            "sigma": self.sigma.to_dict(),
            "sigma_prime": self.sigma_prime.to_dict(),
            "window": self.window.to_list(),
            "region": self.region.to_list(),
            "edges": list(self.edges),
            "critical": {str(e): self.critical[e] for e in self.edges},
            "critical_prime": {str(e): self.critical_prime[e] for e in self.edges},
            "gs_count": self.gs_count,
            "derived": {str(e): {"F": self.flex(e), "F_prime": self.flex_prime(e),
                                 "F_min": self.flex_min(e),
                                 "C_max": self.critical_max(e)} for e in self.edges},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReplicaPairRecord":
        kind, dims = parse_spec(d["couplings"]["lattice_ref"])
        lattice = build_lattice(kind, dims)
        J = manual_couplings(lattice, d["couplings"]["values"])
        return cls(
            couplings=J,
            sigma=SpinConfig.from_dict(lattice, d["sigma"]),
            sigma_prime=SpinConfig.from_dict(lattice, d["sigma_prime"]),
            window=Region.of(lattice, d["window"]),
            region=Region.of(lattice, d["region"]),
            edges=list(d["edges"]),
            critical={int(k): v for k, v in d["critical"].items()},
            critical_prime={int(k): v for k, v in d["critical_prime"].items()},
            gs_count=d.get("gs_count"),
        )

    def recompute_matches(self) -> bool:
        """Critical values must match recomputation from (J, sigma) exactly."""
        for e in self.edges:
            if critical_value(self.couplings, self.sigma, e, self.region) != self.critical[e]:
                return False
            c = critical_value(self.couplings, self.sigma_prime, e, self.region)
            if c != self.critical_prime[e]:
                return False
        return True


def make_record(spec: ExperimentSpec, seed: int, t: int) -> ReplicaPairRecord:
    lattice, dist, outer, window, eid = _built(spec)
    J, sigma, sigma_p, gs = _trial_objects(spec, seed, t)
    edges = [eid]
    return ReplicaPairRecord(
        couplings=J, sigma=sigma, sigma_prime=sigma_p, window=window, region=outer,
        edges=edges,
        critical={e: critical_value(J, sigma, e, outer) for e in edges},
        critical_prime={e: critical_value(J, sigma_p, e, outer) for e in edges},
        gs_count=gs.count if gs is not None else None,
    )


def trial_summary(spec: ExperimentSpec, seed: int, t: int) -> dict:
    """Primitive per-trial measurements; everything registered events consume."""
    lattice, dist, outer, window, eid = _built(spec)
    J, sigma, sigma_p, gs = _trial_objects(spec, seed, t)
    win_sorted = window.sorted()
    ss = super_satisfied_values(J, eid)
    c = critical_value(J, sigma, eid, outer)
    c_p = critical_value(J, sigma_p, eid, outer)
    je = float(J.values[eid])
    return {
        "t": t,
        "je": je,
        "ce": c,
        "ce_prime": c_p,
        "fe": abs(je - c),
        "fe_prime": abs(je - c_p),
        "bond_e": sigma.bond(eid),
        "bond_e_prime": sigma_p.bond(eid),
        "equal": sigma.restrict_str(win_sorted) == sigma_p.restrict_str(win_sorted),
        "interface_empty": len(interface(sigma, sigma_p)) == 0,
        "supersat": ss.super_satisfied,
        "gs_count": gs.count if gs is not None else 0,
    }


def _summary_range(spec_dict: dict, seed: int, lo: int, hi: int) -> list[dict]:
    spec = ExperimentSpec.from_dict(spec_dict)
    return [trial_summary(spec, seed, t) for t in range(lo, hi)]


_SWEEP_CACHE: dict[tuple, list[dict]] = {}


def summary_sweep(spec: ExperimentSpec, trials: int, seed: int) -> list[dict]:
    """All trial summaries, pooled across LAB_THREADS workers when set."""
    key = (spec, trials, seed)
    hit = _SWEEP_CACHE.get(key)
    if hit is not None:
        return hit
    workers = _threads()
    if workers <= 1 or trials < 64:
        out = [trial_summary(spec, seed, t) for t in range(trials)]
    else:
        chunk = max(32, (trials + workers * 4 - 1) // (workers * 4))
        ranges = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_summary_range, spec.to_dict(), seed, lo, hi)
                       for lo, hi in ranges]
            out = [s for f in futures for s in f.result()]
        out.sort(key=lambda s: s["t"])
    _SWEEP_CACHE.clear()
    _SWEEP_CACHE[key] = out
    return out


# -- registered event catalog ---------------------------------------------------

@dataclass(frozen=True)
class EventDef:
    name: str
    fn: Callable[[dict, dict], bool]
    monotone_increasing_at_edge: bool = False


EVENTS: dict[str, EventDef] = {}


def _event(name, monotone=False):
    def deco(fn):
        EVENTS[name] = EventDef(name, fn, monotone)
        return fn
    return deco


@_event("false")
def _ev_false(s, p):
    return False


@_event("replicas_equal")
def _ev_equal(s, p):
    return s["equal"]


@_event("interface_empty")
def _ev_iface_empty(s, p):
    return s["interface_empty"]


@_event("sigma_e_plus", monotone=True)
def _ev_sigma_plus(s, p):
    return s["bond_e"] == 1


@_event("ce_equals_je")
def _ev_ce_je(s, p):
    return abs(s["ce"] - s["je"]) <= SUM_TOL


@_event("edge_supersatisfied")
def _ev_ssat(s, p):
    return s["supersat"]


@_event("sigma_e_plus_ce_below", monotone=True)
def _ev_backmod(s, p):
    return s["bond_e"] == 1 and s["ce"] <= p.get("c", 0.2)


@dataclass
class EventEstimate:
    event: str
    trials: int
    successes: int
    estimate: float
    ci_low: float
    ci_high: float
    seed: int
    spec_fingerprint: str

    def __post_init__(self):
        if not (0.0 <= self.estimate <= 1.0):
            raise StructuralError("estimate out of [0,1]")
        if not (self.ci_low <= self.estimate <= self.ci_high):
            raise StructuralError("interval must contain the point estimate")

    def to_dict(self) -> dict:
        return {"event": self.event, "trials": self.trials, "successes": self.successes,
                "estimate": self.estimate, "ci": [self.ci_low, self.ci_high],
                "seed": self.seed, "spec_fingerprint": self.spec_fingerprint}


def estimate_event(event: str, spec: ExperimentSpec, trials: int, seed: int,
                   params: Optional[dict] = None) -> EventEstimate:
    """Probability of a registered predicate under the two-replica trial measure."""
    if event not in EVENTS:
        raise ConfigError(f"unregistered event {event!r}; known: {sorted(EVENTS)}")
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    params = params or {}
    fn = EVENTS[event].fn
    summaries = summary_sweep(spec, trials, seed)
    successes = sum(1 for s in summaries if fn(s, params))
    lo, hi = wilson_interval(successes, trials)
    return EventEstimate(event=event, trials=trials, successes=successes,
                         estimate=successes / trials, ci_low=lo, ci_high=hi,
                         seed=seed, spec_fingerprint=spec.fingerprint())


# -- translation averaging -------------------------------------------------------

STATS: dict[str, Callable] = {}


def _stat(name):
    def deco(fn):
        STATS[name] = fn
        return fn
    return deco


@_stat("const_one")
def _st_const(J, window):
    return 1.0


@_stat("coupling_mean")
def _st_cmean(J, window):
    vals = [float(J.values[eid]) for eid, (u, v) in enumerate(J.lattice.edges)
            if u in window.vertices and v in window.vertices]
    if not vals:
        raise SizingError("window contains no edges")
    return float(np.mean(vals))


@_stat("frustrated_face_fraction")
def _st_frustrated(J, window):
    lattice = J.lattice
    members = window.vertices
    total = frustrated = 0
    for face in lattice.faces:
        verts = {v for e in face for v in lattice.edges[e]}
        if verts <= members:
            total += 1
            if sum(1 for e in face if J.values[e] < 0) % 2 == 1:
                frustrated += 1
    if total == 0:
        raise SizingError("window contains no faces")
    return frustrated / total


@dataclass
class TranslationSeries:
    stat: str
    shifts: int
    series: list[float]
    average: float
    trials: int

    def to_dict(self) -> dict:
        return {"stat": self.stat, "shifts": self.shifts, "series": self.series,
                "average": self.average, "trials": self.trials}


def translation_average(stat: str, n: int, lattice_spec: str, window_box: BoxSpec,
                        trials: int, seed: int,
                        dist: str = "gaussian:0,1") -> TranslationSeries:
    """Average a registered statistic over n+1 downward window shifts.

    The shift by k moves the evaluation window to ``window - (0, k)``; the
    series entry k is the disorder mean of the statistic on that window.
    """
    if stat not in STATS:
        raise ConfigError(f"unregistered statistic {stat!r}; known: {sorted(STATS)}")
    if n < 0 or trials < 1:
        raise ConfigError("need n >= 0 and trials >= 1")
    kind, dims = parse_spec(lattice_spec)
    lattice = build_lattice(kind, dims)
    x0, y0, w, h = window_box
    windows = []
    for k in range(n + 1):
        if y0 - k < 0:
            raise SizingError(f"shift {k} pushes the window below the lattice")
        windows.append(Region.box(lattice, x0, y0 - k, w, h))
    dist_spec = DistributionSpec.parse(dist)
    fn = STATS[stat]
    sums = np.zeros(n + 1)
    for t in range(trials):
        J = sample_couplings(lattice, dist_spec, derive_seed(seed, t, "disorder"))
        for k, win in enumerate(windows):
            sums[k] += fn(J, win)
    series = [float(s / trials) for s in sums]
    return TranslationSeries(stat=stat, shifts=n, series=series,
                             average=float(np.mean(series)), trials=trials)


# -- tethered-wall statistics ----------------------------------------------------

@dataclass
class WallTable:
    rows: list[dict]
    subadditive: bool
    violations: list[dict]
    strategy: str
    trials: int
    seed: int

    def to_dict(self) -> dict:
        return {"rows": self.rows, "subadditive": self.subadditive,
                "violations": self.violations, "strategy": self.strategy,
                "trials": self.trials, "seed": self.seed}


def _wall_counts_range(strip_spec: str, dist: str, band: BoxSpec, strategy: str,
                       n_values: tuple[int, ...], k_values: tuple[int, ...],
                       seed: int, lo: int, hi: int) -> np.ndarray:
    kind, dims = parse_spec(strip_spec)
    lattice = build_lattice(kind, dims)
    dual = build_dual(lattice)
    dist_spec = DistributionSpec.parse(dist)
    region = Region.box(lattice, *band)
    counts = np.zeros((hi - lo, len(n_values), len(k_values)), dtype=np.int64)
    for i, t in enumerate(range(lo, hi)):
        J = sample_couplings(lattice, dist_spec, derive_seed(seed, t, "disorder"))
        rng = np.random.default_rng(derive_seed(seed, t, "bc"))
        if strategy == "antipodal":
            s1, s2 = _antipodal_pair(lattice, J, region, rng)
        elif strategy == "uniform":
            gs = enumerate_window_ground_states(J, region, region)
            s1, s2 = sample_replica_pair(uniform_measure(gs), rng)
        else:
            raise ConfigError(f"unknown replica strategy {strategy!r}")
        dec = decompose(interface(s1, s2), dual, observed_edges(s1, s2))
        for a, n in enumerate(n_values):
            for b, k in enumerate(k_values):
                counts[i, a, b] = count_tethered(dec, n, k)
    return counts


def wall_statistics(strip_spec: str, strategy: str, n_values, k_values, trials: int,
                    seed: int, dist: str = "gaussian:0,1",
                    band: Optional[BoxSpec] = None) -> WallTable:
    """Disorder means of tethered-wall crossing counts, with a subadditivity check.

    Counts walls crossing centered segments of half-length n at height k; the
    check asserts mean(n+m) <= mean(n) + mean(m) + 3 combined standard errors
    for every in-range pair.
    """
    n_values = tuple(int(n) for n in n_values)
    k_values = tuple(int(k) for k in k_values)
    kind, dims = parse_spec(strip_spec)
    if kind != "halfplane_strip":
        raise ConfigError("wall statistics requires a halfplane_strip lattice")
    w, h = dims
    if band is None:
        # crossing detection at height k needs row k; keep the exact solve in budget
        bh = min(max(k_values) + 1, h)
        bw = min(w - 2, 28 // bh, 14)
        if bw < 1:
            raise SizingError("strip too narrow for the requested heights")
        band = ((w - bw) // 2, 0, bw, bh)
    workers = _threads()
    if workers <= 1 or trials < 64:
        counts = _wall_counts_range(strip_spec, dist, band, strategy, n_values,
                                    k_values, seed, 0, trials)
    else:
        chunk = max(32, (trials + workers * 4 - 1) // (workers * 4))
        ranges = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_wall_counts_range, strip_spec, dist, band, strategy,
                                   n_values, k_values, seed, lo, hi)
                       for lo, hi in ranges]
            counts = np.concatenate([f.result() for f in futures], axis=0)

    mean = counts.mean(axis=0)
    stderr = counts.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else \
        np.zeros_like(mean)
    rows = []
    for a, n in enumerate(n_values):
        for b, k in enumerate(k_values):
            rows.append({"n": n, "k": k, "mean": float(mean[a, b]),
                         "stderr": float(stderr[a, b]), "trials": trials})
    idx = {n: a for a, n in enumerate(n_values)}
    violations = []
    for b, k in enumerate(k_values):
        for n in n_values:
            for m in n_values:
                if (n + m) not in idx:
                    continue
                slack = 3.0 * math.sqrt(stderr[idx[n], b] ** 2 + stderr[idx[m], b] ** 2
                                        + stderr[idx[n + m], b] ** 2)
                lhs = mean[idx[n + m], b]
                rhs = mean[idx[n], b] + mean[idx[m], b] + slack
                if lhs > rhs:
                    violations.append({"n": n, "m": m, "k": k, "lhs": float(lhs),
                                       "rhs": float(rhs)})
    return WallTable(rows=rows, subadditive=not violations, violations=violations,
                     strategy=strategy, trials=trials, seed=seed)


# The suite registry consumes the machinery above; importing here keeps the
# public verification surface on this module.
from .suites import SUITES, SuiteReport, verify_suite  # noqa: E402,F401
