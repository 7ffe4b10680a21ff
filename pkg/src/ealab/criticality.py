"""Critical values, flexibilities, super-satisfied values, and critical droplets.

All infima range over subsets of an explicit finite region (reported back in
every result); boundaries are taken in the full lattice.  The sign convention
follows the bond value sigma_e = sigma_x sigma_y at the edge of interest:

* ``sigma_e * C_e = -min`` over subsets A with e on their boundary of the
  boundary energy with e's own term removed, so C_e never depends on J_e.
* The flexibility is the same minimum with e's term kept, and equals
  ``|J_e - C_e|`` for ground states.

Critical droplets are the minimizing subsets.  Within a region that covers
the whole lattice, minimizers arrive in complement pairs with identical
boundaries; the pair is identified and the representative not containing the
region's highest-indexed vertex is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

from .couplings import SUM_TOL, CouplingConfig, modify
from .errors import (InconsistencyError, PreconditionError, StructuralError,
                     VerificationError)
from .groundstate import SpinConfig, SubsetScan, is_ground_state
from .lattice import Region

ORACLE_TOL = 1e-6       # cross-oracle agreement budget
BISECTION_ITERS = 60


def _bond(sigma: SpinConfig, eid: int) -> int:
    b = sigma.bond(eid)
    if b is None:
        raise PreconditionError("sigma must be defined at both endpoints of the edge")
    return b


def _require_sector_ground(J: CouplingConfig, sigma: SpinConfig, eid: int,
                           region: Region, tol: float = SUM_TOL):
    """Ground-state test over subsets whose boundary avoids the edge.

    This is the property preserved under arbitrary modification of J_e, so
    critical values stay well-defined (and J_e-independent) along the whole
    coupling axis, including for droplet-flipped configurations.
    """
    scan = SubsetScan(J, sigma, region)
    worst, mask = scan.min_not_crossing(eid)
    if worst < -tol:
        raise PreconditionError(
            f"sigma fails the e-avoiding ground-state test on the region "
            f"(violating subset {scan.mask_region(mask).sorted()})")


def _critical_raw(J: CouplingConfig, sigma: SpinConfig, eid: int, region: Region) -> float:
    scan = SubsetScan(J, sigma, region)
    m1, _ = scan.min_crossing(eid, include_edge_term=False)
    return -_bond(sigma, eid) * m1


def critical_value(J: CouplingConfig, sigma: SpinConfig, e, region: Region) -> float:
    """Threshold value of J_e at which sigma enters/leaves the ground-state set."""
    eid = J._eid(e)
    _require_sector_ground(J, sigma, eid, region)
    return _critical_raw(J, sigma, eid, region)


def flexibility(J: CouplingConfig, sigma: SpinConfig, e, region: Region) -> float:
    """Minimal boundary energy over subsets whose boundary contains the edge."""
    eid = J._eid(e)
    _require_sector_ground(J, sigma, eid, region)
    scan = SubsetScan(J, sigma, region)
    f, _ = scan.min_crossing(eid, include_edge_term=True)
    return f


@dataclass(frozen=True)
class SuperSatValues:
    edge: int
    endpoints: tuple[int, int]
    at_x: float
    at_y: float
    value: float
    super_satisfied: bool


def super_satisfied_values(J: CouplingConfig, e) -> SuperSatValues:
    """Per-endpoint absolute-coupling sums bounding any critical value at the edge."""
    eid = J._eid(e)
    lattice = J.lattice
    u, v = lattice.edges[eid]
    sums = []
    for w in (u, v):
        sums.append(sum(abs(float(J.values[other])) for other in lattice.adjacency[w]
                        if other != eid))
    at_x, at_y = sums
    value = min(at_x, at_y)
    return SuperSatValues(edge=eid, endpoints=(u, v), at_x=at_x, at_y=at_y,
                          value=value, super_satisfied=abs(float(J.values[eid])) > value)


def critical_droplets(J: CouplingConfig, sigma: SpinConfig, e, region: Region,
                      tol: float = SUM_TOL) -> list[Region]:
    """All minimizing subsets of the critical-value objective, canonicalized."""
    eid = J._eid(e)
    _require_sector_ground(J, sigma, eid, region)
    scan = SubsetScan(J, sigma, region)
    target, _ = scan.min_crossing(eid, include_edge_term=False)
    masks = scan.crossing_masks_near(eid, target, tol)
    full = (1 << scan.m) - 1
    top_bit = scan.m - 1
    mask_set = set(masks)
    seen = set()
    out = []
    for mask in sorted(masks):
        comp = full ^ mask
        if comp in mask_set:
            rep = mask if not (mask >> top_bit) & 1 else comp
        else:
            rep = mask
        if rep not in seen:
            seen.add(rep)
            out.append(scan.mask_region(rep))
    out.sort(key=lambda r: (len(r), r.sorted()))
    return out


def droplet_flip(J: CouplingConfig, sigma: SpinConfig, e, droplet: Region,
                 region: Region, check: bool = True,
                 tol: float = SUM_TOL) -> SpinConfig:
    """Flip sigma on a critical droplet, crossing between the two e-sectors.

    Verifies that the flipped configuration (a) reverses the bond at e, (b)
    passes the ground-state test restricted to subsets whose boundary avoids
    e, and (c) has a critical value on the far side of the original, raising
    on any breach.
    """
    eid = J._eid(e)
    flipped = sigma.flip_region(droplet)
    if not check:
        return flipped
    bond_before = _bond(sigma, eid)
    bond_after = _bond(flipped, eid)
    if bond_after != -bond_before:
        raise VerificationError("droplet flip did not reverse the bond at the edge")
    scan = SubsetScan(J, flipped, region)
    worst, _ = scan.min_not_crossing(eid)
    if worst < -tol:
        raise VerificationError(
            f"flipped configuration fails the restricted ground-state test ({worst:.3e})")
    c_before = _critical_raw(J, sigma, eid, region)
    c_after = _critical_raw(J, flipped, eid, region)
    if bond_before == 1:
        if c_after < c_before - tol:
            raise VerificationError("critical value decreased across a +1 -> -1 flip")
    else:
        if c_after > c_before + tol:
            raise VerificationError("critical value increased across a -1 -> +1 flip")
    return flipped


def critical_value_bisection(J: CouplingConfig, sigma: SpinConfig, e, region: Region,
                             iters: int = BISECTION_ITERS) -> float:
    """Independent oracle: bisect on the coupling value for ground-state membership.

    For sigma_e = +1 membership holds on an upper half-line and the infimum
    is located; mirrored for sigma_e = -1.  The bracket comes from the
    super-satisfied bound on |C_e|.
    """
    eid = J._eid(e)
    _require_sector_ground(J, sigma, eid, region)
    bond = _bond(sigma, eid)
    ss = super_satisfied_values(J, eid)
    lo, hi = -ss.value - 1.0, ss.value + 1.0

    def member(y: float) -> bool:
        ok, _ = is_ground_state(modify(J, eid, y), sigma, region)
        return ok

    m_lo, m_hi = member(lo), member(hi)
    if bond == 1:
        if m_lo or not m_hi:
            raise InconsistencyError(
                "membership is not monotone increasing in the coupling value")
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if member(mid):
                hi = mid
            else:
                lo = mid
    else:
        if not m_lo or m_hi:
            raise InconsistencyError(
                "membership is not monotone decreasing in the coupling value")
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if member(mid):
                lo = mid
            else:
                hi = mid
    return 0.5 * (lo + hi)


@dataclass
class CriticalReport:
    """Everything this module knows about one edge in one ground state."""

    edge: int
    endpoints: tuple[int, int]
    j_value: float
    critical: float
    flex: float
    supersat: float
    supersat_x: float
    supersat_y: float
    super_satisfied: bool
    droplets: list[Region]
    region: Region

    def validate(self, tol: float = SUM_TOL):
        if abs(self.flex - abs(self.j_value - self.critical)) > tol:
            raise VerificationError("flexibility does not match |J_e - C_e|")
        if abs(self.supersat - min(self.supersat_x, self.supersat_y)) > 0:
            raise VerificationError("supersat value is not the endpoint minimum")
        if abs(self.critical) > self.supersat + tol:
            raise VerificationError("|C_e| exceeds the super-satisfied bound")

    def to_dict(self) -> dict:
        return {
            "edge": list(self.endpoints),
            "J_e": self.j_value,
            "C_e": self.critical,
            "F_e": self.flex,
            "S_e": self.supersat,
            "S_e_x": self.supersat_x,
            "S_e_y": self.supersat_y,
            "supersat": self.super_satisfied,
            "droplets": [d.to_list() for d in self.droplets],
            "region": self.region.to_list(),
        }

    def csv_row(self) -> list:
        return [f"{self.endpoints[0]}-{self.endpoints[1]}", self.j_value, self.critical,
                self.flex, self.supersat, self.supersat_x, self.supersat_y,
                int(self.super_satisfied),
                len(self.droplets[0]) if self.droplets else 0]


CSV_COLUMNS = ["edge", "J_e", "C_e", "F_e", "S_e", "S_e_x", "S_e_y", "supersat",
               "droplet_size"]


def critical_report(J: CouplingConfig, sigma: SpinConfig, e, region: Region) -> CriticalReport:
    eid = J._eid(e)
    c = critical_value(J, sigma, eid, region)
    f = flexibility(J, sigma, eid, region)
    ss = super_satisfied_values(J, eid)
    droplets = critical_droplets(J, sigma, eid, region)
    report = CriticalReport(edge=eid, endpoints=J.lattice.edges[eid],
                            j_value=float(J.values[eid]), critical=c, flex=f,
                            supersat=ss.value, supersat_x=ss.at_x, supersat_y=ss.at_y,
                            super_satisfied=ss.super_satisfied, droplets=droplets,
                            region=region)
    report.validate()
    return report
