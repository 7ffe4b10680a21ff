"""Disorder realizations: sampling, storage, and local modification of couplings.

Coupling values come from counter-based streams keyed by ``(seed, edge
geometry)``: the draw for an edge depends only on the seed and the edge's
coordinate endpoints, never on the lattice it is embedded in.  Enlarging a
lattice therefore preserves the values on shared edges, and translated
disorder can be constructed exactly by moving values between geometric keys.

A tie audit runs after sampling: no two edge values may coincide within
``TAU_TIE`` (in units of the distribution scale).  Collisions are resolved by
redrawing the offending edge from the next counter value, never by silent
tie-breaking; after ``RESAMPLE_CAP`` rounds a hard error is raised.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DegenerateDisorderError, StructuralError
from .lattice import Lattice, canonical_json

TAU_TIE = 1e-12      # disorder tie audit, in units of the distribution scale
SUM_TOL = 1e-9       # absolute tolerance for signed subset-sum inequalities
RESAMPLE_CAP = 16

FAMILIES = ("gaussian", "uniform_symmetric")


@dataclass(frozen=True)
class DistributionSpec:
    """A continuous coupling distribution with positive-length support."""

    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.family == "gaussian":
            if len(self.params) != 2 or self.params[1] <= 0:
                raise StructuralError("gaussian takes (mean, stddev) with stddev > 0")
        elif self.family == "uniform_symmetric":
            if len(self.params) != 1 or self.params[0] <= 0:
                raise StructuralError("uniform_symmetric takes (halfwidth) with halfwidth > 0")
        else:
            raise StructuralError(f"unknown distribution family {self.family!r}")

    @classmethod
    def parse(cls, text: str) -> "DistributionSpec":
        """Parse CLI syntax such as ``gaussian:0,1`` or ``uniform_symmetric:2``."""
        family, _, rest = text.partition(":")
        if not rest:
            raise StructuralError(f"bad distribution spec {text!r}")
        return cls(family, tuple(float(p) for p in rest.split(",")))

    @classmethod
    def standard(cls) -> "DistributionSpec":
        return cls("gaussian", (0.0, 1.0))

    @property
    def scale(self) -> float:
        return self.params[1] if self.family == "gaussian" else self.params[0]

    @property
    def mean(self) -> float:
        return self.params[0] if self.family == "gaussian" else 0.0

    def value_from_u(self, u):
        """Inverse CDF applied to uniforms in (0, 1)."""
        if self.family == "gaussian":
            mean, std = self.params
            return mean + std * ndtri(u)
        (hw,) = self.params
        return (2.0 * np.asarray(u) - 1.0) * hw

    def cdf(self, x):
        if self.family == "gaussian":
            mean, std = self.params
            return ndtr((np.asarray(x, dtype=float) - mean) / std)
        (hw,) = self.params
        return np.clip((np.asarray(x, dtype=float) + hw) / (2.0 * hw), 0.0, 1.0)

    def tail_prob(self, lo: float) -> float:
        """Exact probability of [lo, infinity)."""
        return float(1.0 - self.cdf(lo))

    def interval_prob(self, a: float, b: float) -> float:
        """Exact probability of [a, b]."""
        if b < a:
            return 0.0
        return float(self.cdf(b) - self.cdf(a))

    def spec_string(self) -> str:
        return f"{self.family}:{','.join(repr(p) if p != int(p) else str(int(p)) for p in self.params)}"

    def to_dict(self) -> dict:
        return {"family": self.family, "params": list(self.params)}


def _edge_u01(seed: int, coords: tuple, retry: int) -> float:
    """Uniform in (0, 1) from a hash counter keyed by (seed, edge geometry, retry)."""
    (x1, y1), (x2, y2) = coords
    raw = hashlib.sha256(
        b"ealab/coupling\x00" + struct.pack("<qqqqqq", seed, x1, y1, x2, y2, retry)
    ).digest()
    k = int.from_bytes(raw[:8], "little")
    return ((k >> 11) + 0.5) * 2.0**-53


class CouplingConfig:
    """One realization J: edge -> value, with provenance. Immutable."""

    __slots__ = ("lattice", "values", "provenance")

    def __init__(self, lattice: Lattice, values: np.ndarray, provenance: dict):
        if len(values) != lattice.n_edges:
            raise StructuralError("one value per lattice edge required")
        values = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise StructuralError("coupling values must be finite")
        values.setflags(write=False)
        self.lattice = lattice
        self.values = values
        self.provenance = provenance

    def value(self, edge) -> float:
        return float(self.values[self._eid(edge)])

    def _eid(self, edge) -> int:
        if isinstance(edge, (int, np.integer)):
            eid = int(edge)
            if not (0 <= eid < self.lattice.n_edges):
                raise StructuralError(f"edge id {eid} out of range")
            return eid
        return self.lattice.edge_index(tuple(edge))

    def to_dict(self) -> dict:
        return {
            "lattice_ref": self.lattice.spec_string(),
            "dist": self.provenance.get("dist"),
            "seed": self.provenance.get("seed"),
            "provenance": self.provenance.get("kind"),
            "values": [float(v) for v in self.values],
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def sample_couplings(lattice: Lattice, dist: DistributionSpec, seed: int) -> CouplingConfig:
    """Draw one i.i.d. coupling per edge, deterministically from (seed, geometry)."""
    seed = int(seed)
    retries = np.zeros(lattice.n_edges, dtype=np.int64)
    us = np.array([_edge_u01(seed, lattice.edge_coords(e), 0) for e in range(lattice.n_edges)])
    values = np.asarray(dist.value_from_u(us), dtype=np.float64)

    tol = TAU_TIE * dist.scale
    for _ in range(RESAMPLE_CAP):
        order = np.argsort(values, kind="stable")
        gaps = np.diff(values[order])
        close = np.nonzero(gaps < tol)[0]
        if close.size == 0:
            break
        # redraw the later-indexed edge of each colliding pair
        for pos in close:
            a, b = order[pos], order[pos + 1]
            loser = max(a, b)
            retries[loser] += 1
            u = _edge_u01(seed, lattice.edge_coords(int(loser)), int(retries[loser]))
            values[loser] = float(dist.value_from_u(u))
    else:
        raise DegenerateDisorderError("tie audit failed after resample cap")

    provenance = {"kind": "seeded", "seed": seed, "dist": dist.to_dict()}
    return CouplingConfig(lattice, values, provenance)


def modify(cfg: CouplingConfig, edge, y: float) -> CouplingConfig:
    """The configuration equal to cfg everywhere except value y at the given edge."""
    y = float(y)
    if not np.isfinite(y):
        raise StructuralError("modified coupling must be finite")
    eid = cfg._eid(edge)
    values = cfg.values.copy()
    values[eid] = y
    provenance = {"kind": "manual", "base": cfg.provenance.get("kind"),
                  "dist": cfg.provenance.get("dist"), "seed": cfg.provenance.get("seed")}
    return CouplingConfig(cfg.lattice, values, provenance)


def manual_couplings(lattice: Lattice, values) -> CouplingConfig:
    """A coupling configuration from explicit values (no tie audit)."""
    return CouplingConfig(lattice, np.asarray(values, dtype=np.float64),
                          {"kind": "manual", "dist": None, "seed": None})


def translated_couplings(cfg: CouplingConfig, dx: int, dy: int) -> CouplingConfig:
    """Move values along a lattice translation: the edge at e + (dx, dy) takes e's value.

    Edges whose preimage under the shift lies outside the lattice keep their
    original value; callers must only interrogate the shifted range.
    """
    lattice = cfg.lattice
    values = cfg.values.copy()
    for eid in range(lattice.n_edges):
        (x1, y1), (x2, y2) = lattice.edge_coords(eid)
        pre = ((x1 - dx, y1 - dy), (x2 - dx, y2 - dy))
        if pre[0] in lattice.coord_index and pre[1] in lattice.coord_index:
            values[eid] = cfg.values[lattice.edge_between(*pre)]
    return CouplingConfig(lattice, values, {"kind": "manual", "dist": cfg.provenance.get("dist"),
                                            "seed": cfg.provenance.get("seed")})
