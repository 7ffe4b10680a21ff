"""Command-line entry point.

Commands: build, sample, solve, enumerate, critical, interface, rungs, walls,
estimate, verify, render-data.  Every report is self-describing: it embeds a
schema tag, the full run configuration, its fingerprint, and a git-style
content hash of the canonical configuration bytes.  All randomness flows from
``--seed``; two runs with the same configuration produce identical files.

Exit codes: 0 all checks passed, 1 assertion failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from typing import Optional

import numpy as np

from . import experiments as ex
from .couplings import DistributionSpec, sample_couplings
from .criticality import CSV_COLUMNS, critical_report
from .errors import (ConfigError, InconsistencyError, LabError, VerificationError)
from .groundstate import (BoundaryCondition, SpinConfig, enumerate_window_ground_states,
                          sample_replica_pair, solve_ground_state, uniform_measure)
from .interface import (decompose, enumerate_rungs, interface, observed_edges,
                        rung_infima)
from .lattice import (Region, build_dual, build_lattice, canonical_json,
                      external_boundary, parse_spec)

SCHEMA_VERSION = 1


def _parse_box(text: str) -> tuple[int, int, int, int]:
    """Parse a region spec ``W,H@X,Y`` into (x0, y0, w, h)."""
    try:
        size, _, origin = text.partition("@")
        w, h = (int(p) for p in size.split(","))
        x0, y0 = (int(p) for p in origin.split(",")) if origin else (0, 0)
        return x0, y0, w, h
    except ValueError as exc:
        raise ConfigError(f"bad region spec {text!r}; expected W,H@X,Y") from exc


def _parse_range(text: str) -> tuple[int, ...]:
    """Parse ``1..6`` or ``0,1`` into a tuple of ints."""
    try:
        if ".." in text:
            a, b = text.split("..")
            return tuple(range(int(a), int(b) + 1))
        return tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad range spec {text!r}") from exc


def _parse_edge(text: str) -> tuple[int, int]:
    try:
        u, v = (int(p) for p in text.split(","))
        return u, v
    except ValueError as exc:
        raise ConfigError(f"bad edge spec {text!r}; expected u,v") from exc


def _git_blob_hash(data: bytes) -> str:
    return hashlib.sha1(b"blob %d\x00" % len(data) + data).hexdigest()


def _envelope(schema: str, config: dict, body: dict) -> dict:
    payload = canonical_json(config).encode()
    return {
        "schema": f"ealab/{schema}@{SCHEMA_VERSION}",
        "config": config,
        "fingerprint": hashlib.sha256(payload).hexdigest()[:16],
        "inputs_hash": _git_blob_hash(payload),
        "report": body,
    }


def _emit(report: dict, out: Optional[str]):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _config_from_args(args, keys) -> dict:
    return {"command": args.command,
            **{k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}}


def _lattice(args):
    kind, dims = parse_spec(args.lattice)
    return build_lattice(kind, dims)


def _default_outer(lattice) -> tuple[int, int, int, int]:
    if lattice.kind == "segment":
        return 0, 0, lattice.dims[0], 1
    w, h = lattice.dims
    if lattice.kind == "halfplane_strip":
        bw, bh = min(w - 2, 6), min(h, 4)
        return (w - bw) // 2, 0, bw, bh
    bw, bh = min(w - 2, 5), min(h - 2, 5)
    return (w - bw) // 2, (h - bh) // 2, bw, bh


def _two_replicas(args):
    lattice = _lattice(args)
    dual = build_dual(lattice)
    dist = DistributionSpec.parse(args.dist)
    J = sample_couplings(lattice, dist, args.seed)
    outer_box = _parse_box(args.outer) if args.outer else _default_outer(lattice)
    outer = Region.box(lattice, *outer_box)
    rng = np.random.default_rng(ex.derive_seed(args.seed, "pair"))
    if args.strategy == "uniform":
        gs = enumerate_window_ground_states(J, outer, outer)
        sigma, sigma_p = sample_replica_pair(uniform_measure(gs), rng)
    else:
        sigma, sigma_p = ex._antipodal_pair(lattice, J, outer, rng)
    return lattice, dual, J, sigma, sigma_p


# -- command handlers -----------------------------------------------------------

def _cmd_build(args) -> int:
    lattice = _lattice(args)
    cfg = _config_from_args(args, ("lattice",))
    _emit(_envelope("lattice", cfg, lattice.to_dict()), args.out)
    return 0


def _cmd_sample(args) -> int:
    lattice = _lattice(args)
    J = sample_couplings(lattice, DistributionSpec.parse(args.dist), args.seed)
    cfg = _config_from_args(args, ("lattice", "dist", "seed"))
    _emit(_envelope("couplings", cfg, J.to_dict()), args.out)
    return 0


def _cmd_solve(args) -> int:
    lattice = _lattice(args)
    J = sample_couplings(lattice, DistributionSpec.parse(args.dist), args.seed)
    box = _parse_box(args.region) if args.region else None
    region = Region.box(lattice, *box) if box else Region.full(lattice)
    if args.bc == "free":
        bc = BoundaryCondition.free()
    else:
        spins = args.bc.split(":", 1)[1]
        boundary = external_boundary(lattice, region)
        if len(spins) != len(boundary):
            raise ConfigError(f"boundary string needs {len(boundary)} spins")
        bc = BoundaryCondition.fixed(
            {v: (1 if ch == "+" else -1) for v, ch in zip(boundary, spins)})
    sol = solve_ground_state(J, region, bc)
    body = {"sigma": sol.sigma.to_dict(), "energy": sol.energy,
            "flip_partner": sol.flip_partner.to_dict() if sol.flip_partner else None}
    cfg = _config_from_args(args, ("lattice", "dist", "seed", "region", "bc"))
    _emit(_envelope("solve", cfg, body), args.out)
    return 0


def _cmd_enumerate(args) -> int:
    lattice = _lattice(args)
    J = sample_couplings(lattice, DistributionSpec.parse(args.dist), args.seed)
    outer_box = _parse_box(args.outer) if args.outer else None
    outer = Region.box(lattice, *outer_box) if outer_box else Region.full(lattice)
    window_box = _parse_box(args.window) if args.window else None
    window = Region.box(lattice, *window_box) if window_box else outer
    gs = enumerate_window_ground_states(J, outer, window)
    cfg = _config_from_args(args, ("lattice", "dist", "seed", "window", "outer"))
    _emit(_envelope("groundstates", cfg, gs.to_dict()), args.out)
    return 0


def _cmd_critical(args) -> int:
    lattice = _lattice(args)
    J = sample_couplings(lattice, DistributionSpec.parse(args.dist), args.seed)
    box = _parse_box(args.region) if args.region else None
    region = Region.box(lattice, *box) if box else Region.full(lattice)
    sol = solve_ground_state(J, region, BoundaryCondition.free())
    if args.all:
        eids = [e for e, (u, v) in enumerate(lattice.edges)
                if u in region.vertices or v in region.vertices]
    elif args.edge:
        eids = [lattice.edge_index(_parse_edge(args.edge))]
    else:
        raise ConfigError("need --edge u,v or --all")
    reports = [critical_report(J, sol.sigma, e, region) for e in eids]
    cfg = _config_from_args(args, ("lattice", "dist", "seed", "edge", "region"))
    if args.format == "csv":
        rows = [r.csv_row() for r in reports]
        target = open(args.out, "w", newline="") if args.out else sys.stdout
        writer = csv.writer(target)
        writer.writerow(CSV_COLUMNS)
        writer.writerows(rows)
        if args.out:
            target.close()
    else:
        _emit(_envelope("critical", cfg, {"reports": [r.to_dict() for r in reports]}),
              args.out)
    return 0


def _cmd_interface(args) -> int:
    lattice, dual, J, s1, s2 = _two_replicas(args)
    dec = decompose(interface(s1, s2), dual, observed_edges(s1, s2))
    cfg = _config_from_args(args, ("lattice", "dist", "seed", "outer", "strategy"))
    _emit(_envelope("interface", cfg, dec.to_dict()), args.out)
    return 0


def _cmd_rungs(args) -> int:
    lattice, dual, J, s1, s2 = _two_replicas(args)
    dec = decompose(interface(s1, s2), dual, observed_edges(s1, s2))
    box_j = Region.box(lattice, *_parse_box(args.box_j))
    box_l = Region.box(lattice, *_parse_box(args.box_l))
    rungs = enumerate_rungs(dec, J, s1, box_j, box_l, args.maxlen)
    f_eid = lattice.edge_index(_parse_edge(args.edge))
    infima = rung_infima(rungs, args.wall, f_eid)
    body = {"rungs": [r.to_dict(dual) for r in rungs],
            "infima": infima.to_dict(), "max_len": args.maxlen, "wall": args.wall}
    cfg = _config_from_args(args, ("lattice", "dist", "seed", "outer", "strategy",
                                   "box_j", "box_l", "maxlen", "edge", "wall"))
    _emit(_envelope("rungs", cfg, body), args.out)
    return 0


def _plot_wall_table(table, path: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ks = sorted({r["k"] for r in table.rows})
    for k in ks:
        rows = sorted((r for r in table.rows if r["k"] == k), key=lambda r: r["n"])
        ns = [r["n"] for r in rows]
        means = [r["mean"] for r in rows]
        errs = [r["stderr"] for r in rows]
        ax.errorbar(ns, means, yerr=errs, marker="o", capsize=2, label=f"k={k}")
    ax.set_xlabel("segment half-length n")
    ax.set_ylabel("mean tethered crossings")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _cmd_walls(args) -> int:
    table = ex.wall_statistics(args.lattice, args.strategy, _parse_range(args.n),
                               _parse_range(args.k), args.trials, args.seed,
                               dist=args.dist,
                               band=_parse_box(args.band) if args.band else None)
    cfg = _config_from_args(args, ("lattice", "dist", "seed", "n", "k", "trials",
                                   "strategy", "band"))
    _emit(_envelope("walls", cfg, table.to_dict()), args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["n", "k", "mean", "stderr", "trials"])
            for r in table.rows:
                writer.writerow([r["n"], r["k"], r["mean"], r["stderr"], r["trials"]])
    if args.plot:
        _plot_wall_table(table, args.plot)
    return 0 if table.subadditive else 1


def _cmd_estimate(args) -> int:
    spec = ex.ExperimentSpec(lattice=args.lattice, dist=args.dist,
                             outer=_parse_box(args.outer) if args.outer else (1, 1, 2, 2),
                             window=_parse_box(args.window) if args.window else (1, 1, 2, 2),
                             edge=(tuple(map(int, args.edge_coord.split(";")[0].split(","))),
                                   tuple(map(int, args.edge_coord.split(";")[1].split(","))))
                             if args.edge_coord else ((1, 1), (1, 2)),
                             strategy=args.strategy)
    params = json.loads(args.params) if args.params else None
    est = ex.estimate_event(args.event, spec, args.trials, args.seed, params)
    cfg = _config_from_args(args, ("lattice", "dist", "seed", "event", "trials",
                                   "outer", "window", "strategy", "params"))
    _emit(_envelope("estimate", cfg, est.to_dict()), args.out)
    return 0


def _cmd_verify(args) -> int:
    params = json.loads(args.params) if args.params else {}
    if args.trials is not None:
        params["trials"] = args.trials
    if args.seed is not None:
        params["seed"] = args.seed
    report = ex.verify_suite(args.suite, params)
    cfg = _config_from_args(args, ("suite", "trials", "seed", "params"))
    _emit(_envelope("verify", cfg, report.to_dict()), args.out)
    return 0 if report.passed else 1


def _scene_from_decomposition(lattice, dual, dec, rung_list=None, infima=None,
                              boxes=None) -> dict:
    walls = []
    for wall in dec.walls:
        walls.append({
            "tethered": wall.tethered,
            "dual_edges": [[list(dual.dual_coords[a]), list(dual.dual_coords[b])]
                           for a, b in (dual.dual_edges[e] for e in wall.dual_edges)],
        })
    scene = {
        "schema": "ealab/scene@1",
        "lattice": lattice.to_dict(),
        "interface_edges": [list(lattice.edges[e]) for e in sorted(dec.interface_edges)],
        "walls": walls,
        "rungs": [],
        "annotations": [],
        "boxes": boxes or [],
    }
    if rung_list:
        best = min(range(len(rung_list)), key=lambda i: rung_list[i].energy)
        for i, r in enumerate(rung_list):
            scene["rungs"].append({
                "dual_vertices": [list(dual.dual_coords[v]) for v in r.dual_vertices],
                "energy": r.energy,
                "highlight": i == best,
            })
    if infima is not None:
        h = lattice.dims[1] if len(lattice.dims) > 1 else 1
        labels = [("min rung energy on wall", infima.touching_wall),
                  ("min avoiding marked edge", infima.touching_wall_avoiding_edge),
                  ("min through marked edge", infima.through_edge)]
        for i, (text, val) in enumerate(labels):
            shown = "undefined" if val is None else f"{val:.4f}"
            scene["annotations"].append({"text": f"{text} = {shown}",
                                         "xy": [0.0, h + 0.6 + 0.55 * i]})
    return scene


def _cmd_render_data(args) -> int:
    lattice = _lattice(args)
    cfg = _config_from_args(args, ("lattice", "dist", "seed", "scene", "outer",
                                   "strategy", "box_j", "box_l", "maxlen", "edge"))
    if args.scene == "lattice":
        scene = {"schema": "ealab/scene@1", "lattice": lattice.to_dict(),
                 "interface_edges": [], "walls": [], "rungs": [],
                 "annotations": [], "boxes": []}
    else:
        lattice, dual, J, s1, s2 = _two_replicas(args)
        dec = decompose(interface(s1, s2), dual, observed_edges(s1, s2))
        if args.scene == "interface":
            scene = _scene_from_decomposition(lattice, dual, dec)
        else:
            box_j = Region.box(lattice, *_parse_box(args.box_j))
            box_l = Region.box(lattice, *_parse_box(args.box_l))
            rungs = enumerate_rungs(dec, J, s1, box_j, box_l, args.maxlen)
            f_eid = lattice.edge_index(_parse_edge(args.edge)) if args.edge else 0
            infima = rung_infima(rungs, 0, f_eid)
            def rect(region):
                x0, y0, x1, y1 = region.bounding_box()
                return [x0 - 0.25, y0 - 0.25, x1 + 0.25, y1 + 0.25]
            boxes = [{"label": "inner", "rect": rect(box_j)},
                     {"label": "outer", "rect": rect(box_l)}]
            scene = _scene_from_decomposition(lattice, dual, dec, rungs, infima, boxes)
    # scenes are consumed by the figure renderer; no envelope, schema is inline
    text = json.dumps(scene, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


# -- argument grammar -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lab",
        description="Exact finite-lattice laboratory for Edwards-Anderson "
                    "spin-glass ground states.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, dist=True, seed=True):
        p.add_argument("--lattice", required=True,
                       help="lattice spec, e.g. box:4,4 | segment:8 | halfplane_strip:16,8")
        if dist:
            p.add_argument("--dist", default="gaussian:0,1",
                           help="coupling distribution, e.g. gaussian:0,1")
        if seed:
            p.add_argument("--seed", type=int, required=True, help="master seed")
        p.add_argument("-o", "--out", help="write the JSON report here (default stdout)")

    p = sub.add_parser("build", help="build a lattice and emit its serialization")
    add_common(p, dist=False, seed=False)
    p.set_defaults(fn=_cmd_build)

    p = sub.add_parser("sample", help="sample a coupling realization")
    add_common(p)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("solve", help="exact ground state on a region")
    add_common(p)
    p.add_argument("--region", help="solve region W,H@X,Y (default: whole lattice)")
    p.add_argument("--bc", default="free", help="free | fixed:++-... (canonical order)")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("enumerate", help="window ground states over all boundary conditions")
    add_common(p)
    p.add_argument("--window", help="window region W,H@X,Y (default: outer)")
    p.add_argument("--outer", help="outer region W,H@X,Y (default: whole lattice)")
    p.set_defaults(fn=_cmd_enumerate)

    p = sub.add_parser("critical", help="critical values, flexibilities, droplets")
    add_common(p)
    p.add_argument("--edge", help="edge as vertex ids u,v")
    p.add_argument("--all", action="store_true", help="report every edge touching the region")
    p.add_argument("--region", help="region W,H@X,Y for the infima (default: whole lattice)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(fn=_cmd_critical)

    def add_pair_opts(p):
        p.add_argument("--outer", help="solve region W,H@X,Y")
        p.add_argument("--strategy", choices=("uniform", "antipodal"),
                       default="antipodal")

    p = sub.add_parser("interface", help="two-replica interface and domain walls")
    add_common(p)
    add_pair_opts(p)
    p.set_defaults(fn=_cmd_interface)

    p = sub.add_parser("rungs", help="rung catalog and energy infima")
    add_common(p)
    add_pair_opts(p)
    p.add_argument("--box-j", dest="box_j", required=True, help="inner box W,H@X,Y")
    p.add_argument("--box-l", dest="box_l", required=True, help="outer box W,H@X,Y")
    p.add_argument("--maxlen", type=int, default=6, help="rung length cap (<= 12)")
    p.add_argument("--edge", required=True, help="marked edge u,v for the infima split")
    p.add_argument("--wall", type=int, default=0, help="reference wall id")
    p.set_defaults(fn=_cmd_rungs)

    p = sub.add_parser("walls", help="tethered-wall crossing statistics")
    add_common(p)
    p.add_argument("--n", required=True, help="half-lengths, e.g. 1..6")
    p.add_argument("--k", required=True, help="heights, e.g. 0,1")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--strategy", choices=("uniform", "antipodal"), default="antipodal")
    p.add_argument("--band", help="solve band W,H@X,Y (default: derived)")
    p.add_argument("--csv", help="also write the table as CSV here")
    p.add_argument("--plot", help="also render the table as a figure here")
    p.set_defaults(fn=_cmd_walls)

    p = sub.add_parser("estimate", help="estimate a registered event probability")
    add_common(p)
    p.add_argument("--event", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--outer", help="outer region W,H@X,Y")
    p.add_argument("--window", help="window region W,H@X,Y")
    p.add_argument("--edge-coord", dest="edge_coord",
                   help="declared edge as x1,y1;x2,y2")
    p.add_argument("--strategy", choices=("uniform", "antipodal"), default="uniform")
    p.add_argument("--params", help="extra event parameters as JSON")
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("verify", help="run a named lemma-verification suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--params", help="suite parameters as JSON")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("render-data", help="emit plot-ready scene JSON")
    add_common(p)
    p.add_argument("--scene", choices=("lattice", "interface", "rungs"),
                   default="interface")
    add_pair_opts(p)
    p.add_argument("--box-j", dest="box_j", help="inner box W,H@X,Y (rungs scene)")
    p.add_argument("--box-l", dest="box_l", help="outer box W,H@X,Y (rungs scene)")
    p.add_argument("--maxlen", type=int, default=6)
    p.add_argument("--edge", help="marked edge u,v (rungs scene)")
    p.set_defaults(fn=_cmd_render_data)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (VerificationError, InconsistencyError) as exc:
        print(f"assertion failure: {exc}", file=sys.stderr)
        return 1
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
