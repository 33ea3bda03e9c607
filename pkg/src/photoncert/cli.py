"""Command-line interface.

Verbs: ``photon-spheres M Q``, ``certify spec.json``, ``nbody spec.json``,
``trace spec.json --r0 R``, ``emit-curves spec.json --out DIR``.
Exit codes: 0 consistent/complete, 1 violations found, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .certifier import build_profile, certify, derive_components, emit, load_spec, nbody_check
from .conformal import ConformalProfile, scalar_curvature_hat
from .errors import PhotoncertError
from .geodesics import integrate_null_geodesic, tangent_state, write_trajectory_csv
from .gluing import double_profile, glue
from .rn import RNParams, classify, horizon_radius, photon_sphere_radii, rn_profile
from .surfaces import matching_constants, neck_interval
import dataclasses

CURVE_HEADERS = {
    "effective_potential.csv": ["r", "potential", "dpotential_dr"],
    "omega.csv": ["r", "omega_plus", "omega_minus"],
    "scalar_curvature.csv": ["r", "side", "rhat_identity", "rhat_direct"],
    "quasilocal_mass.csv": ["rhat", "mhat"],
}


def _cmd_photon_spheres(args) -> int:
    p = RNParams(args.mass, args.charge)
    radii = photon_sphere_radii(p)
    payload = {
        "mass": args.mass,
        "charge": args.charge,
        "class": classify(p).value,
        "horizon_radius": horizon_radius(p),
        "photon_sphere_radii": list(radii),
    }
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(f"class: {payload['class']}")
        print(f"horizon radius: {payload['horizon_radius']}")
        if radii:
            print("photon sphere radii:", ", ".join(f"{r:.12g}" for r in radii))
        else:
            print("photon sphere radii: none")
    return 0


def _cmd_certify(args) -> int:
    spec = load_spec(args.spec)
    report = certify(spec)
    text = emit(report, "json", args.out)
    if args.out:
        print(f"report written to {args.out}")
        print(f"verdict: {report.verdict}")
    else:
        print(text, end="")
    return 0 if report.consistent else 1


def _cmd_nbody(args) -> int:
    spec = load_spec(args.spec)
    out = nbody_check(spec)
    print(json.dumps(out, sort_keys=True, indent=2))
    return 0 if not out["hypothesis_failures"] else 1


def _cmd_trace(args) -> int:
    spec = load_spec(args.spec)
    profile = build_profile(spec)
    state = tangent_state(profile, args.r0)
    traj = integrate_null_geodesic(
        profile, state, args.affine if args.affine else 100.0 * args.r0,
        r_escape=50.0 * args.r0,
    )
    out = args.out or f"trace_r0_{args.r0:g}.csv"
    write_trajectory_csv(traj, out)
    print(f"{len(traj.lam)} points -> {out} (terminated: {traj.reason})")
    return 0


def _assemble(spec):
    profile = build_profile(spec)
    comps = derive_components(profile, spec.tolerances) if spec.components == "derive" \
        else list(spec.components)
    necks = []
    for c in comps:
        nd = neck_interval(c, spec.tolerances)
        alpha, beta = matching_constants(c, nd, spec.tolerances)
        necks.append(dataclasses.replace(nd, lapse_scale=alpha, potential_offset=beta))
    gp = glue(profile, comps, necks, spec.tolerances)
    gpd, _ = double_profile(gp, spec.tolerances)
    return profile, comps, gpd


def _cmd_emit_curves(args) -> int:
    spec = load_spec(args.spec)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    profile, comps, gpd = _assemble(spec)
    lo = profile.r_min * (1 + 1e-6) if profile.r_min > 0 else 1e-3
    hi = min(profile.r_max, 100.0 * max(c.r for c in comps))
    rs = np.geomspace(lo, hi, 400)

    n = np.asarray(profile.N(rs), dtype=float)
    dn = np.asarray(profile.dN(rs), dtype=float)
    pot = n**2 / rs**2
    dpot = 2 * n * (dn * rs - n) / rs**3
    _write_csv(outdir / "effective_potential.csv", ["r", "potential", "dpotential_dr"],
               zip(rs, pot, dpot))

    cp = ConformalProfile(gpd, 0)
    rec = gpd.records[0]
    grid = np.geomspace(rec.minimal_radius * (1 + 1e-6), hi, 400)
    om_p = np.asarray(cp.omega(grid, +1), dtype=float)
    om_m = np.asarray(cp.omega(grid, -1), dtype=float)
    _write_csv(outdir / "omega.csv", ["r", "omega_plus", "omega_minus"], zip(grid, om_p, om_m))

    s, r_i = rec.minimal_radius, rec.locus
    cg = np.geomspace(s + (r_i - s) * 1e-3, min(hi, r_i * 50), 300)
    cg = cg[np.abs(cg - r_i) > 1e-6 * r_i]
    rows = []
    for side in (+1, -1):
        ident, direct = scalar_curvature_hat(cp, cg, side)
        rows.extend(zip(cg, [side] * len(cg), ident, direct))
    _write_csv(outdir / "scalar_curvature.csv", ["r", "side", "rhat_identity", "rhat_direct"], rows)

    tail = rec.locus * 2.0 ** np.arange(2, 13)
    tail = tail[tail <= rec.exterior.r_max]
    rh = np.asarray(cp.rhat(tail, +1), dtype=float)
    mh = np.asarray(cp.quasilocal_mass_hat(tail, +1), dtype=float)
    _write_csv(outdir / "quasilocal_mass.csv", ["rhat", "mhat"], zip(rh, mh))

    for k, c in enumerate(comps):
        traj = integrate_null_geodesic(
            profile, tangent_state(profile, c.r), 20.0 * c.r, r_escape=50.0 * c.r
        )
        write_trajectory_csv(traj, outdir / f"trace_component_{k}.csv")

    print(f"curve bundle written to {outdir}")
    return 0


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="photoncert",
        description="Certifier for photon-sphere data in static electro-vacuum systems.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("photon-spheres", help="closed-form photon-sphere radii for (M, Q)")
    ps.add_argument("mass", type=float)
    ps.add_argument("charge", type=float)
    ps.add_argument("--json", action="store_true")
    ps.set_defaults(fn=_cmd_photon_spheres)

    ce = sub.add_parser("certify", help="run the full certification pipeline on a spec")
    ce.add_argument("spec")
    ce.add_argument("--out", help="write the JSON report here instead of stdout")
    ce.set_defaults(fn=_cmd_certify)

    nb = sub.add_parser("nbody", help="static-equilibrium exclusion check for a multi-body spec")
    nb.add_argument("spec")
    nb.set_defaults(fn=_cmd_nbody)

    tr = sub.add_parser("trace", help="integrate a tangent null geodesic and export CSV")
    tr.add_argument("spec")
    tr.add_argument("--r0", type=float, required=True)
    tr.add_argument("--affine", type=float, default=None)
    tr.add_argument("--out")
    tr.set_defaults(fn=_cmd_trace)

    ec = sub.add_parser("emit-curves", help="export curve bundles (potential, omega, curvature, mass)")
    ec.add_argument("spec")
    ec.add_argument("--out", required=True)
    ec.set_defaults(fn=_cmd_emit_curves)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PhotoncertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
