"""Certification pipeline: config ingestion, full pipeline runs, verdicts, output.

A run takes a declared spacetime (closed-form family member or tabulated
radial samples), derives or ingests its photon-sphere components, and walks
the whole construction: component identities, sub-extremality, neck data and
matching constants, gluing regularity, doubling symmetry, conformal-factor
positivity, the curvature identity, vanishing mass of the surviving end,
flatness, and the global-charge identities.  Every gate reads its threshold
from the central tolerance table; every failure lands in the violations list
naming the violated relation; the verdict is consistent only when that list
is empty.  Reports serialize to deterministic JSON (sorted keys, shortest
float repr, fixed reduction order).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

from .conformal import (
    ConformalProfile,
    adm_mass_hat,
    flatness_check,
    heusler_scan,
    minus_end_compactification_check,
    positivity_check,
)
from .errors import GaugeError, PhotoncertError, RefusalError, SpecFormatError
from .geodesics import find_circular_null_orbits
from .gluing import check_c11, double_profile, glue
from .rn import (
    ExtremalityClass,
    RadialProfile,
    RNParams,
    electrovac_residuals,
    quasilocal_mass,
    rn_profile,
)
from .surfaces import (
    GlobalCharges,
    PhotonSphereComponent,
    boundary_lapse_identity,
    charge,
    classify_component,
    component_from_profile,
    extremality_trichotomy,
    functional_relation_check,
    komar_mass,
    mass_decomposition_check,
    matching_constants,
    neck_interval,
    neck_mass,
    validate_component,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "SpacetimeSpec",
    "CertificationReport",
    "SPEC_SCHEMA",
    "load_spec",
    "tabulated_profile",
    "build_profile",
    "derive_components",
    "certify",
    "nbody_check",
    "emit",
]

REPORT_SCHEMA_ID = "photoncert.report.v1"

_COMPONENT_FIELDS = ["r", "lapse", "mean_curvature", "lapse_slope", "potential_slope", "potential"]

_COMPONENT_SCHEMA = {
    "type": "object",
    "properties": {k: {"type": "number"} for k in _COMPONENT_FIELDS},
    "required": _COMPONENT_FIELDS,
    "additionalProperties": False,
}

SPEC_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema_version": {"const": 1},
        "source": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "rn"},
                        "mass": {"type": "number"},
                        "charge": {"type": "number"},
                    },
                    "required": ["type", "mass", "charge"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "tabulated"},
                        "path": {"type": "string"},
                    },
                    "required": ["type", "path"],
                    "additionalProperties": False,
                },
            ]
        },
        "components": {
            "oneOf": [
                {"const": "derive"},
                {"type": "array", "items": _COMPONENT_SCHEMA},
            ]
        },
        "bodies": {"type": "array", "items": _COMPONENT_SCHEMA},
        "black_holes": {"type": "integer", "minimum": 0},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
        "grid": {
            "type": "object",
            "properties": {
                "n": {"type": "integer", "minimum": 16},
                "r_max_factor": {"type": "number", "exclusiveMinimum": 1},
                "stencil_h": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "decay_fit": {
            "type": "object",
            "properties": {
                "tau": {"type": "number"},
                "k": {"type": "integer"},
                "q": {"type": "number"},
            },
            "additionalProperties": False,
        },
    },
    "required": ["schema_version", "source"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class SpacetimeSpec:
    """Parsed, schema-validated run configuration."""

    source: dict
    components: str | tuple[PhotonSphereComponent, ...] = "derive"
    bodies: tuple[PhotonSphereComponent, ...] = ()
    black_holes: int = 0
    tolerances: Tolerances = DEFAULT_TOLERANCES
    grid: dict = field(default_factory=dict)
    decay_fit: dict | None = None
    path: str | None = None


def _component_from_dict(d: dict) -> PhotonSphereComponent:
    return PhotonSphereComponent(**{k: float(d[k]) for k in _COMPONENT_FIELDS})


def load_spec(path) -> SpacetimeSpec:
    """Load and validate a run configuration, resolving any profile file path."""
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecFormatError(f"cannot read spec {p}: {exc}") from exc
    if jsonschema is not None:
        try:
            jsonschema.validate(raw, SPEC_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise SpecFormatError(f"spec schema violation at {exc.json_path}: {exc.message}") from exc
    src = dict(raw["source"])
    if src["type"] == "tabulated":
        csv_path = Path(src["path"])
        if not csv_path.is_absolute():
            csv_path = p.parent / csv_path
        src["path"] = str(csv_path)
    comps = raw.get("components", "derive")
    if comps != "derive":
        comps = tuple(_component_from_dict(c) for c in comps)
    tol = DEFAULT_TOLERANCES
    if raw.get("tolerances"):
        try:
            tol = tol.overridden(**raw["tolerances"])
        except TypeError as exc:
            raise SpecFormatError(f"unknown tolerance override: {exc}") from exc
    return SpacetimeSpec(
        source=src,
        components=comps,
        bodies=tuple(_component_from_dict(c) for c in raw.get("bodies", ())),
        black_holes=int(raw.get("black_holes", 0)),
        tolerances=tol,
        grid=dict(raw.get("grid", {})),
        decay_fit=raw.get("decay_fit"),
        path=str(p),
    )


def tabulated_profile(path) -> RadialProfile:
    """Radial profile from CSV columns (r, f, N, Phi).

    Values are carried by monotone cubic interpolants; first and second
    derivatives come from second-order finite differences of the samples
    (interpolated the same way), which keeps the second derivative
    second-order accurate in the sample spacing.  Accuracy of every
    downstream check is therefore set by the sampling density.
    """
    p = Path(path)
    try:
        data = np.genfromtxt(p, delimiter=",", names=True)
    except OSError as exc:
        raise SpecFormatError(f"cannot read profile table {p}: {exc}") from exc
    names = data.dtype.names or ()
    for col in ("r", "f", "N", "Phi"):
        if col not in names:
            raise SpecFormatError(f"tabulated profile {p.name} missing column '{col}'")
    r = np.asarray(data["r"], dtype=float)
    if r.size < 50:
        raise SpecFormatError(f"tabulated profile needs at least 50 samples, got {r.size}")
    if not np.all(np.diff(r) > 0):
        raise SpecFormatError("tabulated profile radii must be strictly increasing")
    interp = {}
    for col in ("f", "N", "Phi"):
        y = np.asarray(data[col], dtype=float)
        if not np.all(np.isfinite(y)):
            raise SpecFormatError(f"tabulated profile column '{col}' has non-finite entries")
        d1 = np.gradient(y, r, edge_order=2)
        d2 = np.gradient(d1, r, edge_order=2)
        interp[col] = tuple(PchipInterpolator(r, v, extrapolate=True) for v in (y, d1, d2))
    f0, f1, f2 = interp["f"]
    n0, n1, n2 = interp["N"]
    p0, p1, p2 = interp["Phi"]
    return RadialProfile(
        f=f0, df=f1, d2f=f2,
        N=n0, dN=n1, d2N=n2,
        Phi=p0, dPhi=p1, d2Phi=p2,
        nu_N=lambda x: f0(x) * n1(x),
        nu_Phi=lambda x: f0(x) * p1(x),
        r_min=float(r[0]), r_max=float(r[-1]),
        kind="tabulated",
        label=p.name,
    )


def build_profile(spec: SpacetimeSpec) -> RadialProfile:
    if spec.source["type"] == "rn":
        return rn_profile(RNParams(spec.source["mass"], spec.source["charge"]))
    return tabulated_profile(spec.source["path"])


def derive_components(
    profile: RadialProfile, tol: Tolerances = DEFAULT_TOLERANCES
) -> list[PhotonSphereComponent]:
    """Photon-sphere components read off the profile at its circular null orbits."""
    lo = profile.r_min * (1 + 1e-6) if profile.r_min > 0 else 1e-3
    hi = profile.r_max if math.isfinite(profile.r_max) else max(1e3, 1e3 * lo)
    roots = find_circular_null_orbits(profile, (lo, hi), rel_tol=tol.root_rel)
    return [component_from_profile(profile, r) for r in roots]


# ---------------------------------------------------------------------------
# Certification report
# ---------------------------------------------------------------------------


@dataclass
class CertificationReport:
    payload: dict

    @property
    def verdict(self) -> str:
        return self.payload["verdict"]

    @property
    def violations(self) -> list:
        return self.payload["violations"]

    @property
    def consistent(self) -> bool:
        return self.verdict.startswith("consistent-with-unique-RN")

    def to_dict(self) -> dict:
        return self.payload

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.payload), sort_keys=True, indent=2) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, ExtremalityClass):
        return x.value
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return _jsonable(dataclasses.asdict(x))
    return x


def _violation(violations: list, stage: str, relation: str, value, tolerance, detail: str = "") -> None:
    violations.append(
        {
            "stage": stage,
            "relation": relation,
            "value": None if value is None else float(value),
            "tolerance": None if tolerance is None else float(tolerance),
            "detail": detail,
        }
    )


def _gate(violations, stage, relation, value, tolerance, detail=""):
    if not value < tolerance:
        _violation(violations, stage, relation, value, tolerance, detail)


def certify(spec: SpacetimeSpec) -> CertificationReport:
    """Run the full pipeline and aggregate residuals, margins, and the verdict.

    Refusals (non-sub-extremal components, degenerate necks) are recorded as
    violations of the corresponding hypothesis and stop the geometric stages;
    an exact sub-extremal family member comes back consistent with the
    recovered (mass, charge) equal to its own parameters.
    """
    tol = spec.tolerances
    violations: list[dict] = []
    profile = build_profile(spec)
    is_tab = profile.kind == "tabulated"

    report: dict = {
        "schema": REPORT_SCHEMA_ID,
        "input": {
            "source": spec.source,
            "components": "derived" if spec.components == "derive" else "given",
            "decay_fit": spec.decay_fit,
        },
        "tolerances": tol.as_dict(),
    }

    # field equations on the raw profile
    lo = profile.r_min * (1 + 1e-6) if profile.r_min > 0 else 1e-3
    hi = min(profile.r_max, lo * spec.grid.get("r_max_factor", 1e3))
    rs = np.geomspace(lo, hi, spec.grid.get("n", 200))
    ev = electrovac_residuals(profile, rs, relative=True)
    ev_max = max(float(np.max(np.abs(v))) for v in ev.values())
    ev_tol = tol.electrovac_tabulated if is_tab else tol.electrovac_closed_form
    report["field_equations"] = {"max_residual": ev_max, "tol": ev_tol, "kind": profile.kind}
    _gate(violations, "field_equations", "static-electro-vacuum-system", ev_max, ev_tol)

    # components
    if spec.components == "derive":
        comps = derive_components(profile, tol)
        if not comps:
            report["components"] = []
            report["verdict"] = "not-certified: no circular null orbits detected"
            report["violations"] = violations
            _violation(violations, "components", "photon-sphere-existence", None, None,
                       "no circular null orbits found in the profile domain")
            return CertificationReport(report)
    else:
        comps = list(spec.components)

    comp_entries = []
    necks = []
    refused = False
    for i, c in enumerate(comps):
        entry: dict = {"tuple": dataclasses.asdict(c)}
        val = validate_component(c, tol.component_validation)
        entry["validation"] = val.as_dict()
        if not val.passed:
            _violation(
                violations, "components", "photon-sphere-surface-identities",
                max(val.residual_curvature, val.residual_lapse_relation, val.residual_constraint),
                tol.component_validation, val.note or f"component {i}",
            )
        cls, indicators = classify_component(c, tol)
        entry["class"] = cls.value
        entry["class_indicators"] = indicators
        entry["charge"] = charge(c)
        entry["neck_mass"] = neck_mass(c)
        entry["komar_mass"] = komar_mass(c)
        try:
            nd = neck_interval(c, tol)
            alpha, beta = matching_constants(c, nd, tol)
            nd = dataclasses.replace(nd, lapse_scale=alpha, potential_offset=beta)
            necks.append(nd)
            entry["neck"] = dataclasses.asdict(nd)
            entry["refusal"] = None
        except (RefusalError, PhotoncertError) as exc:
            refused = True
            entry["neck"] = None
            entry["refusal"] = str(exc)
            _violation(violations, "neck", "sub-extremality-hypothesis", None, None,
                       f"component {i}: {exc}")
        comp_entries.append(entry)
    report["components"] = comp_entries

    # global charges: exact for the closed-form family, tail-fitted otherwise
    if spec.source["type"] == "rn":
        gc = GlobalCharges(
            adm_mass=float(spec.source["mass"]),
            total_charge=float(spec.source["charge"]),
            boundary_komar_mass=komar_mass(comps[0]) if comps else None,
        )
        charges_src = "exact"
    else:
        gc = _charges_from_tail(profile, comps)
        charges_src = "fitted"
    report["global_charges"] = {
        "adm_mass": gc.adm_mass,
        "total_charge": gc.total_charge,
        "boundary_komar_mass": gc.boundary_komar_mass,
        "source": charges_src,
    }

    # appendix identities, single-component boundary only
    if len(comps) == 1:
        report["appendix"] = _appendix_checks(profile, gc, comps[0], tol, violations, is_tab)
    else:
        report["appendix"] = None

    # recovered family parameters
    if comps:
        mu1, q1 = neck_mass(comps[0]), charge(comps[0])
        report["recovered"] = {"mass": mu1, "charge": q1}
        if spec.source["type"] == "rn":
            err = max(abs(mu1 - spec.source["mass"]), abs(q1 - spec.source["charge"]))
            report["recovered"]["round_trip_error"] = err
            _gate(violations, "recovered", "mass-charge-round-trip", err, tol.oracle_agreement)
    else:
        report["recovered"] = None

    if refused:
        report["regularity"] = None
        report["doubling"] = None
        report["positivity"] = None
        report["curvature"] = None
        report["adm_mass"] = None
        report["minus_end"] = None
        report["flatness"] = None
        report["violations"] = violations
        report["verdict"] = "not-certified: gluing hypotheses violated (see violations)"
        return CertificationReport(report)

    # geometric stages
    gp = glue(profile, comps, necks, tol)
    h = spec.grid.get("stencil_h", (1e-3 if is_tab else 1e-4) * min(gp.gluing_loci))
    reg = check_c11(gp, h=h)
    report["regularity"] = reg.as_dict()
    c11_tol = 10.0 * h if is_tab else tol.c11_closed_form
    _gate(violations, "regularity", "one-derivative-matching-across-gluing-sphere",
          reg.max_jump(), c11_tol)

    gpd, dbl = double_profile(gp, tol)
    report["doubling"] = dbl.as_dict()
    _gate(violations, "doubling", "odd-lapse-even-potential-reflection",
          dbl.max_residual(), tol.doubling_symmetry if not is_tab else 10.0 * h)

    pos = positivity_check(gpd, r_max_factor=spec.grid.get("r_max_factor", 1e3))
    report["positivity"] = pos.as_dict()
    if not pos.ok:
        for msg in pos.failures:
            _violation(violations, "positivity", "conformal-factor-positivity", None, None, msg)

    curvature: dict = {"per_record": []}
    adm_entries = []
    minus_entries = []
    flat_entries = []
    for k in range(len(gpd.records)):
        cp = ConformalProfile(gpd, k)
        hs = heusler_scan(cp)
        curvature["per_record"].append(hs)
        if not is_tab:
            _gate(violations, "curvature", "conformal-scalar-curvature-identity",
                  hs["max_abs_diff"], tol.heusler_identity, f"record {k}")
        if hs["min_identity"] < -1e-10:
            _violation(violations, "curvature", "identity-non-negativity",
                       hs["min_identity"], -1e-10, f"record {k}")
        try:
            am = adm_mass_hat(cp)
            adm_entries.append(am.as_dict())
            scale = max(abs(gc.adm_mass), 1e-3)
            _gate(violations, "adm_mass", "vanishing-mass-of-compressed-end",
                  abs(am.extrapolated), tol.adm_mass_rel * scale, f"record {k}")
        except GaugeError as exc:
            adm_entries.append({"error": str(exc)})
            _violation(violations, "adm_mass", "conformal-gauge-monotonicity", None, None, str(exc))
        try:
            me = minus_end_compactification_check(cp, tol=tol)
            minus_entries.append(me.as_dict())
            _gate(violations, "minus_end", "mirror-end-decay-exponent",
                  abs(me.fitted_exponent + 3.0), tol.decay_exponent, f"record {k}")
        except (RefusalError, GaugeError) as exc:
            minus_entries.append({"skipped": str(exc)})
        if is_tab:
            # mirror-side pointwise curvature is below interpolation resolution
            fl = flatness_check(cp, tol=tol.flatness_tabulated, sides=((+1, 30.0),))
        else:
            fl = flatness_check(cp, tol=tol.flatness)
        flat_entries.append(fl.as_dict())
        if not fl.flat:
            _violation(violations, "flatness", "conformal-metric-flatness",
                       max(fl.max_radial_tangential, fl.max_tangential_tangential),
                       fl.tol, f"record {k}")
    report["curvature"] = curvature
    report["adm_mass"] = adm_entries
    report["minus_end"] = minus_entries
    report["flatness"] = flat_entries

    report["violations"] = violations
    if violations:
        report["verdict"] = "not-certified: violations found"
    else:
        mu1, q1 = report["recovered"]["mass"], report["recovered"]["charge"]
        report["verdict"] = f"consistent-with-unique-RN(M={mu1:.12g},Q={q1:.12g})"
    return CertificationReport(report)


def _charges_from_tail(profile: RadialProfile, comps) -> GlobalCharges:
    """ADM mass and total charge from the profile tail (quasi-local limits)."""
    hi = profile.r_max if math.isfinite(profile.r_max) else 1e6 * max(1.0, profile.r_min)
    rs = np.geomspace(hi / 32.0, hi, 8)
    m = np.asarray(quasilocal_mass(profile, rs), dtype=float)
    # quasi-local mass of the charged family is M - Q^2/(2r): eliminate the 1/r term
    m_ext = (rs[1:] * m[1:] - rs[:-1] * m[:-1]) / (rs[1:] - rs[:-1])
    q = -np.asarray(profile.dPhi(rs), dtype=float) * rs**2
    return GlobalCharges(
        adm_mass=float(m_ext[-1]),
        total_charge=float(q[-1]),
        boundary_komar_mass=komar_mass(comps[0]) if comps else None,
    )


def _appendix_checks(profile, gc, c, tol: Tolerances, violations: list, is_tab: bool) -> dict:
    gate = 100 * tol.electrovac_tabulated if is_tab else tol.appendix_identity
    out: dict = {}
    res = mass_decomposition_check(gc, c)
    out["mass_decomposition_residual"] = res
    _gate(violations, "appendix", "mass-splits-into-komar-plus-potential-charge", res, gate)
    if gc.total_charge != 0:
        res = boundary_lapse_identity(gc, c)
        out["boundary_lapse_residual"] = res
        _gate(violations, "appendix", "boundary-lapse-from-global-charges", res, gate)
        res = functional_relation_check(profile, gc)
        out["functional_relation_residual"] = res
        _gate(violations, "appendix", "lapse-potential-functional-relation", res, gate)
    else:
        out["boundary_lapse_residual"] = None
        out["functional_relation_residual"] = None
        out["charge_free_note"] = "identities needing a nonzero total charge are inapplicable"
    try:
        cls, res, agrees = extremality_trichotomy(gc, c, tol)
        out["trichotomy_class"] = cls.value
        out["trichotomy_residual"] = res
        out["trichotomy_agrees_with_component"] = agrees
        _gate(violations, "appendix", "extremality-trichotomy-identity", res, gate)
        if not agrees:
            _violation(violations, "appendix", "trichotomy-classification-agreement",
                       None, None, "global and component classifications disagree")
    except RefusalError as exc:
        out["trichotomy_skipped"] = str(exc)
    return out


# ---------------------------------------------------------------------------
# n-body exclusion
# ---------------------------------------------------------------------------


def nbody_check(spec: SpacetimeSpec) -> dict:
    """Static-equilibrium exclusion for multiple bodies and black holes.

    With ``k`` bodies each surrounded by its own valid sub-extremal
    photon-sphere component and ``n`` non-degenerate black-hole boundary
    records, any configuration with ``k + n > 1`` contradicts the uniqueness
    and connectedness of the certified geometry, so it is excluded.  A single
    body (or single black hole) is not excluded.  Components failing
    validation or sub-extremality void the hypotheses instead: the verdict
    then names the failing body and no exclusion is claimed.
    """
    bodies = list(spec.bodies)
    if not bodies and isinstance(spec.components, tuple):
        bodies = list(spec.components)
    k, n = len(bodies), spec.black_holes
    failures = []
    details = []
    for i, c in enumerate(bodies):
        val = validate_component(c, spec.tolerances.component_validation)
        cls, _ = classify_component(c, spec.tolerances)
        details.append({"body": i, "valid": val.passed, "class": cls.value})
        if not val.passed:
            failures.append(f"body {i}: surface identities fail ({val.note or 'residuals above tolerance'})")
        elif cls is not ExtremalityClass.SUB_EXTREMAL:
            failures.append(f"body {i}: photon sphere is {cls.value}, not sub-extremal")
    out = {
        "schema": "photoncert.nbody.v1",
        "bodies": k,
        "black_holes": n,
        "body_details": details,
        "hypothesis_failures": failures,
    }
    if failures:
        out["verdict"] = "hypotheses-not-met: no exclusion claimed"
        out["excluded"] = False
    elif k + n > 1:
        out["verdict"] = (
            "configuration excluded by uniqueness: a certified geometry has a "
            "connected boundary, so no static equilibrium of "
            f"{k} very compact bodies and {n} black holes exists"
        )
        out["excluded"] = True
    else:
        out["verdict"] = "not excluded: a single boundary component is admissible"
        out["excluded"] = False
    return out


def emit(report: CertificationReport | dict, fmt: str = "json", path=None) -> str:
    """Serialize a report; returns the text, writing it to ``path`` if given."""
    if fmt != "json":
        raise ValueError(f"unsupported report format: {fmt!r}")
    payload = report.to_dict() if isinstance(report, CertificationReport) else report
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
