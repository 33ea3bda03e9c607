"""Constant-tuple algebra for photon-sphere cross sections.

A time slice of a photon-sphere component is a round CMC sphere carrying six
constants: area radius ``r``, lapse value ``n``, outward mean curvature ``h``,
the outward normal derivatives of lapse and potential, and the potential
value.  On-shell they satisfy

    curvature :  2/r^2 = (3/2) h^2 + 2 (dp/n)^2
    lapse     :  n h = 2 dn
    constraint:  4/3 = r^2 h^2 + (4/3) (r dp / n)^2

with ``dn``, ``dp`` the normal derivatives.  From a valid tuple one reads off
a Komar-style charge ``q = -dp r^2 / n`` and a mass ``mu = r/3 + 2q^2/(3r)``,
which identify the unique member of the charged static family whose own
photon sphere and horizon fit the component:

    mu^2 - q^2 = (r^2 - q^2)(r^2 - 4 q^2) / (9 r^2),
    s = mu + sqrt(mu^2 - q^2),          r = 3 mu/2 + sqrt(9 mu^2 - 8 q^2)/2.

The sign of ``h r - 1`` classifies the component; it agrees with the signs of
``r^2 - 4 q^2`` and ``mu^2 - q^2``, and (through the boundary Komar mass) with
the global ``M^2 - Q^2`` trichotomy checked by the identities at the bottom of
this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidComponentError, RefusalError
from .rn import ExtremalityClass, RadialProfile
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "PhotonSphereComponent",
    "NeckData",
    "GlobalCharges",
    "ComponentValidation",
    "validate_component",
    "charge",
    "neck_mass",
    "classify_component",
    "neck_interval",
    "matching_constants",
    "komar_mass",
    "lapse_scale_from_komar",
    "mass_decomposition_check",
    "boundary_lapse_identity",
    "functional_relation_check",
    "extremality_trichotomy",
    "component_from_profile",
]


@dataclass(frozen=True)
class PhotonSphereComponent:
    """Per-component constants of a photon-sphere cross section.

    ``lapse_slope`` and ``potential_slope`` are outward normal derivatives.
    """

    r: float
    lapse: float
    mean_curvature: float
    lapse_slope: float
    potential_slope: float
    potential: float


@dataclass(frozen=True)
class NeckData:
    """Constants identifying the cylinder glued onto one component.

    The interval runs from the horizon radius of the matched family member to
    its photon-sphere radius (which equals the component's area radius).  The
    lapse rescale and potential offset are filled in by
    :func:`matching_constants`.
    """

    charge: float
    mass: float
    horizon_radius: float
    photon_radius: float
    lapse_scale: float | None = None
    potential_offset: float | None = None

    @property
    def interval(self) -> tuple[float, float]:
        return (self.horizon_radius, self.photon_radius)


@dataclass(frozen=True)
class GlobalCharges:
    """Asymptotic mass and charge, plus the Komar mass of the inner boundary."""

    adm_mass: float
    total_charge: float
    boundary_komar_mass: float | None = None


@dataclass(frozen=True)
class ComponentValidation:
    residual_curvature: float
    residual_lapse_relation: float
    residual_constraint: float
    tol: float
    passed: bool
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "residual_curvature": self.residual_curvature,
            "residual_lapse_relation": self.residual_lapse_relation,
            "residual_constraint": self.residual_constraint,
            "tol": self.tol,
            "passed": self.passed,
            "note": self.note,
        }


def validate_component(
    c: PhotonSphereComponent, tol: float = DEFAULT_TOLERANCES.component_validation
) -> ComponentValidation:
    """Residuals of the three on-shell identities; pass iff all below tol.

    A tuple with ``h = 0`` and vanishing potential slope is the flat-torus
    branch, which an asymptotically flat exterior excludes (mean curvature of
    an untrapped boundary must be positive); it is rejected with a dedicated
    note rather than scored.
    """
    if not (c.r > 0) or not (c.lapse > 0):
        raise InvalidComponentError("component requires r > 0 and lapse > 0")
    h, n, dp = c.mean_curvature, c.lapse, c.potential_slope
    res_curv = abs(1.5 * h**2 + 2 * (dp / n) ** 2 - 2 / c.r**2)
    res_lapse = abs(n * h - 2 * c.lapse_slope)
    res_constraint = abs(4 / 3 - (c.r * h) ** 2 - (4 / 3) * (c.r * dp / n) ** 2)
    note = ""
    passed = max(res_curv, res_lapse, res_constraint) < tol
    if h == 0 and dp == 0:
        passed = False
        note = (
            "flat-torus branch (h = 0, potential slope = 0): excluded, the "
            "boundary of an asymptotically flat exterior has positive mean curvature"
        )
    elif h <= 0:
        passed = False
        note = "mean curvature must be positive on an untrapped inner boundary"
    return ComponentValidation(res_curv, res_lapse, res_constraint, tol, passed, note)


def charge(c: PhotonSphereComponent) -> float:
    """Komar-style charge q = -dp r^2 / n of the component."""
    return -c.potential_slope * c.r**2 / c.lapse


def neck_mass(c: PhotonSphereComponent) -> float:
    """Mass mu = r/3 + 2 q^2/(3r) of the matched family member.

    Also guards the factorization mu^2 - q^2 = (r^2-q^2)(r^2-4q^2)/(9 r^2),
    which is an algebraic identity in (r, q) and so should never trip.
    """
    q = charge(c)
    r = c.r
    mu = r / 3 + 2 * q**2 / (3 * r)
    lhs = mu**2 - q**2
    rhs = (r**2 - q**2) * (r**2 - 4 * q**2) / (9 * r**2)
    if abs(lhs - rhs) > 1e-12 * max(1.0, mu**2):
        raise ArithmeticError("mass/charge factorization identity violated beyond roundoff")
    return mu


def komar_mass(c: PhotonSphereComponent) -> float:
    """Komar mass m = r^2 * (normal lapse derivative) of the component."""
    return c.r**2 * c.lapse_slope


def classify_component(
    c: PhotonSphereComponent, tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[ExtremalityClass, dict]:
    """Trichotomy by the sign of h r - 1, with the two equivalent sign tests.

    Returns the class together with a diagnostics dict carrying the three
    indicator values (h r - 1, r^2 - 4 q^2, mu^2 - q^2) and a flag when their
    signs disagree beyond the tolerance band (possible only for tuples that
    violate the constraint identity).
    """
    hr = c.mean_curvature * c.r
    q = charge(c)
    mu = neck_mass(c)
    ind = {
        "hr_minus_one": hr - 1.0,
        "r2_minus_4q2": c.r**2 - 4 * q**2,
        "mu2_minus_q2": mu**2 - q**2,
    }
    band = tol.component_class
    if abs(hr - 1.0) <= band:
        cls = ExtremalityClass.EXTREMAL
    elif hr > 1.0:
        cls = ExtremalityClass.SUB_EXTREMAL
    else:
        cls = ExtremalityClass.SUPER_EXTREMAL

    def sgn(x, scale):
        return 0 if abs(x) <= band * scale else math.copysign(1.0, x)

    s0 = sgn(ind["hr_minus_one"], 1.0)
    s1 = sgn(ind["r2_minus_4q2"], max(1.0, c.r**2))
    s2 = sgn(ind["mu2_minus_q2"], max(1.0, mu**2))
    ind["signs_agree"] = bool(s0 == s1 == s2) or 0 in (s0, s1, s2)
    return cls, ind


def neck_interval(c: PhotonSphereComponent, tol: Tolerances = DEFAULT_TOLERANCES) -> NeckData:
    """Charge, mass, horizon radius, and gluing interval for a sub-extremal component.

    Refuses non-sub-extremal components: the construction needs the matched
    family member to carry a non-degenerate horizon so the manifold can later
    be doubled across it.
    """
    cls, _ = classify_component(c, tol)
    if cls is not ExtremalityClass.SUB_EXTREMAL:
        raise RefusalError(
            f"gluing needs a sub-extremal component (h r > 1); got {cls.value} "
            f"with h r = {c.mean_curvature * c.r:.12g}"
        )
    q = charge(c)
    mu = neck_mass(c)
    s = mu + math.sqrt(mu**2 - q**2)
    endpoint = 1.5 * mu + 0.5 * math.sqrt(9 * mu**2 - 8 * q**2)
    if abs(endpoint - c.r) > tol.neck_endpoint_rel * c.r:
        raise InvalidComponentError(
            f"interval endpoint identity fails: 3mu/2 + sqrt(9mu^2-8q^2)/2 = "
            f"{endpoint!r} vs r = {c.r!r}"
        )
    if not s < c.r:
        raise InvalidComponentError("horizon radius must lie below the photon-sphere radius")
    return NeckData(charge=q, mass=mu, horizon_radius=s, photon_radius=c.r)


def _family_radial(mu: float, q: float, r):
    return (1 - 2 * mu / r + q * q / (r * r)) ** 0.5


def matching_constants(c: PhotonSphereComponent, nd: NeckData,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, float]:
    """Lapse rescale alpha and potential offset beta making the gluing continuous.

    alpha = n / f_neck(r) and beta = Phi0 - alpha q / r; for a self-gluing of
    an exact family member both collapse to (1, 0).  The closed form
    alpha = sqrt(3) m r / sqrt((r^2-q^2)(r^2 - 2 mu r + q^2)) in terms of the
    Komar mass must agree; a gross mismatch flags an inconsistent tuple.
    """
    f_r = _family_radial(nd.mass, nd.charge, c.r)
    if not f_r > 0:
        raise RefusalError("degenerate configuration: neck radial function vanishes at the gluing radius")
    alpha = c.lapse / f_r
    beta = c.potential - alpha * nd.charge / c.r
    alpha_cross = lapse_scale_from_komar(c, nd)
    if abs(alpha - alpha_cross) > tol.matching_crosscheck_rel * abs(alpha):
        raise InvalidComponentError(
            f"lapse rescale cross-check failed: direct {alpha!r} vs Komar form {alpha_cross!r}"
        )
    return alpha, beta


def lapse_scale_from_komar(c: PhotonSphereComponent, nd: NeckData) -> float:
    """Closed form of the lapse rescale in terms of the Komar mass.

    Collapses to 3 m / r when the component is uncharged.
    """
    m = komar_mass(c)
    r, q, mu = c.r, nd.charge, nd.mass
    if q == 0:
        return 3 * m / r
    return math.sqrt(3) * m * r / math.sqrt((r**2 - q**2) * (r**2 - 2 * mu * r + q**2))


# ---------------------------------------------------------------------------
# Global-charge identities (single-component boundary)
# ---------------------------------------------------------------------------


def mass_decomposition_check(gc: GlobalCharges, c: PhotonSphereComponent) -> float:
    """Residual of M = m + Phi0 * Q for a single-component boundary."""
    m = gc.boundary_komar_mass if gc.boundary_komar_mass is not None else komar_mass(c)
    return abs(gc.adm_mass - m - c.potential * gc.total_charge)


def boundary_lapse_identity(gc: GlobalCharges, c: PhotonSphereComponent) -> float:
    """Residual of n^2 = (Q^2 + m^2 - M^2)/Q^2; refuses an uncharged system."""
    if gc.total_charge == 0:
        raise RefusalError("boundary lapse identity needs a nonvanishing total charge")
    m = gc.boundary_komar_mass if gc.boundary_komar_mass is not None else komar_mass(c)
    return abs(c.lapse**2 - (gc.total_charge**2 + m**2 - gc.adm_mass**2) / gc.total_charge**2)


def functional_relation_check(
    profile: RadialProfile, gc: GlobalCharges, n_grid: int = 200, r_max_factor: float = 1e6
) -> float:
    """Max residual of N^2 = 1 + Phi^2 - 2 (M/Q) Phi on a log-spaced grid."""
    if gc.total_charge == 0:
        raise RefusalError("functional relation needs a nonvanishing total charge")
    lo = profile.r_min * (1 + 1e-9) if profile.r_min > 0 else 1e-3
    hi = min(profile.r_max, lo * r_max_factor)
    rs = np.geomspace(lo, hi, n_grid)
    N2 = profile.N(rs) ** 2
    P = profile.Phi(rs)
    resid = N2 - 1 - P**2 + 2 * (gc.adm_mass / gc.total_charge) * P
    return float(np.max(np.abs(resid)))


def extremality_trichotomy(
    gc: GlobalCharges, c: PhotonSphereComponent, tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[ExtremalityClass, float, bool]:
    """Classify by Q^2 vs M^2 and check 1/(h r)^2 = 1 + (Q^2 - M^2)/(4 m^2).

    Returns (class from the global charges, identity residual, agreement with
    the component-level classification).  Refuses when the boundary Komar
    mass vanishes, which makes the identity singular.
    """
    m = gc.boundary_komar_mass if gc.boundary_komar_mass is not None else komar_mass(c)
    if m == 0:
        raise RefusalError("trichotomy identity needs a nonvanishing boundary Komar mass")
    hr = c.mean_curvature * c.r
    residual = abs(1.0 / hr**2 - 1.0 - (gc.total_charge**2 - gc.adm_mass**2) / (4 * m**2))
    gap = gc.total_charge**2 - gc.adm_mass**2
    band = tol.extremality * max(1.0, gc.adm_mass**2)
    if abs(gap) <= band:
        cls = ExtremalityClass.EXTREMAL
    elif gap > 0:
        cls = ExtremalityClass.SUPER_EXTREMAL
    else:
        cls = ExtremalityClass.SUB_EXTREMAL
    agrees = cls is classify_component(c, tol)[0]
    return cls, residual, agrees


def component_from_profile(profile: RadialProfile, r_star: float) -> PhotonSphereComponent:
    """Read the six component constants off a radial profile at radius r_star."""
    profile.require_interior(r_star)
    return PhotonSphereComponent(
        r=float(r_star),
        lapse=float(profile.N(r_star)),
        mean_curvature=float(2 * profile.f(r_star) / r_star),
        lapse_slope=float(profile.nu_N(r_star)),
        potential_slope=float(profile.nu_Phi(r_star)),
        potential=float(profile.Phi(r_star)),
    )
