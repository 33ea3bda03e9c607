"""Closed-form Reissner-Nordström family and the radial-profile abstraction.

A static, spherically symmetric, electrostatic system is carried here as a
:class:`RadialProfile`: a triple of radial functions

* ``f``   -- metric radial function, spatial metric ``g = f(r)^-2 dr^2 + r^2 dS^2``
  in area-radius gauge (``dS^2`` the unit round sphere),
* ``N``   -- lapse, with spacetime metric ``-N^2 dt^2 + g``,
* ``Phi`` -- electric potential,

together with first and second radial derivatives.  The charged family of
mass ``M`` and charge ``Q`` (geometric units, both lengths) is

    N(r) = f(r) = sqrt(1 - 2M/r + Q^2/r^2),    Phi(r) = Q/r,

with event horizon at ``R = M + sqrt(M^2 - Q^2)`` when ``Q^2 <= M^2`` and a
naked singularity otherwise.  Circular null orbits sit at the real roots of

    r^2 - 3 M r + 2 Q^2 = 0,

i.e. ``r = 3M/2 +- sqrt(9M^2 - 8Q^2)/2``; the sub-extremal and extremal
members carry exactly one such sphere in the exterior, the moderately
over-charged members (``M^2 < Q^2 < 9M^2/8``) two, and beyond
``8Q^2 = 9M^2`` none.

All evaluators are written with plain arithmetic so that they accept floats,
``mpmath.mpf`` scalars, and numpy arrays alike; the extended-precision path is
what makes the trapping tests in :mod:`photoncert.geodesics` meaningful.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DomainError
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "RNParams",
    "ExtremalityClass",
    "RadialProfile",
    "horizon_radius",
    "photon_sphere_radii",
    "rn_profile",
    "classify",
    "flat_profile",
    "electrovac_residuals",
    "scalar_curvature",
    "scalar_curvature_identity_residual",
    "quasilocal_mass",
]


@dataclass(frozen=True)
class RNParams:
    """Mass/charge pair identifying one member of the charged static family.

    Both entries are geometric lengths.  No sign restriction is imposed on
    input; classification reports the consequences.
    """

    mass: float
    charge: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mass) and math.isfinite(self.charge)):
            raise ValueError("mass and charge must be finite reals")


class ExtremalityClass(enum.Enum):
    SUB_EXTREMAL = "sub-extremal"      # Q^2 < M^2
    EXTREMAL = "extremal"              # Q^2 = M^2 (within tolerance)
    SUPER_EXTREMAL = "super-extremal"  # Q^2 > M^2

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class RadialProfile:
    """Static spherically symmetric electrostatic data in area-radius gauge.

    ``nu_N`` and ``nu_Phi`` are the outward-normal derivatives ``f * N'`` and
    ``f * Phi'`` as standalone evaluators: for closed-form members they are
    supplied in a form that stays finite at a horizon, where ``N'`` alone
    diverges.
    """

    f: Callable
    df: Callable
    d2f: Callable
    N: Callable
    dN: Callable
    d2N: Callable
    Phi: Callable
    dPhi: Callable
    d2Phi: Callable
    nu_N: Callable
    nu_Phi: Callable
    r_min: float
    r_max: float = math.inf
    kind: str = "closed_form"  # or "tabulated"
    label: str = ""
    # stable evaluator of 1 - N^2; closed forms supply it to avoid the
    # cancellation of 1 - N(r)^2 on the asymptotic tail
    one_minus_N2: Callable | None = None

    def one_minus_lapse_sq(self, r):
        if self.one_minus_N2 is not None:
            return self.one_minus_N2(r)
        n = self.N(r)
        return (1 - n) * (1 + n)

    def contains(self, r) -> bool:
        return bool(np.all(r >= self.r_min) and np.all(r <= self.r_max))

    def require_interior(self, r) -> None:
        """Raise :class:`DomainError` unless all radii lie inside [r_min, r_max]."""
        if not self.contains(r):
            raise DomainError(
                f"radius outside profile domain [{self.r_min}, {self.r_max}] ({self.label or self.kind})"
            )

    def restricted(self, r_min: float | None = None, r_max: float | None = None) -> "RadialProfile":
        """Same evaluators on a narrower radial window."""
        lo = self.r_min if r_min is None else float(r_min)
        hi = self.r_max if r_max is None else float(r_max)
        if lo < self.r_min - 1e-12 * max(1.0, abs(self.r_min)) or hi > self.r_max:
            raise DomainError("restriction must shrink the domain")
        return replace(self, r_min=lo, r_max=hi)


def classify(p: RNParams, tol: Tolerances = DEFAULT_TOLERANCES) -> ExtremalityClass:
    """Trichotomy of ``Q^2`` against ``M^2`` with an explicit comparison band."""
    gap = p.charge**2 - p.mass**2
    band = tol.extremality * max(1.0, p.mass**2)
    if abs(gap) <= band:
        return ExtremalityClass.EXTREMAL
    return ExtremalityClass.SUPER_EXTREMAL if gap > 0 else ExtremalityClass.SUB_EXTREMAL


def horizon_radius(p: RNParams) -> float | None:
    """Outer horizon radius ``M + sqrt(M^2 - Q^2)``, or None when absent.

    Absent means either an over-charged member (no real root) or a
    non-positive formal value (possible for M <= 0); both are naked.
    """
    disc = p.mass**2 - p.charge**2
    if disc < 0:
        return None
    r = p.mass + math.sqrt(disc)
    return r if r > 0 else None


def photon_sphere_radii(p: RNParams, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, ...]:
    """Exterior circular-null-orbit radii, outermost first.

    Roots of ``r^2 - 3 M r + 2 Q^2``, restricted to the exterior region:
    for ``Q^2 <= M^2`` only the outer root is exterior (the inner one lies at
    or inside the horizon); over-charged members keep both roots while they
    are real and positive; past the double root there are none.
    """
    M, Q = p.mass, p.charge
    disc = 9 * M**2 - 8 * Q**2
    band = tol.extremality * max(1.0, M**2)
    if disc < -band:
        return ()
    if abs(disc) <= band:
        r = 1.5 * M
        return (r,) if r > 0 else ()
    root = math.sqrt(disc)
    r_outer = 0.5 * (3 * M + root)
    r_inner = 0.5 * (3 * M - root)
    if classify(p, tol) is not ExtremalityClass.SUPER_EXTREMAL:
        return (r_outer,) if r_outer > 0 else ()
    out = tuple(r for r in (r_outer, r_inner) if r > 0)
    return out


def rn_profile(p: RNParams) -> RadialProfile:
    """Closed-form profile of the charged family, with analytic derivatives.

    The lower domain edge is the horizon when one exists, else the largest
    positive root of ``N^2`` (none for over-charged members, giving 0).
    """
    M, Q = float(p.mass), float(p.charge)
    rh = horizon_radius(p)
    r_min = rh if rh is not None else 0.0

    def n2(r):
        return 1 - 2 * M / r + Q * Q / (r * r)

    def N(r):
        return n2(r) ** 0.5

    def dN(r):
        return (M / r**2 - Q * Q / r**3) / N(r)

    def d2N(r):
        g = M / r**2 - Q * Q / r**3
        return (-2 * M / r**3 + 3 * Q * Q / r**4) / N(r) - g * g / n2(r) ** 1.5

    def Phi(r):
        return Q / r

    def dPhi(r):
        return -Q / r**2

    def d2Phi(r):
        return 2 * Q / r**3

    def nu_N(r):
        # f * N' with f = N; the product form stays finite at the horizon
        return M / r**2 - Q * Q / r**3

    def nu_Phi(r):
        return -N(r) * Q / r**2

    def one_minus_n2(r):
        return 2 * M / r - Q * Q / (r * r)

    return RadialProfile(
        f=N, df=dN, d2f=d2N,
        N=N, dN=dN, d2N=d2N,
        Phi=Phi, dPhi=dPhi, d2Phi=d2Phi,
        nu_N=nu_N, nu_Phi=nu_Phi,
        r_min=r_min,
        kind="closed_form",
        label=f"rn(M={M:g},Q={Q:g})",
        one_minus_N2=one_minus_n2,
    )


def flat_profile() -> RadialProfile:
    """Flat space with unit lapse and no field: N = f = 1, Phi = 0."""

    def one(r):
        return 1.0 + 0.0 * r

    def zero(r):
        return 0.0 * r

    return RadialProfile(
        f=one, df=zero, d2f=zero,
        N=one, dN=zero, d2N=zero,
        Phi=zero, dPhi=zero, d2Phi=zero,
        nu_N=zero, nu_Phi=zero,
        r_min=0.0,
        kind="closed_form",
        label="flat",
        one_minus_N2=zero,
    )


# ---------------------------------------------------------------------------
# Radial form of the static Einstein-Maxwell system
# ---------------------------------------------------------------------------
#
# For g = f^-2 dr^2 + r^2 dS^2 the four scalar reductions used below are
#
#   maxwell :  d/dr ( r^2 f Phi' / N ) = 0
#   lapse   :  f^2 N'' + f f' N' + 2 f^2 N'/r - f^2 Phi'^2 / N = 0
#   ricci_rr:  f^2 N'' + f f' N' - f^2 Phi'^2 / N + N (f^2)'/r = 0
#   ricci_tt:  f^2 N'/r + f^2 Phi'^2 / N + N (f^2)'/(2r) - N (1 - f^2)/r^2 = 0
#
# (the two ricci rows are the independent orthonormal components of the
#  lapse-weighted Ricci equation; the angular ones coincide by symmetry).


def electrovac_residuals(profile: RadialProfile, r, relative: bool = False) -> dict[str, np.ndarray]:
    """Pointwise residuals of the reduced static Einstein-Maxwell equations.

    With ``relative=True`` each residual is divided by the largest magnitude
    among its constituent terms (floored at 1), which keeps the values
    roundoff-scaled on grids that dip into strong-field radii.
    """
    r = np.asarray(r, dtype=float)
    profile.require_interior(r)
    f, fp = profile.f(r), profile.df(r)
    N, Np, Npp = profile.N(r), profile.dN(r), profile.d2N(r)
    P, Pp, Ppp = profile.Phi(r), profile.dPhi(r), profile.d2Phi(r)

    df2 = 2 * f * fp
    terms = {
        "maxwell": (2 * r * f * Pp / N, r**2 * (fp * Pp + f * Ppp) / N, -(r**2) * f * Pp * Np / N**2),
        "lapse": (f**2 * Npp, f * fp * Np, 2 * f**2 * Np / r, -(f**2) * Pp**2 / N),
        "ricci_rr": (f**2 * Npp, f * fp * Np, -(f**2) * Pp**2 / N, N * df2 / r),
        "ricci_tt": (f**2 * Np / r, f**2 * Pp**2 / N, N * df2 / (2 * r), -N * (1 - f**2) / r**2),
    }
    out = {}
    for name, ts in terms.items():
        resid = np.asarray(sum(ts))
        if relative:
            scale = np.maximum(np.max(np.abs(np.stack([np.broadcast_to(t, resid.shape) for t in ts])), axis=0), 1.0)
            resid = resid / scale
        out[name] = resid
    return out


def scalar_curvature(profile: RadialProfile, r):
    """Scalar curvature of the spatial metric: 2(1 - f^2)/r^2 - 4 f f'/r."""
    f, fp = profile.f(r), profile.df(r)
    return 2 * (1 - f * f) / (r * r) - 4 * f * fp / r


def scalar_curvature_identity_residual(profile: RadialProfile, r):
    """Residual of R = 2 (f Phi')^2 / N^2, the on-shell curvature identity."""
    f, N, Pp = profile.f(r), profile.N(r), profile.dPhi(r)
    return scalar_curvature(profile, r) - 2 * (f * Pp) ** 2 / N**2


def quasilocal_mass(profile: RadialProfile, r):
    """Misner-Sharp-type mass (r/2)(1 - f^2) of the area-radius sphere."""
    f = profile.f(r)
    return 0.5 * r * (1 - f * f)
