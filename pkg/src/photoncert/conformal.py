"""Conformal compression of the doubled manifold and its curvature checks.

With the doubled data ``(g, N~, Phi~)`` (lapse odd, potential even across the
minimal boundary), the conformal factor

    Omega = ((1 + N~)^2 - Phi~^2) / 4

is positive as long as every component is sub-extremal, equals 1 at the
original infinity, and falls off like ``(M^2 - Q^2)/(4 r^2)`` at the mirror
infinity, compressing that end to a point.  The working conformal metric here
is ``Omega^2 g``: for an exact member of the charged family this metric is
isometric to flat space (verified in isotropic coordinates, where
``Omega_+ = rho/r`` exactly), its quasi-local mass vanishes identically, and
its scalar curvature obeys the electrostatic identity

    Rhat = f^2 [ (1 - N~^2 - Phi~^2) Phi~' + 2 Phi~ N~ N~' ]^2 / (8 N~^2 Omega^4),

manifestly non-negative.  Both sides of that identity are computed
independently: the right side from first derivatives of the fields, the left
directly from the conformally transformed radial metric in its own
area-radius gauge ``rhat = Omega r``.

The mirror-end compactification diagnostic uses the squared-factor radius
``Omega^2 r`` (decay exponent -3, coefficient ``(mu^2-q^2)^2/16``); the
curvature and mass checks use the area radius ``Omega r`` of the working
metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GaugeError, RefusalError
from .gluing import GluedProfile, GluedRecord
from .rn import RadialProfile
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "ConformalProfile",
    "conformal_factor",
    "PositivityRecord",
    "positivity_check",
    "scalar_curvature_hat",
    "heusler_scan",
    "AdmMassRecord",
    "adm_mass_hat",
    "MinusEndRecord",
    "minus_end_compactification_check",
    "FlatnessRecord",
    "flatness_check",
]


@dataclass(frozen=True)
class ConformalProfile:
    """Side-aware conformal evaluators over one glued record.

    ``side`` is +1 on the original copy and -1 on the mirror; the record's
    stored lapse is always the positive branch, signs enter through the
    conformal factor and the curvature identity only.
    """

    gp: GluedProfile
    record: int = 0

    def __post_init__(self) -> None:
        if not self.gp.doubled:
            raise RefusalError("conformal stage runs on the doubled profile")

    @property
    def rec(self) -> GluedRecord:
        return self.gp.records[self.record]

    # -- field helpers ------------------------------------------------------

    def _one_plus_signed_lapse(self, r, side):
        n = self.rec.N(r)
        if side == +1:
            return 1 + n
        # stable 1 - n: avoids the cancellation of 1 - N on the far mirror end
        return self._one_minus_n2(r) / (1 + n)

    def _one_minus_n2(self, r):
        return self.rec.one_minus_lapse_sq(r)

    def omega(self, r, side: int):
        w = self._one_plus_signed_lapse(r, side)
        p = self.rec.Phi(r)
        return 0.25 * (w * w - p * p)

    def domega(self, r, side: int):
        w = self._one_plus_signed_lapse(r, side)
        n1, p, p1 = self.rec.dN(r), self.rec.Phi(r), self.rec.dPhi(r)
        return 0.5 * (w * side * n1 - p * p1)

    def d2omega(self, r, side: int):
        w = self._one_plus_signed_lapse(r, side)
        n1, n2 = self.rec.dN(r), self.rec.d2N(r)
        p, p1, p2 = self.rec.Phi(r), self.rec.dPhi(r), self.rec.d2Phi(r)
        return 0.5 * (n1 * n1 + w * side * n2 - p1 * p1 - p * p2)

    # -- conformal radial geometry ------------------------------------------

    def rhat(self, r, side: int):
        """Area radius of the working conformal metric: Omega * r."""
        return self.omega(r, side) * r

    def compactification_radius(self, r):
        """Squared-factor mirror-end radius Omega_-^2 * r (diagnostic map)."""
        return self.omega(r, -1) ** 2 * r

    def _geometry(self, r, side: int):
        om = self.omega(r, side)
        dom = self.domega(r, side)
        d2om = self.d2omega(r, side)
        f, fp = self.rec.f(r), self.rec.df(r)
        rh = om * r
        drh = dom * r + om
        d2rh = d2om * r + 2 * dom
        fhat = f * drh / om
        fhat2 = fhat * fhat
        dfhat2 = (
            2 * f * fp * drh**2 / om**2
            + 2 * f**2 * drh * d2rh / om**2
            - 2 * f**2 * drh**2 * dom / om**3
        )
        return rh, drh, fhat2, dfhat2

    def sectional_curvatures(self, r, side: int):
        """(radial-tangential, tangential-tangential) curvatures of Omega^2 g."""
        rh, drh, fhat2, dfhat2 = self._geometry(r, side)
        k_tan = (1 - fhat2) / rh**2
        k_rad = -dfhat2 / (2 * rh * drh)
        return k_rad, k_tan

    def quasilocal_mass_hat(self, r, side: int = +1):
        """(rhat/2)(1 - fhat^2) of the working conformal metric."""
        rh, _, fhat2, _ = self._geometry(r, side)
        return 0.5 * rh * (1 - fhat2)


def conformal_factor(gp: GluedProfile, side: int, r, record: int = 0):
    """Omega = ((1 + N~)^2 - Phi~^2)/4 with the signed lapse of the chosen side."""
    return ConformalProfile(gp, record).omega(r, side)


# ---------------------------------------------------------------------------
# Sign and positivity sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PositivityRecord:
    interior_margins: dict       # per record: -max(N~-1+Phi~), -max(N~-1-Phi~) on the + side
    boundary_margins: dict       # per record: ( H n/2 + nu_Phi, H n/2 - nu_Phi, chain values )
    omega_min: float
    omega_argmin: float
    non_strict: bool
    ok: bool
    failures: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "interior_margins": self.interior_margins,
            "boundary_margins": self.boundary_margins,
            "omega_min": self.omega_min,
            "omega_argmin": self.omega_argmin,
            "non_strict": self.non_strict,
            "ok": self.ok,
            "failures": list(self.failures),
        }


def positivity_check(
    gp: GluedProfile,
    grid: np.ndarray | None = None,
    r_max_factor: float = 1e3,
    n_grid: int = 400,
) -> PositivityRecord:
    """Grid verification that the conformal factor is strictly positive.

    Three ingredients, mirroring the sign argument that replaces the maximum
    principle at desk scale: (i) ``N~ - 1 +- Phi~ < 0`` everywhere on the
    original side, (ii) outward derivative positivity
    ``H n/2 +- nu(Phi) > 0`` on each gluing sphere together with the
    equivalent chain ``H^2 r^2 > 1  <=>  q^2/r^2 < 1/4``, and (iii)
    ``Omega > 0`` on both copies.  A vanishing margin (flat data) is reported
    as non-strict rather than as a failure of strict positivity.
    """
    failures: list[str] = []
    interior: dict = {}
    boundary: dict = {}
    omega_min = math.inf
    omega_argmin = math.nan
    non_strict = False
    for k, rec in enumerate(gp.records):
        lo = rec.minimal_radius * (1 + 1e-6) if rec.minimal_radius > 0 else 1e-3
        hi = min(rec.locus * r_max_factor, rec.exterior.r_max)
        rs = grid if grid is not None else np.geomspace(lo, hi, n_grid)
        n = np.asarray(rec.N(rs), dtype=float)
        p = np.asarray(rec.Phi(rs), dtype=float)
        one_minus = np.asarray(rec.one_minus_lapse_sq(rs), dtype=float) / (1 + n)
        s_plus = -one_minus + p    # N~ - 1 + Phi~
        s_minus = -one_minus - p   # N~ - 1 - Phi~
        m1 = float(-np.max(s_plus))
        m2 = float(-np.max(s_minus))
        interior[f"record_{k}"] = {"lapse_plus_potential": m1, "lapse_minus_potential": m2}
        if min(m1, m2) < 0:
            failures.append(f"record {k}: sign condition fails on the original side")
        if min(m1, m2) == 0:
            non_strict = True

        c = rec.component
        q = rec.neck_data.charge
        d_plus = 0.5 * c.mean_curvature * c.lapse + c.potential_slope
        d_minus = 0.5 * c.mean_curvature * c.lapse - c.potential_slope
        hr2 = (c.mean_curvature * c.r) ** 2 - 1.0
        qr2 = 0.25 - (q / c.r) ** 2
        boundary[f"record_{k}"] = {
            "derivative_plus": d_plus,
            "derivative_minus": d_minus,
            "hr_squared_margin": hr2,
            "charge_ratio_margin": qr2,
            "chain_consistent": bool((hr2 > 0) == (qr2 > 0) == (min(d_plus, d_minus) > 0)),
        }
        if min(d_plus, d_minus) <= 0:
            failures.append(
                f"record {k}: boundary derivative sign fails at locus r = {c.r:.12g} "
                f"(H n/2 +- nu_Phi = {d_plus:.3e}, {d_minus:.3e})"
            )

        for side in (+1, -1) if gp.doubled else (+1,):
            om = np.asarray(
                ConformalProfile(gp, k).omega(rs, side) if gp.doubled else
                0.25 * ((1 + side * n) ** 2 - p**2),
                dtype=float,
            )
            j = int(np.argmin(om))
            if om[j] < omega_min:
                omega_min = float(om[j])
                omega_argmin = float(rs[j])
            if om[j] <= 0:
                failures.append(
                    f"record {k}: conformal factor non-positive at r = {rs[j]:.12g} (side {side:+d})"
                )
    return PositivityRecord(
        interior_margins=interior,
        boundary_margins=boundary,
        omega_min=omega_min,
        omega_argmin=omega_argmin,
        non_strict=non_strict,
        ok=not failures,
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# Scalar curvature: identity vs direct
# ---------------------------------------------------------------------------


def scalar_curvature_hat(cp: ConformalProfile, r, side: int, lapse_floor: float = 1e-8):
    """Scalar curvature of the working conformal metric, two ways.

    Returns (identity, direct): the square-of-gradient identity evaluated from
    first derivatives of the fields, and the curvature assembled directly from
    the transformed radial metric.  Refuses at and too near the minimal
    boundary, where the identity's ``1/N~^2`` is singular (a one-sided limit
    exists but is not taken here), and at the gluing loci, where the data is
    only once differentiable and curvature may genuinely jump.
    """
    rec = cp.rec
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    n = np.asarray(rec.N(r_arr), dtype=float)
    if np.any(np.abs(n) < lapse_floor):
        raise RefusalError("curvature identity is singular where the lapse vanishes")
    for locus in (rec.locus,):
        if np.any(np.abs(r_arr - locus) < 1e-9 * locus):
            raise RefusalError(
                "curvature is only one-sided at a gluing locus; evaluate strictly to one side"
            )
    p = np.asarray(rec.Phi(r_arr), dtype=float)
    p1 = np.asarray(rec.dPhi(r_arr), dtype=float)
    n1 = np.asarray(rec.dN(r_arr), dtype=float)
    f = np.asarray(rec.f(r_arr), dtype=float)
    one_m = np.asarray(cp._one_minus_n2(r_arr), dtype=float)
    coef = (one_m - p * p) * p1 + 2 * p * n * n1
    om = np.asarray(cp.omega(r_arr, side), dtype=float)
    identity = f**2 * coef**2 / (8 * n**2 * om**4)
    k_rad, k_tan = cp.sectional_curvatures(r_arr, side)
    direct = np.asarray(2 * (2 * k_rad + k_tan), dtype=float)
    if np.ndim(r) == 0:
        return float(identity[0]), float(direct[0])
    return identity, direct


def heusler_scan(
    cp: ConformalProfile,
    n_grid: int = 200,
    plus_factor: float = 100.0,
    minus_factor: float = 3.0,
    edge_margin: float = 1e-3,
) -> dict:
    """Max |identity - direct| per side of a log grid away from edges.

    The mirror side is compared on a shorter range: its shrinking area radius
    divides roundoff by ``rhat^2`` in the direct curvature, so far samples
    measure arithmetic noise rather than the identity.
    """
    rec = cp.rec
    s, r_i = rec.minimal_radius, rec.locus
    lo = s + (r_i - s) * edge_margin
    out = {"max_abs_diff": 0.0, "min_identity": math.inf, "max_identity": 0.0}
    for side, factor in ((+1, plus_factor), (-1, minus_factor)):
        hi = min(r_i * factor, rec.exterior.r_max)
        rs = np.geomspace(lo, hi, n_grid)
        rs = rs[np.abs(rs - r_i) > 1e-6 * r_i]
        ident, direct = scalar_curvature_hat(cp, rs, side)
        out["max_abs_diff"] = max(out["max_abs_diff"], float(np.max(np.abs(ident - direct))))
        out["min_identity"] = min(out["min_identity"], float(np.min(ident)))
        out["max_identity"] = max(out["max_identity"], float(np.max(ident)))
    return out


# ---------------------------------------------------------------------------
# Mass of the surviving end
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdmMassRecord:
    extrapolated: float
    samples_rhat: tuple[float, ...]
    samples_mhat: tuple[float, ...]
    decay_constant: float   # sup of |mhat| * rhat over the tail
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "extrapolated": self.extrapolated,
            "samples_rhat": list(self.samples_rhat),
            "samples_mhat": list(self.samples_mhat),
            "decay_constant": self.decay_constant,
            "note": self.note,
        }


def adm_mass_hat(cp: ConformalProfile, radii: np.ndarray | None = None) -> AdmMassRecord:
    """Quasi-local mass of the working conformal metric along an increasing tail.

    Richardson extrapolation against a 1/rhat model gives the limit; the
    recorded decay constant bounds |mhat(rhat)| <= C / rhat on the sampled
    tail.  A non-monotone conformal area radius means the gauge is unusable
    and raises a gauge diagnostic.
    """
    rec = cp.rec
    if radii is None:
        rs = rec.locus * 2.0 ** np.arange(2, 13)
        rs = rs[rs <= rec.exterior.r_max]
    else:
        rs = radii
    rh = np.asarray(cp.rhat(rs, +1), dtype=float)
    if np.any(np.diff(rh) <= 0):
        raise GaugeError("conformal area radius is not increasing along the tail")
    mh = np.asarray(cp.quasilocal_mass_hat(rs, +1), dtype=float)
    # pairwise elimination of the 1/rhat term, last value is the extrapolation
    ext = (rh[1:] * mh[1:] - rh[:-1] * mh[:-1]) / (rh[1:] - rh[:-1])
    extrapolated = float(ext[-1])
    decay_c = float(np.max(np.abs(mh) * rh))
    note = ""
    if np.max(np.abs(mh)) < 1e-11 * max(1.0, rec.locus):
        note = "mass samples at the working-precision noise floor"
    return AdmMassRecord(
        extrapolated=extrapolated,
        samples_rhat=tuple(float(x) for x in rh),
        samples_mhat=tuple(float(x) for x in mh),
        decay_constant=decay_c,
        note=note,
    )


# ---------------------------------------------------------------------------
# Mirror-end compactification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinusEndRecord:
    fitted_exponent: float
    fitted_coefficient: float
    expected_coefficient: float

    def as_dict(self) -> dict:
        return {
            "fitted_exponent": self.fitted_exponent,
            "fitted_coefficient": self.fitted_coefficient,
            "expected_coefficient": self.expected_coefficient,
        }


def minus_end_compactification_check(
    cp: ConformalProfile, radii: np.ndarray | None = None, tol: Tolerances = DEFAULT_TOLERANCES
) -> MinusEndRecord:
    """Fit the mirror-end decay of the squared-factor radius Omega_-^2 r.

    The leading behaviour is (mu^2 - q^2)^2 / (16 r^3): exponent -3 with the
    coefficient fixed by the recovered neck constants.  Extremal data is
    refused: with mu^2 = q^2 the factor has no quadratic falloff and the end
    does not compactify.
    """
    nd = cp.rec.neck_data
    gap = nd.mass**2 - nd.charge**2
    if gap <= tol.extremality * max(1.0, nd.mass**2):
        raise RefusalError("mirror-end compactification requires a strictly sub-extremal pair")
    if radii is None:
        hi = min(1e6, cp.rec.exterior.r_max / cp.rec.locus)
        if hi < 1e4:
            raise GaugeError("tail too short for a mirror-end decay fit (need two decades)")
        rs = cp.rec.locus * np.geomspace(hi / 1e3, hi, 24)
    else:
        rs = radii
    c = np.asarray(cp.compactification_radius(rs), dtype=float)
    slope, intercept = np.polyfit(np.log(rs), np.log(c), 1)
    return MinusEndRecord(
        fitted_exponent=float(slope),
        fitted_coefficient=float(np.exp(intercept)),
        expected_coefficient=gap**2 / 16.0,
    )


# ---------------------------------------------------------------------------
# Flatness verdict
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatnessRecord:
    max_radial_tangential: float
    max_tangential_tangential: float
    tol: float
    flat: bool

    def as_dict(self) -> dict:
        return {
            "max_radial_tangential": self.max_radial_tangential,
            "max_tangential_tangential": self.max_tangential_tangential,
            "tol": self.tol,
            "flat": self.flat,
        }


def flatness_check(
    cp: ConformalProfile,
    grid: np.ndarray | None = None,
    tol: float = DEFAULT_TOLERANCES.flatness,
    n_grid: int = 300,
    edge_margin: float = 1e-4,
    sides: tuple[tuple[int, float], ...] = ((+1, 100.0), (-1, 20.0)),
) -> FlatnessRecord:
    """Both sectional curvatures of the working conformal metric on the grid.

    The default grid is log-spaced per side, stays one margin inside the
    minimal boundary (the radial chart degenerates there), skips the gluing
    locus (curvature is one-sided across it), and caps the mirror side early:
    the shrinking area radius there divides derivative errors by ``rhat^2``,
    so far mirror samples measure arithmetic noise rather than geometry.  For
    interpolated inputs the caller restricts ``sides`` to the original copy.
    """
    rec = cp.rec
    s, r_i = rec.minimal_radius, rec.locus
    lo = s + (r_i - s) * max(edge_margin, 1e-9)
    max_r, max_t = 0.0, 0.0
    for side, cap in sides:
        hi = min(r_i * cap, rec.exterior.r_max)
        rs = grid if grid is not None else np.geomspace(lo, hi, n_grid)
        rs = rs[np.abs(rs - r_i) > 1e-6 * r_i]
        k_rad, k_tan = cp.sectional_curvatures(rs, side)
        max_r = max(max_r, float(np.max(np.abs(k_rad))))
        max_t = max(max_t, float(np.max(np.abs(k_tan))))
    return FlatnessRecord(
        max_radial_tangential=max_r,
        max_tangential_tangential=max_t,
        tol=tol,
        flat=bool(max(max_r, max_t) < tol),
    )
