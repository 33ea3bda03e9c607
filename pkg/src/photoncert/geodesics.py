"""Null geodesics in static spherically symmetric metrics.

Equatorial geodesics of ``-N^2 dt^2 + f^-2 dr^2 + r^2 dS^2`` conserve the
energy ``E = N^2 dt/dl`` and angular momentum ``L = r^2 dphi/dl``.  With
``p = dr/dl`` the null condition reads

    -E^2/N^2 + p^2/f^2 + L^2/r^2 = 0           (constraint)

and the radial motion closes to

    dr/dl   = p
    dp/dl   = ( E^2 A'(r) - L^2 B'(r) ) / 2,   A = (f/N)^2,  B = (f/r)^2
    dphi/dl = L / r^2.

This is the conserved-quantity reduction of the geodesic Hamiltonian: on the
null shell it coincides with the Hamiltonian flow, and it conserves the
constraint exactly along exact solutions, so the constraint residual of a
numerical trajectory measures pure integration error.

Circular null orbits sit where ``(N^2/r^2)' = 0``, i.e. at roots of
``N'(r) r - N(r)``.  The outer orbit of a sub-extremal member is unstable
with a radial growth rate near ``0.58/M``; over an affine length of
``100 r0`` that amplifies launch errors by ~e^170, far beyond double
precision.  The trapping test therefore refines the orbit radius with
``mpmath`` and integrates in extended precision whenever the requested launch
radius agrees with a circular root to the snap tolerance; everything else
runs in ordinary doubles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath as mp
import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, RefusalError
from .rn import RadialProfile
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "NullGeodesicState",
    "Trajectory",
    "TrappingReport",
    "radial_rhs",
    "null_constraint_residual",
    "tangent_state",
    "integrate_null_geodesic",
    "find_circular_null_orbits",
    "trapping_test",
    "write_trajectory_csv",
]


@dataclass(frozen=True)
class NullGeodesicState:
    """Equatorial null-geodesic state: (r, phi, dr/dl) plus the constants E, L."""

    r: float
    phi: float
    p_r: float
    energy: float
    angular_momentum: float


@dataclass
class Trajectory:
    lam: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    p_r: np.ndarray
    constraint_residual: np.ndarray
    reason: str  # "lambda_max" | "horizon_floor" | "domain_exit" | "escape_radius" | "step_underflow"
    energy: float
    angular_momentum: float

    @property
    def max_constraint_residual(self) -> float:
        return float(np.max(np.abs(self.constraint_residual)))


@dataclass(frozen=True)
class TrappingReport:
    """Outcome of a tangent launch: how far the ray strays from its start radius."""

    launch_radius: float
    max_deviation: float
    affine_length: float
    verdict: str  # "trapped" | "escaped" | "plunged"
    snapped_to: float | None
    termination_reason: str
    max_constraint_residual: float

    @property
    def trapped(self) -> bool:
        return self.verdict == "trapped"


def radial_rhs(profile: RadialProfile, state: NullGeodesicState):
    """Derivative tuple (dr/dl, dp/dl, dphi/dl) at the given state."""
    r = state.r
    profile.require_interior(r)
    E2 = state.energy * state.energy
    L2 = state.angular_momentum * state.angular_momentum
    f, fp = profile.f(r), profile.df(r)
    N, Np = profile.N(r), profile.dN(r)
    dA = 2 * f * (fp * N - f * Np) / N**3
    dB = 2 * f * (fp * r - f) / r**3
    return state.p_r, (E2 * dA - L2 * dB) / 2, state.angular_momentum / r**2


def null_constraint_residual(profile: RadialProfile, r, p_r, energy, angular_momentum):
    """Relative residual of -E^2/N^2 + p^2/f^2 + L^2/r^2 (normalized by E^2/N^2)."""
    N = profile.N(r)
    f = profile.f(r)
    scale = (energy / N) ** 2
    return (-scale + (p_r / f) ** 2 + (angular_momentum / r) ** 2) / scale


def tangent_state(profile: RadialProfile, r0, energy=1.0) -> NullGeodesicState:
    """Null state with p_r = 0 at r0: L = r0 E / N(r0) puts it on the constraint."""
    profile.require_interior(r0)
    L = r0 * energy / profile.N(r0)
    return NullGeodesicState(r=r0, phi=0.0 * r0, p_r=0.0 * r0, energy=energy, angular_momentum=L)


# ---------------------------------------------------------------------------
# Embedded Dormand-Prince 5(4) pair, precision-agnostic
# ---------------------------------------------------------------------------
# Coefficients kept as exact rationals so the same stepper runs in float or
# mpmath arithmetic without losing the tableau to rounding.

_DP_C = [Fraction(0), Fraction(1, 5), Fraction(3, 10), Fraction(4, 5), Fraction(8, 9), Fraction(1), Fraction(1)]
_DP_A = [
    [],
    [Fraction(1, 5)],
    [Fraction(3, 40), Fraction(9, 40)],
    [Fraction(44, 45), Fraction(-56, 15), Fraction(32, 9)],
    [Fraction(19372, 6561), Fraction(-25360, 2187), Fraction(64448, 6561), Fraction(-212, 729)],
    [Fraction(9017, 3168), Fraction(-355, 33), Fraction(46732, 5247), Fraction(49, 176), Fraction(-5103, 18656)],
    [Fraction(35, 384), Fraction(0), Fraction(500, 1113), Fraction(125, 192), Fraction(-2187, 6784), Fraction(11, 84)],
]
_DP_B5 = _DP_A[6] + [Fraction(0)]
_DP_B4 = [
    Fraction(5179, 57600), Fraction(0), Fraction(7571, 16695), Fraction(393, 640),
    Fraction(-92097, 339200), Fraction(187, 2100), Fraction(1, 40),
]


class _StepRejected(Exception):
    """Raised by the right-hand side when a trial stage leaves the chart."""


def _invalid(v) -> bool:
    if isinstance(v, (complex, mp.mpc)):
        return True
    try:
        return not math.isfinite(float(v))
    except (TypeError, ValueError, OverflowError):
        return True


def _tableau(cast: Callable):
    A = [[cast(x) for x in row] for row in _DP_A]
    b5 = [cast(x) for x in _DP_B5]
    b4 = [cast(x) for x in _DP_B4]
    return A, b5, b4


def _rk45(rhs, y0, t_max, rtol, atol, h_max, events, cast=float):
    """Adaptive Dormand-Prince 5(4) from t=0 to t_max with terminal events.

    ``events`` is a list of (name, fn) pairs; a step whose endpoint makes any
    fn(y) true is accepted and integration stops with that name.  ``cast``
    converts the rational tableau into the working arithmetic (float or mpf).
    Stages that leave the chart (``_StepRejected`` or non-finite values) force
    a halved retry; a step shrunk below ~1e-15 of the span ends the run with
    reason "step_underflow".
    """
    A, b5, b4 = _tableau(cast)
    zero = cast(0)
    t = zero
    y = list(y0)
    ts = [t]
    ys = [tuple(y)]
    reason = "lambda_max"
    h = min(h_max, t_max / cast(16)) if h_max is not None else t_max / cast(16)
    k_first = rhs(y)
    min_h = t_max * cast(1e-15)
    while t < t_max:
        if h > t_max - t:
            h = t_max - t
        try:
            ks = [k_first]
            for i in range(1, 7):
                yi = [y[j] + h * sum(A[i][m] * ks[m][j] for m in range(i)) for j in range(len(y))]
                ks.append(rhs(yi))
            y5 = [y[j] + h * sum(b5[m] * ks[m][j] for m in range(7)) for j in range(len(y))]
            bad = any(_invalid(v) for v in y5)
            err = zero
            if not bad:
                for j in range(len(y)):
                    e = h * sum((b5[m] - b4[m]) * ks[m][j] for m in range(7))
                    sc = atol + rtol * max(abs(y[j]), abs(y5[j]))
                    err = max(err, abs(e) / sc)
                bad = _invalid(err)
        except (_StepRejected, ZeroDivisionError):
            bad = True
        if bad:
            h = h * cast(0.5)
            if h < min_h:
                reason = "step_underflow"
                break
            continue
        if err <= 1:
            t = t + h
            y = y5
            k_first = ks[6]  # FSAL
            ts.append(t)
            ys.append(tuple(y))
            stop = None
            for name, fn in events:
                if fn(y):
                    stop = name
                    break
            if stop is not None:
                return ts, ys, stop
            grow = cast(5) if err == 0 else min(cast(5), cast(0.9) * err ** cast(-0.2))
            h = h * grow
        else:
            h = h * max(cast(0.2), cast(0.9) * err ** cast(-0.2))
        if h_max is not None and h > h_max:
            h = h_max
        if h < min_h:
            reason = "step_underflow"
            break
    return ts, ys, reason


def integrate_null_geodesic(
    profile: RadialProfile,
    initial: NullGeodesicState,
    lambda_max: float,
    tol: float = 1e-12,
    n_floor: float = 1e-10,
    r_escape: float | None = None,
    h_max: float | None = None,
    precision_dps: int | None = None,
) -> Trajectory:
    """Adaptive integration of a null geodesic up to affine parameter lambda_max.

    Stops early on horizon approach (``N < n_floor``), domain exit, or an
    optional escape radius.  The integrator runs at ``tol/50`` internally so
    the constraint residual at output points stays within ``10 * tol``.  With
    ``precision_dps`` set, all arithmetic is done in mpmath at that many
    digits (the profile evaluators must accept mpf; closed-form ones do).
    """
    use_mp = precision_dps is not None
    if use_mp:
        ctx_cast: Callable = lambda x: mp.mpf(x.numerator) / mp.mpf(x.denominator) if isinstance(x, Fraction) else mp.mpf(x)
        with mp.workdps(precision_dps):
            res0 = null_constraint_residual(
                profile, initial.r, initial.p_r, initial.energy, initial.angular_momentum
            )
    else:
        ctx_cast = lambda x: float(x)
        res0 = null_constraint_residual(
            profile, initial.r, initial.p_r, initial.energy, initial.angular_momentum
        )
    if abs(res0) > 10 * tol:
        raise ValueError(f"initial state violates the null constraint: residual {float(res0):.3e}")

    E = ctx_cast(initial.energy)
    L = ctx_cast(initial.angular_momentum)
    E2, L2 = E * E, L * L
    r_lo = profile.r_min
    r_hi = profile.r_max

    def rhs(y):
        r, p = y[0], y[1]
        if r <= r_lo or r >= r_hi:
            raise _StepRejected
        f, fp = profile.f(r), profile.df(r)
        N, Np = profile.N(r), profile.dN(r)
        dA = 2 * f * (fp * N - f * Np) / N**3
        dB = 2 * f * (fp * r - f) / r**3
        return (p, (E2 * dA - L2 * dB) / 2, L / r**2)

    def hit_floor(y):
        return profile.N(y[0]) < n_floor

    def out_of_domain(y):
        return y[0] <= r_lo * (1 + 1e-12) if r_lo > 0 else y[0] <= 0

    events = [("horizon_floor", hit_floor), ("domain_exit", out_of_domain)]
    if r_escape is not None:
        events.append(("escape_radius", lambda y: y[0] >= r_escape))

    def run():
        y0 = (ctx_cast(initial.r), ctx_cast(initial.p_r), ctx_cast(initial.phi))
        return _rk45(
            rhs, y0, ctx_cast(lambda_max),
            rtol=ctx_cast(tol / 50), atol=ctx_cast(tol / 50),
            h_max=None if h_max is None else ctx_cast(h_max),
            events=events, cast=ctx_cast,
        )

    if use_mp:
        with mp.workdps(precision_dps):
            ts, ys, reason = run()
    else:
        ts, ys, reason = run()

    lam = np.array([float(t) for t in ts])
    r = np.array([float(y[0]) for y in ys])
    p = np.array([float(y[1]) for y in ys])
    phi = np.array([float(y[2]) for y in ys])
    if use_mp:
        with mp.workdps(precision_dps):
            resid = np.array([
                float(null_constraint_residual(profile, y[0], y[1], E, L)) for y in ys
            ])
    else:
        resid = null_constraint_residual(profile, r, p, float(E), float(L))
        resid = np.asarray(resid, dtype=float)
    return Trajectory(lam, r, phi, p, resid, reason, float(E), float(L))


# ---------------------------------------------------------------------------
# Circular null orbits and trapping
# ---------------------------------------------------------------------------


def _orbit_indicator(profile: RadialProfile):
    """g(r) = N'(r) r - N(r); its roots are the circular-null-orbit radii."""

    def g(r):
        return profile.dN(r) * r - profile.N(r)

    return g


def find_circular_null_orbits(
    profile: RadialProfile,
    bracket: tuple[float, float],
    n_scan: int = 2000,
    rel_tol: float = DEFAULT_TOLERANCES.root_rel,
) -> tuple[float, ...]:
    """All roots of d/dr (N^2/r^2) in the bracket, outermost first.

    Sign changes of ``N' r - N`` (the same roots, better conditioned near a
    horizon, where ``N^2/r^2`` itself flattens) are located on a scan grid and
    refined with Brent's method to the requested relative tolerance.  No sign
    change means no orbit: the result is simply empty.
    """
    a, b = bracket
    lo = max(a, profile.r_min * (1 + 1e-9)) if profile.r_min > 0 else max(a, 1e-12)
    if not (lo < b):
        raise DomainError("bracket lies outside the profile domain")
    g = _orbit_indicator(profile)
    rs = np.geomspace(lo, min(b, profile.r_max), n_scan)
    vals = np.array([float(g(r)) for r in rs])
    roots: list[float] = []
    for i in range(len(rs) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            roots.append(float(rs[i]))
        elif v0 * v1 < 0:
            root = brentq(g, rs[i], rs[i + 1], xtol=1e-300, rtol=max(rel_tol, 1e-15))
            roots.append(float(root))
    if vals[-1] == 0.0:
        roots.append(float(rs[-1]))
    # dedupe near-coincident roots from scan-grid boundaries
    roots.sort(reverse=True)
    out: list[float] = []
    for r in roots:
        if not out or abs(out[-1] - r) > 1e-9 * max(1.0, r):
            out.append(r)
    return tuple(out)


def _refine_orbit_mp(profile: RadialProfile, r_seed: float, dps: int) -> mp.mpf:
    """Polish a circular-orbit radius to ~dps digits with mpmath's secant solver."""
    g = _orbit_indicator(profile)
    with mp.workdps(dps):
        root = mp.findroot(g, mp.mpf(r_seed), tol=mp.mpf(10) ** (-(dps - 5)))
        return mp.mpf(root)


def trapping_test(
    profile: RadialProfile,
    r0: float,
    affine_length: float | None = None,
    tol: float | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    precision_dps: int = 120,
) -> TrappingReport:
    """Launch tangentially (p_r = 0, E and L on the null constraint) at r0.

    The verdict is "trapped" exactly when r0 agrees with a circular-orbit
    radius to the snap tolerance: in that case the launch radius is polished
    to ``precision_dps`` digits and the ray integrated in extended precision,
    because the unstable orbit amplifies any representable launch error past
    the trapping band within the required affine length.  Off-orbit launches
    run in doubles and drift monotonically at first order.
    """
    profile.require_interior(r0)
    lam_max = affine_length if affine_length is not None else tolerances.trapping_affine_factor * r0
    tol = tolerances.integrator if tol is None else tol
    trap_band = tolerances.trapping_rel * r0

    roots = find_circular_null_orbits(
        profile, bracket=(max(profile.r_min * (1 + 1e-8), 0.2 * r0), 5.0 * r0), n_scan=800
    )
    snapped: float | None = None
    for root in roots:
        if abs(root - r0) <= tolerances.snap_rel * max(1.0, r0):
            snapped = root
            break

    if snapped is not None and profile.kind == "closed_form":
        with mp.workdps(precision_dps):
            r_launch = _refine_orbit_mp(profile, snapped, precision_dps)
            state = tangent_state(profile, r_launch, energy=mp.mpf(1))
        traj = integrate_null_geodesic(
            profile, state, lam_max, tol=tol,
            n_floor=tolerances.horizon_lapse_floor,
            h_max=lam_max / 64.0,
            precision_dps=precision_dps,
        )
        dev = float(np.max(np.abs(traj.r - r0)))
    else:
        state = tangent_state(profile, float(r0))
        traj = integrate_null_geodesic(
            profile, state, lam_max, tol=tol,
            n_floor=tolerances.horizon_lapse_floor,
            r_escape=20.0 * r0,
        )
        dev = float(np.max(np.abs(traj.r - r0)))

    if dev < trap_band and traj.reason == "lambda_max":
        verdict = "trapped"
    elif traj.reason in ("horizon_floor", "domain_exit") or traj.r[-1] < r0:
        verdict = "plunged"
    else:
        verdict = "escaped"
    return TrappingReport(
        launch_radius=float(r0),
        max_deviation=dev,
        affine_length=float(traj.lam[-1]),
        verdict=verdict,
        snapped_to=None if snapped is None else float(snapped),
        termination_reason=traj.reason,
        max_constraint_residual=traj.max_constraint_residual,
    )


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Columns: lambda, r, phi, p_r, constraint_residual."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "r", "phi", "p_r", "constraint_residual"])
        for k in range(len(traj.lam)):
            w.writerow([
                repr(traj.lam[k]), repr(traj.r[k]), repr(traj.phi[k]),
                repr(traj.p_r[k]), repr(traj.constraint_residual[k]),
            ])
