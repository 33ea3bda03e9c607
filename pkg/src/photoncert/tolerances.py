"""Central tolerance policy.

Every numerical gate in the certification pipeline reads its threshold from a
single :class:`Tolerances` instance so that a report can state, in one table,
exactly what "passes" meant for that run.  The defaults below are calibrated
for closed-form inputs evaluated with analytic derivatives; tabulated inputs
normally need the looser ``*_tabulated`` values, which scale with the quality
of the supplied samples.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace


@dataclass(frozen=True)
class Tolerances:
    # classification
    extremality: float = 1e-12          # |Q^2 - M^2| <= extremality*max(1, M^2) counts as extremal
    component_class: float = 1e-12      # |H r - 1| band treated as the extremal class

    # surface-data algebra
    component_validation: float = 1e-8  # residual gate for the per-component identities
    neck_endpoint_rel: float = 1e-10    # relative gate for the interval endpoint identity
    matching_crosscheck_rel: float = 1e-6

    # radial field equations
    electrovac_closed_form: float = 1e-9
    electrovac_tabulated: float = 1e-4

    # gluing / regularity
    alignment: float = 1e-12
    c11_closed_form: float = 1e-9
    doubling_symmetry: float = 1e-9
    minimal_boundary_lapse: float = 1e-7

    # geodesics
    integrator: float = 1e-12
    trapping_rel: float = 1e-6          # sup |r - r0| < trapping_rel * r0 counts as trapped
    trapping_affine_factor: float = 100.0
    snap_rel: float = 1e-9              # launch radius within snap_rel*r0 of a circular root snaps onto it
    horizon_lapse_floor: float = 1e-10
    root_rel: float = 1e-12             # relative tolerance of circular-orbit root refinement
    oracle_agreement: float = 1e-9

    # conformal stage
    heusler_identity: float = 1e-8
    flatness: float = 1e-7
    adm_mass_rel: float = 1e-6          # |extrapolated mass| <= adm_mass_rel * M
    decay_exponent: float = 0.05        # allowed slack on the fitted far-end decay exponent

    # appendix identities
    appendix_identity: float = 1e-10

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def overridden(self, **kwargs: float) -> "Tolerances":
        """Return a copy with the given fields replaced (unknown keys rejected)."""
        return replace(self, **kwargs)


DEFAULT_TOLERANCES = Tolerances()
