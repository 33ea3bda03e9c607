"""Desk-scale certifier for photon-sphere data in static electro-vacuum systems.

The package evaluates, numerically and at explicit tolerances, every
constructive step that pins a static electrostatic system with sub-extremal
photon-sphere boundary to the charged spherical family: closed-form family
data, null-geodesic trapping, per-component surface algebra, neck gluing with
one-derivative matching, doubling across the minimal boundary, conformal
compression to a flat zero-mass manifold, and the global-charge identities.
"""

from .conformal import (
    ConformalProfile,
    adm_mass_hat,
    conformal_factor,
    flatness_check,
    heusler_scan,
    minus_end_compactification_check,
    positivity_check,
    scalar_curvature_hat,
)
from .certifier import (
    CertificationReport,
    SpacetimeSpec,
    build_profile,
    certify,
    derive_components,
    emit,
    load_spec,
    nbody_check,
    tabulated_profile,
)
from .errors import (
    AlignmentError,
    DomainError,
    GaugeError,
    InvalidComponentError,
    PhotoncertError,
    RefusalError,
    SpecFormatError,
)
from .geodesics import (
    NullGeodesicState,
    Trajectory,
    TrappingReport,
    find_circular_null_orbits,
    integrate_null_geodesic,
    null_constraint_residual,
    radial_rhs,
    tangent_state,
    trapping_test,
)
from .gluing import (
    GluedProfile,
    GluedRecord,
    RegularityReport,
    build_neck,
    check_c11,
    double_profile,
    glue,
)
from .rn import (
    ExtremalityClass,
    RadialProfile,
    RNParams,
    classify,
    electrovac_residuals,
    flat_profile,
    horizon_radius,
    photon_sphere_radii,
    quasilocal_mass,
    rn_profile,
    scalar_curvature,
    scalar_curvature_identity_residual,
)
from .surfaces import (
    GlobalCharges,
    NeckData,
    PhotonSphereComponent,
    boundary_lapse_identity,
    charge,
    classify_component,
    component_from_profile,
    extremality_trichotomy,
    functional_relation_check,
    komar_mass,
    lapse_scale_from_komar,
    mass_decomposition_check,
    matching_constants,
    neck_interval,
    neck_mass,
    validate_component,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"
