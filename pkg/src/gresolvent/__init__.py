"""Generalized resolvents of pairs of commuting isometric operators, in finite dimensions."""

from .errors import *  # noqa: F401,F403
from .linalg import (
    INF,
    Conjugation,
    Subspace,
    cayley_transform,
    complement,
    joint_eigendecomposition,
    orthonormalize,
)
from .single import (
    PartialIsometry,
    ResolventSampler,
    SchurParameter,
    VerificationReport,
    chumakin_resolvent,
    chumakin_sampler,
    defect_subspaces,
    resolvent_from_extension,
    verify_theorem_1_2,
    verify_theorem_1_3,
)
from .pair import (
    CommutingUnitaryPair,
    H2Grid,
    H2Report,
    PairSampler,
    SpectralFunctionAtlas,
    check_h2_membership,
    check_integral_representation,
    extend_to_infinity,
    pair_resolvent,
    spectral_function,
    verify_theorem_3_1,
    verify_theorem_3_2,
)
from .moments import (
    GridOperatorMeasure,
    GridScalarMeasure,
    MomentTable,
    hermitian_symmetry_check,
    invert_grid_measure,
    kernel_function,
    moments_from_measure,
    polarize,
    power_moments,
    taylor_moments_from_sampler,
    uniqueness_witness,
)
from .dilation import (
    NaimarkDilation,
    SpectralFamilyPair,
    build_commuting_unitaries,
    build_spectral_families,
    naimark_dilate,
    operator_measure_from_sampler,
    reconstruct_and_certify,
)
from .isounitary import (
    DefectConjugationFrame,
    IsoUnitaryPair,
    build_pair_resolvent_thm41,
    build_theta,
    check_class_SVU,
    godic_lucenko_factor,
    phi_to_psi,
    psi_to_phi,
)

__version__ = "0.1.0"
