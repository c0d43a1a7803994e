"""Causal local measurements of a free scalar field.

Smeared propagators with cross-validating backends, an exact Weyl/CCR
calculus with a truncated-Fock oracle, the exactly solved pointer-coupling
measurement model (Kraus kernels, POVMs, channels, factorisation identities),
and a three-region signalling harness, behind a config-driven CLI.
"""

__version__ = "0.1.0"

from .ccr import AlgebraElement, Kinematics, QuasiFreeState, adjoint_linear, adjoint_series, expectation, weyl_product
from .fock import FockOracle, fock_oracle
from .gauss1d import GaussianExp, GridFunction1D
from .pointer import (
    GaussianProbe,
    KrausKernel,
    TabulatedProbe,
    channel_on_element,
    continuous_additivity_check,
    convolution_identity_check,
    dilation_probe_state,
    hammerstein_check,
    kraus_kernel,
    outcome_distribution,
    overlap_identity,
    povm_density,
    sharpness,
    smatrix,
)
from .propagator import (
    BilinearResult,
    FieldModel,
    KinematicData,
    QuadratureSpec,
    advanced,
    crossvalidate,
    kinematic_matrices,
    pauli_jordan,
    retarded,
    retarded_scaling_scan,
    wightman,
    wightman_sym,
)
from .sorkin import (
    LambdaFamily,
    OperationSpec,
    SorkinScenario,
    effective_kraus_scan,
    kraus_channel_scenario,
    quadratic_kraus_scenario,
    signalling_functional,
    sorkin_bump_geometry,
    sorkin_kick_geometry,
    validate_geometry,
)
from .testfn import (
    BumpFunction,
    GaussianFunction,
    SpacetimePoint,
    SupportBox,
    TestFunction,
    bump,
    causal_relation,
    gaussian,
    l1_normalized_gaussian,
)
