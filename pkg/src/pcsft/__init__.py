"""Quantum states, observables and channels realized on classical Gaussian random fields."""
from .exceptions import *  # noqa: F401,F403
from .fields import (
    FieldEnsemble,
    GaussianField,
    GaussianFieldSpec,
    dispersion,
    empirical_covariance,
    empirical_mean,
    sample,
)
from .filters import (
    BlockFilter,
    ChannelDecomposition,
    KrausValidation,
    LinearFilter,
    apply_filter,
    channel_decomposition,
    kraus_channel_exact,
    kraus_filter_apply,
    luders_measurement_filter,
    output_state_mc,
    projection_filter,
    pushforward_covariance,
    unitary_filter,
    validate_kraus,
)
from .linalg import (
    HermitianEig,
    adjoint,
    eig_hermitian,
    frobenius_distance,
    is_hermitian,
    is_psd,
    unitary_from_hamiltonian,
)
from .states import (
    ScalingReport,
    check_scaling_relation,
    classical_average_mc,
    covariance_from_state,
    pure_state,
    quadratic_form,
    quantum_average,
    state_from_covariance,
)

__version__ = "0.1.0"
