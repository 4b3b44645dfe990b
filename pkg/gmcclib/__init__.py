""" Generalized correntropy robust adaptive filtering library. """

# ruff: noqa: F401
# flake8: noqa: F401


import logging

from .exceptions import (
    ConfigError,
    DegenerateTraceError,
    DimensionError,
    DomainError,
    PrecisionError,
    SolverError,
    UnsupportedDensityError,
)
from .filters import (
    AlgorithmSpec,
    FirFilterState,
    Regressand,
    gmcc_fixed_point,
    gmcc_nonlinearity,
    predict,
    update,
)
from .harness import (
    RunConfig,
    SystemIdSetup,
    convergence_comparison,
    emse_experiment,
    pod_experiment,
    run_single,
)
from .kernel import (
    GgdKernel,
    correntropy_estimate,
    gc_loss,
    gc_loss_gradient,
    gc_loss_hessian_diag,
    gcim,
    ggd_density,
    l_alpha_beta,
)
from .noise import (
    BinaryNoise,
    GaussianNoise,
    LaplaceNoise,
    MixtureNoise,
    SeededStream,
    UniformNoise,
    density,
    sample,
)
from .theory import TheoryInputs, empirical_step_bound, steady_state_emse

logging.getLogger(__name__).addHandler(logging.NullHandler())
