"""Max-plus / max-product algebra and stability of Markovian jump systems."""

from ._kernels import BACKEND
from .deterministic import (
    DetCertificate,
    find_det_certificate,
    is_exponentially_stable,
    lyapunov_from_lambda,
    max_cycle_mean,
    verify_det_certificate,
)
from .errors import (
    AlgebraMismatch,
    CertificateRejected,
    DegenerateData,
    DimensionMismatch,
    Divergent,
    Infeasible,
    MaxJumpError,
    NotFound,
    NotStochastic,
    PathExplosion,
    ZeroState,
)
from .io import load_certificate, load_system
from .markov import JumpSystem, MarkovChain, ModeSequence, sample_modes, step, transform_system, validate_chain
from .montecarlo import (
    LinearInput,
    as_bound_sensitivity,
    check_as_bound,
    estimate_bibipo_bound,
    estimate_lyapunov_exponent,
    fit_mean_norm_decay,
    simulate,
    simulate_batch,
    simulate_nonlinear_2d,
    throughput_lags,
)
from .semiring import (
    MAX_PLUS,
    MAX_PRODUCT,
    Algebra,
    Scalar,
    SemiringMatrix,
    cycle_mean,
    exp_transform,
    inf_norm,
    kleene_plus,
    log_transform,
    mat_join,
    mat_mul,
    mat_power,
)
from .stochastic import (
    Certificate,
    SearchOptions,
    brute_expectation,
    one_step_deltas,
    search_certificate,
    tilde_matrix,
    verify_k_step,
    verify_one_step,
)

__version__ = "0.1.0"
