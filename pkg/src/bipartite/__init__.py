"""Structure and correlation analysis of finite-dimensional bipartite states."""
from ._kernels import BACKEND, available_backends
from .classify import ClassificationReport, classify
from .criteria import (
    eigenspace_decomposition,
    is_cq,
    is_ppt,
    is_product,
    is_qc,
    is_zero_min_a,
    is_zero_min_b,
    marginal_commutes_a,
    marginal_commutes_b,
)
from .errors import BipartiteError, NumericalError, ValidationError
from .linalg import herm_eig, pseudo_inverse, psd_sqrt, simultaneous_diagonalize
from .measures import (
    Measurement,
    MeasureResult,
    apply_measurement_a,
    apply_measurement_b,
    discord_a,
    discord_b,
    gmqd_a,
    gmqd_b,
    min_a,
    min_b,
    min_pure,
    mutual_information,
    von_neumann_entropy,
)
from .sppt import (
    SeparableEnsemble,
    block_cholesky,
    corollary1_separability,
    extract_separable_ensemble,
    is_sppt,
    is_ssppt,
    lemma1_normalize,
)
from .states import (
    BipartiteState,
    PureState,
    bell_state,
    load_state,
    make_circulant,
    make_cq,
    make_example1,
    make_example3,
    make_product,
    make_pure_schmidt,
    make_qc,
    new_bipartite,
    partial_trace_a,
    partial_trace_b,
    partial_transpose_a,
    partial_transpose_b,
    random_state,
    save_state,
    ssppt_random,
    swap_parties,
    werner,
)

__version__ = "0.1.0"
