"""Kloosterman-type sums over floor-function sequences modulo a prime."""

from .errors import (
    ComputeError,
    ConfigError,
    DegenerateDecomposition,
    DomainError,
    FieldError,
    KloostlabError,
    PrecisionExhausted,
    QuadratureFailure,
    RangeError,
    ZeroInverse,
)
from .modarith import (
    Prime,
    PsiParams,
    batch_inverse,
    e_p,
    eval_psi,
    inverse_table,
    mod_inverse,
    psi_table,
)
from .sequences import (
    SequenceSpec,
    TaylorSplit,
    carry_term,
    check_shape,
    floor_f,
    floor_values,
    kappa_estimate,
    taylor_split,
)
from .sums import (
    Decomposition,
    SumRecord,
    Xi0Choice,
    admissible_N_range,
    bound_ratio,
    c_constant,
    decomposition,
    delta0_short,
    long_sum,
    range_check_2_1,
    range_check_short,
    short_sum,
    theorem_delta,
    xi0_search,
)
from .double_sums import (
    PoleVectors,
    WeightedSet,
    complete_sum_array,
    cor_eps_bound,
    double_sum_completed,
    double_sum_direct,
    holder_step_check,
    is_diagonal,
    lemma31_bound,
    prop42_bound,
    rational_sum,
    rational_sums,
    weil_threshold,
)
from .distribution import (
    ERDOS_TURAN_CONSTANT,
    ExistenceResult,
    InverseCountResult,
    ResidueInterval,
    count_inverses,
    erdos_turan_bound,
    existence_search,
    existence_xi,
    inverse_points,
    main_term,
    star_discrepancy,
)

__version__ = "0.1.0"
