"""krylreg: matrix-free Krylov-subspace general-form regularization.

Inner-outer hybrid solvers (hyb-CGME, hyb-TCGME) for discrete ill-posed
problems ``min |A x - b|`` regularized by minimizing a seminorm
``|L x|``, together with the Golub-Kahan machinery, a matrix-free LSQR,
classic test-problem generators, and an experiment harness.
"""

from .bidiag import (
    BidiagMatrices,
    BidiagState,
    GolubKahanBreakdown,
    bidiag_extend,
    bidiag_init,
    extract_matrices,
)
from .dense_kernels import (
    IllConditionedTruncation,
    SmallSVD,
    TruncatedFactor,
    bidiag_solve,
    svd_small,
    truncated_pinv_apply,
)
from .harness import (
    ExperimentSpec,
    RunRecord,
    RunRow,
    emit_csv,
    emit_json,
    emit_summary_csv,
    run_experiment,
    verification_suite,
)
from .hybrid import (
    METHODS,
    HybridConfig,
    HybridIterate,
    SweepResult,
    hyb_cgme_step,
    hyb_tcgme_step,
    inner_solve,
    run_hybrid,
)
from .lsqr import LsqrConfig, LsqrReport, NumericalFailure, lsqr_solve, operator_norm_estimate
from .metrics import ErrorCurve, GammaGapReport, analyze_curve, gamma_gaps, projected_condition, relative_error
from .operators import (
    DenseOperator,
    DimensionMismatch,
    FirstDifferenceOperator,
    IdentityOperator,
    KroneckerBlurOperator,
    LinearOperator,
    OperatorShape,
    OrthonormalityError,
    ProjectedOperator,
    Stacked2DDifferenceOperator,
    project_complement,
)
from .problems import (
    L_KINDS,
    PROBLEM_NAMES,
    ProblemInstance,
    add_noise,
    build_problem,
    gen_baart,
    gen_blur2d,
    gen_deriv2,
    gen_heat,
    gen_shaw,
    load_problem,
    make_L,
    problem_digest,
    save_problem,
)
from .solvers import KrylovIterate, cgme_iterate, tcgme_iterate

__version__ = "0.1.0"
