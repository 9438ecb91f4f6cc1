"""Hyperbolic-cross truncation of de la Vallée Poussin block sums.

Block kernels, step hyperbolic crosses, certified norms, a DFT grid path and
rate experiments for extremal functions of mixed-smoothness classes.
"""

from hypcross.blocksum import BlockSum, evaluate, project_cross, surrogate_besov_norm
from hypcross.cross import CrossSpec, cross_size, enumerate_cross, enumerate_layer, lacunary_tail_sum
from hypcross.errors import (
    DomainError,
    NumericalConsistencyError,
    NyquistError,
    ToleranceError,
    ValidationError,
)
from hypcross.extremal import ExtremalSpec, make_extremal
from hypcross.gridpath import (
    SampledGrid,
    delta_star,
    littlewood_paley_check,
    project_sharp,
    sample,
    vp_block,
)
from hypcross.kernels import (
    block_contains,
    block_multiplier,
    block_sup,
    eval_A_star,
    factor_multiplier,
    multiplier_k,
)
from hypcross.norms import (
    QuadratureSpec,
    block_lp_norm,
    block_norm,
    l2_norm_exact,
    lq_norm,
    nikolskii_check,
    sup_norm,
)
from hypcross.rates import (
    RateReport,
    fit_rate,
    predicted_rate,
    run_theorem1,
    run_theorem2,
    verify_lacunary_sum,
    verify_lemma_brackets,
)
from hypcross.smoothness import SmoothnessProfile, analyze_smoothness, gamma_bar

__version__ = "0.1.0"
