"""circle-lab: exponential sums, arc systems, discrete Fourier multipliers,
and variational seminorms at desk scale."""

from .arcs import (
    ArcSystem,
    ClassifyResult,
    DyadicScale,
    ReducedFraction,
    TorusIntervalSet,
    TorusPoint,
    canonical_fractions,
    classify,
    dyadic_arcs,
    dyadic_shell,
    minor_sample,
    torus_distance,
    wrap_signed,
)
from .ergodic_lab import (
    AverageSeries,
    DiscrepancyReport,
    FiniteSystem,
    average_series,
    convergence_diagnostic,
    discrepancy,
    mean_ergodic_check,
    star_discrepancy,
    uniform_average,
    vdc_correlation,
)
from .expsums import (
    DecayScanReport,
    Lemma1Result,
    QuadratureSpec,
    complete_sum,
    continuous_multiplier,
    lemma1_grid_sweep,
    lemma1_residual,
    minor_sup_grid,
    shell_index,
    weyl_decay_scan,
    weyl_multiplier_grid,
    weyl_sum,
)
from .multipliers import (
    MultiplierOp,
    PipelineConfig,
    approx_average_op,
    arc_split,
    eta,
    eta_at_scale,
    factorization_gap,
    identity_op,
    kernel_l1_bound,
    l2_operator_norm,
    lp_norm_probe,
    multiplier_apply,
    project,
    project_dyadic,
    projection_op,
    projection_property_report,
    projection_symbol,
    shell_vanishing_overlap,
)
from .polyavg import (
    IndexRange,
    IntPolynomial,
    RieszSplit,
    Signal,
    aliasing_safe_modulus,
    average_bilinear,
    average_linear,
    eval_poly,
    grid_frequencies,
    kernel,
    maximal_function,
    riesz_split,
    signal_from_spectrum,
    spectrum,
)
from .seminorms import (
    DyadicMartingale,
    LacunarySet,
    RealSequence,
    SeminormReport,
    jump_count,
    lacunary,
    lepingle_stat,
    martingale,
    oscillation,
    variation,
    variation_values,
)

__version__ = "0.1.0"
