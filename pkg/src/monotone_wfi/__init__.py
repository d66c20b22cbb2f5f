"""Monotone binary regression: NPMLE, weak-impact limit laws, MC harness."""

from .estimator import (
    ConvexMinorant,
    CusumDiagram,
    StepEstimate,
    cusum_diagram,
    greatest_convex_minorant,
    inverse_process,
    left_derivative,
    log_likelihood,
    npmle_fit,
    pava_fit,
    switch_check,
)
from .limits import (
    DEFAULT_TWO_SIDED_GRID,
    DEFAULT_UNIT_GRID,
    LimitBatch,
    PathGrid,
    brownian_path,
    chernoff_abs_mean,
    chernoff_cov_integral,
    chernoff_sample,
    l1_fast_limit_sample,
    mu_n,
    sample_limit_batch,
    scaled_chernoff_constant,
    sigma_sq,
    slow_limit_sample,
)
from .metrics import QuadratureCfg, hellinger, ks_two_sample, l1_error, sup_norm_on
from .model import (
    FeatureLaw,
    HypothesisCube,
    HypothesisPair,
    LinkSpec,
    Sample,
    Scenario,
    build_assouad_cube,
    build_pointwise_hypotheses,
    feature_eval,
    in_slope_band,
    link_derivative,
    link_eval,
    phi_n,
    sample_dataset,
)
from .streams import stream

__version__ = "0.1.0"
