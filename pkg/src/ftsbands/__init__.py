"""Distribution-free simultaneous prediction bands for functional time series."""

from .conformal import (
    BlockScheme,
    ScoreSet,
    SplitPlan,
    build_block_scheme,
    calibration_scores,
    conformal_k,
    exact_iid_coverage,
    p_value_oracle,
    predict_band,
    split_indices,
)
from .grids import (
    FunctionalSample,
    Grid,
    ModulationFunction,
    PredictionBand,
    ShapeError,
    band_contains,
    band_size,
    modulation_from_residuals,
    read_curves,
    weighted_sup_score,
    write_curves,
)
from .predictors import (
    fit_concurrent,
    fit_var,
    fourier_basis,
    monotone_correct,
    oracle_predictor,
    predict_var,
)
from .simlab import (
    DgpConfig,
    StudyConfig,
    StudyResult,
    run_study,
    sample_mvt,
    simulate_series,
    theorem_diagnostics,
)

__version__ = "0.1.0"
