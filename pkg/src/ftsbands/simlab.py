"""Synthetic study: curve-valued AR data, coverage/size replications, diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .conformal import (
    build_block_scheme,
    calibration_scores,
    conformal_k,
    exact_iid_coverage,
    split_indices,
)
from .grids import (
    FunctionalSample,
    Grid,
    band_size,
    modulation_from_residuals,
    weighted_sup_score,
)
from .predictors import (
    ConcurrentPredictor,
    OraclePredictor,
    VarPredictor,
    fit_concurrent,
    fit_var,
    fourier_basis,
    project_onto_basis,
    trapezoid_weights,
)
from .grids import PredictionBand

__all__ = [
    "DgpConfig",
    "StudyConfig",
    "StudyResult",
    "DiagnosticsResult",
    "SIM_GRID",
    "MODEL_ORDERS",
    "default_dgp",
    "normalized_transition",
    "sample_mvt",
    "simulate_series",
    "run_study",
    "theorem_diagnostics",
    "coverage_ci99",
]

SIM_GRID = Grid(0.0, 1.0, 100)

Z99 = 2.5758293035489004

UPSILON1 = np.array([[0.8, 0.3, 0.3], [0.3, 0.8, 0.3], [0.3, 0.3, 0.8]])
UPSILON2 = np.array([[0.5, 0.1, 0.1], [0.1, 0.5, 0.1], [0.1, 0.1, 0.5]])
SIGMA = np.array([[0.5, 0.3, 0.3], [0.3, 0.5, 0.3], [0.3, 0.3, 0.5]])

MODEL_ORDERS = {
    "oracle": 2,
    "var1": 1,
    "var2": 2,
    "var3": 3,
    "far1": 1,
    "far2": 2,
    "far3": 3,
}


def normalized_transition(upsilon: np.ndarray) -> np.ndarray:
    """Upsilon / (2 ||Upsilon||_F); the zero matrix maps to itself."""
    upsilon = np.asarray(upsilon, dtype=float)
    norm = np.linalg.norm(upsilon)
    return upsilon / (2.0 * norm) if norm > 0.0 else np.zeros_like(upsilon)


@dataclass(frozen=True, eq=False)
class DgpConfig:
    """Two-lag vector AR dynamics pushed through the fixed curve basis."""

    T: int = 100
    upsilon1: np.ndarray = field(default_factory=lambda: UPSILON1.copy())
    upsilon2: np.ndarray = field(default_factory=lambda: UPSILON2.copy())
    sigma: np.ndarray = field(default_factory=lambda: SIGMA.copy())
    df: float = 4.0
    burn_in: int = 100
    seed: int = 0

    @property
    def psi1(self) -> np.ndarray:
        return normalized_transition(self.upsilon1)

    @property
    def psi2(self) -> np.ndarray:
        return normalized_transition(self.upsilon2)

    def check_stable(self):
        psi1, psi2 = self.psi1, self.psi2
        companion = np.zeros((6, 6))
        companion[:3, :3] = psi1
        companion[:3, 3:] = psi2
        companion[3:, :3] = np.eye(3)
        moduli = np.abs(np.linalg.eigvals(companion))
        if np.max(moduli) >= 1.0:
            raise ValueError(
                "unstable transition matrices: det(I - Psi1 u - Psi2 u^2) has a root "
                f"with |u| <= 1 (max eigenvalue modulus {np.max(moduli):.6f})"
            )


def default_dgp(T: int, seed: int = 0) -> DgpConfig:
    return DgpConfig(T=T, seed=seed)


def sample_mvt(df: float, sigma: np.ndarray, rng: np.random.Generator, size=None):
    """Multivariate Student draws: Gaussian(0, sigma) scaled by sqrt(df / chi2_df).

    df = inf gives the plain Gaussian path.
    """
    sigma = np.asarray(sigma, dtype=float)
    chol = np.linalg.cholesky(sigma)
    n = 1 if size is None else int(size)
    z = rng.standard_normal((n, sigma.shape[0])) @ chol.T
    if math.isfinite(df):
        w = rng.chisquare(df, n)
        z = z * np.sqrt(df / w)[:, None]
    return z[0] if size is None else z


def simulate_series(
    cfg: DgpConfig, rng: np.random.Generator | None = None, grid: Grid = SIM_GRID
):
    """Generate T+1 curves (observations plus the next-step truth).

    Returns (curves, latent): curves is a list of single-component samples,
    latent the (T+1, 3) coefficient paths. Deterministic given cfg.seed when
    no rng is supplied.
    """
    cfg.check_stable()
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    psi1, psi2 = cfg.psi1, cfg.psi2
    n_steps = cfg.burn_in + cfg.T + 1
    sigma = np.asarray(cfg.sigma, dtype=float)
    if np.all(sigma == 0.0):
        eps = np.zeros((n_steps, 3))
    else:
        eps = sample_mvt(cfg.df, sigma, rng, size=n_steps)
    path = np.zeros((n_steps + 2, 3))  # two zero pre-samples start the recursion
    for i in range(n_steps):
        path[i + 2] = psi1 @ path[i + 1] + psi2 @ path[i] + eps[i]
    latent = path[2 + cfg.burn_in :]
    basis = fourier_basis(grid)
    values = latent @ basis
    curves = [FunctionalSample([values[i]], [grid]) for i in range(cfg.T + 1)]
    return curves, latent


@dataclass(frozen=True, eq=False)
class StudyConfig:
    """One cell of the coverage/size study."""

    model: str
    T: int
    l: int
    b: int = 1
    alpha: float = 0.25
    N: int = 1000
    seed: int = 0
    split_mode: str = "tail"
    dgp: DgpConfig = field(default_factory=DgpConfig)
    grid: Grid = SIM_GRID

    def __post_init__(self):
        if self.model not in MODEL_ORDERS:
            raise ValueError(f"unknown model {self.model!r}")
        if (self.l + 1) % self.b != 0:
            raise ValueError(f"(l+1)/b must be an integer, got l={self.l}, b={self.b}")
        n_bar = (self.l + 1) // self.b
        if not (self.b / (self.l + 1) <= self.alpha < 1.0):
            raise ValueError(
                f"alpha={self.alpha} outside [b/(l+1), 1) = [{self.b / (self.l + 1)}, 1)"
            )
        if abs(math.floor(self.alpha * n_bar) / n_bar - self.alpha) > 1e-12:
            raise ValueError(
                f"alpha={self.alpha} is not attainable exactly for (l={self.l}, b={self.b})"
            )

    @property
    def r(self) -> int:
        return MODEL_ORDERS[self.model]


@dataclass(frozen=True, eq=False)
class StudyResult:
    config: StudyConfig
    coverage: float
    ci99: tuple[float, float]
    size_quartiles: tuple[float, float, float]
    contained: np.ndarray
    sizes: np.ndarray
    ks: np.ndarray


def coverage_ci99(p_hat: float, n: int) -> tuple[float, float]:
    half = Z99 * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n)
    return (p_hat - half, p_hat + half)


def _rep_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(rep,)))


def _fit_model(cfg: StudyConfig, curves, latent, plan):
    basis = fourier_basis(cfg.grid)
    if cfg.model == "oracle":
        return OraclePredictor(
            basis=basis,
            grid=cfg.grid,
            matrices=(cfg.dgp.psi1, cfg.dgp.psi2),
            latent=latent,
        )
    r = cfg.r
    if cfg.model.startswith("var"):
        weights = trapezoid_weights(cfg.grid) * basis
        stacked = np.vstack([c.components[0] for c in curves[: cfg.T]])
        coeffs = stacked @ weights.T
        mats = fit_var(coeffs, r, rows=plan.train_idx)
        return VarPredictor(basis=basis, grid=cfg.grid, matrices=tuple(mats))
    betas = fit_concurrent(curves, r, rows=plan.train_idx)
    return ConcurrentPredictor(grid=cfg.grid, betas=betas)


def _replicate(cfg: StudyConfig, rep: int):
    rng = _rep_rng(cfg.seed, rep)
    dgp = replace(cfg.dgp, T=cfg.T)
    curves, latent = simulate_series(dgp, rng=rng, grid=cfg.grid)
    plan = split_indices(cfg.T, cfg.l, r=cfg.r, mode=cfg.split_mode, rng=rng)
    scheme = build_block_scheme(cfg.l, cfg.b)
    predictor = _fit_model(cfg, curves, latent, plan)
    residuals = [
        FunctionalSample(
            [curves[h - 1].components[0] - predictor.predict_at(h, curves).components[0]],
            [cfg.grid],
        )
        for h in plan.train_idx
    ]
    s = modulation_from_residuals(residuals)
    scores = calibration_scores(predictor, curves, plan, scheme, s)
    k = conformal_k(scores, cfg.alpha, cfg.l, cfg.b)
    center = predictor.predict_at(cfg.T + 1, curves)
    truth = curves[cfg.T]
    contained = weighted_sup_score(truth, center, s) <= k
    size = band_size(PredictionBand(center=center, modulation=s, k=k, alpha=cfg.alpha))
    return contained, size, k


def run_study(cfg: StudyConfig, threads: int = 1) -> StudyResult:
    """Replicate the band construction N times and aggregate coverage and size."""
    reps = range(cfg.N)
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_replicate_star, [(cfg, i) for i in reps], chunksize=32))
    else:
        rows = [_replicate(cfg, i) for i in reps]
    contained = np.array([r[0] for r in rows], dtype=bool)
    sizes = np.array([r[1] for r in rows])
    ks = np.array([r[2] for r in rows])
    coverage = float(np.mean(contained))
    q1, med, q3 = np.percentile(sizes, [25, 50, 75])
    return StudyResult(
        config=cfg,
        coverage=coverage,
        ci99=coverage_ci99(coverage, cfg.N),
        size_quartiles=(float(q1), float(med), float(q3)),
        contained=contained,
        sizes=sizes,
        ks=ks,
    )


def _replicate_star(args):
    return _replicate(*args)


def exact_target(cfg: StudyConfig) -> float:
    return exact_iid_coverage(cfg.l, cfg.b, cfg.alpha)


def ks_distance(sample_a: np.ndarray, sample_b: np.ndarray) -> float:
    """Exact sup difference between the two empirical distribution functions."""
    a = np.sort(sample_a)
    b = np.sort(sample_b)
    points = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, points, side="right") / len(a)
    cdf_b = np.searchsorted(b, points, side="right") / len(b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


@dataclass(frozen=True, eq=False)
class DiagnosticsResult:
    """Per-replication premise diagnostics and their medians."""

    rms_gap: np.ndarray
    next_gap: np.ndarray
    sup_gap: np.ndarray

    @property
    def median_rms_gap(self) -> float:
        return float(np.median(self.rms_gap))

    @property
    def median_next_gap(self) -> float:
        return float(np.median(self.next_gap))

    @property
    def median_sup_gap(self) -> float:
        return float(np.median(self.sup_gap))


def _scores_at(predictor, s, curves, times):
    return np.array(
        [
            weighted_sup_score(curves[t - 1], predictor.predict_at(t, curves), s)
            for t in times
        ]
    )


def theorem_diagnostics(
    cfg: StudyConfig, n_reps: int | None = None, n_oracle_draws: int = 100_000
) -> DiagnosticsResult:
    """Compare fitted scores with oracle scores over the block index set.

    Reports, per replication: the root-mean-square gap between fitted and
    oracle scores over the selected calibration slots plus the target slot,
    the target-slot gap alone, and the sup distance between the empirical
    distribution of the oracle calibration scores and an independent
    large-sample estimate of the oracle score distribution.
    """
    n_reps = cfg.N if n_reps is None else n_reps
    scheme = build_block_scheme(cfg.l, cfg.b)
    basis = fourier_basis(cfg.grid)
    rms_gap = np.empty(n_reps)
    next_gap = np.empty(n_reps)
    sup_gap = np.empty(n_reps)
    for rep in range(n_reps):
        rng = _rep_rng(cfg.seed, rep)
        dgp = replace(cfg.dgp, T=cfg.T)
        curves, latent = simulate_series(dgp, rng=rng, grid=cfg.grid)
        plan = split_indices(cfg.T, cfg.l, r=cfg.r, mode=cfg.split_mode, rng=rng)
        oracle = OraclePredictor(
            basis=basis, grid=cfg.grid, matrices=(dgp.psi1, dgp.psi2), latent=latent
        )
        fitted = _fit_model(cfg, curves, latent, plan)

        def residuals_for(predictor):
            return [
                FunctionalSample(
                    [
                        curves[h - 1].components[0]
                        - predictor.predict_at(h, curves).components[0]
                    ],
                    [cfg.grid],
                )
                for h in plan.train_idx
            ]

        s_oracle = modulation_from_residuals(residuals_for(oracle))
        s_fitted = modulation_from_residuals(residuals_for(fitted))
        times = [plan.calib_idx[d - 1] for d in sorted(scheme.calibration_d)]
        times.append(cfg.T + 1)
        r_fitted = _scores_at(fitted, s_fitted, curves, times)
        r_oracle = _scores_at(oracle, s_oracle, curves, times)
        rms_gap[rep] = math.sqrt(float(np.mean((r_fitted - r_oracle) ** 2)))
        next_gap[rep] = abs(float(r_fitted[-1] - r_oracle[-1]))
        # Fresh oracle scores: the oracle residual curve is noise pushed
        # through the basis, independent of the covariates.
        eps = sample_mvt(dgp.df, dgp.sigma, rng, size=n_oracle_draws)
        fresh = np.max(np.abs(eps @ basis) / s_oracle.values[0], axis=1)
        sup_gap[rep] = ks_distance(r_oracle, fresh)
    return DiagnosticsResult(rms_gap=rms_gap, next_gap=next_gap, sup_gap=sup_gap)
