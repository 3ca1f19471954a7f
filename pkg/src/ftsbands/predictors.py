"""Point predictors used inside the conformal wrapper.

Four kinds: a known-dynamics oracle, VAR(r) on basis coefficients, concurrent
function-on-function AR(r), and the auction-market model with a lagged curve
plus a lagged scalar price. All follow one calling convention:
predict_at(t, series) returns the point prediction for time t using covariates
dated strictly before t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import FunctionalSample, Grid

__all__ = [
    "fourier_basis",
    "trapezoid_weights",
    "project_onto_basis",
    "fit_var",
    "predict_var",
    "fit_concurrent",
    "monotone_correct",
    "oracle_predictor",
    "OraclePredictor",
    "VarPredictor",
    "ConcurrentPredictor",
    "MarketPredictor",
]


def fourier_basis(grid: Grid) -> np.ndarray:
    """Constant/sine/cosine basis, orthonormal in L2 on [lo, hi]; shape (3, n)."""
    q = (grid.points - grid.lo) / (grid.hi - grid.lo)
    return np.vstack(
        [
            np.ones_like(q),
            np.sin(2.0 * np.pi * q) / np.sqrt(0.5),
            np.cos(2.0 * np.pi * q) / np.sqrt(0.5),
        ]
    ) / np.sqrt(grid.hi - grid.lo)


def trapezoid_weights(grid: Grid) -> np.ndarray:
    w = np.full(grid.n, grid.spacing)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def project_onto_basis(curve: np.ndarray, basis: np.ndarray, grid: Grid) -> np.ndarray:
    """Trapezoidal inner products of one curve with each basis function."""
    return (basis * trapezoid_weights(grid)) @ curve


def fit_var(coeff_series: np.ndarray, r: int, rows=None, intercept: bool = False):
    """Least-squares VAR(r) on coefficient vectors.

    coeff_series has one row per time 1..N; rows selects the target times
    (default: all times with full lag history). Returns [Psi_1, ..., Psi_r],
    or (matrices, intercept_vector) when an intercept is requested; the
    synthetic dynamics are mean-zero so none is fitted by default.
    """
    y = np.asarray(coeff_series, dtype=float)
    n_times, dim = y.shape
    if rows is None:
        rows = range(r + 1, n_times + 1)
    rows = list(rows)
    if len(rows) < r + 1:
        raise ValueError(f"need at least {r + 1} usable observations, got {len(rows)}")
    X = np.hstack([np.vstack([y[t - 1 - lag] for t in rows]) for lag in range(1, r + 1)])
    if intercept:
        X = np.hstack([X, np.ones((len(rows), 1))])
    Y = np.vstack([y[t - 1] for t in rows])
    rank = np.linalg.matrix_rank(X)
    if rank < X.shape[1]:
        raise ValueError(
            f"rank-deficient VAR design: {X.shape[1] - rank} deficient column(s)"
        )
    B, *_ = np.linalg.lstsq(X, Y, rcond=None)
    mats = [B[dim * i : dim * (i + 1)].T for i in range(r)]
    if intercept:
        return mats, B[-1]
    return mats


def predict_var(matrices, lag_vectors, basis: np.ndarray) -> np.ndarray:
    """Curve values of g'(q) . sum_i Psi_i y_lag_i."""
    if len(lag_vectors) != len(matrices):
        raise ValueError(f"need {len(matrices)} lag vectors, got {len(lag_vectors)}")
    vec = sum(Psi @ np.asarray(v, dtype=float) for Psi, v in zip(matrices, lag_vectors))
    return vec @ basis


def _pointwise_ols(targets: np.ndarray, regressors: np.ndarray, grid: Grid) -> np.ndarray:
    """Independent OLS at each grid point.

    targets: (rows, n); regressors: (rows, n_reg, n). Returns (n_reg, n).
    """
    n_rows, n_reg, n = regressors.shape
    if n_rows < n_reg:
        raise ValueError(f"need at least {n_reg} training rows per grid point, got {n_rows}")
    # Normal equations batched over grid points: G[q] = X_q' X_q, c[q] = X_q' y_q.
    G = np.einsum("tiq,tjq->qij", regressors, regressors)
    c = np.einsum("tiq,tq->qi", regressors, targets)
    dets = np.linalg.det(G)
    scale = np.einsum("qii->q", G) / n_reg  # mean diagonal, sets the degeneracy scale
    bad = np.abs(dets) <= 1e-12 * np.maximum(scale, 1e-300) ** n_reg
    if np.any(bad):
        q_bad = grid.points[int(np.argmax(bad))]
        raise ValueError(f"collinear regressors at grid point q={q_bad:g}")
    beta = np.linalg.solve(G, c[..., None])[..., 0]  # (n, n_reg)
    return beta.T


def fit_concurrent(
    series: list[FunctionalSample],
    r: int,
    rows=None,
    component: int = 0,
    intercept: bool = False,
) -> np.ndarray:
    """Concurrent AR(r) fit by pointwise OLS.

    Returns betas of shape (r, n), or (r+1, n) with the intercept curve last
    when one is requested.
    """
    grid = series[0].grids[component]
    n_times = len(series)
    if rows is None:
        rows = range(r + 1, n_times + 1)
    rows = list(rows)
    targets = np.vstack([series[t - 1].components[component] for t in rows])
    regressors = np.stack(
        [
            np.stack(
                [series[t - 1 - lag].components[component] for lag in range(1, r + 1)]
                + ([np.ones(grid.n)] if intercept else [])
            )
            for t in rows
        ]
    )
    return _pointwise_ols(targets, regressors, grid)


def monotone_correct(values: np.ndarray, direction: str = "increasing") -> np.ndarray:
    """Monotone rectification of a curve on an equispaced grid.

    Points sitting at their running extremum are kept; any excursion below it
    is replaced by the chord from the last extremum point to the first point
    at which the curve climbs back to that level, or held flat when it never
    does before the right edge. Idempotent.
    """
    y = np.asarray(values, dtype=float)
    if direction == "decreasing":
        return -monotone_correct(-y, "increasing")
    if direction != "increasing":
        raise ValueError(f"unknown direction {direction!r}")
    # A point survives iff it attains the running max; between consecutive
    # survivors the definition collapses to the chord joining them (the left
    # survivor is the last argmax, the right one the first return to that
    # level), and past the last survivor the curve extends flat.
    anchors = np.flatnonzero(y >= np.maximum.accumulate(y))
    return np.interp(np.arange(y.shape[0]), anchors, y[anchors])


@dataclass(frozen=True)
class OraclePredictor:
    """Known basis and transition matrices; lags read from the latent vectors."""

    basis: np.ndarray
    grid: Grid
    matrices: tuple[np.ndarray, ...]
    latent: np.ndarray  # (n_times, 3), row t-1 holds the time-t coefficient vector

    kind = "oracle"

    @property
    def r(self) -> int:
        return len(self.matrices)

    def predict_at(self, t: int, series) -> FunctionalSample:
        if t - 1 - self.r < 0:
            raise ValueError(f"insufficient lags to predict at t={t}")
        lags = [self.latent[t - 1 - lag] for lag in range(1, self.r + 1)]
        return FunctionalSample([predict_var(self.matrices, lags, self.basis)], [self.grid])


def oracle_predictor(basis, grid, psi1, psi2, latent) -> OraclePredictor:
    return OraclePredictor(
        basis=np.asarray(basis, dtype=float),
        grid=grid,
        matrices=(np.asarray(psi1, dtype=float), np.asarray(psi2, dtype=float)),
        latent=np.asarray(latent, dtype=float),
    )


@dataclass(frozen=True)
class VarPredictor:
    """Fitted VAR(r) on basis coefficients; lags projected from observed curves."""

    basis: np.ndarray
    grid: Grid
    matrices: tuple[np.ndarray, ...]

    kind = "var"

    @property
    def r(self) -> int:
        return len(self.matrices)

    def predict_at(self, t: int, series) -> FunctionalSample:
        if t - 1 - self.r < 0:
            raise ValueError(f"insufficient lags to predict at t={t}")
        lags = [
            project_onto_basis(series[t - 1 - lag].components[0], self.basis, self.grid)
            for lag in range(1, self.r + 1)
        ]
        return FunctionalSample([predict_var(self.matrices, lags, self.basis)], [self.grid])


@dataclass(frozen=True)
class ConcurrentPredictor:
    """Concurrent function-on-function AR(r), one coefficient curve per lag."""

    grid: Grid
    betas: np.ndarray  # (r, n)

    kind = "far"

    @property
    def r(self) -> int:
        return self.betas.shape[0]

    def predict_at(self, t: int, series) -> FunctionalSample:
        if t - 1 - self.r < 0:
            raise ValueError(f"insufficient lags to predict at t={t}")
        pred = np.zeros(self.grid.n)
        for lag in range(1, self.r + 1):
            pred += self.betas[lag - 1] * series[t - 1 - lag].components[0]
        return FunctionalSample([pred], [self.grid])


@dataclass(frozen=True)
class MarketPredictor:
    """Concurrent model for auction curves: lagged curve plus lagged scalar price.

    Component j of the prediction for day t is
    beta1_j(q) * y_{t-curve_lag, j}(q) + beta2_j(q) * price_{t-price_lag},
    monotone-rectified per component direction.
    """

    grid: Grid
    beta1: np.ndarray  # (p, n)
    beta2: np.ndarray  # (p, n)
    prices: np.ndarray  # row t-1 holds the day-t clearing price
    directions: tuple[str, ...]
    curve_lag: int = 8
    price_lag: int = 2

    kind = "market"

    @property
    def p(self) -> int:
        return self.beta1.shape[0]

    def predict_at(self, t: int, series) -> FunctionalSample:
        if t - 1 - self.curve_lag < 0 or t - 1 - self.price_lag < 0:
            raise ValueError(f"insufficient lags to predict at t={t}")
        lag_sample = series[t - 1 - self.curve_lag]
        price = self.prices[t - 1 - self.price_lag]
        comps = []
        for j in range(self.p):
            raw = self.beta1[j] * lag_sample.components[j] + self.beta2[j] * price
            comps.append(monotone_correct(raw, self.directions[j]))
        return FunctionalSample(comps, [self.grid] * self.p)


def fit_market(
    series: list[FunctionalSample],
    prices: np.ndarray,
    rows,
    directions: tuple[str, ...],
    curve_lag: int = 8,
    price_lag: int = 2,
) -> MarketPredictor:
    """Pointwise OLS per component with regressors (lagged curve, lagged price)."""
    grid = series[0].grids[0]
    prices = np.asarray(prices, dtype=float)
    rows = list(rows)
    p = series[0].p
    beta1 = np.empty((p, grid.n))
    beta2 = np.empty((p, grid.n))
    for j in range(p):
        targets = np.vstack([series[t - 1].components[j] for t in rows])
        regressors = np.stack(
            [
                np.stack(
                    [
                        series[t - 1 - curve_lag].components[j],
                        np.full(grid.n, prices[t - 1 - price_lag]),
                    ]
                )
                for t in rows
            ]
        )
        betas = _pointwise_ols(targets, regressors, grid)
        beta1[j], beta2[j] = betas[0], betas[1]
    return MarketPredictor(
        grid=grid,
        beta1=beta1,
        beta2=beta2,
        prices=prices,
        directions=tuple(directions),
        curve_lag=curve_lag,
        price_lag=price_lag,
    )


def predictor_to_text(predictor) -> str:
    """Columnar serialization with a one-line kind/order header."""
    if predictor.kind == "var":
        lines = [f"predictor var {predictor.r}"]
        for Psi in predictor.matrices:
            for row in Psi:
                lines.append(" ".join(f"{v:.17g}" for v in row))
        return "\n".join(lines) + "\n"
    if predictor.kind == "far":
        g = predictor.grid
        lines = [f"predictor far {predictor.r}", f"grid {g.lo:.17g} {g.hi:.17g} {g.n} {predictor.r}"]
        pts = g.points
        for i in range(g.n):
            row = [f"{pts[i]:.17g}"] + [f"{predictor.betas[j, i]:.17g}" for j in range(predictor.r)]
            lines.append(" ".join(row))
        return "\n".join(lines) + "\n"
    if predictor.kind == "market":
        g = predictor.grid
        p = predictor.p
        dirs = ",".join(predictor.directions)
        lines = [
            f"predictor market {predictor.curve_lag} {predictor.price_lag} {dirs}",
            f"grid {g.lo:.17g} {g.hi:.17g} {g.n} {2 * p}",
        ]
        pts = g.points
        for i in range(g.n):
            row = [f"{pts[i]:.17g}"]
            for j in range(p):
                row += [f"{predictor.beta1[j, i]:.17g}", f"{predictor.beta2[j, i]:.17g}"]
            lines.append(" ".join(row))
        return "\n".join(lines) + "\n"
    raise ValueError(f"serialization not supported for kind {predictor.kind!r}")


def predictor_from_text(text: str, basis=None, grid: Grid | None = None, prices=None):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    tag, kind = head[0], head[1]
    if tag != "predictor":
        raise ValueError(f"bad predictor header: {lines[0]!r}")
    if kind == "market":
        curve_lag, price_lag = int(head[2]), int(head[3])
        directions = tuple(head[4].split(","))
        _, lo, hi, n, twop = lines[1].split()
        g = Grid(float(lo), float(hi), int(n))
        data = np.array([[float(tok) for tok in ln.split()] for ln in lines[2:]])
        p = int(twop) // 2
        beta1 = data[:, 1 : 2 * p + 1 : 2].T.copy()
        beta2 = data[:, 2 : 2 * p + 1 : 2].T.copy()
        if prices is None:
            raise ValueError("market predictor needs the price series to rebuild")
        return MarketPredictor(
            grid=g,
            beta1=beta1,
            beta2=beta2,
            prices=np.asarray(prices, dtype=float),
            directions=directions,
            curve_lag=curve_lag,
            price_lag=price_lag,
        )
    r = int(head[2])
    if kind == "var":
        values = [float(tok) for ln in lines[1:] for tok in ln.split()]
        dim = int(round((len(values) / r) ** 0.5))
        mats = np.array(values).reshape(r, dim, dim)
        if basis is None or grid is None:
            raise ValueError("var predictor needs basis and grid to rebuild")
        return VarPredictor(basis=np.asarray(basis), grid=grid, matrices=tuple(mats))
    if kind == "far":
        _, lo, hi, n, p = lines[1].split()
        g = Grid(float(lo), float(hi), int(n))
        data = np.array([[float(tok) for tok in ln.split()] for ln in lines[2:]])
        return ConcurrentPredictor(grid=g, betas=data[:, 1:].T.copy())
    raise ValueError(f"unknown predictor kind {kind!r}")
