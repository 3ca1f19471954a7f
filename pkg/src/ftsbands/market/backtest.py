"""Rolling-window band construction and evaluation over daily auction books."""

from __future__ import annotations

import datetime as dt
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ..conformal import build_block_scheme, calibration_scores, conformal_k, split_indices
from ..grids import FunctionalSample, Grid, modulation_from_residuals, weighted_sup_score
from ..predictors import fit_market
from .bands import (
    PredictionRegion,
    TightBounds,
    completed_step_in_band,
    grid_crossing,
    step_in_band,
    tighten_band,
)
from .books import AuctionBook
from .curves import MARKET_GRID, build_curves, equilibrium, sample_step_curve

__all__ = [
    "BacktestConfig",
    "DayBand",
    "DayResult",
    "BacktestReport",
    "book_sample",
    "book_prices",
    "day_band",
    "evaluate_day",
    "rolling_backtest",
]

DIRECTIONS = ("increasing", "decreasing")  # offer, demand


@dataclass(frozen=True, eq=False)
class BacktestConfig:
    window: int = 90
    l: int = 39
    b: int = 1
    alpha: float = 0.25
    curve_lag: int = 8
    price_lag: int = 2
    grid: Grid = MARKET_GRID
    size_ranges: tuple[tuple[float, float], ...] = ((0.0, 25000.0),)
    eq_convention: str = "midpoint"

    def __post_init__(self):
        if (self.l + 1) % self.b != 0:
            raise ValueError(f"(l+1)/b must be an integer, got l={self.l}, b={self.b}")
        if not (self.b / (self.l + 1) <= self.alpha < 1.0):
            raise ValueError(
                f"alpha={self.alpha} outside [b/(l+1), 1) = [{self.b / (self.l + 1)}, 1)"
            )
        if self.window - self.l - self.curve_lag < 1:
            raise ValueError(
                f"window {self.window} leaves no training days with l={self.l}, "
                f"curve lag {self.curve_lag}"
            )


def book_sample(book: AuctionBook, grid: Grid) -> FunctionalSample:
    """Offer and demand curves sampled on the shared grid as one p=2 observation."""
    offer_curve, demand_curve = build_curves(book)
    return FunctionalSample(
        [sample_step_curve(offer_curve, grid), sample_step_curve(demand_curve, grid)],
        [grid, grid],
    )


def book_prices(books, convention: str) -> np.ndarray:
    prices = np.empty(len(books))
    for i, book in enumerate(books):
        eq = equilibrium(*build_curves(book), convention=convention)
        if eq is None:
            raise ValueError(f"book for {book.day} has no equilibrium; cannot build price lags")
        prices[i] = eq[1]
    return prices


@dataclass(frozen=True, eq=False)
class DayBand:
    """Fitted band artifacts for one target day."""

    day: dt.date
    alpha: float
    l: int
    b: int
    k: float
    grid: Grid
    center: FunctionalSample
    modulation: object
    offer_bounds: TightBounds
    demand_bounds: TightBounds

    def region(self) -> PredictionRegion:
        return PredictionRegion.from_bounds(self.offer_bounds, self.demand_bounds, self.grid)


def day_band(window_books: list[AuctionBook], target_day: dt.date, cfg: BacktestConfig) -> DayBand:
    """Fit the market model on the window and build the tightened band for the next day."""
    T = cfg.window
    if len(window_books) != T:
        raise ValueError(f"expected a window of {T} books, got {len(window_books)}")
    series = [book_sample(b, cfg.grid) for b in window_books]
    prices = book_prices(window_books, cfg.eq_convention)
    return _day_band_from_series(series, prices, target_day, cfg)


def _day_band_from_series(
    series: list[FunctionalSample], prices: np.ndarray, target_day: dt.date, cfg: BacktestConfig
) -> DayBand:
    T = cfg.window
    plan = split_indices(T, cfg.l, r=cfg.curve_lag)
    scheme = build_block_scheme(cfg.l, cfg.b)
    predictor = fit_market(
        series,
        prices,
        rows=plan.train_idx,
        directions=DIRECTIONS,
        curve_lag=cfg.curve_lag,
        price_lag=cfg.price_lag,
    )
    residuals = []
    for h in plan.train_idx:
        pred = predictor.predict_at(h, series)
        residuals.append(
            FunctionalSample(
                [series[h - 1].components[j] - pred.components[j] for j in range(2)],
                [cfg.grid, cfg.grid],
            )
        )
    s = modulation_from_residuals(residuals)
    scores = calibration_scores(predictor, series, plan, scheme, s)
    k = conformal_k(scores, cfg.alpha, cfg.l, cfg.b)
    if math.isinf(k):
        raise ValueError(f"alpha={cfg.alpha} below b/(l+1); band is the entire space")
    center = predictor.predict_at(T + 1, series)
    bounds = []
    for j, direction in enumerate(DIRECTIONS):
        lower = center.components[j] - k * s.values[j]
        upper = center.components[j] + k * s.values[j]
        bounds.append(tighten_band(lower, upper, direction))
    return DayBand(
        day=target_day,
        alpha=cfg.alpha,
        l=cfg.l,
        b=cfg.b,
        k=k,
        grid=cfg.grid,
        center=center,
        modulation=s,
        offer_bounds=bounds[0],
        demand_bounds=bounds[1],
    )


@dataclass(frozen=True, eq=False)
class DayResult:
    day: dt.date
    k: float
    contained_band: bool
    contained_band_strict: bool
    q_obs: float | None
    p_obs: float | None
    contained_region: bool
    crossing_q: float | None
    crossing_p: float | None
    contained_region_strict: bool
    region_empty: bool
    size_offer: float
    size_demand: float
    range_sizes: tuple[tuple[float, float], ...]  # (offer, demand) per configured range


def _range_size(k: float, s_vals: np.ndarray, grid: Grid, lo: float, hi: float) -> float:
    pts = grid.points
    inside = (pts >= lo) & (pts <= hi)
    if inside.sum() < 2:
        return 0.0
    return float(np.trapezoid(2.0 * k * s_vals[inside], dx=grid.spacing))


def evaluate_day(
    band: DayBand,
    target_book: AuctionBook,
    cfg: BacktestConfig,
    sample: FunctionalSample | None = None,
) -> DayResult:
    if sample is None:
        sample = book_sample(target_book, cfg.grid)
    score = weighted_sup_score(sample, band.center, band.modulation)
    contained = score <= band.k
    strict = completed_step_in_band(
        sample.components[0], band.offer_bounds.lower, band.offer_bounds.upper
    ) and completed_step_in_band(
        sample.components[1], band.demand_bounds.lower, band.demand_bounds.upper
    )
    # Tightening keeps every monotone in-band curve, so strict containment
    # implies the plain conformal event.
    region = band.region()
    eq = equilibrium(*build_curves(target_book), convention=cfg.eq_convention)
    q_obs, p_obs = eq if eq is not None else (None, None)
    contained_region = eq is not None and region.contains(q_obs, p_obs)
    crossing = grid_crossing(sample.components[0], sample.components[1], cfg.grid)
    crossing_q, crossing_p = crossing if crossing is not None else (None, None)
    contained_region_strict = crossing is not None and region.contains(crossing_q, crossing_p)
    grid = cfg.grid
    full = (grid.lo, grid.hi)
    size_offer = _range_size(band.k, band.modulation.values[0], grid, *full)
    size_demand = _range_size(band.k, band.modulation.values[1], grid, *full)
    range_sizes = tuple(
        (
            _range_size(band.k, band.modulation.values[0], grid, lo, hi),
            _range_size(band.k, band.modulation.values[1], grid, lo, hi),
        )
        for lo, hi in cfg.size_ranges
    )
    return DayResult(
        day=band.day,
        k=band.k,
        contained_band=bool(contained),
        contained_band_strict=bool(strict),
        q_obs=q_obs,
        p_obs=p_obs,
        contained_region=bool(contained_region),
        crossing_q=crossing_q,
        crossing_p=crossing_p,
        contained_region_strict=bool(contained_region_strict),
        region_empty=region.is_empty,
        size_offer=size_offer,
        size_demand=size_demand,
        range_sizes=range_sizes,
    )


@dataclass(frozen=True, eq=False)
class BacktestReport:
    config: BacktestConfig
    days: tuple[DayResult, ...]

    def rate(self, attr: str) -> float:
        return float(np.mean([getattr(d, attr) for d in self.days]))

    def summary(self) -> dict:
        return {
            "n_days": len(self.days),
            "band_containment": self.rate("contained_band"),
            "band_containment_strict": self.rate("contained_band_strict"),
            "region_containment": self.rate("contained_region"),
            "region_containment_strict": self.rate("contained_region_strict"),
            "median_k": float(np.median([d.k for d in self.days])),
            "median_size_offer": float(np.median([d.size_offer for d in self.days])),
            "median_size_demand": float(np.median([d.size_demand for d in self.days])),
        }

    def to_csv(self) -> str:
        out = io.StringIO()
        range_cols = []
        for lo, hi in self.config.size_ranges:
            tag = f"{lo:g}_{hi:g}"
            range_cols += [f"size_offer_{tag}", f"size_demand_{tag}"]
        header = [
            "date",
            "k",
            "band_size_offer",
            "band_size_demand",
            "contained_band",
            "contained_band_strict",
            "contained_region",
            "contained_region_strict",
            "region_empty",
            "Q",
            "P",
        ] + range_cols
        out.write(",".join(header) + "\n")
        for d in self.days:
            row = [
                d.day.isoformat(),
                f"{d.k:.9g}",
                f"{d.size_offer:.9g}",
                f"{d.size_demand:.9g}",
                str(int(d.contained_band)),
                str(int(d.contained_band_strict)),
                str(int(d.contained_region)),
                str(int(d.contained_region_strict)),
                str(int(d.region_empty)),
                "" if d.q_obs is None else f"{d.q_obs:.9g}",
                "" if d.p_obs is None else f"{d.p_obs:.9g}",
            ]
            for off_sz, dem_sz in d.range_sizes:
                row += [f"{off_sz:.9g}", f"{dem_sz:.9g}"]
            out.write(",".join(row) + "\n")
        summary = self.summary()
        for key in sorted(summary):
            out.write(f"# summary {key}={summary[key]:.9g}\n")
        return out.getvalue()


def check_consecutive(books: list[AuctionBook]):
    gaps = []
    for prev, cur in zip(books, books[1:]):
        if (cur.day - prev.day).days != 1:
            gaps.append(f"{prev.day} -> {cur.day}")
    if gaps:
        raise ValueError(f"books are not consecutive; gaps at: {', '.join(gaps)}")


def rolling_backtest(books: list[AuctionBook], cfg: BacktestConfig | None = None) -> BacktestReport:
    """Fit, band, and score every day that has a full trailing window."""
    cfg = cfg or BacktestConfig()
    books = sorted(books, key=lambda b: b.day)
    if len(books) < cfg.window + 1:
        raise ValueError(f"need at least {cfg.window + 1} consecutive books, got {len(books)}")
    check_consecutive(books)
    samples = [book_sample(b, cfg.grid) for b in books]
    prices = book_prices(books, cfg.eq_convention)
    results = []
    for i in range(cfg.window, len(books)):
        band = _day_band_from_series(
            samples[i - cfg.window : i], prices[i - cfg.window : i], books[i].day, cfg
        )
        results.append(evaluate_day(band, books[i], cfg, sample=samples[i]))
    return BacktestReport(config=cfg, days=tuple(results))
