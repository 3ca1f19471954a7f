"""Synthetic auction book generator.

Real exchange data is not redistributable, so the backtest and the service run
on generated books. Daily curves follow the same lag structure the market
model fits (lag-8 curve feedback plus lag-2 clearing price), which makes the
generator's dynamics well specified for it; an optional pipeline-manager-like
agent injects extreme-price orders to recreate a hard-to-predict low-quantity
head region.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .books import AuctionBook, Order
from .curves import build_curves, equilibrium

__all__ = ["SynthConfig", "generate_books"]


@dataclass(frozen=True, eq=False)
class SynthConfig:
    n_days: int = 450
    seed: int = 7
    start_day: dt.date = dt.date(2019, 1, 1)
    span_qty: float = 2.0e5
    order_qty: float = 2000.0
    curve_lag: int = 8
    price_lag: int = 2
    feedback: float = 0.55  # lag-curve coefficient, inside the unit circle
    price_anchor: float = 11.7  # stationary clearing-price scale
    # Share of the systematic level driven by the lagged price; the rest is a
    # fixed base load. Pure price scaling (gain 1) leaves the price level with
    # a near-unit root, so the level is anchored with gain < 1.
    price_gain: float = 0.3
    noise_level: float = 0.5
    noise_tilt: float = 0.35
    noise_bow: float = 0.3
    pipeline_agent: bool = False
    pipeline_qty_mean: float = 12000.0
    pipeline_qty_sd: float = 4000.0
    eq_convention: str = "midpoint"
    # Quadratic base profiles (value at u=0, slope, curvature) in Euro/MWh;
    # the defaults cross near (135000 MWh, 11.7 Euro/MWh).
    offer_base: tuple[float, float, float] = (4.0, 10.0, 2.0)
    demand_base: tuple[float, float, float] = (20.0, -11.0, -2.0)


def _base_profile(coeffs, u: np.ndarray) -> np.ndarray:
    a, b, c = coeffs
    return a + b * u + c * u**2


def _noise(cfg: SynthConfig, rng: np.random.Generator, u: np.ndarray) -> np.ndarray:
    z = rng.standard_normal(3)
    return (
        cfg.noise_level * z[0]
        + cfg.noise_tilt * z[1] * u
        + cfg.noise_bow * z[2] * np.sin(np.pi * u)
    )


def _pipeline_orders(cfg: SynthConfig, rng: np.random.Generator, day: dt.date) -> list[Order]:
    def qty() -> float:
        raw = abs(rng.normal(cfg.pipeline_qty_mean, cfg.pipeline_qty_sd)) + cfg.order_qty
        return float(np.ceil(raw / cfg.order_qty) * cfg.order_qty)

    return [
        Order("offer", float(rng.uniform(0.05, 0.5)), qty(), day, operator="pipeline"),
        Order("bid", float(rng.uniform(24.0, 29.0)), qty(), day, operator="pipeline"),
    ]


def _monotone_guard(prices: np.ndarray, direction: str) -> np.ndarray:
    clipped = np.maximum(prices, 0.01)
    if direction == "increasing":
        return np.maximum.accumulate(clipped)
    return np.minimum.accumulate(clipped)


def generate_books(cfg: SynthConfig) -> list[AuctionBook]:
    """Generate consecutive daily books, clearing each day to feed the price lag."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    n_seg = int(round(cfg.span_qty / cfg.order_qty))
    u = np.arange(1, n_seg + 1) / n_seg  # segment right endpoints, normalized
    bases = {
        "offer": _base_profile(cfg.offer_base, u),
        "bid": _base_profile(cfg.demand_base, u),
    }
    beta2 = {
        side: bases[side] * (1.0 - cfg.feedback) * cfg.price_gain / cfg.price_anchor
        for side in bases
    }
    intercept = {
        side: bases[side] * (1.0 - cfg.feedback) * (1.0 - cfg.price_gain) for side in bases
    }
    init_scale = 1.0 / np.sqrt(1.0 - cfg.feedback**2)

    values: dict[str, list[np.ndarray]] = {"offer": [], "bid": []}
    prices: list[float] = []
    books: list[AuctionBook] = []
    for t in range(1, cfg.n_days + 1):
        day = cfg.start_day + dt.timedelta(days=t - 1)
        orders = []
        for side in ("offer", "bid"):
            if t <= cfg.curve_lag:
                curve = bases[side] + _noise(cfg, rng, u) * init_scale
            else:
                lag_curve = values[side][t - 1 - cfg.curve_lag]
                lag_price = prices[t - 1 - cfg.price_lag] if t > cfg.price_lag else cfg.price_anchor
                curve = (
                    cfg.feedback * lag_curve
                    + intercept[side]
                    + beta2[side] * lag_price
                    + _noise(cfg, rng, u)
                )
            direction = "increasing" if side == "offer" else "decreasing"
            curve = _monotone_guard(curve, direction)
            values[side].append(curve)
            orders.extend(
                Order(side, float(p), cfg.order_qty, day, operator=f"t{(i % 7) + 1:03d}")
                for i, p in enumerate(curve)
            )
        if cfg.pipeline_agent:
            orders.extend(_pipeline_orders(cfg, rng, day))
        book = AuctionBook(day=day, orders=tuple(orders))
        offer_curve, demand_curve = build_curves(book)
        eq = equilibrium(offer_curve, demand_curve, convention=cfg.eq_convention)
        if eq is None:
            raise RuntimeError(f"generated book for {day} has no crossing; adjust bases")
        prices.append(eq[1])
        books.append(book)
    return books
