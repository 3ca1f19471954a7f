"""Step curves, market clearing, grid sampling, and what-if order injection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grids import Grid
from .books import AuctionBook, Order

__all__ = [
    "StepCurve",
    "MARKET_GRID",
    "build_curves",
    "equilibrium",
    "sample_step_curve",
    "inject_into_curve",
    "remove_from_curve",
]

# All curves are observed on [0, 2e5] MWh; band math uses this fixed grid.
MARKET_GRID = Grid(0.0, 2.0e5, 500)

EQ_CONVENTIONS = ("midpoint", "marginal", "overlap")


@dataclass(frozen=True, eq=False)
class StepCurve:
    """Cumulative-quantity step function: segment i spans (qty[i-1], qty[i]] at price[i].

    Evaluation is left-closed/right-open in quantity: value(q) is the price of
    the first segment whose cumulative quantity exceeds q, flat beyond the end.
    """

    qty: np.ndarray
    price: np.ndarray
    direction: str

    def __init__(self, qty, price, direction: str):
        qty = np.array(qty, dtype=float)
        price = np.array(price, dtype=float)
        if direction not in ("increasing", "decreasing"):
            raise ValueError(f"unknown direction {direction!r}")
        if qty.shape != price.shape or qty.ndim != 1 or qty.size == 0:
            raise ValueError("qty and price must be matching nonempty vectors")
        if not (np.all(qty > 0.0) and np.all(np.diff(qty) > 0.0)):
            raise ValueError("cumulative quantities must be positive and strictly increasing")
        diffs = np.diff(price)
        if direction == "increasing" and np.any(diffs < 0.0):
            raise ValueError("offer prices must be nondecreasing")
        if direction == "decreasing" and np.any(diffs > 0.0):
            raise ValueError("demand prices must be nonincreasing")
        qty.flags.writeable = False
        price.flags.writeable = False
        object.__setattr__(self, "qty", qty)
        object.__setattr__(self, "price", price)
        object.__setattr__(self, "direction", direction)

    @property
    def total_qty(self) -> float:
        return float(self.qty[-1])

    def value(self, q) -> np.ndarray | float:
        idx = np.minimum(np.searchsorted(self.qty, q, side="right"), self.qty.size - 1)
        out = self.price[idx]
        return float(out) if np.isscalar(q) else out

    def left_value(self, q: float) -> float:
        """Price just before quantity q (the value on the segment ending at q)."""
        idx = min(int(np.searchsorted(self.qty, q, side="left")), self.qty.size - 1)
        return float(self.price[idx])


def _aggregate(orders: list[Order], ascending: bool) -> tuple[np.ndarray, np.ndarray]:
    prices = np.array([o.price for o in orders])
    qtys = np.array([o.qty for o in orders])
    uniq = np.unique(prices)  # ascending; equal-price orders merge
    if not ascending:
        uniq = uniq[::-1]
    merged = np.array([qtys[prices == p].sum() for p in uniq])
    return np.cumsum(merged), uniq


def build_curves(book: AuctionBook) -> tuple[StepCurve, StepCurve]:
    """Offer and demand step curves: price-sorted cumulative quantities."""
    offers, bids = book.offers, book.bids
    if not offers or not bids:
        raise ValueError(f"book for {book.day} needs at least one order per side")
    off_qty, off_price = _aggregate(offers, ascending=True)
    dem_qty, dem_price = _aggregate(bids, ascending=False)
    return (
        StepCurve(off_qty, off_price, "increasing"),
        StepCurve(dem_qty, dem_price, "decreasing"),
    )


def equilibrium(
    offer: StepCurve, demand: StepCurve, convention: str = "midpoint"
) -> tuple[float, float] | None:
    """Clearing quantity and price, or None when the curves never cross.

    Q is the supremum of {q : demand(q) >= offer(q)}, with either curve
    treated as unavailable past its total quantity. When the curves cross
    through a vertical gap the price is convention-dependent:
      midpoint  - midpoint of [offer(Q-), demand(Q-)];
      marginal  - the marginal accepted offer price offer(Q-);
      overlap   - midpoint of the vertical overlap of the two completed
                  step graphs at Q (the prices both curves pass through).
    """
    if convention not in EQ_CONVENTIONS:
        raise ValueError(f"unknown equilibrium convention {convention!r}")
    if demand.value(0.0) < offer.value(0.0):
        return None

    def offer_at(q: float) -> float:
        return float("inf") if q >= offer.total_qty else float(offer.value(q))

    def demand_at(q: float) -> float:
        return float("-inf") if q >= demand.total_qty else float(demand.value(q))

    breakpoints = np.unique(np.concatenate([offer.qty, demand.qty]))
    cross_q = None
    for bp in breakpoints:
        if demand_at(bp) < offer_at(bp):
            cross_q = float(bp)
            break
    if cross_q is None:
        return None  # demand stays above offer over the observed range
    o_left, d_left = offer.left_value(cross_q), demand.left_value(cross_q)
    # A curve exhausted at the crossing passes through its end price only.
    o_right = o_left if cross_q >= offer.total_qty else float(offer.value(cross_q))
    d_right = d_left if cross_q >= demand.total_qty else float(demand.value(cross_q))
    if d_left == o_left:
        return cross_q, float(o_left)
    if convention == "midpoint":
        price = 0.5 * (o_left + d_left)
    elif convention == "marginal":
        price = o_left
    else:
        lo = max(o_left, d_right)
        hi = min(o_right, d_left)
        price = 0.5 * (lo + hi)
    return cross_q, float(price)


def sample_step_curve(curve: StepCurve, grid: Grid = MARKET_GRID) -> np.ndarray:
    """Evaluate on the grid with breakpoints snapped to the nearest grid point.

    Jumps then happen exactly at grid points, so the sampled sequence together
    with its one-point lags carries the full completed graph.
    """
    snapped = grid.lo + np.round((curve.qty - grid.lo) / grid.spacing) * grid.spacing
    idx = np.minimum(np.searchsorted(snapped, grid.points, side="right"), snapped.size - 1)
    return curve.price[idx]


def _insertion_index(values: np.ndarray, direction: str, price: float) -> int:
    """First grid index at which the curve meets or passes the order price."""
    if direction == "increasing":
        return int(np.searchsorted(values, price, side="left"))
    worse = values <= price
    return int(np.argmax(worse)) if worse.any() else values.size


def inject_into_curve(
    values: np.ndarray, grid: Grid, direction: str, price: float, qty: float
) -> np.ndarray:
    """Merge an extra order into a grid-sampled monotone curve at its price rank.

    Quantities at prices at-or-better than the order shift right by qty; the
    inserted stretch sits at the order price. qty = 0 returns the curve as is.
    """
    if qty < 0.0:
        raise ValueError(f"quantity must be >= 0, got {qty}")
    values = np.asarray(values, dtype=float)
    if qty == 0.0:
        return values.copy()
    points = grid.points
    ia = _insertion_index(values, direction, price)
    out = values.copy()
    if ia >= values.size:
        return out  # order is worse than the whole observed range
    a_coord = points[ia]
    shifted = points >= a_coord + qty
    window = (points >= a_coord) & ~shifted
    out[window] = price
    out[shifted] = np.interp(points[shifted] - qty, points, values)
    return out


def remove_from_curve(
    values: np.ndarray, grid: Grid, direction: str, price: float, qty: float
) -> np.ndarray:
    """Inverse shift of inject_into_curve with the same order."""
    if qty < 0.0:
        raise ValueError(f"quantity must be >= 0, got {qty}")
    values = np.asarray(values, dtype=float)
    if qty == 0.0:
        return values.copy()
    points = grid.points
    ia = _insertion_index(values, direction, price)
    out = values.copy()
    if ia >= values.size:
        return out
    tail = points >= points[ia]
    out[tail] = np.interp(points[tail] + qty, points, values)
    return out
