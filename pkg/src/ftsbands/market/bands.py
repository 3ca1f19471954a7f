"""Band tightening under monotonicity and the clearing-point prediction region."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grids import Grid

__all__ = [
    "TightBounds",
    "PredictionRegion",
    "tighten_band",
    "step_in_band",
    "completed_step_in_band",
    "grid_crossing",
]


@dataclass(frozen=True, eq=False)
class TightBounds:
    """Pointwise bounds after removing parts no monotone curve can reach."""

    lower: np.ndarray
    upper: np.ndarray
    direction: str

    @property
    def empty_mask(self) -> np.ndarray:
        return self.lower > self.upper

    @property
    def is_empty_somewhere(self) -> bool:
        return bool(np.any(self.empty_mask))


def tighten_band(lower: np.ndarray, upper: np.ndarray, direction: str) -> TightBounds:
    """Largest sub-band containing exactly the direction-monotone curves of [lower, upper].

    Increasing curves above `lower` stay above its running max and below the
    reverse running min of `upper`; decreasing curves are mirrored.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape:
        raise ValueError("lower and upper must share a shape")
    if direction == "increasing":
        lo = np.maximum.accumulate(lower)
        up = np.minimum.accumulate(upper[::-1])[::-1]
    elif direction == "decreasing":
        lo = np.maximum.accumulate(lower[::-1])[::-1]
        up = np.minimum.accumulate(upper)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return TightBounds(lower=lo, upper=up, direction=direction)


def step_in_band(values: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> bool:
    """Pointwise containment of the sampled curve."""
    return bool(np.all((lower <= values) & (values <= upper)))


def completed_step_in_band(values: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> bool:
    """Containment of the completed step graph: jump segments count too.

    Grid-snapped step curves jump at grid points, so the completed graph at
    point j spans the interval between values[j-1] and values[j]; both ends
    must sit inside the band interval at j.
    """
    if not step_in_band(values, lower, upper):
        return False
    flank = values[:-1]
    return bool(np.all((lower[1:] <= flank) & (flank <= upper[1:])))


@dataclass(frozen=True, eq=False)
class PredictionRegion:
    """Per-quantity price intervals where the offer and demand bands overlap."""

    grid: Grid
    mask: np.ndarray
    lower_all: np.ndarray
    upper_all: np.ndarray

    @classmethod
    def from_bounds(
        cls, offer: TightBounds, demand: TightBounds, grid: Grid
    ) -> "PredictionRegion":
        lower = np.maximum(offer.lower, demand.lower)
        upper = np.minimum(offer.upper, demand.upper)
        return cls(grid=grid, mask=lower <= upper, lower_all=lower, upper_all=upper)

    @property
    def is_empty(self) -> bool:
        return not bool(np.any(self.mask))

    @property
    def quantities(self) -> np.ndarray:
        return self.grid.points[self.mask]

    @property
    def lower(self) -> np.ndarray:
        return self.lower_all[self.mask]

    @property
    def upper(self) -> np.ndarray:
        return self.upper_all[self.mask]

    def contains(self, q: float, price: float) -> bool:
        i = self.grid.nearest_index(q)
        if not self.mask[i]:
            return False
        return bool(self.lower_all[i] <= price <= self.upper_all[i])


def grid_crossing(
    offer_values: np.ndarray, demand_values: np.ndarray, grid: Grid
) -> tuple[float, float] | None:
    """Clearing point of the grid-sampled curves, in completed-graph terms.

    Returns (Q, P) with Q the first grid point where demand drops below offer
    and P the midpoint of the vertical stretch both completed graphs share
    there. When the observed curves lie inside their tightened bands in the
    completed sense, this point provably lies in the overlap region.
    """
    above = demand_values >= offer_values
    if not above[0]:
        return None
    if bool(above.all()):
        return None
    j = int(np.argmin(above))  # first flip index; j >= 1 here
    lo = max(offer_values[j - 1], demand_values[j])
    hi = min(offer_values[j], demand_values[j - 1])
    return float(grid.points[j]), float(0.5 * (lo + hi))
