"""Grid-based multivariate functional data: samples, modulation, scores, bands."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "FunctionalSample",
    "ModulationFunction",
    "PredictionBand",
    "ShapeError",
    "weighted_sup_score",
    "modulation_from_residuals",
    "band_size",
    "band_contains",
    "write_curves",
    "read_curves",
]

# Relative tolerance for curve comparisons after text round-trips.
CURVE_RTOL = 1e-9


class ShapeError(ValueError):
    """Structural mismatch between functional objects (components or grids)."""


@dataclass(frozen=True)
class Grid:
    """Equispaced evaluation grid on [lo, hi] with n points, endpoints included."""

    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.n < 2:
            raise ValueError(f"grid needs n >= 2, got {self.n}")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    def nearest_index(self, x: float) -> int:
        i = int(round((x - self.lo) / self.spacing))
        return min(max(i, 0), self.n - 1)


def _as_component_arrays(components, grids) -> tuple[np.ndarray, ...]:
    if len(components) != len(grids):
        raise ShapeError(
            f"{len(components)} components but {len(grids)} grids"
        )
    arrays = []
    for j, (vals, grid) in enumerate(zip(components, grids)):
        arr = np.array(vals, dtype=float, copy=True)
        if arr.ndim != 1 or arr.shape[0] != grid.n:
            raise ShapeError(
                f"component {j}: expected vector of length {grid.n}, got shape {arr.shape}"
            )
        arrays.append(arr)
    return tuple(arrays)


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """One multivariate functional observation: p curves on fixed grids."""

    components: tuple[np.ndarray, ...]
    grids: tuple[Grid, ...]

    def __init__(self, components, grids):
        grids = tuple(grids)
        arrays = _as_component_arrays(components, grids)
        for j, arr in enumerate(arrays):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"component {j} contains non-finite values")
            arr.flags.writeable = False
        object.__setattr__(self, "components", arrays)
        object.__setattr__(self, "grids", grids)

    @property
    def p(self) -> int:
        return len(self.components)

    def same_shape(self, other: "FunctionalSample | ModulationFunction") -> bool:
        return self.grids == other.grids

    def require_same_shape(self, other):
        if not self.same_shape(other):
            raise ShapeError("functional objects live on different grids")


@dataclass(frozen=True, eq=False)
class ModulationFunction:
    """Pointwise band-width profile; strictly positive on the same grids."""

    values: tuple[np.ndarray, ...]
    grids: tuple[Grid, ...]

    def __init__(self, values, grids):
        grids = tuple(grids)
        arrays = _as_component_arrays(values, grids)
        for j, arr in enumerate(arrays):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"modulation component {j} contains non-finite values")
            if np.any(arr <= 0.0):
                raise ValueError(f"modulation component {j} is not strictly positive")
            arr.flags.writeable = False
        object.__setattr__(self, "values", arrays)
        object.__setattr__(self, "grids", grids)

    @property
    def p(self) -> int:
        return len(self.values)

    def scaled(self, factor: float) -> "ModulationFunction":
        return ModulationFunction([v * factor for v in self.values], self.grids)


@dataclass(frozen=True, eq=False)
class PredictionBand:
    """Band center(q) +- k * s(q); entire_space marks the degenerate full band."""

    center: FunctionalSample
    modulation: ModulationFunction
    k: float
    alpha: float
    entire_space: bool = field(default=False)

    def __post_init__(self):
        if self.center.grids != self.modulation.grids:
            raise ShapeError("center and modulation live on different grids")
        if self.entire_space:
            if not math.isinf(self.k):
                raise ValueError("entire-space band must carry k = inf")
        elif not (math.isfinite(self.k) and self.k >= 0.0):
            raise ValueError(f"k must be finite and nonnegative, got {self.k}")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    def lower(self, j: int) -> np.ndarray:
        self._require_finite()
        return self.center.components[j] - self.k * self.modulation.values[j]

    def upper(self, j: int) -> np.ndarray:
        self._require_finite()
        return self.center.components[j] + self.k * self.modulation.values[j]

    def _require_finite(self):
        if self.entire_space:
            raise ValueError(
                "band covers the entire space (alpha below b/(l+1)); "
                "bounds and size are undefined"
            )


def weighted_sup_score(
    y: FunctionalSample, center: FunctionalSample, s: ModulationFunction
) -> float:
    """Sup over components and grid points of |y - center| / s."""
    y.require_same_shape(center)
    y.require_same_shape(s)
    score = 0.0
    for yj, cj, sj in zip(y.components, center.components, s.values):
        score = max(score, float(np.max(np.abs(yj - cj) / sj)))
    return score


def modulation_floor(residuals) -> float:
    """Positive floor: 1e-12 times the largest pointwise |residual|, or 1 if all zero."""
    peak = 0.0
    for r in residuals:
        for rj in r.components:
            peak = max(peak, float(np.max(np.abs(rj))))
    return 1e-12 * peak if peak > 0.0 else 1.0


def modulation_from_residuals(residuals) -> ModulationFunction:
    """Pointwise root-sum-of-squares of the residual curves, floored away from zero.

    The band is invariant to positive rescalings of the result, so no 1/m
    normalization is applied.
    """
    residuals = list(residuals)
    if not residuals:
        raise ValueError("need at least one residual sample")
    grids = residuals[0].grids
    for r in residuals[1:]:
        if r.grids != grids:
            raise ShapeError("residual samples live on different grids")
    floor = modulation_floor(residuals)
    values = []
    for j in range(len(grids)):
        sq = np.zeros(grids[j].n)
        for r in residuals:
            sq += r.components[j] ** 2
        values.append(np.maximum(np.sqrt(sq), floor))
    return ModulationFunction(values, grids)


def band_size(band: PredictionBand) -> float:
    """Summed area between upper and lower bounds, trapezoidal in each component."""
    total = 0.0
    for j, grid in enumerate(band.center.grids):
        width = band.upper(j) - band.lower(j)
        total += float(np.trapezoid(width, dx=grid.spacing))
    return total


def band_contains(band: PredictionBand, y: FunctionalSample) -> bool:
    """Membership test; ties on the boundary count as inside."""
    if band.entire_space:
        y.require_same_shape(band.center)
        return True
    return weighted_sup_score(y, band.center, band.modulation) <= band.k


def write_curves(sample: FunctionalSample, fh: io.TextIOBase | None = None) -> str:
    """Columnar text format: header `grid lo hi n p`, then n rows of p+1 numbers.

    All components must share one grid.
    """
    grids = set(sample.grids)
    if len(grids) != 1:
        raise ValueError("columnar format requires all components on one shared grid")
    grid = sample.grids[0]
    lines = [f"grid {grid.lo:.17g} {grid.hi:.17g} {grid.n} {sample.p}"]
    points = grid.points
    for i in range(grid.n):
        row = [f"{points[i]:.17g}"]
        row.extend(f"{comp[i]:.17g}" for comp in sample.components)
        lines.append(" ".join(row))
    text = "\n".join(lines) + "\n"
    if fh is not None:
        fh.write(text)
    return text


def read_curves(text: str) -> FunctionalSample:
    """Inverse of write_curves; validates header counts and grid consistency."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty curve document")
    header = lines[0].split()
    if len(header) != 5 or header[0] != "grid":
        raise ValueError(f"bad header line: {lines[0]!r}")
    lo, hi = float(header[1]), float(header[2])
    n, p = int(header[3]), int(header[4])
    grid = Grid(lo, hi, n)
    if len(lines) - 1 != n:
        raise ValueError(f"expected {n} rows, found {len(lines) - 1}")
    data = np.array([[float(tok) for tok in ln.split()] for ln in lines[1:]])
    if data.shape != (n, p + 1):
        raise ValueError(f"expected {n}x{p + 1} table, got {data.shape}")
    expected = grid.points
    if not np.allclose(data[:, 0], expected, rtol=CURVE_RTOL, atol=0.0):
        raise ValueError("grid column does not match an equispaced grid")
    return FunctionalSample([data[:, j + 1] for j in range(p)], [grid] * p)
