"""Block permutation scheme, calibration scoring, conformal quantile and band.

Index conventions follow the time series: observations are numbered 1..T,
the target is T+1. Array access subtracts 1 at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import (
    FunctionalSample,
    ModulationFunction,
    PredictionBand,
    weighted_sup_score,
)

__all__ = [
    "BlockScheme",
    "SplitPlan",
    "ScoreSet",
    "INFINITE_BAND",
    "build_block_scheme",
    "enumerate_permutations",
    "split_indices",
    "calibration_scores",
    "conformal_k",
    "predict_band",
    "p_value_oracle",
    "exact_iid_coverage",
]

# Marker returned by conformal_k when alpha is below b/(l+1): the induced
# prediction set is the whole function space, not a numeric band.
INFINITE_BAND = math.inf


@dataclass(frozen=True)
class BlockScheme:
    """Cyclic block shifts over {1..l+1} and the induced score index set."""

    l: int
    b: int
    n_perms: int
    d_set: tuple[int, ...]

    @property
    def calibration_d(self) -> tuple[int, ...]:
        """Members of the score index set other than the target slot l+1."""
        return tuple(d for d in self.d_set if d != self.l + 1)


def build_block_scheme(l: int, b: int) -> BlockScheme:
    """Evaluate every block shift at t = l+1 to obtain the score index set."""
    if l < 1 or b < 1:
        raise ValueError(f"need positive l and b, got l={l}, b={b}")
    if b > l + 1:
        raise ValueError(f"block length b={b} exceeds l+1={l + 1}")
    if (l + 1) % b != 0:
        raise ValueError(
            f"(l+1)/b must be an integer; got l={l}, b={b} with (l+1) % b = {(l + 1) % b}"
        )
    n_perms = (l + 1) // b
    d_set = tuple(_pi(i, l, b, l + 1) for i in range(1, n_perms + 1))
    assert len(set(d_set)) == n_perms and (l + 1) in d_set
    return BlockScheme(l=l, b=b, n_perms=n_perms, d_set=d_set)


def _pi(i: int, l: int, b: int, t: int) -> int:
    """The i-th shift applied to index t, as a piecewise displacement by (i-1)b."""
    shift = (i - 1) * b
    if 1 <= t <= l - shift + 1:
        return t + shift
    return t + shift - l - 1


def enumerate_permutations(l: int, b: int) -> list[np.ndarray]:
    """All shifts as explicit index arrays over {1..l+1} (position t-1 holds pi(t))."""
    scheme = build_block_scheme(l, b)
    return [
        np.array([_pi(i, l, b, t) for t in range(1, l + 2)])
        for i in range(1, scheme.n_perms + 1)
    ]


@dataclass(frozen=True)
class SplitPlan:
    """Training/calibration split of {1..T} with the first r indices as covariates only."""

    T: int
    r: int
    train_idx: tuple[int, ...]
    calib_idx: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.train_idx)

    @property
    def l(self) -> int:
        return len(self.calib_idx)


def split_indices(T: int, l: int, r: int = 0, mode: str = "tail", rng=None) -> SplitPlan:
    """Partition {r+1..T} into training and calibration indices.

    mode "tail" keeps the calibration set as the contiguous last l indices,
    preserving block adjacency; "random" draws it uniformly (for exchangeable
    validation runs) and requires an rng.
    """
    if T < 1 or l < 1 or r < 0:
        raise ValueError(f"bad sizes T={T}, l={l}, r={r}")
    m = T - l - r
    if m < 1:
        raise ValueError(f"training set would be empty: T={T}, l={l}, r={r}")
    usable = range(r + 1, T + 1)
    if mode == "tail":
        calib = tuple(range(T - l + 1, T + 1))
    elif mode == "random":
        if rng is None:
            raise ValueError("random split mode requires an rng")
        calib = tuple(sorted(rng.choice(list(usable), size=l, replace=False).tolist()))
    else:
        raise ValueError(f"unknown split mode {mode!r}")
    calib_set = set(calib)
    train = tuple(t for t in usable if t not in calib_set)
    return SplitPlan(T=T, r=r, train_idx=train, calib_idx=calib)


@dataclass(frozen=True)
class ScoreSet:
    """Calibration nonconformity scores keyed by their time index omega_d."""

    entries: tuple[tuple[int, float], ...]

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.entries])


def _omega(d: int, plan: SplitPlan) -> int:
    """The d-th smallest element of calib_idx + {T+1}."""
    if d == plan.l + 1:
        return plan.T + 1
    return plan.calib_idx[d - 1]


def calibration_scores(
    fit,
    series: list[FunctionalSample],
    plan: SplitPlan,
    scheme: BlockScheme,
    s: ModulationFunction,
) -> ScoreSet:
    """Score the block-selected calibration observations against the fit.

    `fit` must expose predict_at(t, series) returning the point prediction for
    time t from covariates strictly preceding t.
    """
    if scheme.l != plan.l:
        raise ValueError(f"scheme built for l={scheme.l} but plan has l={plan.l}")
    entries = []
    for d in sorted(scheme.calibration_d):
        t = _omega(d, plan)
        center = fit.predict_at(t, series)
        score = weighted_sup_score(series[t - 1], center, s)
        entries.append((t, score))
    return ScoreSet(entries=tuple(entries))


def conformal_k(scores: ScoreSet, alpha: float, l: int, b: int) -> float:
    """The ceil((l+1)(1-alpha)/b)-th smallest calibration score.

    Returns INFINITE_BAND when alpha is below b/(l+1), where the prediction
    set is the whole space.
    """
    if not alpha < 1.0:
        raise ValueError(f"alpha must be < 1, got {alpha}")
    if (l + 1) % b != 0:
        raise ValueError(f"(l+1)/b must be an integer, got l={l}, b={b}")
    if alpha < b / (l + 1):
        return INFINITE_BAND
    values = np.sort(scores.values)
    expected = (l + 1) // b - 1
    if len(values) != expected:
        raise ValueError(f"expected {expected} scores for (l={l}, b={b}), got {len(values)}")
    rank = math.ceil((l + 1) * (1.0 - alpha) / b)
    return float(values[rank - 1])


def predict_band(
    fit,
    t_next: int,
    series: list[FunctionalSample],
    s: ModulationFunction,
    k: float,
    alpha: float,
) -> PredictionBand:
    """Assemble the closed-form band around the point prediction for t_next."""
    center = fit.predict_at(t_next, series)
    if k == INFINITE_BAND:
        return PredictionBand(center=center, modulation=s, k=math.inf, alpha=alpha, entire_space=True)
    return PredictionBand(center=center, modulation=s, k=k, alpha=alpha)


def p_value_oracle(
    candidate: FunctionalSample,
    fit,
    series: list[FunctionalSample],
    plan: SplitPlan,
    scheme_l: int,
    scheme_b: int,
    s: ModulationFunction,
) -> float:
    """Permutation p-value of a candidate curve, by direct enumeration.

    Deliberately retraces the definition (enumerate the shifts, evaluate each
    at l+1, score those observations, count ties upward) instead of reusing
    the band construction, so it can serve as a brute-force cross-check:
    candidate lies in the band iff the returned value exceeds alpha.
    """
    perms = enumerate_permutations(scheme_l, scheme_b)
    d_set = [int(perm[scheme_l]) for perm in perms]  # each pi evaluated at t = l+1
    r_candidate = weighted_sup_score(candidate, fit.predict_at(plan.T + 1, series), s)
    n_at_least = 0
    for d in d_set:
        t = _omega(d, plan)
        if t == plan.T + 1:
            continue  # the identity member contributes the +1 below
        score = weighted_sup_score(series[t - 1], fit.predict_at(t, series), s)
        if score >= r_candidate:
            n_at_least += 1
    return (1 + n_at_least) / len(d_set)


def exact_iid_coverage(l: int, b: int, alpha: float) -> float:
    """Unconditional coverage under exchangeability with continuous scores."""
    if (l + 1) % b != 0:
        raise ValueError(f"(l+1)/b must be an integer, got l={l}, b={b}")
    n_bar = (l + 1) // b
    return 1.0 - math.floor(alpha * n_bar) / n_bar
