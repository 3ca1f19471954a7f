"""Read-only HTTP service over precomputed band artifacts, plus what-if injection.

Artifacts are JSON files produced by the precompute command; the service never
fits anything, so requests are pure functions of (artifact store, query).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from pydantic import BaseModel

from .grids import Grid
from .market.bands import PredictionRegion, TightBounds
from .market.curves import inject_into_curve

__all__ = ["ArtifactStore", "create_app", "artifact_from_day_band", "sig9"]

ARTIFACT_SCHEMA = 1


def sig9(x: float) -> float:
    """Round to 9 significant digits; payload numbers are serialized this way."""
    return float(f"{x:.9g}")


def _sig9_list(values) -> list[float]:
    return [sig9(float(v)) for v in values]


def artifact_from_day_band(band, target_sample=None, observed_eq=None, day_result=None) -> dict:
    """Flatten a fitted DayBand (see market.backtest) into the artifact schema."""
    grid = band.grid
    art = {
        "schema": ARTIFACT_SCHEMA,
        "day": band.day.isoformat(),
        "alpha": band.alpha,
        "l": band.l,
        "b": band.b,
        "k": band.k,
        "grid": {"lo": grid.lo, "hi": grid.hi, "n": grid.n},
        "offer": {
            "center": band.center.components[0].tolist(),
            "lower": band.offer_bounds.lower.tolist(),
            "upper": band.offer_bounds.upper.tolist(),
        },
        "demand": {
            "center": band.center.components[1].tolist(),
            "lower": band.demand_bounds.lower.tolist(),
            "upper": band.demand_bounds.upper.tolist(),
        },
        "observed_eq": None,
        "contained": None,
    }
    if target_sample is not None:
        art["offer"]["observed"] = target_sample.components[0].tolist()
        art["demand"]["observed"] = target_sample.components[1].tolist()
    if observed_eq is not None:
        art["observed_eq"] = {"Q": observed_eq[0], "P": observed_eq[1]}
    if day_result is not None:
        art["contained"] = bool(day_result.contained_band)
    return art


class ArtifactStore:
    """Immutable in-memory view of an artifact directory keyed by (day, alpha)."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._bands: dict[tuple[str, str], dict] = {}
        self.l = None
        self.b = None
        for path in sorted(self.directory.glob("band_*.json")):
            art = json.loads(path.read_text())
            if art.get("schema") != ARTIFACT_SCHEMA:
                raise ValueError(f"{path}: unsupported artifact schema {art.get('schema')}")
            key = (art["day"], f"{art['alpha']:g}")
            self._bands[key] = art
            self.l, self.b = art["l"], art["b"]
        if not self._bands:
            raise ValueError(f"no band artifacts found under {self.directory}")

    @property
    def days(self) -> list[str]:
        return sorted({day for day, _ in self._bands})

    @property
    def alphas(self) -> list[str]:
        return sorted({a for _, a in self._bands}, key=float)

    def get(self, day: str, alpha: str) -> dict | None:
        return self._bands.get((day, alpha))


def _region_payload(art: dict, offer: TightBounds, demand: TightBounds) -> dict:
    grid = Grid(art["grid"]["lo"], art["grid"]["hi"], art["grid"]["n"])
    region = PredictionRegion.from_bounds(offer, demand, grid)
    observed = None
    if art["observed_eq"] is not None:
        q, p = art["observed_eq"]["Q"], art["observed_eq"]["P"]
        observed = {"Q": sig9(q), "P": sig9(p), "inside": region.contains(q, p)}
    return {
        "day": art["day"],
        "alpha": art["alpha"],
        "empty": region.is_empty,
        "quantities": _sig9_list(region.quantities),
        "lower": _sig9_list(region.lower),
        "upper": _sig9_list(region.upper),
        "observed": observed,
    }


def _bounds(art: dict, side: str) -> TightBounds:
    direction = "increasing" if side == "offer" else "decreasing"
    return TightBounds(
        lower=np.asarray(art[side]["lower"], dtype=float),
        upper=np.asarray(art[side]["upper"], dtype=float),
        direction=direction,
    )


class WhatIfRequest(BaseModel):
    day: str
    alpha: str
    side: str
    price: float
    qty: float


def create_app(artifact_dir: str | Path) -> FastAPI:
    store = ArtifactStore(artifact_dir)
    app = FastAPI(title="ftsbands service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def _lookup(day: str, alpha: str) -> dict:
        try:
            alpha_val = float(alpha)
        except ValueError:
            raise HTTPException(status_code=422, detail=f"alpha {alpha!r} is not a number")
        bound = store.b / (store.l + 1)
        if not (bound <= alpha_val < 1.0):
            raise HTTPException(
                status_code=422,
                detail=(
                    f"alpha={alpha_val:g} outside [b/(l+1), 1) = [{bound:g}, 1) "
                    f"for l={store.l}, b={store.b}"
                ),
            )
        if day not in store.days:
            raise HTTPException(status_code=404, detail=f"unknown day {day!r}")
        art = store.get(day, f"{alpha_val:g}")
        if art is None:
            raise HTTPException(
                status_code=404,
                detail=f"no precomputed artifact for day={day}, alpha={alpha_val:g}",
            )
        return art

    def _json(payload: dict) -> Response:
        body = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return Response(content=body, media_type="application/json")

    @app.get("/health")
    def health():
        return _json({"status": "ok"})

    @app.get("/days")
    def days():
        return _json({"days": store.days, "alphas": store.alphas})

    @app.get("/bands")
    def bands(day: str = Query(...), alpha: str = Query(...)):
        art = _lookup(day, alpha)
        payload = {
            "day": art["day"],
            "alpha": art["alpha"],
            "k": sig9(art["k"]),
            "grid": art["grid"],
            "contained": art["contained"],
        }
        for side in ("offer", "demand"):
            entry = {
                "center": _sig9_list(art[side]["center"]),
                "lower": _sig9_list(art[side]["lower"]),
                "upper": _sig9_list(art[side]["upper"]),
            }
            if "observed" in art[side]:
                entry["observed"] = _sig9_list(art[side]["observed"])
            payload[side] = entry
        return _json(payload)

    @app.get("/region")
    def region(day: str = Query(...), alpha: str = Query(...)):
        art = _lookup(day, alpha)
        return _json(_region_payload(art, _bounds(art, "offer"), _bounds(art, "demand")))

    @app.post("/whatif")
    def whatif(req: WhatIfRequest):
        if not (math.isfinite(req.qty) and req.qty > 0.0):
            raise HTTPException(status_code=422, detail=f"qty must be > 0, got {req.qty}")
        if not (math.isfinite(req.price) and req.price >= 0.0):
            raise HTTPException(status_code=422, detail=f"price must be >= 0, got {req.price}")
        if req.side not in ("offer", "demand"):
            raise HTTPException(
                status_code=422, detail=f"side must be 'offer' or 'demand', got {req.side!r}"
            )
        art = _lookup(req.day, req.alpha)
        grid = Grid(art["grid"]["lo"], art["grid"]["hi"], art["grid"]["n"])
        base_offer, base_demand = _bounds(art, "offer"), _bounds(art, "demand")
        mod_offer, mod_demand = base_offer, base_demand
        direction = "increasing" if req.side == "offer" else "decreasing"
        target = base_offer if req.side == "offer" else base_demand
        injected = TightBounds(
            lower=inject_into_curve(target.lower, grid, direction, req.price, req.qty),
            upper=inject_into_curve(target.upper, grid, direction, req.price, req.qty),
            direction=direction,
        )
        if req.side == "offer":
            mod_offer = injected
        else:
            mod_demand = injected
        return _json(
            {
                "base": _region_payload(art, base_offer, base_demand),
                "modified": _region_payload(art, mod_offer, mod_demand),
                "order": {"side": req.side, "price": sig9(req.price), "qty": sig9(req.qty)},
            }
        )

    return app
