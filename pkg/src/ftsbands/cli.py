"""Command line entry points: simulate, study, ingest, precompute, backtest, serve.

Configs are flat key-value text files (`key = value`, '#' comments). Outputs
embed the sha256 of the config they were produced from. The only environment
variable read is FTSBANDS_SEED, an optional seed override (the --seed flag
wins over it).
"""

from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from .grids import Grid, write_curves
from .market.backtest import (
    BacktestConfig,
    day_band,
    evaluate_day,
    rolling_backtest,
)
from .market.books import (
    BookParseError,
    parse_book,
    parse_books_csv,
    serialize_book,
    serialize_books_csv,
)
from .market.curves import MARKET_GRID, build_curves, equilibrium
from .market.backtest import book_sample
from .market.synth import SynthConfig, generate_books
from .server import artifact_from_day_band
from .simlab import DgpConfig, StudyConfig, run_study, simulate_series

__all__ = ["main", "parse_kv_config"]

VERBS = ("simulate", "study", "ingest", "precompute", "backtest", "serve")


def parse_kv_config(text: str) -> dict[str, str]:
    """Flat `key = value` lines; '#' starts a comment; later keys win."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


class _Config:
    def __init__(self, mapping: dict[str, str], text: str):
        self.mapping = mapping
        self.hash = hashlib.sha256(text.encode()).hexdigest()

    def get(self, key: str, default=None) -> str | None:
        return self.mapping.get(key, default)

    def get_int(self, key: str, default: int | None = None) -> int:
        value = self.mapping.get(key)
        return int(value) if value is not None else _require(key, default)

    def get_float(self, key: str, default: float | None = None) -> float:
        value = self.mapping.get(key)
        return float(value) if value is not None else _require(key, default)

    def get_bool(self, key: str, default: bool = False) -> bool:
        value = self.mapping.get(key)
        if value is None:
            return default
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"config key {key!r}: expected a boolean, got {value!r}")


def _require(key: str, default):
    if default is None:
        raise ValueError(f"missing required config key {key!r}")
    return default


def _resolve_seed(args, cfg: _Config, default: int = 0) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("FTSBANDS_SEED")
    if env is not None:
        return int(env)
    return cfg.get_int("seed", default)


def _write_meta(out_dir: Path, cfg: _Config, seed: int, extra: dict | None = None):
    meta = {"config_hash": cfg.hash, "seed": seed}
    if extra:
        meta.update(extra)
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _load_books(path_text: str, format_hint: str | None):
    path = Path(path_text)
    if not path.exists():
        raise FileNotFoundError(f"book input {path} does not exist")
    if path.is_dir():
        books = []
        files = sorted(path.glob("*.xml"))
        if not files:
            raise BookParseError("no .xml book files found", str(path))
        for f in files:
            books.append(parse_book(f.read_bytes(), format="xml"))
        return sorted(books, key=lambda b: b.day)
    data = path.read_bytes()
    fmt = format_hint or ("csv" if path.suffix == ".csv" else "xml")
    if fmt == "csv":
        return parse_books_csv(data)
    return [parse_book(data, format="xml")]


def _cmd_simulate(args, cfg: _Config) -> int:
    seed = _resolve_seed(args, cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    kind = cfg.get("kind", "series")
    if kind == "series":
        T = cfg.get_int("T", 100)
        grid = Grid(0.0, 1.0, cfg.get_int("grid_n", 100))
        dgp = DgpConfig(T=T, burn_in=cfg.get_int("burn_in", 100), seed=seed)
        curves, latent = simulate_series(dgp, grid=grid)
        with open(out_dir / "series.txt", "w") as fh:
            for curve in curves:
                write_curves(curve, fh)
        np.savetxt(out_dir / "latent.csv", latent, delimiter=",", fmt="%.17g")
        _write_meta(out_dir, cfg, seed, {"T": T})
    elif kind == "books":
        synth = SynthConfig(
            n_days=cfg.get_int("n_days", 120),
            seed=seed,
            start_day=dt.date.fromisoformat(cfg.get("start_day", "2019-01-01")),
            pipeline_agent=cfg.get_bool("pipeline_agent", False),
        )
        books = generate_books(synth)
        fmt = cfg.get("format", "xml")
        if fmt == "csv":
            (out_dir / "books.csv").write_text(serialize_books_csv(books))
        else:
            for book in books:
                (out_dir / f"book_{book.day.isoformat()}.xml").write_text(
                    serialize_book(book, format="xml")
                )
        _write_meta(out_dir, cfg, seed, {"n_days": synth.n_days})
    else:
        raise ValueError(f"unknown simulate kind {kind!r}")
    return 0


def _cmd_study(args, cfg: _Config) -> int:
    seed = _resolve_seed(args, cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    study = StudyConfig(
        model=cfg.get("model", "oracle"),
        T=cfg.get_int("T"),
        l=cfg.get_int("l"),
        b=cfg.get_int("b", 1),
        alpha=cfg.get_float("alpha", 0.25),
        N=cfg.get_int("N", 1000),
        seed=seed,
        split_mode=cfg.get("split_mode", "tail"),
    )
    result = run_study(study, threads=args.threads)
    (out_dir / "study.csv").write_text(
        "model,T,l,b,alpha,N,coverage,ci99_lo,ci99_hi,size_q1,size_median,size_q3,config_hash\n"
        + ",".join(
            [
                study.model,
                str(study.T),
                str(study.l),
                str(study.b),
                f"{study.alpha:g}",
                str(study.N),
                f"{result.coverage:.6f}",
                f"{result.ci99[0]:.6f}",
                f"{result.ci99[1]:.6f}",
                f"{result.size_quartiles[0]:.6f}",
                f"{result.size_quartiles[1]:.6f}",
                f"{result.size_quartiles[2]:.6f}",
                cfg.hash,
            ]
        )
        + "\n"
    )
    summary = {
        "model": study.model,
        "T": study.T,
        "l": study.l,
        "b": study.b,
        "alpha": study.alpha,
        "N": study.N,
        "seed": seed,
        "coverage": result.coverage,
        "ci99": list(result.ci99),
        "size_quartiles": list(result.size_quartiles),
        "config_hash": cfg.hash,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_ingest(args, cfg: _Config) -> int:
    books = _load_books(cfg.get("in") or _fail("missing config key 'in'"), cfg.get("format"))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "books.csv").write_text(serialize_books_csv(books))
    _write_meta(out_dir, cfg, _resolve_seed(args, cfg), {"n_books": len(books)})
    return 0


def _backtest_config(cfg: _Config) -> BacktestConfig:
    ranges = []
    spec = cfg.get("size_ranges", "0:25000")
    for part in spec.split(","):
        lo, hi = part.split(":")
        ranges.append((float(lo), float(hi)))
    return BacktestConfig(
        window=cfg.get_int("window", 90),
        l=cfg.get_int("l", 39),
        b=cfg.get_int("b", 1),
        alpha=cfg.get_float("alpha", 0.25),
        curve_lag=cfg.get_int("curve_lag", 8),
        price_lag=cfg.get_int("price_lag", 2),
        grid=Grid(0.0, cfg.get_float("grid_hi", 2.0e5), cfg.get_int("grid_n", 500)),
        size_ranges=tuple(ranges),
        eq_convention=cfg.get("eq_convention", "midpoint"),
    )


def _cmd_precompute(args, cfg: _Config) -> int:
    books = _load_books(cfg.get("books") or _fail("missing config key 'books'"), cfg.get("format"))
    books = sorted(books, key=lambda b: b.day)
    alphas = [float(a) for a in cfg.get("alphas", "0.25,0.5").split(",")]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = _backtest_config(cfg)
    first = cfg.get("first_day")
    last = cfg.get("last_day")
    n_written = 0
    for i in range(base.window, len(books)):
        target = books[i]
        if first and target.day < dt.date.fromisoformat(first):
            continue
        if last and target.day > dt.date.fromisoformat(last):
            continue
        window = books[i - base.window : i]
        sample = book_sample(target, base.grid)
        eq = equilibrium(*build_curves(target), convention=base.eq_convention)
        for alpha in alphas:
            bc = BacktestConfig(
                window=base.window,
                l=base.l,
                b=base.b,
                alpha=alpha,
                curve_lag=base.curve_lag,
                price_lag=base.price_lag,
                grid=base.grid,
                size_ranges=base.size_ranges,
                eq_convention=base.eq_convention,
            )
            band = day_band(window, target.day, bc)
            result = evaluate_day(band, target, bc, sample=sample)
            art = artifact_from_day_band(band, target_sample=sample, observed_eq=eq, day_result=result)
            name = f"band_{target.day.isoformat()}_{alpha:g}.json"
            (out_dir / name).write_text(json.dumps(art, sort_keys=True) + "\n")
            n_written += 1
    _write_meta(out_dir, cfg, _resolve_seed(args, cfg), {"n_artifacts": n_written})
    return 0


def _cmd_backtest(args, cfg: _Config) -> int:
    books = _load_books(cfg.get("books") or _fail("missing config key 'books'"), cfg.get("format"))
    report = rolling_backtest(books, _backtest_config(cfg))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.csv").write_text(report.to_csv())
    summary = report.summary()
    summary["config_hash"] = cfg.hash
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_serve(args, cfg: _Config) -> int:
    import uvicorn

    from .server import create_app

    artifacts = cfg.get("artifacts") or _fail("missing config key 'artifacts'")
    host, _, port = (args.bind or "127.0.0.1:8000").partition(":")
    app = create_app(artifacts)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="warning")
    return 0


def _fail(message: str):
    raise ValueError(message)


COMMANDS = {
    "simulate": _cmd_simulate,
    "study": _cmd_study,
    "ingest": _cmd_ingest,
    "precompute": _cmd_precompute,
    "backtest": _cmd_backtest,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ftsbands")
    parser.add_argument("verb", choices=VERBS)
    parser.add_argument("--config", required=True, help="flat key-value config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    parser.add_argument("--threads", type=int, default=1, help="parallel replications")
    parser.add_argument("--bind", default=None, help="host:port (serve only)")
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text()
        cfg = _Config(parse_kv_config(text), text)
        return COMMANDS[args.verb](args, cfg)
    except BookParseError as exc:
        _emit_error("parse_error", str(exc), getattr(exc, "path", ""))
        return 2
    except (ValueError, FileNotFoundError, KeyError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 2


def _emit_error(kind: str, detail: str, path: str = ""):
    payload = {"error": kind, "detail": detail}
    if path:
        payload["path"] = path
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


if __name__ == "__main__":
    sys.exit(main())
