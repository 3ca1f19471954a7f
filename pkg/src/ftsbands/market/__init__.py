from .bands import (
    PredictionRegion,
    TightBounds,
    completed_step_in_band,
    grid_crossing,
    step_in_band,
    tighten_band,
)
from .backtest import (
    BacktestConfig,
    BacktestReport,
    DayBand,
    DayResult,
    book_prices,
    book_sample,
    day_band,
    evaluate_day,
    rolling_backtest,
)
from .books import (
    AuctionBook,
    BookParseError,
    Order,
    parse_book,
    parse_books_csv,
    serialize_book,
    serialize_books_csv,
)
from .curves import (
    MARKET_GRID,
    StepCurve,
    build_curves,
    equilibrium,
    inject_into_curve,
    remove_from_curve,
    sample_step_curve,
)
from .synth import SynthConfig, generate_books

__all__ = [
    "AuctionBook",
    "BacktestConfig",
    "BacktestReport",
    "BookParseError",
    "DayBand",
    "DayResult",
    "MARKET_GRID",
    "Order",
    "PredictionRegion",
    "StepCurve",
    "SynthConfig",
    "TightBounds",
    "book_prices",
    "book_sample",
    "build_curves",
    "completed_step_in_band",
    "day_band",
    "equilibrium",
    "evaluate_day",
    "generate_books",
    "grid_crossing",
    "inject_into_curve",
    "parse_book",
    "parse_books_csv",
    "remove_from_curve",
    "rolling_backtest",
    "sample_step_curve",
    "serialize_book",
    "serialize_books_csv",
    "step_in_band",
    "tighten_band",
]
