"""Auction books: order records, XML/CSV ingestion, serialization."""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass

__all__ = [
    "Order",
    "AuctionBook",
    "BookParseError",
    "parse_book",
    "parse_books_csv",
    "serialize_book",
    "serialize_books_csv",
]

SIDES = ("offer", "bid")


class BookParseError(ValueError):
    """Malformed or semantically invalid auction document; carries a location path."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class Order:
    side: str
    price: float
    qty: float
    day: dt.date
    operator: str | None = None

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")
        if not (math.isfinite(self.price) and self.price >= 0.0):
            raise ValueError(f"price must be finite and >= 0, got {self.price}")
        if not (math.isfinite(self.qty) and self.qty > 0.0):
            raise ValueError(f"quantity must be finite and > 0, got {self.qty}")


@dataclass(frozen=True)
class AuctionBook:
    day: dt.date
    orders: tuple[Order, ...]

    def side(self, side: str) -> list[Order]:
        return [o for o in self.orders if o.side == side]

    @property
    def offers(self) -> list[Order]:
        return self.side("offer")

    @property
    def bids(self) -> list[Order]:
        return self.side("bid")


def _parse_day(text: str, path: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise BookParseError(f"bad day {text!r}: {exc}", path) from None


def _parse_number(text: str, what: str, path: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise BookParseError(f"non-numeric {what} {text!r}", path) from None
    if not math.isfinite(value):
        raise BookParseError(f"non-finite {what} {text!r}", path)
    return value


def _order_from_attrs(attrs: dict, day: dt.date, path: str) -> Order:
    for name in ("side", "price", "qty"):
        if name not in attrs or attrs[name] == "":
            raise BookParseError(f"missing mandatory attribute {name!r}", path)
    side = attrs["side"]
    if side not in SIDES:
        raise BookParseError(f"side must be 'offer' or 'bid', got {side!r}", path)
    price = _parse_number(attrs["price"], "price", path)
    qty = _parse_number(attrs["qty"], "qty", path)
    if price < 0.0:
        raise BookParseError(f"negative price {price}", path)
    if qty <= 0.0:
        raise BookParseError(f"non-positive quantity {qty}", path)
    return Order(side=side, price=price, qty=qty, day=day, operator=attrs.get("op") or None)


def _parse_book_xml(data: bytes) -> AuctionBook:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise BookParseError(f"malformed XML at line {line}, column {col}: {exc.msg}") from None
    if root.tag != "auction":
        raise BookParseError(f"expected root element 'auction', got {root.tag!r}", root.tag)
    if "day" not in root.attrib:
        raise BookParseError("missing mandatory attribute 'day'", "auction")
    day = _parse_day(root.attrib["day"], "auction")
    orders = []
    for i, child in enumerate(root):
        path = f"auction/order[{i + 1}]"
        if child.tag != "order":
            raise BookParseError(f"unexpected element {child.tag!r}", path)
        orders.append(_order_from_attrs(child.attrib, day, path))
    if not orders:
        raise BookParseError("no orders", "auction")
    return AuctionBook(day=day, orders=tuple(orders))


def _books_from_csv_rows(rows, where: str) -> list[AuctionBook]:
    by_day: dict[dt.date, list[Order]] = {}
    order_in_file: list[dt.date] = []
    for i, row in enumerate(rows):
        path = f"{where} row {i + 2}"  # header is line 1
        missing = [k for k in ("day", "side", "price", "qty") if not row.get(k)]
        if missing:
            raise BookParseError(f"missing mandatory field(s) {missing}", path)
        day = _parse_day(row["day"], path)
        order = _order_from_attrs(
            {"side": row["side"], "price": row["price"], "qty": row["qty"], "op": row.get("op", "")},
            day,
            path,
        )
        if day not in by_day:
            by_day[day] = []
            order_in_file.append(day)
        by_day[day].append(order)
    if not by_day:
        raise BookParseError("no orders", where)
    return [AuctionBook(day=d, orders=tuple(by_day[d])) for d in sorted(order_in_file)]


def _decode_csv(data: bytes, where: str) -> csv.DictReader:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BookParseError(f"undecodable CSV: {exc}", where) from None
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise BookParseError("empty CSV document", where)
    expected = {"day", "side", "price", "qty"}
    if not expected.issubset(set(reader.fieldnames)):
        raise BookParseError(
            f"CSV header must contain {sorted(expected)}, got {reader.fieldnames}", where
        )
    return reader


def parse_book(data: bytes | str, format: str = "xml") -> AuctionBook:
    """Parse one day's auction book; raises BookParseError with a location path."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    if format == "xml":
        return _parse_book_xml(data)
    if format == "csv":
        books = _books_from_csv_rows(_decode_csv(data, "csv"), "csv")
        if len(books) != 1:
            days = ", ".join(str(b.day) for b in books)
            raise BookParseError(f"expected a single day per book, got [{days}]", "csv")
        return books[0]
    raise ValueError(f"unknown format {format!r}")


def parse_books_csv(data: bytes | str) -> list[AuctionBook]:
    """Parse a multi-day CSV into one book per day, sorted by day."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    return _books_from_csv_rows(_decode_csv(data, "csv"), "csv")


def serialize_book(book: AuctionBook, format: str = "xml") -> str:
    if format == "xml":
        root = ET.Element("auction", {"day": book.day.isoformat()})
        for order in book.orders:
            attrs = {
                "side": order.side,
                "price": f"{order.price:.17g}",
                "qty": f"{order.qty:.17g}",
            }
            if order.operator:
                attrs["op"] = order.operator
            ET.SubElement(root, "order", attrs)
        ET.indent(root)
        return ET.tostring(root, encoding="unicode") + "\n"
    if format == "csv":
        return serialize_books_csv([book])
    raise ValueError(f"unknown format {format!r}")


def serialize_books_csv(books) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["day", "side", "price", "qty", "op"])
    for book in books:
        for order in book.orders:
            writer.writerow(
                [
                    order.day.isoformat(),
                    order.side,
                    f"{order.price:.17g}",
                    f"{order.qty:.17g}",
                    order.operator or "",
                ]
            )
    return out.getvalue()
