"""Rule-based parsing of the date formats found in scraped quote data.

Partial dates (year only, month + year, month + day with a context year)
resolve to the earliest calendar date consistent with the input.
"""

from __future__ import annotations

import re
from datetime import date

from .errors import UnparsableDate

_MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5,
    "june": 6, "july": 7, "august": 8, "september": 9, "october": 10,
    "november": 11, "december": 12,
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "jun": 6, "jul": 7,
    "aug": 8, "sep": 9, "sept": 9, "oct": 10, "nov": 11, "dec": 12,
}

_ORDINAL = r"(?:st|nd|rd|th)?"

_ISO_FULL = re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$")
_ISO_MONTH = re.compile(r"^(\d{4})-(\d{1,2})$")
_NUMERIC = re.compile(r"^(\d{1,2})[/.\-](\d{1,2})[/.\-](\d{4}|\d{2})$")
_MONTH_FIRST = re.compile(
    rf"^([A-Za-z]+)\.?\s+(\d{{1,2}}){_ORDINAL}(?:\s*,\s*|\s+)(\d{{4}}|\d{{2}})$"
)
_DAY_FIRST = re.compile(
    rf"^(\d{{1,2}}){_ORDINAL}\s+([A-Za-z]+)\.?(?:\s*,\s*|\s+)(\d{{4}}|\d{{2}})$"
)
_YEAR_ONLY = re.compile(r"^(\d{4})$")
_MONTH_YEAR = re.compile(r"^([A-Za-z]+)\.?\s+(\d{4})$")
_MONTH_DAY = re.compile(rf"^([A-Za-z]+)\.?\s+(\d{{1,2}}){_ORDINAL}$")
_DAY_MONTH = re.compile(rf"^(\d{{1,2}}){_ORDINAL}\s+([A-Za-z]+)\.?$")


def _expand_year(y: int) -> int:
    # two-digit years: 00-69 -> 2000s, 70-99 -> 1900s
    if y < 70:
        return 2000 + y
    if y < 100:
        return 1900 + y
    return y


def _month_number(name: str) -> int | None:
    return _MONTHS.get(name.lower())


def _make_date(year: int, month: int, day: int, raw: str) -> date:
    try:
        return date(year, month, day)
    except ValueError as exc:
        raise UnparsableDate(f"{raw!r}: {exc}") from None


def parse_date(raw: str, *, context_year: int | None = None,
               day_first: bool = True) -> date:
    """Parse a raw date string to a calendar date.

    Recognised forms: ISO YYYY-MM-DD / YYYY-MM, numeric D/M/YYYY and
    M/D/YYYY (also with two-digit years and -, . separators), "Month D,
    YYYY", "D Mon YYYY", "Month YYYY", bare "YYYY", and "Month D" / "D
    Month" when ``context_year`` supplies the year. Numerically ambiguous
    dates (both fields <= 12) follow ``day_first``.
    """
    text = " ".join(raw.split())
    if not text:
        raise UnparsableDate("empty date string")

    m = _ISO_FULL.match(text)
    if m:
        return _make_date(int(m.group(1)), int(m.group(2)), int(m.group(3)), raw)
    m = _ISO_MONTH.match(text)
    if m:
        return _make_date(int(m.group(1)), int(m.group(2)), 1, raw)

    m = _NUMERIC.match(text)
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        year = _expand_year(int(m.group(3)))
        if a > 12 and b > 12:
            raise UnparsableDate(f"{raw!r}: no field can be a month")
        if a > 12:
            day, month = a, b
        elif b > 12:
            month, day = a, b
        elif day_first:
            day, month = a, b
        else:
            month, day = a, b
        return _make_date(year, month, day, raw)

    m = _MONTH_FIRST.match(text)
    if m:
        month = _month_number(m.group(1))
        if month is not None:
            return _make_date(_expand_year(int(m.group(3))), month,
                              int(m.group(2)), raw)

    m = _DAY_FIRST.match(text)
    if m:
        month = _month_number(m.group(2))
        if month is not None:
            return _make_date(_expand_year(int(m.group(3))), month,
                              int(m.group(1)), raw)

    m = _YEAR_ONLY.match(text)
    if m:
        return date(int(m.group(1)), 1, 1)

    m = _MONTH_YEAR.match(text)
    if m:
        month = _month_number(m.group(1))
        if month is not None:
            return date(int(m.group(2)), month, 1)

    m = _MONTH_DAY.match(text)
    if m:
        month = _month_number(m.group(1))
        if month is not None:
            if context_year is None:
                raise UnparsableDate(f"{raw!r}: missing year and no context year")
            return _make_date(context_year, month, int(m.group(2)), raw)

    m = _DAY_MONTH.match(text)
    if m:
        month = _month_number(m.group(2))
        if month is not None:
            if context_year is None:
                raise UnparsableDate(f"{raw!r}: missing year and no context year")
            return _make_date(context_year, month, int(m.group(1)), raw)

    raise UnparsableDate(f"no date rule matches {raw!r}")
