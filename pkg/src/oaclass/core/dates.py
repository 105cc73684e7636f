"""Calendar dates with explicit precision.

Bibliographic dates are often partial (``[[2018, 2]]`` in Crossref). A
:class:`PartialDate` keeps the precision it was given; comparisons between
dates of different precision are done after truncating both to the coarser
one, so a month-precision date never looks earlier or later than a day inside
that month.
"""

from __future__ import annotations

import calendar
import datetime as dt
import enum
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import ParseError


class Precision(enum.IntEnum):
    YEAR = 1
    MONTH = 2
    DAY = 3


_ISO = re.compile(r"^(\d{4})(?:-(\d{1,2})(?:-(\d{1,2}))?)?(?:[T ].*)?$")


@dataclass(frozen=True)
class PartialDate:
    year: int
    month: int | None = None
    day: int | None = None

    def __post_init__(self) -> None:
        if self.day is not None and self.month is None:
            raise ParseError("day given without month")
        if not 1 <= self.year <= 9999:
            raise ParseError(f"year out of range: {self.year}")
        if self.month is not None and not 1 <= self.month <= 12:
            raise ParseError(f"month out of range: {self.month}")
        if self.day is not None:
            last = calendar.monthrange(self.year, self.month)[1]
            if not 1 <= self.day <= last:
                raise ParseError(f"day out of range: {self.year}-{self.month}-{self.day}")

    @property
    def precision(self) -> Precision:
        if self.day is not None:
            return Precision.DAY
        if self.month is not None:
            return Precision.MONTH
        return Precision.YEAR

    @property
    def start(self) -> dt.date:
        """First calendar day covered by this date."""
        return dt.date(self.year, self.month or 1, self.day or 1)

    @property
    def end(self) -> dt.date:
        """Last calendar day covered by this date."""
        if self.day is not None:
            return dt.date(self.year, self.month, self.day)
        if self.month is not None:
            return dt.date(self.year, self.month, calendar.monthrange(self.year, self.month)[1])
        return dt.date(self.year, 12, 31)

    def truncate(self, precision: Precision) -> PartialDate:
        if precision >= self.precision:
            return self
        if precision == Precision.YEAR:
            return PartialDate(self.year)
        return PartialDate(self.year, self.month)

    def isoformat(self) -> str:
        if self.day is not None:
            return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"
        if self.month is not None:
            return f"{self.year:04d}-{self.month:02d}"
        return f"{self.year:04d}"

    __str__ = isoformat

    @classmethod
    def from_date(cls, value: dt.date) -> PartialDate:
        return cls(value.year, value.month, value.day)

    @classmethod
    def from_parts(cls, parts: Sequence[int | str | None]) -> PartialDate:
        """Build from Crossref-style ``date-parts`` (``[2018]``, ``[2018, 2]``...)."""
        values = []
        for p in parts:
            if p is None:
                break
            try:
                values.append(int(p))
            except (TypeError, ValueError):
                raise ParseError(f"bad date part {p!r}") from None
        if not values or len(values) > 3:
            raise ParseError(f"bad date-parts {list(parts)!r}")
        return cls(*values)

    @classmethod
    def parse(cls, text: str) -> PartialDate:
        """Parse ``YYYY``, ``YYYY-MM``, ``YYYY-MM-DD`` or an ISO timestamp."""
        m = _ISO.match(text.strip()) if isinstance(text, str) else None
        if not m:
            raise ParseError(f"unrecognized date {text!r}")
        year, month, day = (int(g) if g else None for g in m.groups())
        return cls(year, month, day)


def common_precision(*dates: PartialDate) -> Precision:
    return min(d.precision for d in dates)


def compare(a: PartialDate, b: PartialDate) -> int:
    """Three-way comparison at the coarsest common precision."""
    p = common_precision(a, b)
    sa, sb = a.truncate(p).start, b.truncate(p).start
    return (sa > sb) - (sa < sb)


def days_between(earlier: PartialDate, later: PartialDate) -> int:
    """``later - earlier`` in days, with both truncated to the coarser precision."""
    p = common_precision(earlier, later)
    return (later.truncate(p).start - earlier.truncate(p).start).days


def earliest(dates: Iterable[PartialDate]) -> PartialDate | None:
    """Minimum of ``dates`` taken at their coarsest common precision."""
    dates = list(dates)
    if not dates:
        return None
    p = common_precision(*dates)
    return min((d.truncate(p) for d in dates), key=lambda d: d.start)


def add_months(value: dt.date, months: int) -> dt.date:
    """Shift ``value`` by whole months, clamping the day to the month's end."""
    index = value.year * 12 + (value.month - 1) + months
    year, month = divmod(index, 12)
    month += 1
    day = min(value.day, calendar.monthrange(year, month)[1])
    return dt.date(year, month, day)
