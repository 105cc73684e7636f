"""OA share reports aggregated from classification rows."""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping

from .core.taxonomy import CLASS_ORDER, OAClass
from .errors import UnknownFieldError

GROUP_FIELDS = ("year", "journal_title", "issn_l", "document_type", "access_mode", "institution", "primary")


class Mode(enum.Enum):
    PRIMARY_LABEL = "primary"
    MULTI_LABEL = "multi"


class Format(enum.Enum):
    CSV = "csv"
    JSON = "json"


def format_share(share: Fraction) -> str:
    """Six decimals, ties to even."""
    scaled = round(share * 1_000_000)
    return f"{scaled // 1_000_000}.{scaled % 1_000_000:06d}"


@dataclass(frozen=True)
class ShareReport:
    group_key: tuple[tuple[str, Any], ...]
    counts: dict[str, int]
    total: int
    mode: Mode = Mode.PRIMARY_LABEL

    @property
    def shares(self) -> dict[str, Fraction]:
        if not self.total:
            return {c.code: Fraction(0) for c in CLASS_ORDER}
        return {code: Fraction(n, self.total) for code, n in self.counts.items()}

    def to_dict(self) -> dict:
        return {
            "group_key": [[name, value] for name, value in self.group_key],
            "mode": self.mode.value,
            "total": self.total,
            "counts": {c.code: self.counts[c.code] for c in CLASS_ORDER},
            "shares": {c.code: format_share(self.shares[c.code]) for c in CLASS_ORDER},
            "shares_exact": {c.code: str(self.shares[c.code]) for c in CLASS_ORDER},
        }


def _sort_value(value: Any) -> tuple:
    if value is None:
        return (2, "")
    if isinstance(value, bool):
        return (1, str(value))
    if isinstance(value, (int, float)):
        return (0, value, "")
    return (1, str(value))


@dataclass
class Accumulator:
    """Per-group counters. Two accumulators over disjoint inputs can be merged."""

    group_by: tuple[str, ...] = ()
    mode: Mode = Mode.PRIMARY_LABEL
    groups: dict[tuple, tuple[dict[str, int], list[int]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.group_by = tuple(self.group_by)
        unknown = [f for f in self.group_by if f not in GROUP_FIELDS]
        if unknown:
            raise UnknownFieldError(
                f"unknown group_by field(s): {', '.join(unknown)}; "
                f"choose from {', '.join(GROUP_FIELDS)}"
            )

    def add(self, row: Mapping[str, Any]) -> None:
        key = tuple((name, row.get(name)) for name in self.group_by)
        counts, total = self.groups.setdefault(key, ({c.code: 0 for c in CLASS_ORDER}, [0]))
        total[0] += 1
        if self.mode is Mode.PRIMARY_LABEL:
            counts[OAClass.from_code(row["primary"]).code] += 1
        else:
            for code in set(row["labels"]):
                counts[OAClass.from_code(code).code] += 1

    def merge(self, other: Accumulator) -> Accumulator:
        if other.group_by != self.group_by or other.mode is not self.mode:
            raise ValueError("cannot merge accumulators with different grouping or mode")
        merged = Accumulator(self.group_by, self.mode)
        for source in (self, other):
            for key, (counts, total) in source.groups.items():
                m_counts, m_total = merged.groups.setdefault(
                    key, ({c.code: 0 for c in CLASS_ORDER}, [0]))
                for code, n in counts.items():
                    m_counts[code] += n
                m_total[0] += total[0]
        return merged

    def reports(self) -> list[ShareReport]:
        keys = sorted(self.groups, key=lambda k: tuple(_sort_value(v) for _, v in k))
        return [
            ShareReport(key, dict(self.groups[key][0]), self.groups[key][1][0], self.mode)
            for key in keys
        ]


def aggregate(
    rows: Iterable[Mapping[str, Any]],
    group_by: Iterable[str] = (),
    mode: Mode | str = Mode.PRIMARY_LABEL,
) -> list[ShareReport]:
    """Count classes per group.

    In primary-label mode each record counts once, under its primary class;
    in multi-label mode it counts once under each of its labels, so shares
    may add up to more than one.
    """
    acc = Accumulator(tuple(group_by), Mode(mode) if isinstance(mode, str) else mode)
    for row in rows:
        acc.add(row)
    return acc.reports()


def _render(value: Any) -> str:
    return "" if value is None else str(value)


def render(reports: list[ShareReport], fmt: Format | str, group_by: Iterable[str] | None = None) -> str:
    fmt = Format(fmt) if isinstance(fmt, str) else fmt
    if fmt is Format.JSON:
        body = [r.to_dict() for r in reports]
        return json.dumps(body, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
    if group_by is None:
        group_by = [name for name, _ in reports[0].group_key] if reports else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*group_by, "class", "count", "share"])
    for report in reports:
        values = [_render(v) for _, v in report.group_key]
        shares = report.shares
        for cls in CLASS_ORDER:
            writer.writerow([*values, cls.code, report.counts[cls.code], format_share(shares[cls.code])])
    return buf.getvalue()


def emit(
    reports: list[ShareReport],
    fmt: Format | str,
    path: str | Path,
    group_by: Iterable[str] | None = None,
) -> None:
    text = render(reports, fmt, group_by)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
