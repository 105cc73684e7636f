"""Journal-level detection of delayed (moving wall) open access.

Three independent signals, each keyed by journal:

* cohort shares: articles past the embargo horizon are almost all free on
  the publisher site while recent ones mostly are not;
* license delays: most open licenses only take effect well after publication;
* the PMC journal list, which states an embargo in months.

:func:`build_delayed_registry` unions them into the delayed-journal set the
classifier consumes.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, TextIO

from .classifier import DEFAULT_LICENSE_PATTERNS, effective_delay, match_license
from .core.dates import PartialDate, add_months
from .core.identifiers import Issn, normalize_issn
from .errors import ChecksumError, FormatError, ParseError, RegistryConflict
from .ingest.evidence import LicenseStatement
from .registries import IssnLinkTable, JournalRegistry, lookup_journal

DELAYED_COLUMNS = (
    "issn_l", "title", "strategies", "embargo_months",
    "old_share", "recent_share", "n_old", "n_recent",
)
STRATEGY_ORDER = ("pmc", "metadata", "cohort")
_DAYS_PER_MONTH = Fraction(36525, 1200)


class Verdict(enum.Enum):
    DELAYED = "delayed"
    NOT_DELAYED = "not_delayed"
    INSUFFICIENT_DATA = "insufficient_data"


@dataclass(frozen=True)
class CohortConfig:
    horizon_months: int = 24
    recent_months: int = 12
    theta_old: float = 0.9
    theta_recent: float = 0.5
    min_cohort: int = 20

    def __post_init__(self) -> None:
        if self.recent_months <= 0 or self.horizon_months < self.recent_months:
            raise ValueError("need 0 < recent_months <= horizon_months")
        if not (0 <= self.theta_recent <= 1 and 0 <= self.theta_old <= 1):
            raise ValueError("thresholds must lie in [0, 1]")
        if self.min_cohort < 1:
            raise ValueError("min_cohort must be >= 1")

    @classmethod
    def from_mapping(cls, data: Mapping) -> CohortConfig:
        keys = ("horizon_months", "recent_months", "theta_old", "theta_recent", "min_cohort")
        try:
            return cls(**{k: data[k] for k in keys if k in data})
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad detector config: {exc}") from None


@dataclass(frozen=True)
class Cohort:
    n: int = 0
    open: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.open <= self.n:
            raise ValueError("open count must lie in [0, n]")

    @property
    def share(self) -> Fraction | None:
        return Fraction(self.open, self.n) if self.n else None


@dataclass(frozen=True)
class JournalCohortStats:
    issn_l: Issn
    old_cohort: Cohort
    recent_cohort: Cohort
    verdict: Verdict
    title: str = ""


def detect_delayed(
    articles: Iterable[tuple[PartialDate, bool]],
    reference_date: dt.date,
    issn_l: Issn,
    config: CohortConfig = CohortConfig(),
    registry: JournalRegistry | None = None,
    link_table: IssnLinkTable | None = None,
    title: str = "",
) -> JournalCohortStats:
    """Compare publisher-open shares of old and recent articles of one journal.

    An article is *old* when its whole date period ends before
    ``reference_date - horizon_months`` and *recent* when its period starts
    on or after ``reference_date - recent_months``; articles in between, or
    dated after the reference date, are not counted.
    """
    if registry is not None:
        match = lookup_journal({issn_l}, reference_date.year, registry, link_table)
        if match is not None:
            raise RegistryConflict(f"journal {issn_l} is registered as full OA")
    old_cut = add_months(reference_date, -config.horizon_months)
    recent_cut = add_months(reference_date, -config.recent_months)
    old_n = old_open = recent_n = recent_open = 0
    for published, is_open in articles:
        if published.end < old_cut:
            old_n += 1
            old_open += bool(is_open)
        elif published.start >= recent_cut and published.end <= reference_date:
            recent_n += 1
            recent_open += bool(is_open)
    old, recent = Cohort(old_n, old_open), Cohort(recent_n, recent_open)
    if old.n < config.min_cohort or recent.n < config.min_cohort:
        verdict = Verdict.INSUFFICIENT_DATA
    elif (old.share >= Fraction(str(config.theta_old))
          and recent.share <= Fraction(str(config.theta_recent))):
        verdict = Verdict.DELAYED
    else:
        verdict = Verdict.NOT_DELAYED
    return JournalCohortStats(issn_l, old, recent, verdict, title)


def detect_delayed_from_metadata(
    articles: Iterable[tuple[PartialDate, Iterable[LicenseStatement]]],
    grace_days: int = 30,
    patterns: Iterable[str] = DEFAULT_LICENSE_PATTERNS,
) -> int | None:
    """Typical embargo in days implied by license start dates, or None.

    Each article contributes the smallest effective delay among its open
    licenses. The journal qualifies when at least half of those articles
    are delayed beyond ``grace_days``; the result is then the median of the
    delayed articles' delays.
    """
    patterns = tuple(patterns)
    delays = []
    for published, licenses in articles:
        own = [effective_delay(lic, published) for lic in licenses if match_license(lic.url, patterns)]
        if own:
            delays.append(min(own))
    return embargo_from_delays(delays, grace_days)


def embargo_from_delays(delays: Iterable[int], grace_days: int = 30) -> int | None:
    delays = list(delays)
    late = [d for d in delays if d > grace_days]
    if not delays or not late or 2 * len(late) < len(delays):
        return None
    return round(statistics.median(late))


def load_pmc_embargoes(path: str | Path) -> dict[Issn, int]:
    """Read ``issn,journal_title,embargo_months`` into ISSN -> months."""
    out: dict[Issn, int] = {}
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip().lower() for h in reader.fieldnames or []]
        missing = [c for c in ("issn", "journal_title", "embargo_months") if c not in header]
        if missing:
            raise ParseError(f"missing column(s): {', '.join(missing)}", row=1, source=str(path))
        reader.fieldnames = header
        for row in reader:
            line = reader.line_num
            raw_issn = (row.get("issn") or "").strip()
            try:
                issn = normalize_issn(raw_issn)
            except ChecksumError as exc:
                raise ChecksumError(f"row {line}: {exc}", issn=raw_issn, row=line) from None
            except FormatError as exc:
                raise ParseError(str(exc), row=line, source=str(path)) from None
            raw = (row.get("embargo_months") or "").strip()
            try:
                months = int(raw)
            except ValueError:
                raise ParseError(f"bad embargo_months {raw!r}", row=line, source=str(path)) from None
            if months < 0:
                raise ParseError(f"negative embargo_months {months}", row=line, source=str(path))
            out[issn] = months
    return out


@dataclass
class DelayedJournal:
    issn_l: Issn
    title: str = ""
    strategies: set[str] = field(default_factory=set)
    embargo_months: int | None = None
    stats: JournalCohortStats | None = None

    def csv_row(self) -> list[str]:
        def share(cohort):
            return "" if self.stats is None or cohort.share is None else f"{float(cohort.share):.6f}"

        old = self.stats.old_cohort if self.stats else None
        recent = self.stats.recent_cohort if self.stats else None
        return [
            self.issn_l.value,
            self.title,
            "+".join(s for s in STRATEGY_ORDER if s in self.strategies),
            "" if self.embargo_months is None else str(self.embargo_months),
            share(old) if old else "",
            share(recent) if recent else "",
            str(old.n) if old else "",
            str(recent.n) if recent else "",
        ]


@dataclass
class DelayedRegistry:
    journals: dict[Issn, DelayedJournal] = field(default_factory=dict)

    @property
    def journal_set(self) -> frozenset[Issn]:
        return frozenset(self.journals)

    def rows(self) -> list[DelayedJournal]:
        return [self.journals[k] for k in sorted(self.journals)]

    def write(self, fh: TextIO) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DELAYED_COLUMNS)
        for journal in self.rows():
            writer.writerow(journal.csv_row())

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            self.write(fh)


def days_to_months(days: int) -> int:
    return round(Fraction(days) / _DAYS_PER_MONTH)


def build_delayed_registry(
    verdicts: Iterable[JournalCohortStats] = (),
    metadata_embargoes: Mapping[Issn, int | None] | None = None,
    pmc: Mapping[Issn, int] | None = None,
    link_table: IssnLinkTable | None = None,
    titles: Mapping[Issn, str] | None = None,
) -> DelayedRegistry:
    """Union of journals flagged by any strategy, keyed by ISSN-L.

    ``metadata_embargoes`` values are in days; the PMC embargo (months)
    takes priority over the converted metadata estimate.
    """

    def key(issn: Issn) -> Issn:
        return link_table.resolve(issn) if link_table is not None else issn

    registry = DelayedRegistry()

    def entry(issn: Issn) -> DelayedJournal:
        k = key(issn)
        if k not in registry.journals:
            registry.journals[k] = DelayedJournal(k, (titles or {}).get(k, ""))
        return registry.journals[k]

    for stats in verdicts:
        if stats.verdict is Verdict.DELAYED:
            j = entry(stats.issn_l)
            j.strategies.add("cohort")
            j.stats = stats
            j.title = j.title or stats.title
    for issn, days in sorted((metadata_embargoes or {}).items()):
        if days is not None:
            j = entry(issn)
            j.strategies.add("metadata")
            if "pmc" not in j.strategies:
                j.embargo_months = days_to_months(days)
    for issn, months in sorted((pmc or {}).items()):
        if months > 0:
            j = entry(issn)
            j.strategies.add("pmc")
            j.embargo_months = months
    return registry


def load_delayed_set(path: str | Path) -> frozenset[Issn]:
    """Read the ``issn_l`` column of a delayed-registry CSV."""
    out = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if "issn_l" not in (reader.fieldnames or []):
            raise ParseError("missing column issn_l", row=1, source=str(path))
        for row in reader:
            try:
                out.add(normalize_issn(row["issn_l"]))
            except (FormatError, ChecksumError) as exc:
                raise ParseError(str(exc), row=reader.line_num, source=str(path)) from None
    return frozenset(out)
