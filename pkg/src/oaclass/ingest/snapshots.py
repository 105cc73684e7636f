"""Streaming parsers for newline-delimited JSON evidence snapshots.

Both parsers follow a skip-and-log contract: a bad line is recorded in the
:class:`ParseReport` passed in and the stream carries on, so that
``report.yielded + report.skipped`` always equals the number of non-blank
lines read.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from ..core.dates import PartialDate, earliest
from ..core.identifiers import Doi, Issn, normalize_doi, normalize_issn
from ..core.records import normalize_title
from ..errors import ChecksumError, FormatError, ParseError
from .evidence import AccessLocation, ContentVersion, DeclaredVersion, HostKind, LicenseStatement

logger = logging.getLogger(__name__)

CROSSREF_DATE_FIELDS = ("issued", "published", "published-print", "published-online")

# Unpaywall reports licenses as short tokens rather than URLs.
_LICENSE_TOKENS = {
    "cc0": "https://creativecommons.org/publicdomain/zero/1.0/",
    "pd": "https://creativecommons.org/publicdomain/mark/1.0/",
    "public-domain": "https://creativecommons.org/publicdomain/mark/1.0/",
}


@dataclass(frozen=True)
class ParseIssue:
    source: str
    line: int
    message: str

    def __str__(self) -> str:
        return f"{self.source}:{self.line}: {self.message}"


@dataclass
class ParseReport:
    source: str = ""
    yielded: int = 0
    errors: list[ParseIssue] = field(default_factory=list)
    warnings: list[ParseIssue] = field(default_factory=list)

    @property
    def skipped(self) -> int:
        return len(self.errors)

    @property
    def lines(self) -> int:
        return self.yielded + self.skipped

    def error(self, line: int, message: str) -> None:
        issue = ParseIssue(self.source, line, message)
        logger.warning("skipping %s", issue)
        self.errors.append(issue)

    def warn(self, line: int, message: str) -> None:
        issue = ParseIssue(self.source, line, message)
        logger.info("%s", issue)
        self.warnings.append(issue)


def source_tag(path: str | Path) -> str:
    return Path(path).name


def iter_ndjson(path: str | Path, report: ParseReport) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield ``(line_number, object)``; undecodable lines go to ``report``."""
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                report.error(line_no, f"invalid JSON: {exc.msg}")
                continue
            if not isinstance(obj, dict):
                report.error(line_no, "line is not a JSON object")
                continue
            yield line_no, obj


def _date_from_crossref(node: Any) -> PartialDate | None:
    if not isinstance(node, dict):
        return None
    parts = node.get("date-parts")
    if isinstance(parts, list) and parts and isinstance(parts[0], list) and parts[0]:
        if parts[0][0] is None:
            return None
        return PartialDate.from_parts(parts[0])
    if isinstance(node.get("date-time"), str):
        return PartialDate.parse(node["date-time"])
    return None


def _issns(values: Any, report: ParseReport, line: int) -> frozenset[Issn]:
    if isinstance(values, str):
        values = [v for v in values.split(",")]
    out = set()
    for raw in values or []:
        try:
            out.add(normalize_issn(str(raw)))
        except (FormatError, ChecksumError) as exc:
            report.warn(line, f"dropping ISSN: {exc}")
    return frozenset(out)


def _first_text(value: Any) -> str:
    if isinstance(value, list):
        return str(value[0]) if value else ""
    return str(value or "")


@dataclass(frozen=True)
class CrossrefItem:
    doi: Doi
    dates: dict[str, PartialDate]
    issns: frozenset[Issn]
    licenses: tuple[LicenseStatement, ...]
    title: str = ""
    container_title: str = ""
    document_type: str = ""
    authors: tuple[str, ...] = ()
    source_tag: str = ""
    line: int = 0

    @property
    def earliest_date(self) -> PartialDate | None:
        return earliest(self.dates.values())

    def fallback_keys(self) -> set[tuple[str, str, int]]:
        title = normalize_title(self.title)
        when = self.earliest_date
        if not title or when is None:
            return set()
        years = {d.year for d in self.dates.values()}
        return {(i.value, title, y) for i in self.issns for y in years}


def _crossref_item(obj: dict, tag: str, line: int, report: ParseReport) -> CrossrefItem:
    if "DOI" not in obj:
        raise ParseError("missing DOI")
    doi = normalize_doi(str(obj["DOI"]))
    dates = {}
    for key in CROSSREF_DATE_FIELDS:
        value = _date_from_crossref(obj.get(key))
        if value is not None:
            dates[key] = value
    licenses = []
    for i, lic in enumerate(obj.get("license") or []):
        if not isinstance(lic, dict) or not lic.get("URL"):
            report.warn(line, f"license {i} has no URL")
            continue
        delay = lic.get("delay-in-days")
        if delay is not None:
            try:
                delay = int(delay)
            except (TypeError, ValueError):
                raise ParseError(f"bad delay-in-days {delay!r}") from None
            if delay < 0:
                report.warn(line, f"negative delay-in-days {delay}; using start date instead")
                delay = None
        licenses.append(
            LicenseStatement(
                url=str(lic["URL"]),
                start_date=_date_from_crossref(lic.get("start")),
                delay_days=delay,
                content_version=ContentVersion.parse(lic.get("content-version")),
                ref=f"{tag}:{line}#license{i}",
            )
        )
    authors = []
    for a in obj.get("author") or []:
        if isinstance(a, dict):
            name = " ".join(p for p in (a.get("given"), a.get("family")) if p) or a.get("name", "")
            if name:
                authors.append(name)
    return CrossrefItem(
        doi=doi,
        dates=dates,
        issns=_issns(obj.get("ISSN"), report, line),
        licenses=tuple(licenses),
        title=_first_text(obj.get("title")),
        container_title=_first_text(obj.get("container-title")),
        document_type=str(obj.get("type") or ""),
        authors=tuple(authors),
        source_tag=tag,
        line=line,
    )


def parse_crossref_snapshot(path: str | Path, report: ParseReport | None = None) -> Iterator[CrossrefItem]:
    """Stream Crossref work objects (one per line) as :class:`CrossrefItem`."""
    tag = source_tag(path)
    report = report if report is not None else ParseReport()
    report.source = report.source or tag
    for line_no, obj in iter_ndjson(path, report):
        try:
            item = _crossref_item(obj, tag, line_no, report)
        except (ParseError, FormatError, ChecksumError) as exc:
            report.error(line_no, str(exc))
            continue
        report.yielded += 1
        yield item


@dataclass(frozen=True)
class LocationItem:
    doi: Doi | None
    locations: tuple[AccessLocation, ...]
    title: str = ""
    issns: frozenset[Issn] = frozenset()
    year: int | None = None
    source_tag: str = ""
    line: int = 0

    def fallback_keys(self) -> set[tuple[str, str, int]]:
        title = normalize_title(self.title)
        if not title or self.year is None:
            return set()
        return {(i.value, title, self.year) for i in self.issns}


def license_url(token: str | None) -> str | None:
    """Turn an Unpaywall-style license token into a URL; URLs pass through."""
    if not token:
        return None
    text = token.strip()
    if "/" in text or "." in text:
        return text
    key = text.lower()
    if key in _LICENSE_TOKENS:
        return _LICENSE_TOKENS[key]
    if key.startswith("cc-"):
        return f"https://creativecommons.org/licenses/{key[3:]}/"
    return text


def _deposit_date(loc: dict) -> PartialDate | None:
    for key in ("deposit_date", "oa_date", "updated", "date"):
        value = loc.get(key)
        if value:
            return PartialDate.parse(str(value))
    return None


def _location(loc: dict, tag: str, line: int, index: int) -> AccessLocation:
    url = loc.get("url") or loc.get("url_for_landing_page") or loc.get("url_for_pdf")
    if not url:
        raise ParseError(f"location {index} has no url")
    try:
        host_kind = HostKind(str(loc.get("host_type", "")).strip().lower())
    except ValueError:
        raise ParseError(f"location {index} has unknown host_type {loc.get('host_type')!r}") from None
    ref = f"{tag}:{line}#location{index}"
    lic = license_url(loc.get("license"))
    repo_hint = None
    if host_kind is HostKind.REPOSITORY:
        repo_hint = loc.get("repository_institution") or loc.get("endpoint_id") or None
    return AccessLocation(
        url=str(url),
        host_kind=host_kind,
        repo_hint=repo_hint,
        deposit_timestamp=_deposit_date(loc) if host_kind is HostKind.REPOSITORY else None,
        declared_version=DeclaredVersion.parse(loc.get("version")),
        license=LicenseStatement(url=lic, ref=ref + "/license") if lic else None,
        ref=ref,
    )


def _location_item(obj: dict, tag: str, line: int, report: ParseReport) -> LocationItem:
    doi = normalize_doi(str(obj["doi"])) if obj.get("doi") else None
    title = str(obj.get("title") or "")
    issns = _issns(obj.get("journal_issns") or obj.get("issns"), report, line)
    year = obj.get("year")
    if doi is None and not (title and issns and year):
        raise ParseError("missing doi (and no title/issn/year for fallback matching)")
    locations = []
    for i, loc in enumerate(obj.get("oa_locations") or []):
        if not isinstance(loc, dict):
            report.warn(line, f"location {i} is not an object")
            continue
        try:
            locations.append(_location(loc, tag, line, i))
        except ParseError as exc:
            report.warn(line, exc.reason)
    return LocationItem(
        doi=doi,
        locations=tuple(locations),
        title=title,
        issns=issns,
        year=int(year) if year else None,
        source_tag=tag,
        line=line,
    )


def parse_location_snapshot(path: str | Path, report: ParseReport | None = None) -> Iterator[LocationItem]:
    """Stream Unpaywall-shaped objects: ``doi`` plus ``oa_locations``."""
    tag = source_tag(path)
    report = report if report is not None else ParseReport()
    report.source = report.source or tag
    for line_no, obj in iter_ndjson(path, report):
        try:
            item = _location_item(obj, tag, line_no, report)
        except (ParseError, FormatError, ChecksumError, ValueError) as exc:
            report.error(line_no, str(exc))
            continue
        report.yielded += 1
        yield item
