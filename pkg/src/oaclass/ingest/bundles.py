"""Joining records with evidence into one bundle per record."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping

from ..core.dates import PartialDate, earliest
from ..core.identifiers import Doi, Issn, normalize_issn
from ..core.records import DocumentType, PublicationRecord
from ..registries import FullOAMatch, IssnLinkTable, JournalRegistry, lookup_journal
from .evidence import AccessLocation, LicenseStatement
from .snapshots import CrossrefItem, LocationItem


class MatchMethod(enum.Enum):
    DOI = "doi"
    FALLBACK = "fallback"
    NONE = "none"


@dataclass(frozen=True)
class EvidenceBundle:
    record: PublicationRecord
    publisher_licenses: tuple[LicenseStatement, ...] = ()
    locations: tuple[AccessLocation, ...] = ()
    full_oa_match: FullOAMatch | None = None
    source_tags: tuple[str, ...] = ()
    match_method: MatchMethod = MatchMethod.NONE
    earliest_date: PartialDate | None = None
    linking_issns: frozenset[Issn] = frozenset()
    pmc_embargo_months: int | None = None
    pmc_issn: Issn | None = None

    @property
    def publication_date(self) -> PartialDate:
        """Earliest known publication date of the record."""
        return self.earliest_date or self.record.publication_date

    @property
    def journal_issns(self) -> frozenset[Issn]:
        return self.record.issns | self.linking_issns

    @property
    def issn_l(self) -> Issn | None:
        """Journal key: the lowest ISSN-L, else the lowest plain ISSN."""
        if self.full_oa_match is not None and self.full_oa_match.entry.issn_l is not None:
            return self.full_oa_match.entry.issn_l
        pool = self.linking_issns or self.record.issns
        return min(pool) if pool else None

    def to_dict(self) -> dict:
        return {
            "record": self.record.to_dict(),
            "publisher_licenses": [lic.to_dict() for lic in self.publisher_licenses],
            "locations": [loc.to_dict() for loc in self.locations],
            "full_oa_match": self.full_oa_match.to_dict() if self.full_oa_match else None,
            "source_tags": list(self.source_tags),
            "match_method": self.match_method.value,
            "earliest_date": self.earliest_date.isoformat() if self.earliest_date else None,
            "linking_issns": sorted(i.value for i in self.linking_issns),
            "pmc_embargo_months": self.pmc_embargo_months,
            "pmc_issn": self.pmc_issn.value if self.pmc_issn else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> EvidenceBundle:
        return cls(
            record=PublicationRecord.from_dict(data["record"]),
            publisher_licenses=tuple(LicenseStatement.from_dict(d) for d in data.get("publisher_licenses", [])),
            locations=tuple(AccessLocation.from_dict(d) for d in data.get("locations", [])),
            full_oa_match=FullOAMatch.from_dict(data["full_oa_match"]) if data.get("full_oa_match") else None,
            source_tags=tuple(data.get("source_tags", [])),
            match_method=MatchMethod(data.get("match_method", "none")),
            earliest_date=PartialDate.parse(data["earliest_date"]) if data.get("earliest_date") else None,
            linking_issns=frozenset(normalize_issn(i) for i in data.get("linking_issns", [])),
            pmc_embargo_months=data.get("pmc_embargo_months"),
            pmc_issn=normalize_issn(data["pmc_issn"]) if data.get("pmc_issn") else None,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class Orphan:
    evidence_key: str
    source_tag: str
    reason: str


def _document_type(crossref_type: str) -> DocumentType:
    if "proceedings" in crossref_type:
        return DocumentType.PROCEEDINGS_PAPER
    if "review" in crossref_type:
        return DocumentType.REVIEW
    return DocumentType.ARTICLE


def record_from_crossref(item: CrossrefItem) -> PublicationRecord | None:
    """Derive a record when no separate record list is supplied."""
    when = item.earliest_date
    if when is None:
        return None
    return PublicationRecord(
        record_id=item.doi.value,
        doi=item.doi,
        issns=item.issns,
        journal_title=item.container_title,
        publication_title=item.title,
        publication_date=when,
        document_type=_document_type(item.document_type),
        authors=item.authors,
    )


@dataclass
class _Index:
    by_doi: dict[Doi, list] = field(default_factory=dict)
    by_key: dict[tuple[str, str, int], list] = field(default_factory=dict)
    items: list = field(default_factory=list)
    used: set[int] = field(default_factory=set)

    def add(self, item) -> None:
        pos = len(self.items)
        self.items.append(item)
        if item.doi is not None:
            self.by_doi.setdefault(item.doi, []).append(pos)
        for key in item.fallback_keys():
            self.by_key.setdefault(key, []).append(pos)

    def find(self, record: PublicationRecord) -> tuple[list, MatchMethod]:
        if record.doi is not None:
            hits = self.by_doi.get(record.doi, [])
            method = MatchMethod.DOI
        else:
            hits = sorted({p for k in record.fallback_keys() for p in self.by_key.get(k, [])})
            method = MatchMethod.FALLBACK
        self.used.update(hits)
        return [self.items[p] for p in hits], method


def _evidence_key(item) -> str:
    if item.doi is not None:
        return item.doi.value
    keys = sorted(item.fallback_keys())
    return "|".join(map(str, keys[0])) if keys else f"line:{item.line}"


def assemble_bundles(
    records: Iterable[PublicationRecord],
    crossref: Iterable[CrossrefItem] = (),
    locations: Iterable[LocationItem] = (),
    journal_registry: JournalRegistry | None = None,
    link_table: IssnLinkTable | None = None,
    pmc_embargoes: Mapping[Issn, int] | None = None,
    orphans: list[Orphan] | None = None,
) -> Iterator[EvidenceBundle]:
    """Yield exactly one bundle per record, in record order.

    Evidence is indexed up front. Records with a DOI join on it; records
    without one join on (ISSN, normalized title, year). Evidence never
    claimed by a record is appended to ``orphans`` once the records are
    exhausted.
    """
    cr_index, loc_index = _Index(), _Index()
    for item in crossref:
        cr_index.add(item)
    for item in locations:
        loc_index.add(item)

    for record in records:
        cr_hits, method = cr_index.find(record)
        loc_hits, _ = loc_index.find(record)
        matched = bool(cr_hits or loc_hits)
        tags = sorted({i.source_tag for i in cr_hits} | {i.source_tag for i in loc_hits})
        licenses = tuple(lic for item in cr_hits for lic in item.licenses)
        locs = tuple(loc for item in loc_hits for loc in item.locations)
        dates = [record.publication_date]
        for item in cr_hits:
            dates.extend(item.dates.values())
        first = earliest(dates)
        issns = set(record.issns)
        for item in cr_hits:
            issns |= item.issns
        links = frozenset(link_table.resolve(i) for i in issns) if link_table is not None else frozenset()
        full = None
        if journal_registry is not None:
            full = lookup_journal(issns, first.year, journal_registry, link_table)
        pmc_months = pmc_issn = None
        if pmc_embargoes:
            for issn in sorted(issns | links):
                if issn in pmc_embargoes:
                    pmc_months, pmc_issn = pmc_embargoes[issn], issn
                    break
        yield EvidenceBundle(
            record=record if record.issns == issns else replace(record, issns=frozenset(issns)),
            publisher_licenses=licenses,
            locations=locs,
            full_oa_match=full,
            source_tags=tuple(tags),
            match_method=method if matched else MatchMethod.NONE,
            earliest_date=first,
            linking_issns=links,
            pmc_embargo_months=pmc_months,
            pmc_issn=pmc_issn,
        )

    if orphans is not None:
        for index in (cr_index, loc_index):
            for pos, item in enumerate(index.items):
                if pos not in index.used:
                    orphans.append(Orphan(_evidence_key(item), item.source_tag, "no matching record"))


def iter_bundles(path) -> Iterator[EvidenceBundle]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield EvidenceBundle.from_dict(json.loads(line))
