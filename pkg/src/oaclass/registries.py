"""Journal, repository and ISSN-L registries.

All three are read from UTF-8 CSV files with a fixed column contract:

* journals: ``issn,issn_l,title,oa_since_year[,embargo_months]``
* repositories: ``repo_id,kind,url_prefixes`` (prefixes separated by ``;``)
* ISSN-L links: ``issn,issn_l`` (comma or tab separated)

Registries are built once and then only read.
"""

from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator
from urllib.parse import urlsplit

from .core.identifiers import Issn, normalize_issn
from .errors import ChecksumError, ConflictError, FormatError, ParseError, UnknownKindError

logger = logging.getLogger(__name__)

JOURNAL_COLUMNS = ("issn", "issn_l", "title", "oa_since_year")
JOURNAL_COLUMNS_PMC = JOURNAL_COLUMNS + ("embargo_months",)
REPOSITORY_COLUMNS = ("repo_id", "kind", "url_prefixes")


class RegistrySource(enum.Enum):
    DOAJ_LIKE = "doaj"
    GOLD_LIST_LIKE = "gold_list"
    PMC_LIKE = "pmc"

    @classmethod
    def parse(cls, token: str) -> RegistrySource:
        key = token.strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "doaj": cls.DOAJ_LIKE, "doajlike": cls.DOAJ_LIKE,
            "goldlist": cls.GOLD_LIST_LIKE, "goldlistlike": cls.GOLD_LIST_LIKE,
            "issngoldoa": cls.GOLD_LIST_LIKE,
            "pmc": cls.PMC_LIKE, "pmclike": cls.PMC_LIKE,
        }
        if key not in aliases:
            raise ParseError(f"unknown registry source {token!r}")
        return aliases[key]


class RepoKind(enum.Enum):
    INSTITUTIONAL = "institutional"
    DISCIPLINARY = "disciplinary"
    AGGREGATOR = "aggregator"
    GOVERNMENTAL = "governmental"
    UNDETERMINED = "undetermined"
    UNREGISTERED = "unregistered"


# ---------------------------------------------------------------- helpers


@dataclass(frozen=True)
class Diagnostic:
    row: int
    message: str

    def __str__(self) -> str:
        return f"row {self.row}: {self.message}"


def _open_csv(path: str | Path) -> Iterator[tuple[int, dict[str, str]]]:
    """Yield ``(line_number, row)``; the header is line 1."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        sample = fh.read(4096)
        fh.seek(0)
        first = sample.splitlines()[0] if sample else ""
        delimiter = "\t" if "\t" in first and "," not in first else ","
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None:
            raise ParseError("empty file", row=1, source=str(path))
        reader.fieldnames = [f.strip().lower() for f in reader.fieldnames]
        for row in reader:
            if None in row:
                # trailing empty fields ("...,2019,") are harmless
                if any((v or "").strip() for v in row.pop(None)):
                    raise ParseError("too many fields", row=reader.line_num, source=str(path))
            if not any((v or "").strip() for v in row.values()):
                continue
            yield reader.line_num, {k: (v or "").strip() for k, v in row.items()}


def _require_columns(path, fieldnames: Iterable[str], required: Iterable[str]) -> None:
    missing = [c for c in required if c not in fieldnames]
    if missing:
        raise ParseError(f"missing column(s): {', '.join(missing)}", row=1, source=str(path))


def _header(path: str | Path) -> list[str]:
    with open(path, newline="", encoding="utf-8-sig") as fh:
        first = fh.readline()
    delimiter = "\t" if "\t" in first and "," not in first else ","
    return [c.strip().lower() for c in next(csv.reader([first], delimiter=delimiter), [])]


def _issn_at(raw: str, row: int, column: str) -> Issn:
    try:
        return normalize_issn(raw)
    except ChecksumError as exc:
        raise ChecksumError(f"row {row}: {column} {raw!r}: {exc}", issn=raw, row=row) from None
    except FormatError as exc:
        raise ParseError(f"{column}: {exc}", row=row) from None


def normalize_url(url: str) -> str:
    """Lowercase host, drop scheme/port/query/fragment, keep path without trailing slash."""
    text = url.strip()
    if "://" not in text:
        text = "//" + text.lstrip("/")
    parts = urlsplit(text)
    host = (parts.hostname or "").lower().rstrip(".")
    path = parts.path.rstrip("/")
    return host + path


def _split_prefix(normalized: str) -> tuple[str, str]:
    host, _, path = normalized.partition("/")
    return host, ("/" + path) if path else ""


def prefix_matches(prefix: str, normalized_url: str) -> bool:
    """Host-aware prefix test on normalized forms.

    The host must be equal or a subdomain of the prefix host, and the path
    must start with the prefix path at a segment boundary.
    """
    p_host, p_path = _split_prefix(prefix)
    u_host, u_path = _split_prefix(normalized_url)
    if not p_host:
        return False
    if p_host.endswith("."):
        # label prefix such as "sci-hub." matching every TLD
        labels = u_host.split(".")
        if not any(".".join(labels[i:]).startswith(p_host) for i in range(len(labels))):
            return False
    elif not (u_host == p_host or u_host.endswith("." + p_host)):
        return False
    if not p_path:
        return True
    return u_path == p_path or u_path.startswith(p_path + "/")


# ---------------------------------------------------------------- journals


@dataclass(frozen=True)
class JournalRegistryEntry:
    issns: frozenset[Issn]
    title: str
    source: RegistrySource
    issn_l: Issn | None = None
    oa_since_year: int | None = None
    pmc_embargo_months: int | None = None

    def __post_init__(self) -> None:
        if not self.issns:
            raise ValueError("journal entry needs at least one ISSN")
        if self.oa_since_year is not None and not 1800 <= self.oa_since_year <= 2100:
            raise ValueError(f"implausible oa_since_year {self.oa_since_year}")
        if self.pmc_embargo_months is not None:
            if self.source is not RegistrySource.PMC_LIKE:
                raise ValueError("embargo months only allowed for PMC-like registries")
            if self.pmc_embargo_months < 0:
                raise ValueError("embargo months must be >= 0")

    @property
    def key(self) -> Issn:
        return self.issn_l or min(self.issns)


class MatchVia(enum.Enum):
    DIRECT = "direct"
    ISSN_L = "issn_l"


@dataclass(frozen=True)
class FullOAMatch:
    entry: JournalRegistryEntry
    matched_via: MatchVia
    matched_issn: Issn

    def to_dict(self) -> dict:
        return {
            "issn": self.matched_issn.value,
            "matched_via": self.matched_via.value,
            "source": self.entry.source.value,
            "title": self.entry.title,
            "oa_since_year": self.entry.oa_since_year,
            "issn_l": self.entry.issn_l.value if self.entry.issn_l else None,
            "issns": sorted(i.value for i in self.entry.issns),
        }

    @classmethod
    def from_dict(cls, data: dict) -> FullOAMatch:
        entry = JournalRegistryEntry(
            issns=frozenset(normalize_issn(i) for i in data["issns"]),
            title=data.get("title", ""),
            source=RegistrySource(data["source"]),
            issn_l=normalize_issn(data["issn_l"]) if data.get("issn_l") else None,
            oa_since_year=data.get("oa_since_year"),
        )
        return cls(entry, MatchVia(data["matched_via"]), normalize_issn(data["issn"]))


class IssnLinkTable:
    """ISSN to linking-ISSN map. Every ISSN-L maps to itself."""

    def __init__(self, mapping: dict[Issn, Issn] | None = None):
        self._map: dict[Issn, Issn] = {}
        for issn, link in (mapping or {}).items():
            self.add(issn, link)

    def add(self, issn: Issn, link: Issn) -> None:
        current = self._map.get(issn)
        if current is not None and current != link:
            raise ConflictError(
                f"ISSN {issn} linked to both {current} and {link}", [issn.value]
            )
        own = self._map.get(link)
        if own is not None and own != link:
            raise ConflictError(f"ISSN-L {link} itself links to {own}", [link.value])
        self._map[issn] = link
        self._map[link] = link

    def resolve(self, issn: Issn) -> Issn:
        return self._map.get(issn, issn)

    def __contains__(self, issn: Issn) -> bool:
        return issn in self._map

    def __len__(self) -> int:
        return len(self._map)

    def items(self):
        return sorted(self._map.items())

    @classmethod
    def from_registry(cls, registry: JournalRegistry) -> IssnLinkTable:
        table = cls()
        for entry in registry.entries:
            if entry.issn_l is not None:
                for issn in entry.issns:
                    table.add(issn, entry.issn_l)
        return table


def load_link_table(path: str | Path) -> IssnLinkTable:
    _require_columns(path, _header(path), ("issn", "issn_l"))
    table = IssnLinkTable()
    for row_no, row in _open_csv(path):
        issn = _issn_at(row["issn"], row_no, "issn")
        link = _issn_at(row["issn_l"], row_no, "issn_l")
        table.add(issn, link)
    return table


def dump_link_table(table: IssnLinkTable, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["issn", "issn_l"])
        for issn, link in table.items():
            writer.writerow([issn.value, link.value])


@dataclass
class _JournalRow:
    row: int
    issn: Issn
    issn_l: Issn | None
    title: str
    oa_since_year: int | None
    embargo_months: int | None


class JournalRegistry:
    def __init__(self, entries: Iterable[JournalRegistryEntry], source: RegistrySource):
        self.source = source
        self.entries: list[JournalRegistryEntry] = sorted(entries, key=lambda e: e.key)
        self.by_issn: dict[Issn, JournalRegistryEntry] = {}
        claims: dict[Issn, list[JournalRegistryEntry]] = {}
        for entry in self.entries:
            for issn in entry.issns:
                claims.setdefault(issn, []).append(entry)
        conflicts = sorted(i.value for i, es in claims.items() if len(es) > 1)
        if conflicts:
            raise ConflictError(
                f"ISSN(s) claimed by more than one journal: {', '.join(conflicts)}", conflicts
            )
        self.by_issn = {i: es[0] for i, es in claims.items()}
        self._linked: tuple[IssnLinkTable, dict[Issn, JournalRegistryEntry]] | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JournalRegistry):
            return NotImplemented
        return self.source == other.source and self.entries == other.entries

    def linked_index(self, link_table: IssnLinkTable | None) -> dict[Issn, JournalRegistryEntry]:
        """Entries keyed by ISSN-L, from the entry's own issn_l and the link table."""
        if self._linked is not None and self._linked[0] is link_table:
            return self._linked[1]
        index: dict[Issn, JournalRegistryEntry] = {}
        for entry in self.entries:
            keys = {entry.issn_l} if entry.issn_l else set()
            if link_table is not None:
                keys |= {link_table.resolve(i) for i in entry.issns}
            for key in keys:
                index.setdefault(key, entry)
        self._linked = (link_table, index)
        return index


def _parse_journal_row(row_no: int, row: dict[str, str], source: RegistrySource, path) -> _JournalRow:
    if not row.get("issn"):
        raise ParseError("empty issn", row=row_no, source=str(path))
    issn = _issn_at(row["issn"], row_no, "issn")
    issn_l = _issn_at(row["issn_l"], row_no, "issn_l") if row.get("issn_l") else None
    year = None
    if row.get("oa_since_year"):
        try:
            year = int(row["oa_since_year"])
        except ValueError:
            raise ParseError(f"bad oa_since_year {row['oa_since_year']!r}", row=row_no,
                             source=str(path)) from None
        if not 1800 <= year <= 2100:
            raise ParseError(f"implausible oa_since_year {year}", row=row_no, source=str(path))
    embargo = None
    if row.get("embargo_months"):
        if source is not RegistrySource.PMC_LIKE:
            raise ParseError("embargo_months only allowed for PMC-like registries",
                             row=row_no, source=str(path))
        try:
            embargo = int(row["embargo_months"])
        except ValueError:
            embargo = -1
        if embargo < 0:
            raise ParseError(f"bad embargo_months {row['embargo_months']!r}", row=row_no,
                             source=str(path))
    return _JournalRow(row_no, issn, issn_l, row.get("title", ""), year, embargo)


def _parse_journal_rows(path: str | Path, source: RegistrySource) -> Iterator[_JournalRow]:
    _require_columns(path, _header(path), JOURNAL_COLUMNS)
    for row_no, row in _open_csv(path):
        yield _parse_journal_row(row_no, row, source, path)


def _merge_journal_rows(rows: list[_JournalRow], source: RegistrySource) -> list[JournalRegistryEntry]:
    """Group rows into serials.

    Rows sharing an ISSN, or sharing an ISSN-L, become one entry when their
    titles agree case-insensitively. Rows sharing an ISSN with different
    titles are a conflict.
    """
    groups: list[list[_JournalRow]] = []
    by_key: dict[tuple[str, Issn], list[_JournalRow]] = {}
    conflicts: set[str] = set()
    for r in rows:
        target = None
        for key in (("issn", r.issn), ("issn_l", r.issn_l)):
            if key[1] is None:
                continue
            group = by_key.get(key)
            if group is None:
                continue
            if group[0].title.casefold() == r.title.casefold():
                target = group
                break
            if key[0] == "issn":
                conflicts.add(r.issn.value)
        if target is None:
            target = []
            groups.append(target)
        target.append(r)
        for key in (("issn", r.issn), ("issn_l", r.issn_l)):
            if key[1] is not None:
                by_key.setdefault(key, target)
    if conflicts:
        raise ConflictError(
            f"ISSN(s) claimed by journals with different titles: {', '.join(sorted(conflicts))}",
            sorted(conflicts),
        )
    entries = []
    for group in groups:
        links = {r.issn_l for r in group if r.issn_l is not None}
        if len(links) > 1:
            raise ConflictError(
                f"journal {group[0].title!r} has several ISSN-Ls: "
                f"{', '.join(sorted(i.value for i in links))}",
                sorted(r.issn.value for r in group),
            )
        years = [r.oa_since_year for r in group if r.oa_since_year is not None]
        embargoes = [r.embargo_months for r in group if r.embargo_months is not None]
        entries.append(
            JournalRegistryEntry(
                issns=frozenset(r.issn for r in group),
                title=group[0].title,
                source=source,
                issn_l=next(iter(links)) if links else None,
                oa_since_year=min(years) if years else None,
                pmc_embargo_months=max(embargoes) if embargoes else None,
            )
        )
    return entries


def load_journal_registry(path: str | Path, source: RegistrySource | str) -> JournalRegistry:
    if isinstance(source, str):
        source = RegistrySource.parse(source)
    rows = list(_parse_journal_rows(path, source))
    registry = JournalRegistry(_merge_journal_rows(rows, source), source)
    logger.info("loaded %d journals from %s", len(registry), path)
    return registry


def dump_journal_registry(registry: JournalRegistry, path: str | Path) -> None:
    pmc = registry.source is RegistrySource.PMC_LIKE
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(JOURNAL_COLUMNS_PMC if pmc else JOURNAL_COLUMNS)
        for entry in registry.entries:
            for issn in sorted(entry.issns):
                row = [
                    issn.value,
                    entry.issn_l.value if entry.issn_l else "",
                    entry.title,
                    "" if entry.oa_since_year is None else entry.oa_since_year,
                ]
                if pmc:
                    row.append("" if entry.pmc_embargo_months is None else entry.pmc_embargo_months)
                writer.writerow(row)


def lookup_journal(
    issns: Iterable[Issn],
    year: int,
    registry: JournalRegistry,
    link_table: IssnLinkTable | None = None,
) -> FullOAMatch | None:
    """Find the full-OA entry for a record's ISSNs, honouring the transition year.

    Direct ISSN matches are tried first; ISSN-L resolution only when no
    direct match passes the year gate. PMC-like entries with a positive
    embargo never count as full OA.
    """

    def eligible(entry: JournalRegistryEntry) -> bool:
        if entry.pmc_embargo_months:
            return False
        return entry.oa_since_year is None or year >= entry.oa_since_year

    ordered = sorted(set(issns))
    for issn in ordered:
        entry = registry.by_issn.get(issn)
        if entry is not None and eligible(entry):
            return FullOAMatch(entry, MatchVia.DIRECT, issn)
    index = registry.linked_index(link_table)
    for issn in ordered:
        link = link_table.resolve(issn) if link_table is not None else issn
        entry = index.get(link)
        if entry is not None and eligible(entry):
            return FullOAMatch(entry, MatchVia.ISSN_L, issn)
    return None


def validate_journal_registry(path: str | Path, source: RegistrySource | str) -> list[Diagnostic]:
    """Collect every row-level problem instead of stopping at the first."""
    if isinstance(source, str):
        source = RegistrySource.parse(source)
    problems: list[Diagnostic] = []
    header = _header(path)
    missing = [c for c in JOURNAL_COLUMNS if c not in header]
    if missing:
        return [Diagnostic(1, f"missing column(s): {', '.join(missing)}")]
    good: list[_JournalRow] = []
    rows = _open_csv(path)
    while True:
        try:
            row_no, row = next(rows)
        except StopIteration:
            break
        except ParseError as exc:
            problems.append(Diagnostic(exc.row or 0, exc.reason))
            break
        try:
            good.append(_parse_journal_row(row_no, row, source, path))
        except ChecksumError as exc:
            problems.append(Diagnostic(row_no, str(exc).split(": ", 1)[-1]))
        except ParseError as exc:
            problems.append(Diagnostic(row_no, exc.reason))
    try:
        JournalRegistry(_merge_journal_rows(good, source), source)
    except ConflictError as exc:
        rows_hit = sorted({r.row for r in good if r.issn.value in exc.issns}) or [0]
        for row_no in rows_hit:
            problems.append(Diagnostic(row_no, str(exc)))
    return sorted(problems, key=lambda d: d.row)


# ------------------------------------------------------------ repositories


@dataclass(frozen=True)
class RepositoryEntry:
    repo_id: str
    url_prefixes: tuple[str, ...]
    kind: RepoKind

    def __post_init__(self) -> None:
        if not self.url_prefixes:
            raise ValueError(f"repository {self.repo_id!r} has no URL prefixes")
        if self.kind is RepoKind.UNREGISTERED:
            raise ValueError("'unregistered' is a lookup result, not a registry kind")
        for p in self.url_prefixes:
            if normalize_url(p) != p:
                raise ValueError(f"prefix {p!r} is not normalized")


@dataclass
class RepositoryRegistry:
    entries: list[RepositoryEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.entries = sorted(self.entries, key=lambda e: e.repo_id)
        index: list[tuple[str, RepositoryEntry]] = []
        for entry in self.entries:
            index.extend((p, entry) for p in entry.url_prefixes)
        # longest prefix first; ties broken by repo id then prefix for determinism
        index.sort(key=lambda pe: (-len(pe[0]), pe[1].repo_id, pe[0]))
        self._index = index
        self._by_host: dict[str, list[tuple[str, RepositoryEntry]]] = {}
        for prefix, entry in index:
            host = _split_prefix(prefix)[0]
            self._by_host.setdefault(host, []).append((prefix, entry))

    def match(self, url: str) -> RepositoryEntry | None:
        normalized = normalize_url(url)
        host = _split_prefix(normalized)[0]
        labels = host.split(".")
        candidates: list[tuple[str, RepositoryEntry]] = []
        for i in range(len(labels)):
            candidates.extend(self._by_host.get(".".join(labels[i:]), ()))
        candidates.sort(key=lambda pe: (-len(pe[0]), pe[1].repo_id, pe[0]))
        for prefix, entry in candidates:
            if prefix_matches(prefix, normalized):
                return entry
        return None


def _parse_kind(token: str, row: int, path) -> RepoKind:
    try:
        kind = RepoKind(token.strip().lower())
    except ValueError:
        kind = None
    if kind is None or kind is RepoKind.UNREGISTERED:
        raise UnknownKindError(f"unknown repository kind {token!r}", row=row, source=str(path))
    return kind


def _parse_repository_row(row_no: int, row: dict[str, str], path) -> RepositoryEntry:
    if not row.get("repo_id"):
        raise ParseError("empty repo_id", row=row_no, source=str(path))
    kind = _parse_kind(row.get("kind", ""), row_no, path)
    prefixes = tuple(
        dict.fromkeys(normalize_url(p) for p in row.get("url_prefixes", "").split(";") if p.strip())
    )
    prefixes = tuple(p for p in prefixes if p)
    if not prefixes:
        raise ParseError("no url prefixes", row=row_no, source=str(path))
    return RepositoryEntry(row["repo_id"], prefixes, kind)


def load_repository_registry(path: str | Path) -> RepositoryRegistry:
    _require_columns(path, _header(path), REPOSITORY_COLUMNS)
    entries = []
    seen: dict[str, int] = {}
    for row_no, row in _open_csv(path):
        entry = _parse_repository_row(row_no, row, path)
        if entry.repo_id in seen:
            raise ParseError(f"duplicate repo_id {entry.repo_id!r} (first on row {seen[entry.repo_id]})",
                             row=row_no, source=str(path))
        seen[entry.repo_id] = row_no
        entries.append(entry)
    return RepositoryRegistry(entries)


def validate_repository_registry(path: str | Path) -> list[Diagnostic]:
    header = _header(path)
    missing = [c for c in REPOSITORY_COLUMNS if c not in header]
    if missing:
        return [Diagnostic(1, f"missing column(s): {', '.join(missing)}")]
    problems = []
    seen: set[str] = set()
    try:
        for row_no, row in _open_csv(path):
            try:
                entry = _parse_repository_row(row_no, row, path)
            except ParseError as exc:
                problems.append(Diagnostic(row_no, exc.reason))
                continue
            if entry.repo_id in seen:
                problems.append(Diagnostic(row_no, f"duplicate repo_id {entry.repo_id!r}"))
            seen.add(entry.repo_id)
    except ParseError as exc:
        problems.append(Diagnostic(exc.row or 0, exc.reason))
    return problems


def dump_repository_registry(registry: RepositoryRegistry, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPOSITORY_COLUMNS)
        for entry in registry.entries:
            writer.writerow([entry.repo_id, entry.kind.value, ";".join(entry.url_prefixes)])


def classify_host(url: str, registry: RepositoryRegistry) -> RepoKind:
    entry = registry.match(url)
    return entry.kind if entry is not None else RepoKind.UNREGISTERED
