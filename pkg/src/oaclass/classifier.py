"""Decision rules mapping an evidence bundle to an OA classification.

Gold rules are tried in order and the first that fires wins:

1. the journal matched a full-OA registry entry -> ``gold_full``
2. an open publisher license effective within the grace period -> ``gold_hybrid``
3. the journal is a known delayed-OA journal, or an open publisher license
   only takes effect after the grace period, or the PMC list gives the
   journal a positive embargo -> ``gold_delayed``

Every lawful repository copy adds one Green label (timing x host). With no
label at all the record is ``non_oa``.
"""

from __future__ import annotations

import fnmatch
import json
import logging
import re
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .core.dates import compare, days_between
from .core.identifiers import Issn
from .core.taxonomy import (
    CLASS_ORDER,
    DEFAULT_PRECEDENCE,
    AccessMode,
    EvidenceRef,
    Family,
    Host,
    OAClass,
    OAClassification,
    Timing,
)
from .errors import ParseError
from .ingest.bundles import EvidenceBundle
from .ingest.evidence import AccessLocation, DeclaredVersion, HostKind, LicenseStatement
from .registries import RepoKind, RepositoryRegistry, classify_host, normalize_url, prefix_matches

logger = logging.getLogger(__name__)

DEFAULT_LICENSE_PATTERNS = (
    "creativecommons.org/licenses/*",
    "creativecommons.org/publicdomain/*",
)
DEFAULT_DENYLIST = ("researchgate.net", "academia.edu", "sci-hub.")

_SCHEME = re.compile(r"^[a-z][a-z0-9+.\-]*://")


@dataclass(frozen=True)
class ClassifierConfig:
    immediate_grace_days: int = 30
    open_license_patterns: tuple[str, ...] = DEFAULT_LICENSE_PATTERNS
    unlawful_host_denylist: tuple[str, ...] = DEFAULT_DENYLIST
    precedence: tuple[OAClass, ...] = DEFAULT_PRECEDENCE
    delayed_journal_set: frozenset[Issn] = frozenset()
    preprint_on_equal_date: bool = True

    def __post_init__(self) -> None:
        if self.immediate_grace_days < 0:
            raise ValueError("immediate_grace_days must be >= 0")
        if sorted(self.precedence, key=CLASS_ORDER.index) != list(CLASS_ORDER):
            raise ValueError("precedence must list every OA class exactly once")
        object.__setattr__(
            self, "unlawful_host_denylist",
            tuple(_denylist_entry(h) for h in self.unlawful_host_denylist),
        )

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], delayed_journal_set: Iterable[Issn] = ()) -> ClassifierConfig:
        kwargs: dict[str, Any] = {}
        if "immediate_grace_days" in data:
            kwargs["immediate_grace_days"] = int(data["immediate_grace_days"])
        for key in ("open_license_patterns", "unlawful_host_denylist"):
            if key in data:
                if not isinstance(data[key], list):
                    raise ParseError(f"{key} must be a list")
                kwargs[key] = tuple(str(v) for v in data[key])
        if "precedence" in data:
            try:
                kwargs["precedence"] = tuple(OAClass.from_code(c) for c in data["precedence"])
            except ValueError as exc:
                raise ParseError(str(exc)) from None
        if "preprint_on_equal_date" in data:
            kwargs["preprint_on_equal_date"] = bool(data["preprint_on_equal_date"])
        try:
            return cls(delayed_journal_set=frozenset(delayed_journal_set), **kwargs)
        except ValueError as exc:
            raise ParseError(str(exc)) from None


def _denylist_entry(host: str) -> str:
    if host.strip().endswith("."):
        return host.strip().lower()
    return normalize_url(host)


# --------------------------------------------------------------- primitives


def _normalize_license(url: str) -> str:
    text = _SCHEME.sub("", url.strip().lower())
    if text.startswith("www."):
        text = text[4:]
    return text.rstrip("/")


def match_license(url: str | None, patterns: Iterable[str] = DEFAULT_LICENSE_PATTERNS) -> bool:
    """True when ``url`` matches one of the glob ``patterns`` after normalization."""
    if not url:
        return False
    normalized = _normalize_license(url)
    return any(fnmatch.fnmatchcase(normalized, _normalize_license(p)) for p in patterns)


def effective_delay(license: LicenseStatement, published) -> int:
    """Days between publication and the license taking effect.

    ``delay_days`` wins when present; otherwise the start date is compared
    with the publication date at their coarsest common precision. A license
    with neither is taken to apply from publication.
    """
    if license.delay_days is not None:
        return license.delay_days
    if license.start_date is not None:
        return days_between(published, license.start_date)
    return 0


def is_denylisted(url: str, denylist: Iterable[str]) -> bool:
    normalized = normalize_url(url)
    return any(prefix_matches(entry, normalized) for entry in denylist)


_HOST_OF_KIND = {RepoKind.INSTITUTIONAL: Host.INSTITUTIONAL, RepoKind.DISCIPLINARY: Host.DISCIPLINARY}

_TIMING_OF_VERSION = {
    DeclaredVersion.SUBMITTED: Timing.PREPRINT,
    DeclaredVersion.ACCEPTED: Timing.POSTPRINT,
    DeclaredVersion.PUBLISHED: Timing.POSTPRINT,
    DeclaredVersion.UNKNOWN: Timing.UNKNOWN,
}


def green_timing(location: AccessLocation, published, preprint_on_equal_date: bool = True) -> Timing:
    if location.deposit_timestamp is None:
        return _TIMING_OF_VERSION[location.declared_version]
    order = compare(location.deposit_timestamp, published)
    if order < 0 or (order == 0 and preprint_on_equal_date):
        return Timing.PREPRINT
    return Timing.POSTPRINT


# ---------------------------------------------------------------- decisions


@dataclass(frozen=True)
class GoldDecision:
    label: OAClass | None = None
    libre: bool = False
    refs: tuple[EvidenceRef, ...] = ()
    diagnostics: tuple[str, ...] = ()

    @property
    def access_contribution(self) -> AccessMode | None:
        if self.label is None:
            return None
        return AccessMode.LIBRE if self.libre else AccessMode.GRATIS


@dataclass(frozen=True)
class GreenDecision:
    labels: frozenset[OAClass] = frozenset()
    libre: bool = False
    refs: tuple[EvidenceRef, ...] = ()
    diagnostics: tuple[str, ...] = ()


def publisher_licenses(bundle: EvidenceBundle) -> list[LicenseStatement]:
    licenses = list(bundle.publisher_licenses)
    for loc in bundle.locations:
        if loc.host_kind is HostKind.PUBLISHER and loc.license is not None:
            licenses.append(loc.license)
    return licenses


def classify_gold(bundle: EvidenceBundle, config: ClassifierConfig) -> GoldDecision:
    published = bundle.publication_date
    grace = config.immediate_grace_days
    open_licenses = [
        lic for lic in publisher_licenses(bundle)
        if match_license(lic.url, config.open_license_patterns)
    ]
    immediate = [lic for lic in open_licenses if effective_delay(lic, published) <= grace]
    late = [lic for lic in open_licenses if effective_delay(lic, published) > grace]
    delayed_journals = sorted(bundle.journal_issns & config.delayed_journal_set)
    pmc_embargo = bool(bundle.pmc_embargo_months and bundle.pmc_embargo_months > 0)
    libre = bool(open_licenses)

    delay_refs: list[str] = [lic.ref for lic in late]
    delay_refs += [f"delayed-registry:{i.value}" for i in delayed_journals]
    if pmc_embargo:
        delay_refs.append(f"pmc:{bundle.pmc_issn.value if bundle.pmc_issn else ''}"
                          f"#embargo={bundle.pmc_embargo_months}m")

    if bundle.full_oa_match is not None:
        label = OAClass.GOLD_FULL
        match = bundle.full_oa_match
        refs = [f"journal-registry:{match.entry.source.value}:{match.matched_issn.value}"
                f"#{match.matched_via.value}"]
        refs += [lic.ref for lic in open_licenses]
        diagnostics = ()
        if delay_refs:
            diagnostics = (
                "contradiction: full-OA registry match overrides delay evidence "
                f"({', '.join(delay_refs)})",
            )
            logger.info("%s: %s", bundle.record.record_id, diagnostics[0])
        return GoldDecision(label, libre, tuple(EvidenceRef(label, r) for r in refs), diagnostics)

    if immediate:
        label = OAClass.GOLD_HYBRID
        return GoldDecision(label, True, tuple(EvidenceRef(label, lic.ref) for lic in immediate))

    if delay_refs:
        label = OAClass.GOLD_DELAYED
        return GoldDecision(label, libre, tuple(EvidenceRef(label, r) for r in delay_refs))

    diagnostics = ()
    free_copies = [loc.ref for loc in bundle.locations if loc.host_kind is HostKind.PUBLISHER]
    if free_copies:
        diagnostics = (
            "bronze: publisher-hosted copy without open license or journal-level evidence "
            f"({', '.join(free_copies)}); no gold class assigned",
        )
    return GoldDecision(None, False, (), diagnostics)


def classify_green(
    bundle: EvidenceBundle, repo_registry: RepositoryRegistry, config: ClassifierConfig
) -> GreenDecision:
    published = bundle.publication_date
    labels: set[OAClass] = set()
    refs: list[EvidenceRef] = []
    diagnostics: list[str] = []
    libre = False
    for loc in bundle.locations:
        if loc.host_kind is not HostKind.REPOSITORY:
            continue
        if is_denylisted(loc.url, config.unlawful_host_denylist):
            diagnostics.append(f"ignored unlawful host: {loc.ref}")
            continue
        host = _HOST_OF_KIND.get(classify_host(loc.url, repo_registry), Host.OTHER)
        timing = green_timing(loc, published, config.preprint_on_equal_date)
        label = OAClass.green(timing, host)
        labels.add(label)
        refs.append(EvidenceRef(label, loc.ref))
        if loc.license is not None and match_license(loc.license.url, config.open_license_patterns):
            libre = True
    return GreenDecision(frozenset(labels), libre, tuple(refs), tuple(diagnostics))


def classify(
    bundle: EvidenceBundle, repo_registry: RepositoryRegistry, config: ClassifierConfig | None = None
) -> OAClassification:
    config = config or ClassifierConfig()
    gold = classify_gold(bundle, config)
    green = classify_green(bundle, repo_registry, config)
    labels = set(green.labels)
    if gold.label is not None:
        labels.add(gold.label)
    diagnostics = gold.diagnostics + green.diagnostics
    if not labels:
        return OAClassification(
            labels=frozenset({OAClass.NON_OA}),
            primary=OAClass.NON_OA,
            access_mode=AccessMode.CLOSED,
            diagnostics=diagnostics,
        )
    primary = next(c for c in config.precedence if c in labels)
    libre = (gold.label is not None and gold.libre) or green.libre
    refs = sorted(set(gold.refs + green.refs), key=lambda r: (CLASS_ORDER.index(r.label), r.ref))
    return OAClassification(
        labels=frozenset(labels),
        primary=primary,
        access_mode=AccessMode.LIBRE if libre else AccessMode.GRATIS,
        evidence_refs=tuple(refs),
        diagnostics=diagnostics,
    )


# ------------------------------------------------------------------ output


def classification_row(bundle: EvidenceBundle, result: OAClassification) -> dict:
    """One classification NDJSON row: record metadata plus the decision."""
    record = bundle.record
    publisher_open = any(c.family is Family.GOLD for c in result.labels) or any(
        loc.host_kind is HostKind.PUBLISHER for loc in bundle.locations
    )
    row = {
        "record_id": record.record_id,
        "doi": record.doi.value if record.doi else None,
        "issns": sorted(i.value for i in record.issns),
        "issn_l": bundle.issn_l.value if bundle.issn_l else None,
        "journal_title": record.journal_title,
        "published": bundle.publication_date.isoformat(),
        "year": bundle.publication_date.year,
        "document_type": record.document_type.value,
        "institution": record.institution,
        "publisher_open": publisher_open,
    }
    row.update(result.to_dict())
    return row


def dumps_row(row: dict) -> str:
    return json.dumps(row, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
