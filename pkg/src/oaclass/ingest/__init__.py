"""Evidence snapshot parsing and bundle assembly."""

from .bundles import EvidenceBundle, MatchMethod, Orphan, assemble_bundles, iter_bundles, record_from_crossref
from .evidence import AccessLocation, ContentVersion, DeclaredVersion, HostKind, LicenseStatement
from .oai import OaiPage, OaiRecord, parse_oai_dc, to_location_line
from .snapshots import (
    CrossrefItem,
    LocationItem,
    ParseIssue,
    ParseReport,
    iter_ndjson,
    license_url,
    parse_crossref_snapshot,
    parse_location_snapshot,
)

__all__ = [
    "AccessLocation", "ContentVersion", "CrossrefItem", "DeclaredVersion", "EvidenceBundle",
    "HostKind", "LicenseStatement", "LocationItem", "MatchMethod", "OaiPage", "OaiRecord",
    "Orphan", "ParseIssue", "ParseReport", "assemble_bundles", "iter_bundles", "iter_ndjson",
    "license_url", "parse_crossref_snapshot", "parse_location_snapshot", "parse_oai_dc",
    "record_from_crossref", "to_location_line",
]
