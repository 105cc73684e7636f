"""Domain types: identifiers, dates, records and the OA class scheme."""

from .dates import PartialDate, Precision, add_months, compare, days_between, earliest
from .identifiers import Doi, Issn, is_valid_issn, issn_check_digit, normalize_doi, normalize_issn
from .lexicon import LegacyLabel, LegacyName, legacy_lexicon, lookup
from .records import DocumentType, PublicationRecord, normalize_title
from .taxonomy import (
    CLASS_ORDER,
    DEFAULT_PRECEDENCE,
    AccessMode,
    EvidenceRef,
    Family,
    GoldKind,
    Host,
    OAClass,
    OAClassification,
    Timing,
    sort_labels,
)

__all__ = [
    "AccessMode", "CLASS_ORDER", "DEFAULT_PRECEDENCE", "DocumentType", "Doi",
    "EvidenceRef", "Family", "GoldKind", "Host", "Issn", "LegacyLabel", "LegacyName",
    "OAClass", "OAClassification", "PartialDate", "Precision", "PublicationRecord",
    "Timing", "add_months", "compare", "days_between", "earliest", "is_valid_issn",
    "issn_check_digit", "legacy_lexicon", "lookup", "normalize_doi", "normalize_issn",
    "normalize_title", "sort_labels",
]
