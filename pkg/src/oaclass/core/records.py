"""Bibliographic records to classify."""

from __future__ import annotations

import enum
import re
import string
import unicodedata
from dataclasses import dataclass

from ..errors import ParseError
from .dates import PartialDate
from .identifiers import Doi, Issn, normalize_doi, normalize_issn


class DocumentType(enum.Enum):
    ARTICLE = "article"
    REVIEW = "review"
    PROCEEDINGS_PAPER = "proceedings_paper"

    @classmethod
    def parse(cls, token: str) -> DocumentType:
        key = re.sub(r"[\s\-]+", "_", token.strip().lower())
        aliases = {
            "journal_article": cls.ARTICLE,
            "proceedings": cls.PROCEEDINGS_PAPER,
            "proceedings_article": cls.PROCEEDINGS_PAPER,
            "conference_paper": cls.PROCEEDINGS_PAPER,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ParseError(f"unsupported document type {token!r}") from None


_PUNCT = str.maketrans({c: " " for c in string.punctuation})


def normalize_title(title: str) -> str:
    """Casefold, drop punctuation and collapse whitespace."""
    text = unicodedata.normalize("NFKC", title or "").casefold()
    text = "".join(" " if unicodedata.category(c).startswith("P") else c for c in text)
    text = text.translate(_PUNCT)
    return " ".join(text.split())


@dataclass(frozen=True)
class PublicationRecord:
    record_id: str
    publication_date: PartialDate
    doi: Doi | None = None
    issns: frozenset[Issn] = frozenset()
    journal_title: str = ""
    publication_title: str = ""
    document_type: DocumentType = DocumentType.ARTICLE
    authors: tuple[str, ...] = ()
    institution: str | None = None

    def __post_init__(self) -> None:
        if self.doi is None and not (self.issns and self.publication_title.strip()):
            raise ParseError(f"record {self.record_id!r} needs a DOI or ISSN plus title")

    @property
    def year(self) -> int:
        return self.publication_date.year

    def fallback_keys(self) -> set[tuple[str, str, int]]:
        title = normalize_title(self.publication_title)
        if not title:
            return set()
        return {(i.value, title, self.year) for i in self.issns}

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "doi": self.doi.value if self.doi else None,
            "issns": sorted(i.value for i in self.issns),
            "journal_title": self.journal_title,
            "title": self.publication_title,
            "published": self.publication_date.isoformat(),
            "document_type": self.document_type.value,
            "authors": list(self.authors),
            "institution": self.institution,
        }

    @classmethod
    def from_dict(cls, data: dict) -> PublicationRecord:
        doi = normalize_doi(data["doi"]) if data.get("doi") else None
        published = data.get("published")
        if not published:
            raise ParseError("record lacks a publication date")
        record_id = data.get("record_id") or (doi.value if doi else None)
        if not record_id:
            raise ParseError("record lacks both record_id and DOI")
        return cls(
            record_id=str(record_id),
            doi=doi,
            issns=frozenset(normalize_issn(i) for i in data.get("issns") or []),
            journal_title=data.get("journal_title") or "",
            publication_title=data.get("title") or "",
            publication_date=PartialDate.parse(str(published)),
            document_type=DocumentType.parse(data.get("document_type") or "article"),
            authors=tuple(data.get("authors") or ()),
            institution=data.get("institution"),
        )
