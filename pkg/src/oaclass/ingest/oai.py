"""OAI-PMH 2.0 ``ListRecords`` responses with ``oai_dc`` metadata."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from ..core.dates import PartialDate
from ..core.identifiers import normalize_doi
from ..errors import FormatError, ParseError, RecordError, XmlError
from .evidence import DeclaredVersion
from .snapshots import license_url

NS = {
    "oai": "http://www.openarchives.org/OAI/2.0/",
    "oai_dc": "http://www.openarchives.org/OAI/2.0/oai_dc/",
    "dc": "http://purl.org/dc/elements/1.1/",
}
_DC = "{%s}" % NS["dc"]

DC_FIELDS = ("title", "creator", "identifier", "date", "rights", "type", "source", "relation")


@dataclass(frozen=True)
class OaiRecord:
    identifier: str
    datestamp: str | None = None
    deleted: bool = False
    set_specs: tuple[str, ...] = ()
    dc: dict[str, tuple[str, ...]] = field(default_factory=dict, compare=False)

    @property
    def identifiers(self) -> tuple[str, ...]:
        return self.dc.get("identifier", ())

    @property
    def dates(self) -> tuple[str, ...]:
        return self.dc.get("date", ())

    @property
    def rights(self) -> tuple[str, ...]:
        return self.dc.get("rights", ())

    @property
    def types(self) -> tuple[str, ...]:
        return self.dc.get("type", ())

    def to_dict(self) -> dict:
        return {
            "identifier": self.identifier,
            "datestamp": self.datestamp,
            "deleted": self.deleted,
            "set_specs": list(self.set_specs),
            "dc": {k: list(v) for k, v in sorted(self.dc.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> OaiRecord:
        return cls(
            identifier=data["identifier"],
            datestamp=data.get("datestamp"),
            deleted=bool(data.get("deleted")),
            set_specs=tuple(data.get("set_specs") or ()),
            dc={k: tuple(v) for k, v in (data.get("dc") or {}).items()},
        )


@dataclass
class OaiPage:
    records: list[OaiRecord] = field(default_factory=list)
    errors: list[RecordError] = field(default_factory=list)
    resumption_token: str | None = None
    complete_list_size: int | None = None
    cursor: int | None = None
    error_code: str | None = None
    error_message: str = ""


def _text(el: ET.Element | None) -> str:
    return (el.text or "").strip() if el is not None else ""


def parse_oai_dc(xml: str | bytes) -> OaiPage:
    """Parse one ListRecords page.

    Deleted records come back with ``deleted=True`` and no DC fields. A
    record without a header identifier is reported in ``page.errors`` and
    skipped; the rest of the page is still returned.
    """
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as exc:
        raise XmlError(f"malformed OAI-PMH response: {exc}") from None
    if root.tag != "{%s}OAI-PMH" % NS["oai"]:
        raise XmlError(f"unexpected root element {root.tag}")
    page = OaiPage()
    error = root.find("oai:error", NS)
    if error is not None:
        page.error_code = error.get("code", "")
        page.error_message = _text(error)
        return page
    container = root.find("oai:ListRecords", NS)
    if container is None:
        return page
    for position, rec in enumerate(container.findall("oai:record", NS)):
        header = rec.find("oai:header", NS)
        identifier = _text(header.find("oai:identifier", NS)) if header is not None else ""
        if not identifier:
            page.errors.append(RecordError(f"record {position} has no header identifier"))
            continue
        deleted = header.get("status") == "deleted"
        dc: dict[str, tuple[str, ...]] = {}
        if not deleted:
            dc_root = rec.find("oai:metadata/oai_dc:dc", NS)
            if dc_root is not None:
                values: dict[str, list[str]] = {}
                for child in dc_root:
                    if child.tag.startswith(_DC):
                        text = _text(child)
                        if text:
                            values.setdefault(child.tag[len(_DC):], []).append(text)
                dc = {k: tuple(v) for k, v in values.items()}
        page.records.append(
            OaiRecord(
                identifier=identifier,
                datestamp=_text(header.find("oai:datestamp", NS)) or None,
                deleted=deleted,
                set_specs=tuple(_text(s) for s in header.findall("oai:setSpec", NS)),
                dc=dc,
            )
        )
    token = container.find("oai:resumptionToken", NS)
    if token is not None:
        page.resumption_token = _text(token) or None
        if token.get("completeListSize", "").isdigit():
            page.complete_list_size = int(token.get("completeListSize"))
        if token.get("cursor", "").isdigit():
            page.cursor = int(token.get("cursor"))
    return page


def _doi_of(values: tuple[str, ...]) -> str | None:
    for value in values:
        candidate = value.strip()
        if candidate.lower().startswith("info:doi/"):
            candidate = candidate[len("info:doi/"):]
        if "10." not in candidate:
            continue
        try:
            return normalize_doi(candidate).value
        except FormatError:
            continue
    return None


def to_location_line(record: OaiRecord, endpoint_id: str) -> dict | None:
    """Convert a DC record into the location-snapshot line shape.

    Returns None for deleted records and records without a DOI, which the
    bundler could not join on anyway.
    """
    if record.deleted:
        return None
    doi = _doi_of(record.identifiers)
    if doi is None:
        return None
    urls = [
        v for v in record.identifiers
        if v.lower().startswith(("http://", "https://")) and "doi.org/" not in v.lower()
    ]
    rights = [license_url(r) for r in record.rights]
    licensed = sorted((r for r in rights if r and "creativecommons.org" in r.lower()), key=str) or rights
    version = DeclaredVersion.UNKNOWN
    for t in record.types:
        version = DeclaredVersion.parse(t)
        if version is not DeclaredVersion.UNKNOWN:
            break
    deposit = None
    if record.datestamp:
        try:
            deposit = PartialDate.parse(record.datestamp).isoformat()
        except ParseError:
            deposit = None
    location = {
        "url": urls[0] if urls else record.identifier,
        "host_type": "repository",
        "endpoint_id": endpoint_id,
        "updated": deposit,
        "version": version.value,
        "license": licensed[0] if licensed else None,
        "pmh_id": record.identifier,
    }
    return {"doi": doi, "oa_locations": [location]}
