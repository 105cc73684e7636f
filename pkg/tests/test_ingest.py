import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oaclass.core import PartialDate, Precision, PublicationRecord, normalize_doi
from oaclass.core.identifiers import Issn
from oaclass.errors import XmlError
from oaclass.ingest import (
    AccessLocation,
    ContentVersion,
    DeclaredVersion,
    EvidenceBundle,
    HostKind,
    LicenseStatement,
    MatchMethod,
    ParseReport,
    assemble_bundles,
    iter_bundles,
    parse_crossref_snapshot,
    parse_location_snapshot,
    parse_oai_dc,
    to_location_line,
)
from oaclass.ingest.bundles import Orphan
from oaclass.registries import IssnLinkTable, JournalRegistry, JournalRegistryEntry, MatchVia, RegistrySource

CC_BY = "https://creativecommons.org/licenses/by/4.0/"


def ndjson(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("".join((line if isinstance(line, str) else json.dumps(line)) + "\n" for line in lines),
                    encoding="utf-8")
    return path


def crossref_obj(doi="10.1000/a", issued=(2018, 2), **extra):
    obj = {"DOI": doi, "ISSN": ["0378-5955"], "issued": {"date-parts": [list(issued)]},
           "title": ["A title"], "container-title": ["Hearing Research"], "type": "journal-article"}
    obj.update(extra)
    return obj


# ---------------------------------------------------------------- crossref


def test_crossref_license_mapping(tmp_path):
    path = ndjson(tmp_path, "cr.ndjson", [crossref_obj(license=[{"URL": CC_BY, "delay-in-days": 0}])])
    (item,) = parse_crossref_snapshot(path)
    (lic,) = item.licenses
    assert lic.delay_days == 0
    assert lic.content_version is ContentVersion.UNSPECIFIED
    assert lic.url == CC_BY
    assert lic.ref == "cr.ndjson:1#license0"


def test_crossref_month_precision(tmp_path):
    path = ndjson(tmp_path, "cr.ndjson", [crossref_obj(issued=(2018, 2))])
    (item,) = parse_crossref_snapshot(path)
    assert item.earliest_date == PartialDate(2018, 2)
    assert item.earliest_date.precision is Precision.MONTH


def test_crossref_earliest_of_print_and_online(tmp_path):
    obj = crossref_obj(issued=(2018, 3, 10))
    obj["published-online"] = {"date-parts": [[2018, 2, 20]]}
    obj["published-print"] = {"date-parts": [[2018, 3]]}
    (item,) = parse_crossref_snapshot(ndjson(tmp_path, "cr.ndjson", [obj]))
    assert item.earliest_date == PartialDate(2018, 2)


def test_crossref_skip_and_log(tmp_path):
    path = ndjson(tmp_path, "cr.ndjson", [
        crossref_obj("10.1000/a"),
        "not json",
        {"ISSN": []},
        crossref_obj("10.1000/b", license=[{"URL": CC_BY, "start": {"date-parts": [[2019, 2, 1]]},
                                             "content-version": "am"}]),
        "[1, 2]",
    ])
    report = ParseReport()
    items = list(parse_crossref_snapshot(path, report))
    assert [i.doi.value for i in items] == ["10.1000/a", "10.1000/b"]
    assert [e.line for e in report.errors] == [2, 3, 5]
    assert report.yielded + report.skipped == 5
    assert items[1].licenses[0].start_date == PartialDate(2019, 2, 1)
    assert items[1].licenses[0].content_version is ContentVersion.AM


def test_crossref_bad_issn_is_dropped_with_warning(tmp_path):
    path = ndjson(tmp_path, "cr.ndjson", [crossref_obj(ISSN=["1234-5678", "0378-5955"])])
    report = ParseReport()
    (item,) = parse_crossref_snapshot(path, report)
    assert item.issns == {Issn("0378-5955")}
    assert len(report.warnings) == 1


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(["good", "bad-json", "no-doi", "bad-doi", "blank"]), max_size=12))
def test_crossref_loss_accounting(tmp_path_factory, kinds):
    lines = []
    for i, kind in enumerate(kinds):
        lines.append({
            "good": json.dumps(crossref_obj(f"10.1000/{i}")),
            "bad-json": "{oops",
            "no-doi": json.dumps({"issued": {"date-parts": [[2018]]}}),
            "bad-doi": json.dumps(crossref_obj("11.x")),
            "blank": "",
        }[kind])
    path = ndjson(tmp_path_factory.mktemp("cr"), "cr.ndjson", lines)
    report = ParseReport()
    items = list(parse_crossref_snapshot(path, report))
    assert len(items) == report.yielded == kinds.count("good")
    assert report.yielded + report.skipped == len(kinds) - kinds.count("blank")


# --------------------------------------------------------------- locations


def test_location_mapping(tmp_path):
    path = ndjson(tmp_path, "upw.ndjson", [
        {"doi": "10.1000/A", "oa_locations": [
            {"url": "https://pub.uni-bielefeld.de/record/1", "host_type": "repository",
             "version": "acceptedVersion", "updated": "2019-05-01T00:00:00", "license": "cc-by",
             "repository_institution": "Bielefeld University"},
            {"url": "https://publisher.example/a", "host_type": "publisher", "version": "publishedVersion"},
        ]},
        {"doi": "10.1000/b"},
    ])
    first, second = parse_location_snapshot(path)
    repo, pub = first.locations
    assert first.doi.value == "10.1000/a"
    assert repo.host_kind is HostKind.REPOSITORY
    assert repo.declared_version is DeclaredVersion.ACCEPTED
    assert repo.deposit_timestamp == PartialDate(2019, 5, 1)
    assert repo.license.url == "https://creativecommons.org/licenses/by/"
    assert repo.repo_hint == "Bielefeld University"
    assert pub.host_kind is HostKind.PUBLISHER and pub.repo_hint is None
    assert second.locations == ()


def test_location_versions():
    assert DeclaredVersion.parse("submittedVersion") is DeclaredVersion.SUBMITTED
    assert DeclaredVersion.parse("info:eu-repo/semantics/publishedVersion") is DeclaredVersion.PUBLISHED
    assert DeclaredVersion.parse("draft") is DeclaredVersion.UNKNOWN
    assert DeclaredVersion.parse(None) is DeclaredVersion.UNKNOWN


def test_location_skip_and_log(tmp_path):
    path = ndjson(tmp_path, "upw.ndjson", [
        "{",
        {"oa_locations": []},
        {"doi": "10.1000/a", "oa_locations": [{"url": "x", "host_type": "mirror"}]},
    ])
    report = ParseReport()
    items = list(parse_location_snapshot(path, report))
    assert len(items) == 1 and items[0].locations == ()
    assert report.skipped == 2
    assert len(report.warnings) == 1


def test_publisher_location_has_no_repo_hint():
    with pytest.raises(ValueError):
        AccessLocation("https://x", HostKind.PUBLISHER, repo_hint="r")


def test_license_delay_nonnegative():
    with pytest.raises(ValueError):
        LicenseStatement(CC_BY, delay_days=-1)


# --------------------------------------------------------------------- OAI

OAI_HEAD = ('<?xml version="1.0" encoding="UTF-8"?>\n'
            '<OAI-PMH xmlns="http://www.openarchives.org/OAI/2.0/">'
            '<responseDate>2024-01-01T00:00:00Z</responseDate>'
            '<request verb="ListRecords">http://repo.example/oai</request>')


def dc_record(identifier, doi=None, rights=None, dc_type=None, datestamp="2019-05-01", deleted=False):
    status = ' status="deleted"' if deleted else ""
    header = (f"<header{status}><identifier>{identifier}</identifier>"
              f"<datestamp>{datestamp}</datestamp><setSpec>articles</setSpec></header>")
    if deleted:
        return f"<record>{header}</record>"
    fields = [f"<dc:identifier>https://repo.example/{identifier.rsplit(':', 1)[-1]}</dc:identifier>"]
    if doi:
        fields.append(f"<dc:identifier>https://doi.org/{doi}</dc:identifier>")
    if rights:
        fields.append(f"<dc:rights>{rights}</dc:rights>")
    if dc_type:
        fields.append(f"<dc:type>{dc_type}</dc:type>")
    fields.append("<dc:date>2019</dc:date>")
    return (f"<record>{header}<metadata>"
            '<oai_dc:dc xmlns:oai_dc="http://www.openarchives.org/OAI/2.0/oai_dc/" '
            'xmlns:dc="http://purl.org/dc/elements/1.1/">'
            + "".join(fields) + "</oai_dc:dc></metadata></record>")


def list_records(records, token=None, size=None):
    tail = ""
    if token is not None:
        attrs = f' completeListSize="{size}" cursor="0"' if size is not None else ""
        tail = f"<resumptionToken{attrs}>{token}</resumptionToken>"
    return OAI_HEAD + "<ListRecords>" + "".join(records) + tail + "</ListRecords></OAI-PMH>"


def test_oai_two_records_and_token():
    page = parse_oai_dc(list_records([dc_record("oai:r:1"), dc_record("oai:r:2")], token="tok-1", size=5))
    assert [r.identifier for r in page.records] == ["oai:r:1", "oai:r:2"]
    assert page.resumption_token == "tok-1"
    assert page.complete_list_size == 5
    assert page.records[0].set_specs == ("articles",)


def test_oai_deleted_record():
    page = parse_oai_dc(list_records([dc_record("oai:r:1", deleted=True)]))
    (rec,) = page.records
    assert rec.deleted and rec.dc == {}
    assert page.resumption_token is None
    assert to_location_line(rec, "repo") is None


def test_oai_rights_captured():
    rights = "http://creativecommons.org/licenses/by/4.0"
    page = parse_oai_dc(list_records([dc_record("oai:r:1", doi="10.1000/X", rights=rights,
                                                dc_type="info:eu-repo/semantics/submittedVersion")]))
    (rec,) = page.records
    assert rec.rights == (rights,)
    line = to_location_line(rec, "repo.example")
    assert line["doi"] == "10.1000/x"
    (loc,) = line["oa_locations"]
    assert loc["license"] == rights
    assert loc["version"] == "submittedVersion"
    assert loc["updated"] == "2019-05-01"
    assert loc["url"] == "https://repo.example/1"


def test_oai_malformed():
    with pytest.raises(XmlError):
        parse_oai_dc("<OAI-PMH><ListRecords>")
    with pytest.raises(XmlError):
        parse_oai_dc("<html/>")


def test_oai_missing_identifier_is_record_error():
    broken = "<record><header><datestamp>2019-01-01</datestamp></header></record>"
    page = parse_oai_dc(list_records([broken, dc_record("oai:r:2")]))
    assert [r.identifier for r in page.records] == ["oai:r:2"]
    assert len(page.errors) == 1


def test_oai_error_code():
    page = parse_oai_dc(OAI_HEAD + '<error code="noRecordsMatch">none</error></OAI-PMH>')
    assert page.error_code == "noRecordsMatch"
    assert page.records == []


# ----------------------------------------------------------------- bundles


def record(record_id="r1", doi="10.1000/a", issns=("0378-5955",), title="A title", published=(2018, 2)):
    return PublicationRecord(
        record_id=record_id,
        publication_date=PartialDate(*published),
        doi=normalize_doi(doi) if doi else None,
        issns=frozenset(Issn(i) for i in issns),
        publication_title=title,
    )


def test_bundle_joins_both_sources(tmp_path):
    cr = ndjson(tmp_path, "cr.ndjson", [crossref_obj(license=[{"URL": CC_BY, "delay-in-days": 0}])])
    upw = ndjson(tmp_path, "upw.ndjson", [{"doi": "10.1000/A", "oa_locations": [
        {"url": "https://arxiv.org/abs/1", "host_type": "repository", "version": "submittedVersion"}]}])
    (bundle,) = assemble_bundles([record()], parse_crossref_snapshot(cr), parse_location_snapshot(upw))
    assert bundle.source_tags == ("cr.ndjson", "upw.ndjson")
    assert len(bundle.publisher_licenses) == 1 and len(bundle.locations) == 1
    assert bundle.match_method is MatchMethod.DOI


def test_bundle_without_evidence():
    (bundle,) = assemble_bundles([record()])
    assert bundle.publisher_licenses == () and bundle.locations == ()
    assert bundle.match_method is MatchMethod.NONE
    assert bundle.source_tags == ()


def test_bundle_fallback_match(tmp_path):
    upw = ndjson(tmp_path, "upw.ndjson", [{"title": "A  Title!", "journal_issns": "0378-5955", "year": 2018,
                                           "oa_locations": [{"url": "https://arxiv.org/abs/1",
                                                             "host_type": "repository"}]}])
    (bundle,) = assemble_bundles([record(doi=None)], (), parse_location_snapshot(upw))
    assert bundle.match_method is MatchMethod.FALLBACK
    assert len(bundle.locations) == 1


def test_bundle_fallback_requires_same_year(tmp_path):
    upw = ndjson(tmp_path, "upw.ndjson", [{"title": "A title", "journal_issns": "0378-5955", "year": 2019,
                                           "oa_locations": []}])
    orphans = []
    (bundle,) = assemble_bundles([record(doi=None)], (), parse_location_snapshot(upw), orphans=orphans)
    assert bundle.match_method is MatchMethod.NONE
    assert orphans == [Orphan("0378-5955|a title|2019", "upw.ndjson", "no matching record")]


def test_bundle_orphans(tmp_path):
    cr = ndjson(tmp_path, "cr.ndjson", [crossref_obj("10.1000/a"), crossref_obj("10.1000/zzz")])
    orphans = []
    bundles = list(assemble_bundles([record()], parse_crossref_snapshot(cr), orphans=orphans))
    assert len(bundles) == 1
    assert [o.evidence_key for o in orphans] == ["10.1000/zzz"]


def test_bundle_earliest_date_and_full_oa(tmp_path):
    obj = crossref_obj(issued=(2016, 3))
    obj["published-online"] = {"date-parts": [[2015, 12, 20]]}
    cr = ndjson(tmp_path, "cr.ndjson", [obj])
    entry = JournalRegistryEntry(frozenset({Issn("1878-5891")}), "Hearing Research",
                                 RegistrySource.DOAJ_LIKE, issn_l=Issn("0378-5955"), oa_since_year=2016)
    registry = JournalRegistry([entry], RegistrySource.DOAJ_LIKE)
    links = IssnLinkTable({Issn("1878-5891"): Issn("0378-5955")})
    (bundle,) = assemble_bundles([record(published=(2016, 3))], parse_crossref_snapshot(cr),
                                 journal_registry=registry, link_table=links)
    assert bundle.publication_date == PartialDate(2015, 12)
    assert bundle.full_oa_match is None
    (later,) = assemble_bundles([record(published=(2017,))], journal_registry=registry, link_table=links)
    assert later.full_oa_match.matched_via is MatchVia.ISSN_L
    assert later.issn_l == Issn("0378-5955")


def test_bundle_one_per_record_and_round_trip(tmp_path):
    cr = ndjson(tmp_path, "cr.ndjson", [crossref_obj("10.1000/a", license=[{"URL": CC_BY, "delay-in-days": 7}])])
    records = [record("r1"), record("r2", doi="10.1000/b"), record("r3", doi=None)]
    bundles = list(assemble_bundles(records, parse_crossref_snapshot(cr), pmc_embargoes={Issn("0378-5955"): 6}))
    assert [b.record.record_id for b in bundles] == ["r1", "r2", "r3"]
    assert bundles[0].pmc_embargo_months == 6
    out = tmp_path / "bundles.ndjson"
    out.write_text("".join(b.to_json() + "\n" for b in bundles), encoding="utf-8")
    again = list(iter_bundles(out))
    assert again == bundles
    assert [b.to_json() for b in again] == [b.to_json() for b in bundles]
    assert isinstance(again[0], EvidenceBundle)
