"""Bundle builders shared by the classifier, oracle and acceptance tests."""

from __future__ import annotations

import random

from oaclass.core import PartialDate, PublicationRecord, normalize_doi
from oaclass.core.identifiers import Issn
from oaclass.ingest import AccessLocation, DeclaredVersion, EvidenceBundle, HostKind, LicenseStatement
from oaclass.registries import (
    FullOAMatch,
    JournalRegistryEntry,
    MatchVia,
    RegistrySource,
    RepoKind,
    RepositoryEntry,
    RepositoryRegistry,
)

PLAIN_ISSN = Issn("0378-5955")
DELAYED_ISSN = Issn("0950-1991")
PUBLISHED = PartialDate(2019, 3, 1)

CC_BY = "https://creativecommons.org/licenses/by/4.0/"
CC0 = "http://creativecommons.org/publicdomain/zero/1.0"
ELSEVIER = "https://www.elsevier.com/tdm/userlicense/1.0/"

# host name -> (url, host kind)
HOSTS = {
    "publisher": ("https://www.sciencedirect.com/science/article/pii/S1", HostKind.PUBLISHER),
    "institutional": ("https://pub.uni-bielefeld.de/record/2934907", HostKind.REPOSITORY),
    "disciplinary": ("https://arxiv.org/abs/1901.00001", HostKind.REPOSITORY),
    "governmental": ("https://www.osti.gov/pages/biblio/1", HostKind.REPOSITORY),
    "unregistered": ("https://repo.example.net/handle/1/2", HostKind.REPOSITORY),
    "denylisted": ("https://www.researchgate.net/publication/123", HostKind.REPOSITORY),
}

REPOSITORIES = RepositoryRegistry([
    RepositoryEntry("arxiv", ("arxiv.org",), RepoKind.DISCIPLINARY),
    RepositoryEntry("bielefeld", ("pub.uni-bielefeld.de",), RepoKind.INSTITUTIONAL),
    RepositoryEntry("osti", ("www.osti.gov/pages",), RepoKind.GOVERNMENTAL),
])

FULL_OA_ENTRY = JournalRegistryEntry(frozenset({PLAIN_ISSN}), "Hearing Research", RegistrySource.DOAJ_LIKE,
                                     oa_since_year=2000)

JOURNAL_STATES = ("none", "full", "delayed", "pmc")
VERSIONS = (DeclaredVersion.SUBMITTED, DeclaredVersion.PUBLISHED, DeclaredVersion.UNKNOWN)


def make_bundle(licenses=(), locations=(), journal="none", published=PUBLISHED, record_id="r1"):
    """Build a bundle.

    ``licenses``: (url, start PartialDate | None, delay_days | None) tuples.
    ``locations``: (host name, DeclaredVersion, deposit PartialDate | None, license url | None).
    ``journal``: one of JOURNAL_STATES.
    """
    issn = DELAYED_ISSN if journal == "delayed" else PLAIN_ISSN
    record = PublicationRecord(record_id, published, doi=normalize_doi(f"10.1000/{record_id}"),
                               issns=frozenset({issn}), journal_title="J", publication_title="T")
    lics = tuple(
        LicenseStatement(url, start_date=start, delay_days=delay, ref=f"cr:{record_id}#license{i}")
        for i, (url, start, delay) in enumerate(licenses)
    )
    locs = []
    for i, (host, version, deposit, lic_url) in enumerate(locations):
        url, kind = HOSTS[host]
        ref = f"upw:{record_id}#location{i}"
        locs.append(AccessLocation(
            url=url,
            host_kind=kind,
            deposit_timestamp=deposit if kind is HostKind.REPOSITORY else None,
            declared_version=version,
            license=LicenseStatement(lic_url, ref=ref + "/license") if lic_url else None,
            ref=ref,
        ))
    return EvidenceBundle(
        record=record,
        publisher_licenses=lics,
        locations=tuple(locs),
        full_oa_match=FullOAMatch(FULL_OA_ENTRY, MatchVia.DIRECT, PLAIN_ISSN) if journal == "full" else None,
        source_tags=("cr", "upw"),
        pmc_embargo_months=6 if journal == "pmc" else None,
        pmc_issn=PLAIN_ISSN if journal == "pmc" else None,
    )


def random_date(rng: random.Random) -> PartialDate:
    year = rng.randint(2017, 2021)
    precision = rng.choice(("year", "month", "day", "day", "day"))
    if precision == "year":
        return PartialDate(year)
    month = rng.randint(1, 12)
    if precision == "month":
        return PartialDate(year, month)
    return PartialDate(year, month, rng.randint(1, 28))


def random_bundle(rng: random.Random, record_id: str = "r1") -> EvidenceBundle:
    urls = (CC_BY, CC0, ELSEVIER, "https://creativecommons.org/licenses/by-nc/3.0", "http://example.com/terms")
    licenses = []
    for _ in range(rng.choice((0, 0, 1, 1, 2, 3))):
        start = random_date(rng) if rng.random() < 0.5 else None
        delay = rng.choice((None, 0, 14, 30, 31, 180, 365, 730))
        licenses.append((rng.choice(urls), start, delay))
    locations = []
    for _ in range(rng.choice((0, 1, 1, 2, 3, 4))):
        host = rng.choice(tuple(HOSTS))
        deposit = random_date(rng) if rng.random() < 0.6 else None
        lic = rng.choice((None, None, CC_BY, ELSEVIER))
        locations.append((host, rng.choice(VERSIONS + (DeclaredVersion.ACCEPTED,)), deposit, lic))
    return make_bundle(licenses, locations, rng.choice(JOURNAL_STATES), random_date(rng), record_id)
