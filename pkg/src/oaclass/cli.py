"""Command line interface.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import datetime as dt
import logging
import sys
from collections import defaultdict
from pathlib import Path
from typing import Iterator, Sequence

from . import __version__
from .classifier import ClassifierConfig, classification_row, classify, dumps_row, publisher_licenses
from .config import cache_dir, load_config
from .core.dates import PartialDate
from .core.identifiers import normalize_issn
from .core.records import PublicationRecord
from .delayed import (
    CohortConfig,
    build_delayed_registry,
    detect_delayed,
    detect_delayed_from_metadata,
    load_delayed_set,
    load_pmc_embargoes,
)
from .errors import OAError
from .harvest import HarvestJob, Politeness, Protocol, fetch_paged_json, harvest_oai
from .ingest.bundles import assemble_bundles, iter_bundles, record_from_crossref
from .ingest.snapshots import ParseReport, iter_ndjson, parse_crossref_snapshot, parse_location_snapshot
from .registries import (
    IssnLinkTable,
    RepositoryRegistry,
    dump_journal_registry,
    dump_link_table,
    dump_repository_registry,
    load_journal_registry,
    load_link_table,
    load_repository_registry,
    lookup_journal,
    validate_journal_registry,
    validate_repository_registry,
)
from .reporting import GROUP_FIELDS, aggregate, render

logger = logging.getLogger("oaclass")


@contextlib.contextmanager
def _output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _read_rows(path: str) -> Iterator[dict]:
    report = ParseReport(source=Path(path).name)
    yield from (obj for _, obj in iter_ndjson(path, report))
    if report.errors:
        raise OAError(f"{len(report.errors)} unreadable line(s) in {path}; first: {report.errors[0]}")


def _link_table(args) -> IssnLinkTable | None:
    return load_link_table(args.links) if getattr(args, "links", None) else None


# ------------------------------------------------------------------ commands


def cmd_registry_validate(args) -> int:
    if args.kind == "journal":
        problems = validate_journal_registry(args.path, args.source)
    elif args.kind == "repository":
        problems = validate_repository_registry(args.path)
    else:
        loader = load_pmc_embargoes if args.kind == "pmc" else load_link_table
        try:
            loader(args.path)
            problems = []
        except OAError as exc:
            print(f"{args.path}: {exc}")
            return 1
    for p in problems:
        print(f"{args.path}: {p}")
    if not problems:
        print(f"{args.path}: ok")
    return 1 if problems else 0


def cmd_registry_build(args) -> int:
    if args.kind == "journal":
        registry = load_journal_registry(args.path, args.source)
        dump_journal_registry(registry, args.output)
        if args.links_output:
            dump_link_table(IssnLinkTable.from_registry(registry), args.links_output)
        print(f"{len(registry)} journals written to {args.output}", file=sys.stderr)
    elif args.kind == "repository":
        registry = load_repository_registry(args.path)
        dump_repository_registry(registry, args.output)
        print(f"{len(registry.entries)} repositories written to {args.output}", file=sys.stderr)
    else:
        table = load_link_table(args.path)
        dump_link_table(table, args.output)
    return 0


def cmd_harvest(args) -> int:
    params = dict(p.split("=", 1) for p in args.param)
    headers = {"Authorization": f"Bearer {args.token}"} if args.token else {}
    job = HarvestJob(
        endpoint_url=args.endpoint,
        protocol=Protocol(args.protocol),
        from_date=args.from_date,
        until_date=args.until_date,
        set_spec=args.set_spec,
        politeness=Politeness(args.rate, args.retries, args.backoff_ms),
        headers=headers,
        params=params,
        endpoint_id=args.endpoint_id,
    )
    out = Path(args.out) if args.out else cache_dir() / "harvest"
    if job.protocol is Protocol.OAI_PMH:
        result = harvest_oai(job, out, resume=args.resume, max_pages=args.max_pages)
        print(
            f"{result.records} records ({result.deleted} deleted) in {result.pages} pages, "
            f"{result.requests} requests; complete={result.complete}",
            file=sys.stderr,
        )
        for err in result.record_errors:
            print(f"record error: {err}", file=sys.stderr)
        return 0
    ids = None
    if args.ids:
        ids = [line.strip() for line in Path(args.ids).read_text(encoding="utf-8").splitlines() if line.strip()]
    out.mkdir(parents=True, exist_ok=True)
    result = fetch_paged_json(job, out / "items.ndjson", ids)
    print(f"{result.items} items, {len(result.misses)} misses, {result.requests} requests", file=sys.stderr)
    for miss in result.misses:
        print(f"miss: {miss}", file=sys.stderr)
    return 0


def _load_records(path: str) -> Iterator[PublicationRecord]:
    report = ParseReport(source=Path(path).name)
    for line_no, obj in iter_ndjson(path, report):
        try:
            yield PublicationRecord.from_dict(obj)
        except (OAError, KeyError, ValueError) as exc:
            report.error(line_no, str(exc))
    for issue in report.errors:
        print(f"skipped record {issue}", file=sys.stderr)


def cmd_ingest(args) -> int:
    reports: list[ParseReport] = []

    def crossref_items():
        for path in args.crossref:
            report = ParseReport()
            reports.append(report)
            yield from parse_crossref_snapshot(path, report)

    def location_items():
        for path in args.locations:
            report = ParseReport()
            reports.append(report)
            yield from parse_location_snapshot(path, report)

    crossref = list(crossref_items())
    if args.records:
        records = _load_records(args.records)
    else:
        records = (r for r in (record_from_crossref(i) for i in crossref) if r is not None)
    link_table = _link_table(args)
    journals = load_journal_registry(args.journals, args.journal_source) if args.journals else None
    if journals is not None and link_table is None:
        link_table = IssnLinkTable.from_registry(journals)
    pmc = load_pmc_embargoes(args.pmc) if args.pmc else None
    orphans = []
    count = 0
    with _output(args.output) as fh:
        for bundle in assemble_bundles(records, crossref, location_items(), journals, link_table, pmc, orphans):
            fh.write(bundle.to_json() + "\n")
            count += 1
    if args.orphans:
        with _output(args.orphans) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["evidence_key", "source_tag", "reason"])
            for o in orphans:
                writer.writerow([o.evidence_key, o.source_tag, o.reason])
            for report in reports:
                for issue in report.errors:
                    writer.writerow([f"line:{issue.line}", issue.source, f"parse error: {issue.message}"])
    skipped = sum(r.skipped for r in reports)
    print(f"{count} bundles, {len(orphans)} orphaned evidence items, {skipped} unreadable lines",
          file=sys.stderr)
    return 0


def _classifier_config(args, settings: dict) -> ClassifierConfig:
    delayed_path = args.delayed or settings.get("delayed_registry")
    delayed = load_delayed_set(delayed_path) if delayed_path else frozenset()
    if args.grace_days is not None:
        settings = {**settings, "immediate_grace_days": args.grace_days}
    return ClassifierConfig.from_mapping(settings, delayed)


def cmd_classify(args) -> int:
    settings = load_config(args.config)
    config = _classifier_config(args, settings)
    repos = load_repository_registry(args.repositories) if args.repositories else RepositoryRegistry()
    count = 0
    with _output(args.output) as fh:
        for bundle in iter_bundles(args.bundles):
            result = classify(bundle, repos, config)
            fh.write(dumps_row(classification_row(bundle, result)) + "\n")
            count += 1
    print(f"{count} records classified", file=sys.stderr)
    return 0


def cmd_detect_delayed(args) -> int:
    settings = load_config(args.config)
    cohort_config = CohortConfig.from_mapping({**settings, **{
        k: v for k, v in vars(args).items()
        if k in ("horizon_months", "recent_months", "theta_old", "theta_recent", "min_cohort") and v is not None
    }})
    grace = int(settings.get("immediate_grace_days", 30))
    reference = dt.date.fromisoformat(args.reference_date)
    journals = load_journal_registry(args.journals, args.journal_source) if args.journals else None
    link_table = _link_table(args)
    if journals is not None and link_table is None:
        link_table = IssnLinkTable.from_registry(journals)

    def full_oa(issn) -> bool:
        return journals is not None and lookup_journal({issn}, reference.year, journals, link_table) is not None

    per_journal: dict = defaultdict(list)
    titles: dict = {}
    for row in _read_rows(args.classifications):
        if not row.get("issn_l"):
            continue
        issn = normalize_issn(row["issn_l"])
        key = link_table.resolve(issn) if link_table is not None else issn
        per_journal[key].append((PartialDate.parse(row["published"]), bool(row.get("publisher_open"))))
        titles.setdefault(key, row.get("journal_title") or "")
    verdicts = []
    for issn in sorted(per_journal):
        if full_oa(issn):
            continue
        verdicts.append(detect_delayed(per_journal[issn], reference, issn, cohort_config, title=titles[issn]))

    metadata = {}
    if args.bundles:
        per_journal_lic: dict = defaultdict(list)
        for bundle in iter_bundles(args.bundles):
            if bundle.full_oa_match is not None or bundle.issn_l is None:
                continue
            key = link_table.resolve(bundle.issn_l) if link_table is not None else bundle.issn_l
            per_journal_lic[key].append((bundle.publication_date, publisher_licenses(bundle)))
        for issn in sorted(per_journal_lic):
            if not full_oa(issn):
                metadata[issn] = detect_delayed_from_metadata(per_journal_lic[issn], grace)
    pmc = load_pmc_embargoes(args.pmc) if args.pmc else None
    registry = build_delayed_registry(verdicts, metadata, pmc, link_table, titles)
    with _output(args.output) as fh:
        registry.write(fh)
    print(f"{len(registry.journals)} delayed journals", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    group_by = [f for f in (args.group_by or "").split(",") if f]
    reports = aggregate(_read_rows(args.classifications), group_by, args.mode)
    with _output(args.output) as fh:
        fh.write(render(reports, args.format, group_by))
    return 0


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oaclass",
        description="Classify publication records into Open Access classes from local evidence snapshots.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    reg = sub.add_parser("registry", help="validate or normalize registry CSV files")
    reg_sub = reg.add_subparsers(dest="action", required=True)
    for action, func in (("validate", cmd_registry_validate), ("build", cmd_registry_build)):
        p = reg_sub.add_parser(action)
        kinds = ["journal", "pmc", "repository", "links"] if action == "validate" else ["journal", "repository", "links"]
        p.add_argument("--kind", choices=kinds, required=True)
        p.add_argument("--source", default="doaj", help="journal registry source: doaj, gold_list or pmc")
        p.add_argument("path")
        if action == "build":
            p.add_argument("-o", "--output", required=True)
            p.add_argument("--links-output", help="also write the ISSN-L table implied by a journal registry")
        p.set_defaults(func=func)

    h = sub.add_parser("harvest", help="harvest an OAI-PMH endpoint or a paged JSON API into snapshots")
    h.add_argument("--endpoint", required=True)
    h.add_argument("--protocol", choices=[p.value for p in Protocol], default=Protocol.OAI_PMH.value)
    h.add_argument("--from", dest="from_date")
    h.add_argument("--until", dest="until_date")
    h.add_argument("--set", dest="set_spec")
    h.add_argument("--resume", action="store_true", help="continue from the state saved in --out")
    h.add_argument("--out", help="output directory (default: $OACLASS_CACHE_DIR/harvest)")
    h.add_argument("--rate", type=float, default=1.0, help="max requests per second")
    h.add_argument("--retries", type=int, default=3)
    h.add_argument("--backoff-ms", type=int, default=500)
    h.add_argument("--max-pages", type=int)
    h.add_argument("--ids", help="file with one DOI per line (paged-json only)")
    h.add_argument("--param", action="append", default=[], help="extra query parameter key=value")
    h.add_argument("--token", help="static bearer token")
    h.add_argument("--endpoint-id", help="repository identifier written into location snapshots")
    h.set_defaults(func=cmd_harvest)

    i = sub.add_parser("ingest", help="join records with evidence snapshots into bundles")
    i.add_argument("--records", help="records NDJSON; omitted: derive records from the Crossref snapshots")
    i.add_argument("--crossref", action="append", default=[])
    i.add_argument("--locations", action="append", default=[])
    i.add_argument("--journals", help="full-OA journal registry CSV")
    i.add_argument("--journal-source", default="doaj")
    i.add_argument("--links", help="ISSN-L table CSV")
    i.add_argument("--pmc", help="PMC embargo CSV")
    i.add_argument("-o", "--output", default="-")
    i.add_argument("--orphans", help="write the orphaned-evidence CSV here")
    i.set_defaults(func=cmd_ingest)

    c = sub.add_parser(
        "classify",
        help="classify bundles",
        description="Config keys: immediate_grace_days, open_license_patterns, "
                    "unlawful_host_denylist, precedence, preprint_on_equal_date, delayed_registry.",
    )
    c.add_argument("--bundles", required=True)
    c.add_argument("--repositories", help="repository registry CSV")
    c.add_argument("--config", help="TOML config file")
    c.add_argument("--delayed", help="delayed-journal registry CSV (overrides delayed_registry)")
    c.add_argument("--grace-days", type=int)
    c.add_argument("-o", "--output", default="-")
    c.set_defaults(func=cmd_classify)

    d = sub.add_parser(
        "detect-delayed",
        help="build a delayed-OA journal registry",
        description="Config keys: horizon_months, recent_months, theta_old, theta_recent, "
                    "min_cohort, immediate_grace_days.",
    )
    d.add_argument("--classifications", required=True)
    d.add_argument("--reference-date", required=True, help="YYYY-MM-DD")
    d.add_argument("--journals", help="full-OA journal registry CSV; its journals are skipped")
    d.add_argument("--journal-source", default="doaj")
    d.add_argument("--links")
    d.add_argument("--pmc")
    d.add_argument("--bundles", help="bundle NDJSON for the license-delay strategy")
    d.add_argument("--config")
    d.add_argument("--horizon-months", type=int)
    d.add_argument("--recent-months", type=int)
    d.add_argument("--theta-old", type=float)
    d.add_argument("--theta-recent", type=float)
    d.add_argument("--min-cohort", type=int)
    d.add_argument("-o", "--output", default="-")
    d.set_defaults(func=cmd_detect_delayed)

    r = sub.add_parser("report", help="aggregate classifications into OA shares")
    r.add_argument("--classifications", required=True)
    r.add_argument("--group-by", default="", help=f"comma-separated: {', '.join(GROUP_FIELDS)}")
    r.add_argument("--mode", choices=["primary", "multi"], default="primary")
    r.add_argument("--format", choices=["csv", "json"], default="csv")
    r.add_argument("-o", "--output", default="-")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except OAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
