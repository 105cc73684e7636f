"""Polite HTTP harvesting: OAI-PMH ListRecords chains and paged JSON APIs.

Endpoints are always configuration. Every response body is kept on disk
next to the parsed NDJSON so that a classification can be traced back to
the bytes received.
"""

from __future__ import annotations

import email.utils
import enum
import json
import logging
import os
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable
from urllib.parse import quote, urlsplit

import requests

from .errors import AuthError, ProtocolError, TransportError
from .ingest.oai import NS, parse_oai_dc, to_location_line

logger = logging.getLogger(__name__)

RETRY_STATUSES = frozenset({429, 500, 502, 503, 504})
USER_AGENT = "oaclass/0.1 (+https://www.openarchives.org/OAI/openarchivesprotocol.html)"

OAI_RECORDS_FILE = "oai_records.ndjson"
LOCATIONS_FILE = "locations.ndjson"
STATE_FILE = "state.json"


class Protocol(enum.Enum):
    OAI_PMH = "oai-pmh"
    PAGED_JSON = "paged-json"


@dataclass(frozen=True)
class Politeness:
    max_requests_per_second: float = 1.0
    max_retries: int = 3
    backoff_base_ms: int = 500

    def __post_init__(self) -> None:
        if self.max_requests_per_second <= 0:
            raise ValueError("max_requests_per_second must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.backoff_base_ms < 0:
            raise ValueError("backoff_base_ms must be >= 0")


@dataclass(frozen=True)
class HarvestJob:
    endpoint_url: str
    protocol: Protocol = Protocol.OAI_PMH
    from_date: str | None = None
    until_date: str | None = None
    set_spec: str | None = None
    politeness: Politeness = Politeness()
    resume_state: str | None = None
    headers: dict[str, str] = field(default_factory=dict, compare=False)
    params: dict[str, str] = field(default_factory=dict, compare=False)
    endpoint_id: str | None = None

    @property
    def source_id(self) -> str:
        return self.endpoint_id or urlsplit(self.endpoint_url).netloc or self.endpoint_url


class RateLimiter:
    """Spaces request starts at least ``1 / rate`` seconds apart."""

    def __init__(self, rate: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate <= 0:
            raise ValueError("rate must be > 0")
        self.interval = 1.0 / rate
        self._clock = clock
        self._sleep = sleep
        self._next: float | None = None

    def wait(self) -> None:
        now = self._clock()
        if self._next is not None and now < self._next:
            self._sleep(self._next - now)
            now = self._clock()
        self._next = max(now, self._next or now) + self.interval


def _retry_after(value: str | None) -> float | None:
    if not value:
        return None
    value = value.strip()
    if value.isdigit():
        return float(value)
    try:
        when = email.utils.parsedate_to_datetime(value)
    except (TypeError, ValueError):
        return None
    return max(0.0, when.timestamp() - time.time())


class HttpClient:
    """One serialized, rate-limited request stream with retries."""

    def __init__(self, politeness: Politeness, session: requests.Session | None = None,
                 headers: dict[str, str] | None = None, timeout: float = 30.0,
                 sleep: Callable[[float], None] = time.sleep,
                 clock: Callable[[], float] = time.monotonic):
        self.politeness = politeness
        self.session = session or requests.Session()
        self.session.headers["User-Agent"] = USER_AGENT
        if headers:
            self.session.headers.update(headers)
        self.timeout = timeout
        self._sleep = sleep
        self.limiter = RateLimiter(politeness.max_requests_per_second, clock=clock, sleep=sleep)
        self.requests = 0
        self.retries = 0

    def _backoff(self, attempt: int) -> float:
        return self.politeness.backoff_base_ms / 1000.0 * (2 ** attempt)

    def get(self, url: str, params: dict[str, Any] | None = None) -> requests.Response:
        """GET with retries on transient failures.

        Returns the final response for any status that is not retried
        (including 404); raises :class:`AuthError` on 401/403 and
        :class:`TransportError` once retries are exhausted.
        """
        last_error = ""
        for attempt in range(self.politeness.max_retries + 1):
            if attempt:
                self.retries += 1
            self.limiter.wait()
            self.requests += 1
            try:
                resp = self.session.get(url, params=params, timeout=self.timeout)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                logger.warning("request to %s failed (%s)", url, last_error)
                if attempt < self.politeness.max_retries:
                    self._sleep(self._backoff(attempt))
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"{resp.status_code} from {url}")
            if resp.status_code in RETRY_STATUSES:
                last_error = f"HTTP {resp.status_code}"
                delay = _retry_after(resp.headers.get("Retry-After"))
                if delay is None:
                    delay = self._backoff(attempt)
                logger.warning("%s from %s; retrying in %.2fs", resp.status_code, url, delay)
                if attempt < self.politeness.max_retries:
                    self._sleep(delay)
                continue
            return resp
        raise TransportError(f"giving up on {url} after {self.politeness.max_retries} retries: {last_error}")


# ------------------------------------------------------------------ OAI-PMH


@dataclass
class HarvestResult:
    out_dir: Path
    records_path: Path
    locations_path: Path
    raw_dir: Path
    pages: int = 0
    requests: int = 0
    records: int = 0
    deleted: int = 0
    record_errors: list[str] = field(default_factory=list)
    resume_state: str | None = None
    complete: bool = False


def _load_state(out_dir: Path) -> dict | None:
    path = out_dir / STATE_FILE
    if not path.exists():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def _save_state(out_dir: Path, state: dict) -> None:
    tmp = out_dir / (STATE_FILE + ".tmp")
    tmp.write_text(json.dumps(state, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, out_dir / STATE_FILE)


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def identify(endpoint_url: str, client: HttpClient | None = None) -> dict[str, str]:
    """Fetch the repository's Identify description."""
    client = client or HttpClient(Politeness())
    resp = client.get(endpoint_url, params={"verb": "Identify"})
    if resp.status_code != 200:
        raise TransportError(f"Identify returned HTTP {resp.status_code}")
    root = ET.fromstring(resp.content)
    error = root.find("oai:error", NS)
    if error is not None:
        raise ProtocolError(error.get("code", ""), (error.text or "").strip())
    node = root.find("oai:Identify", NS)
    if node is None:
        return {}
    return {child.tag.split("}", 1)[1]: (child.text or "").strip() for child in node
            if child.tag.split("}", 1)[1] != "description"}


def harvest_oai(
    job: HarvestJob,
    out_dir: str | Path,
    *,
    resume: bool = False,
    max_pages: int | None = None,
    client: HttpClient | None = None,
) -> HarvestResult:
    """Follow a ``ListRecords`` resumption-token chain and write snapshots.

    Output in ``out_dir``: ``raw/page-NNNNN.xml`` (bodies as received),
    ``oai_records.ndjson`` (every parsed record), ``locations.ndjson``
    (location-snapshot lines for records carrying a DOI) and ``state.json``.
    The state is saved after every page; with ``resume=True`` a harvest
    stopped by an error or by ``max_pages`` continues where it left off.
    """
    out = Path(out_dir)
    raw_dir = out / "raw"
    raw_dir.mkdir(parents=True, exist_ok=True)
    records_path, locations_path = out / OAI_RECORDS_FILE, out / LOCATIONS_FILE
    client = client or HttpClient(job.politeness, headers=job.headers)
    result = HarvestResult(out, records_path, locations_path, raw_dir)

    state = _load_state(out) if resume else None
    if state is not None and state.get("endpoint") != job.endpoint_url:
        raise ProtocolError("badResumptionToken", "saved state belongs to another endpoint")
    if state is not None:
        if state.get("complete"):
            logger.info("harvest of %s already complete", job.endpoint_url)
            result.pages, result.records = state["pages"], state["records"]
            result.deleted, result.complete = state.get("deleted", 0), True
            return result
        for name, size in state["offsets"].items():
            with open(out / name, "a+b") as fh:
                fh.truncate(size)
        token = job.resume_state or state.get("resumption_token")
        result.pages, result.records = state["pages"], state["records"]
        result.deleted = state.get("deleted", 0)
    else:
        for path in (records_path, locations_path):
            path.write_bytes(b"")
        for old in raw_dir.glob("page-*.xml"):
            old.unlink()
        token = job.resume_state

    state = {
        "endpoint": job.endpoint_url,
        "resumption_token": token,
        "pages": result.pages,
        "records": result.records,
        "deleted": result.deleted,
        "complete": False,
        "offsets": {records_path.name: records_path.stat().st_size,
                    locations_path.name: locations_path.stat().st_size},
    }
    _save_state(out, state)

    requests_before = client.requests
    pages_this_run = 0
    while True:
        if max_pages is not None and pages_this_run >= max_pages:
            break
        if token:
            params = {"verb": "ListRecords", "resumptionToken": token}
        else:
            params = {"verb": "ListRecords", "metadataPrefix": "oai_dc"}
            if job.from_date:
                params["from"] = job.from_date
            if job.until_date:
                params["until"] = job.until_date
            if job.set_spec:
                params["set"] = job.set_spec
        resp = client.get(job.endpoint_url, params=params)
        if resp.status_code != 200:
            raise TransportError(f"ListRecords returned HTTP {resp.status_code}")
        result.pages += 1
        pages_this_run += 1
        (raw_dir / f"page-{result.pages:05d}.xml").write_bytes(resp.content)
        page = parse_oai_dc(resp.content)
        if page.error_code == "noRecordsMatch":
            token = None
        elif page.error_code:
            raise ProtocolError(page.error_code, page.error_message)
        else:
            with open(records_path, "a", encoding="utf-8") as rec_fh, \
                    open(locations_path, "a", encoding="utf-8") as loc_fh:
                for record in page.records:
                    rec_fh.write(_dumps(record.to_dict()) + "\n")
                    result.records += 1
                    if record.deleted:
                        result.deleted += 1
                    line = to_location_line(record, job.source_id)
                    if line is not None:
                        loc_fh.write(_dumps(line) + "\n")
            result.record_errors.extend(str(e) for e in page.errors)
            token = page.resumption_token
        state.update(
            resumption_token=token,
            pages=result.pages,
            records=result.records,
            deleted=result.deleted,
            complete=token is None,
            offsets={records_path.name: records_path.stat().st_size,
                     locations_path.name: locations_path.stat().st_size},
        )
        _save_state(out, state)
        if token is None:
            break

    result.requests = client.requests - requests_before
    result.resume_state = token
    result.complete = token is None
    return result


# ---------------------------------------------------------------- paged JSON


@dataclass
class FetchResult:
    path: Path
    items: int = 0
    pages: int = 0
    requests: int = 0
    misses: list[str] = field(default_factory=list)


def _dig(data: Any, path: Iterable[str]) -> Any:
    for key in path:
        if not isinstance(data, dict):
            return None
        data = data.get(key)
    return data


def fetch_paged_json(
    job: HarvestJob,
    out_path: str | Path,
    id_list: Iterable[str] | None = None,
    *,
    client: HttpClient | None = None,
    rows: int = 100,
    items_path: tuple[str, ...] = ("message", "items"),
    cursor_path: tuple[str, ...] = ("message", "next-cursor"),
    total_path: tuple[str, ...] = ("message", "total-results"),
) -> FetchResult:
    """Write one NDJSON line per item from a JSON API.

    Without ``id_list`` the endpoint is paged with a ``cursor`` parameter
    (falling back on ``offset`` when the response carries no cursor). With
    ``id_list`` each DOI is fetched from ``{endpoint}/{doi}``; a 404 or a
    failed item is logged as a miss and the run continues.
    """
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    raw_dir = out.parent / (out.stem + ".raw")
    raw_dir.mkdir(exist_ok=True)
    client = client or HttpClient(job.politeness, headers=job.headers)
    result = FetchResult(out)
    before = client.requests

    with open(out, "w", encoding="utf-8") as fh:
        if id_list is not None:
            for n, doi in enumerate(id_list, start=1):
                url = job.endpoint_url.rstrip("/") + "/" + quote(doi, safe="/")
                try:
                    resp = client.get(url, params=job.params or None)
                except AuthError:
                    raise
                except TransportError as exc:
                    logger.warning("miss %s: %s", doi, exc)
                    result.misses.append(doi)
                    continue
                (raw_dir / f"item-{n:06d}.json").write_bytes(resp.content)
                if resp.status_code != 200:
                    logger.warning("miss %s: HTTP %s", doi, resp.status_code)
                    result.misses.append(doi)
                    continue
                try:
                    item = resp.json()
                except ValueError:
                    logger.warning("miss %s: response is not JSON", doi)
                    result.misses.append(doi)
                    continue
                if isinstance(item, dict) and isinstance(item.get("message"), dict):
                    item = item["message"]
                fh.write(_dumps(item) + "\n")
                result.items += 1
        else:
            params: dict[str, Any] = dict(job.params)
            params.update(rows=rows, cursor="*")
            offset = 0
            while True:
                resp = client.get(job.endpoint_url, params=params)
                if resp.status_code != 200:
                    raise TransportError(f"page request returned HTTP {resp.status_code}")
                result.pages += 1
                (raw_dir / f"page-{result.pages:05d}.json").write_bytes(resp.content)
                data = resp.json()
                items = _dig(data, items_path)
                if items is None and isinstance(data, dict):
                    items = data.get("results")
                items = items or []
                for item in items:
                    fh.write(_dumps(item) + "\n")
                result.items += len(items)
                if not items:
                    break
                offset += len(items)
                total = _dig(data, total_path)
                if total is not None and offset >= int(total):
                    break
                next_cursor = _dig(data, cursor_path)
                if next_cursor:
                    if next_cursor == params.get("cursor"):
                        break
                    params["cursor"] = next_cursor
                    continue
                if total is None:
                    break
                params.pop("cursor", None)
                params["offset"] = offset

    result.requests = client.requests - before
    return result
