"""Local HTTP fixture servers for the harvest tests."""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable
from urllib.parse import parse_qs, urlsplit

OAI_NS = "http://www.openarchives.org/OAI/2.0/"


@dataclass
class Hit:
    at: float
    path: str
    query: dict[str, str]
    headers: dict[str, str]


@dataclass
class Reply:
    status: int = 200
    body: bytes | str = b""
    headers: dict[str, str] = field(default_factory=dict)
    content_type: str = "text/xml; charset=utf-8"


Responder = Callable[[str, dict[str, str], int], Reply]


class FixtureServer:
    """Serves ``responder(path, query, hit_number)`` and records every request."""

    def __init__(self, responder: Responder):
        self.responder = responder
        self.hits: list[Hit] = []
        self._lock = threading.Lock()
        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):  # noqa: N802
                parts = urlsplit(self.path)
                query = {k: v[-1] for k, v in parse_qs(parts.query).items()}
                with server._lock:
                    server.hits.append(Hit(time.monotonic(), parts.path, query, dict(self.headers)))
                    n = len(server.hits)
                reply = server.responder(parts.path, query, n)
                body = reply.body.encode("utf-8") if isinstance(reply.body, str) else reply.body
                self.send_response(reply.status)
                self.send_header("Content-Type", reply.content_type)
                self.send_header("Content-Length", str(len(body)))
                for k, v in reply.headers.items():
                    self.send_header(k, v)
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, args=(0.05,), daemon=True)

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self) -> FixtureServer:
        self.thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


# ----------------------------------------------------------------- OAI-PMH


def oai_envelope(inner: str) -> str:
    return ('<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<OAI-PMH xmlns="{OAI_NS}">'
            "<responseDate>2024-01-01T00:00:00Z</responseDate>"
            '<request verb="ListRecords">http://repo.example/oai</request>'
            f"{inner}</OAI-PMH>")


def oai_record(local_id, doi=None, datestamp="2019-01-01", dc_type=None, rights=None, deleted=False):
    status = ' status="deleted"' if deleted else ""
    header = (f"<header{status}><identifier>oai:pub.uni-bielefeld.de:{local_id}</identifier>"
              f"<datestamp>{datestamp}</datestamp></header>")
    if deleted:
        return f"<record>{header}</record>"
    fields = [f"<dc:title>Record {local_id}</dc:title>",
              f"<dc:identifier>https://pub.uni-bielefeld.de/record/{local_id}</dc:identifier>"]
    if doi:
        fields.append(f"<dc:identifier>https://doi.org/{doi}</dc:identifier>")
    if dc_type:
        fields.append(f"<dc:type>{dc_type}</dc:type>")
    if rights:
        fields.append(f"<dc:rights>{rights}</dc:rights>")
    return (f"<record>{header}<metadata>"
            '<oai_dc:dc xmlns:oai_dc="http://www.openarchives.org/OAI/2.0/oai_dc/" '
            'xmlns:dc="http://purl.org/dc/elements/1.1/">'
            + "".join(fields) + "</oai_dc:dc></metadata></record>")


def list_records(records, token=None, size=None, cursor=None):
    tail = ""
    if token is not None or size is not None:
        attrs = ""
        if size is not None:
            attrs += f' completeListSize="{size}"'
        if cursor is not None:
            attrs += f' cursor="{cursor}"'
        tail = f"<resumptionToken{attrs}>{token or ''}</resumptionToken>"
    return oai_envelope("<ListRecords>" + "".join(records) + tail + "</ListRecords>")


def oai_error(code, message=""):
    return oai_envelope(f'<error code="{code}">{message}</error>')


# The three-page chain used by the harvest tests and the end-to-end pipeline.
CHAIN_PAGES = {
    None: list_records([
        oai_record("2", doi="10.1000/e2e.2", datestamp="2019-06-01",
                   dc_type="info:eu-repo/semantics/acceptedVersion"),
        oai_record("90", deleted=True, datestamp="2019-07-01"),
    ], token="page-2", size=5, cursor=0),
    "page-2": list_records([
        oai_record("6", doi="10.1000/E2E.6", datestamp="2020-02-15T10:00:00Z"),
        oai_record("91", datestamp="2020-03-01"),
    ], token="page-3", size=5, cursor=2),
    "page-3": list_records([
        oai_record("8", doi="10.1000/e2e.8", datestamp="2020-09-01",
                   dc_type="info:eu-repo/semantics/publishedVersion",
                   rights="http://creativecommons.org/licenses/by/4.0"),
    ], size=5, cursor=4),
}
CHAIN_IDENTIFIERS = sorted(
    f"oai:pub.uni-bielefeld.de:{n}" for n in ("2", "90", "6", "91", "8")
)


def chain_responder(fail_on: str | None = "never", status: int = 500) -> Responder:
    """Serve CHAIN_PAGES; requests for token ``fail_on`` get ``status`` once."""
    failed = set()

    def respond(path, query, n):
        if query.get("verb") != "ListRecords":
            return Reply(400, oai_error("badVerb"))
        token = query.get("resumptionToken")
        if token is None and query.get("metadataPrefix") != "oai_dc":
            return Reply(200, oai_error("cannotDisseminateFormat"))
        if token not in CHAIN_PAGES:
            return Reply(200, oai_error("badResumptionToken", "expired"))
        if token == fail_on and token not in failed:
            failed.add(token)
            return Reply(status, "unavailable", content_type="text/plain")
        return Reply(200, CHAIN_PAGES[token])

    return respond


# --------------------------------------------------------------- JSON API


def json_reply(obj, status=200, headers=None) -> Reply:
    return Reply(status, json.dumps(obj), headers or {}, "application/json")
