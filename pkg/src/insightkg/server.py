"""Read-only HTTP API over a built snapshot.

Endpoints (all GET, all JSON):

* ``/kg/{inheritance|relevance}?N=&M=&T=`` — graph JSON; omitted params fall
  back to the snapshot's values, overridden params trigger an in-memory
  rebuild from the cached matrix / citation graph.
* ``/paper/{id}`` — title, keywords, both insight texts, cited-by count.
* ``/matrix/row/{id}`` — the paper's valid outgoing chain scores.
* ``/meta`` — config hash, build time, artifact counts.

Bad query values return 400 naming the offending field; unknown papers and
paths return 404. The snapshot is immutable, so the threading server needs
no locks.
"""

from __future__ import annotations

import json
import logging
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .errors import InvalidArgument
from .kg import export_kg
from .pipeline import KgStore
from .trees import TreeParams

log = logging.getLogger(__name__)


def parse_addr(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep or not host:
        raise InvalidArgument(f"address must be host:port, got {addr!r}")
    try:
        return host, int(port)
    except ValueError:
        raise InvalidArgument(f"bad port in address: {addr!r}") from None


class _Handler(BaseHTTPRequestHandler):
    store: KgStore  # set on the handler subclass by make_server

    # -- plumbing

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        log.debug("%s %s", self.address_string(), format % args)

    def _send(self, status: int, body: str) -> None:
        data = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _send_json(self, status: int, obj) -> None:
        self._send(status, json.dumps(obj, sort_keys=True, ensure_ascii=False))

    def _bad_request(self, field: str, message: str) -> None:
        self._send_json(400, {"error": "bad parameter", "field": field, "message": message})

    def _not_found(self, message: str) -> None:
        self._send_json(404, {"error": "not found", "message": message})

    # -- routes

    def do_GET(self):  # noqa: N802 - stdlib naming
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        try:
            if len(parts) == 2 and parts[0] == "kg":
                self._get_kg(parts[1], parse_qs(url.query))
            elif len(parts) == 2 and parts[0] == "paper":
                self._get_paper(parts[1])
            elif len(parts) == 3 and parts[0] == "matrix" and parts[1] == "row":
                self._get_matrix_row(parts[2])
            elif len(parts) == 1 and parts[0] == "meta":
                self._send_json(200, self.store.meta())
            else:
                self._not_found(f"no such path: {url.path}")
        except BrokenPipeError:
            pass
        except Exception:
            log.exception("request failed: %s", self.path)
            self._send_json(500, {"error": "internal error"})

    def _get_kg(self, kind: str, query: dict[str, list[str]]) -> None:
        if kind not in ("inheritance", "relevance"):
            self._not_found(f"no such graph kind: {kind}")
            return
        defaults = self.store.params_for(kind)
        values = {}
        for name, default in (("N", defaults.N), ("M", defaults.M), ("T", defaults.T)):
            raw = query.get(name, [None])[-1]
            if raw is None or raw == "":
                values[name] = default
                continue
            try:
                values[name] = int(raw)
            except ValueError:
                self._bad_request(name, f"{name} must be an integer, got {raw!r}")
                return
        try:
            params = TreeParams(values["N"], values["M"], values["T"])
        except InvalidArgument as exc:
            # Name the first out-of-range field for the client.
            for name in ("N", "M", "T"):
                if values[name] < 1:
                    self._bad_request(name, str(exc))
                    return
            self._bad_request("params", str(exc))
            return
        graph = self.store.kg_for(kind, params)
        self._send(200, export_kg(graph))

    def _parse_id(self, raw: str) -> int | None:
        try:
            return int(raw)
        except ValueError:
            self._bad_request("id", f"paper id must be an integer, got {raw!r}")
            return None

    def _get_paper(self, raw_id: str) -> None:
        paper_id = self._parse_id(raw_id)
        if paper_id is None:
            return
        detail = self.store.paper_detail(paper_id)
        if detail is None:
            self._not_found(f"unknown paper: {paper_id}")
            return
        self._send_json(200, detail)

    def _get_matrix_row(self, raw_id: str) -> None:
        paper_id = self._parse_id(raw_id)
        if paper_id is None:
            return
        try:
            row = self.store.matrix.row(paper_id)
        except InvalidArgument:
            self._not_found(f"unknown paper: {paper_id}")
            return
        self._send_json(
            200, {"paper_id": paper_id, "scores": {str(k): v for k, v in row.items()}}
        )


def make_server(store: KgStore, addr: str) -> ThreadingHTTPServer:
    host, port = parse_addr(addr)
    handler = type("BoundHandler", (_Handler,), {"store": store})
    server = ThreadingHTTPServer((host, port), handler)
    log.info("serving on http://%s:%d", host, server.server_address[1])
    return server


def serve(store: KgStore, addr: str) -> None:
    server = make_server(store, addr)
    try:
        server.serve_forever()
    finally:
        server.server_close()
