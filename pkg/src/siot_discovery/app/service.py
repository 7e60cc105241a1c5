"""Read-only JSON-over-HTTP query service.

The service holds one immutable archive; any number of requests are served
concurrently against it. Rebuilds happen offline through the CLI followed by
an archive swap and restart.

Endpoints:
    POST /discover                {text, requester_id, position:{x,y}, trust}
    GET  /communities/{clor|sfor|sor}    community size histogram
    GET  /healthz
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..discovery import discover
from ..errors import (
    EmptyTextError,
    ParameterError,
    SiotError,
    UnknownApplicationError,
    UnknownRequesterError,
)
from ..model import RequestMetadata, TrustLevel
from ..request_nlp import parse_request
from .archive import IndexArchive, load_archive


class DiscoveryService:
    """Request handling decoupled from HTTP plumbing (unit-testable)."""

    def __init__(self, archive: IndexArchive):
        self.archive = archive

    def discover_payload(self, body: dict) -> dict:
        try:
            text = body["text"]
            requester_id = int(body["requester_id"])
            position = (float(body["position"]["x"]), float(body["position"]["y"]))
            trust = TrustLevel.parse(str(body.get("trust", "any")))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed request body: {exc}") from exc
        metadata = RequestMetadata(
            requester_id=requester_id,
            requester_position=position,
            trust_level=trust,
        )
        parsed = parse_request(text, metadata, self.archive.config)
        return discover(self.archive.index, parsed, metadata).to_dict()

    def histogram_payload(self, relation: str) -> dict:
        histograms = self.archive.stats.get("histograms", {})
        if relation not in histograms:
            raise KeyError(relation)
        return {"relation": relation, "histogram": histograms[relation]}


def _make_handler(service: DiscoveryService):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args) -> None:  # quiet by default
            pass

        def _send(self, status: int, payload: dict) -> None:
            body = json.dumps(payload, sort_keys=True).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self) -> None:
            if self.path == "/healthz":
                self._send(200, {"status": "ok"})
                return
            if self.path.startswith("/communities/"):
                relation = self.path.rsplit("/", 1)[-1]
                try:
                    self._send(200, service.histogram_payload(relation))
                except KeyError:
                    self._send(404, {"error": f"unknown relation {relation!r}"})
                return
            self._send(404, {"error": "not found"})

        def do_POST(self) -> None:
            if self.path != "/discover":
                self._send(404, {"error": "not found"})
                return
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            try:
                body = json.loads(raw.decode("utf-8"))
                if not isinstance(body, dict):
                    raise ValueError("body must be a JSON object")
            except (UnicodeDecodeError, ValueError) as exc:
                self._send(400, {"error": f"invalid JSON body: {exc}"})
                return
            try:
                self._send(200, service.discover_payload(body))
            except UnknownApplicationError as exc:
                self._send(422, {"error": "unknown application", "scores": exc.scores})
            except (ParameterError, EmptyTextError, UnknownRequesterError) as exc:
                self._send(400, {"error": str(exc)})
            except SiotError as exc:
                self._send(400, {"error": str(exc)})

    return Handler


def make_server(archive_path: str, bind: str = "127.0.0.1:0") -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    host, _, port = bind.partition(":")
    service = DiscoveryService(load_archive(archive_path))
    return ThreadingHTTPServer((host, int(port or 0)), _make_handler(service))


def serve_http(archive_path: str, bind: str = "127.0.0.1:8080") -> None:
    """Blocking entry point used by the CLI."""
    server = make_server(archive_path, bind)
    host, port = server.server_address[:2]
    print(f"serving {archive_path} on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
