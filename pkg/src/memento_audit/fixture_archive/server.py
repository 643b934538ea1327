"""HTTP service pair realizing a manifest: a miniature replay archive and a
companion "live web" server for leak targets.

Archive endpoints:

    GET /list/timemap/link/{original}   link-format TimeMap
    GET /timegate/{original}            Accept-Datetime negotiation, 302
    GET /memento/{ts}/{original}        memento (API-style address)
    GET /web/{ts}/{original-or-sub}     memento or subresource under replay
    GET /static/...                     replay chrome assets

Responses are a pure function of the manifest: no Date/Server headers, bodies
fixed by the manifest, so identical manifests serve identical bytes.
"""

import logging
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import urlsplit

from ..errors import BadDatetime, PortInUse
from ..linkformat import TimeMap, memento_record, serialize_link_format
from ..replay import ArchiveEndpoint
from ..timefmt import format_rfc1123, parse_rfc1123, parse_ts14
from .manifest import (
    ConcreteResponse,
    FixtureManifest,
    MementoBundle,
    SiteFixture,
    concrete_responses,
    is_text_media,
    validate_manifest,
)

logger = logging.getLogger(__name__)

_REPLAY_PATH_RE = re.compile(r"^/(?:memento|web)/(\d{14})/(.+)$")

CHROME_ASSETS = {
    "/static/replay-banner.css": (b"#replay-banner { position: fixed; top: 0; }\n",
                                  "text/css"),
}


def _host(uri: str) -> str:
    return urlsplit(uri).netloc.lower()


class _QuietHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.0"

    def log_message(self, fmt, *args):  # noqa: D102 - silence default stderr noise
        logger.debug("%s %s", self.address_string(), fmt % args)

    def respond(self, status: int, body: bytes = b"", media_type: str = "text/plain",
                headers: dict[str, str] | None = None) -> None:
        # send_response_only: no Date/Server headers, keeping responses
        # byte-identical across runs.
        self.send_response_only(status)
        self.send_header("Content-Type", media_type)
        self.send_header("Content-Length", str(len(body)))
        for name, value in (headers or {}).items():
            self.send_header(name, value)
        self.end_headers()
        if body:
            self.wfile.write(body)


class FixtureService:
    """Run the archive and live servers for one manifest."""

    def __init__(self, manifest: FixtureManifest, port: int = 0, live_port: int = 0,
                 host: str = "localhost"):
        validate_manifest(manifest)
        self.manifest = manifest
        self.host = host
        self._requested_ports = (port, live_port)
        self._archive_server: ThreadingHTTPServer | None = None
        self._live_server: ThreadingHTTPServer | None = None
        self._threads: list[threading.Thread] = []
        self._sites_by_host = {_host(s.original): s for s in manifest.sites}
        self._live_map = {res.path: res for res in manifest.live}

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> "FixtureService":
        port, live_port = self._requested_ports
        self._archive_server = self._bind(port, self._archive_handler())
        self._live_server = self._bind(live_port, self._live_handler())
        for server in (self._archive_server, self._live_server):
            thread = threading.Thread(target=server.serve_forever, daemon=True)
            thread.start()
            self._threads.append(thread)
        logger.info("fixture archive at %s, live web at %s",
                    self.archive_base, self.live_base)
        return self

    def stop(self) -> None:
        for server in (self._archive_server, self._live_server):
            if server is not None:
                server.shutdown()
                server.server_close()
        for thread in self._threads:
            thread.join(timeout=5)
        self._threads.clear()

    def __enter__(self) -> "FixtureService":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _bind(self, port: int, handler) -> ThreadingHTTPServer:
        try:
            return ThreadingHTTPServer((self.host, port), handler)
        except OSError as exc:
            raise PortInUse(f"cannot bind {self.host}:{port}: {exc}") from exc

    # -- addressing -----------------------------------------------------------

    @property
    def archive_authority(self) -> str:
        return f"{self.host}:{self._archive_server.server_address[1]}"

    @property
    def live_authority(self) -> str:
        return f"{self.host}:{self._live_server.server_address[1]}"

    @property
    def archive_base(self) -> str:
        return f"http://{self.archive_authority}"

    @property
    def live_base(self) -> str:
        return f"http://{self.live_authority}"

    def endpoint(self) -> ArchiveEndpoint:
        return ArchiveEndpoint.from_base(self.archive_base)

    def substitute(self, text: str) -> str:
        return (text.replace("{archive}", self.archive_authority)
                    .replace("{live}", self.live_authority))

    def memento_uri(self, timestamp: str, original: str) -> str:
        return f"{self.archive_base}/memento/{timestamp}/{original}"

    def timegate_uri(self, original: str) -> str:
        return f"{self.archive_base}/timegate/{original}"

    def timemap_uri(self, original: str) -> str:
        return f"{self.archive_base}/list/timemap/link/{original}"

    # -- archive behavior -----------------------------------------------------

    def _timemap_body(self, site: SiteFixture) -> bytes:
        bundles = sorted(site.mementos, key=lambda b: b.timestamp)
        records = tuple(
            memento_record(
                self.memento_uri(b.timestamp, site.original),
                parse_ts14(b.timestamp),
                first=(i == 0),
                last=(i == len(bundles) - 1),
            )
            for i, b in enumerate(bundles)
        )
        tm = TimeMap(
            original=site.original,
            timegate_uri=self.timegate_uri(site.original),
            timemap_uri=self.timemap_uri(site.original),
            mementos=records,
        )
        return serialize_link_format(tm).encode("utf-8")

    def _nearest_bundle(self, site: SiteFixture, accept) -> MementoBundle:
        bundles = sorted(site.mementos, key=lambda b: b.timestamp)
        if accept is None:
            return bundles[-1]
        best = None
        best_key = None
        for bundle in bundles:
            dt = parse_ts14(bundle.timestamp)
            key = (abs((dt - accept).total_seconds()), dt)
            if best_key is None or key < best_key:
                best, best_key = bundle, key
        return best

    def _serve_archive(self, handler: _QuietHandler) -> None:
        path = handler.path

        if path.startswith("/static/"):
            asset = CHROME_ASSETS.get(path)
            if asset is None:
                handler.respond(404, b"no such chrome asset")
            else:
                handler.respond(200, asset[0], asset[1])
            return

        if path.startswith("/list/timemap/link/"):
            original = path[len("/list/timemap/link/"):]
            site = self.manifest.site_for(original)
            if site is None:
                handler.respond(404, b"no holdings for this URI")
            elif site.robots_blocked:
                handler.respond(site.robots_status,
                                self.substitute(site.robots_body).encode("utf-8"))
            elif not site.mementos:
                handler.respond(404, b"no mementos")
            else:
                handler.respond(200, self._timemap_body(site),
                                "application/link-format")
            return

        if path.startswith("/timegate/"):
            original = path[len("/timegate/"):]
            site = self.manifest.site_for(original)
            if site is None or not site.mementos:
                if site is not None and site.robots_blocked:
                    handler.respond(site.robots_status,
                                    self.substitute(site.robots_body).encode("utf-8"))
                else:
                    handler.respond(404, b"no holdings for this URI")
                return
            if site.robots_blocked:
                handler.respond(site.robots_status,
                                self.substitute(site.robots_body).encode("utf-8"))
                return
            accept_raw = handler.headers.get("Accept-Datetime")
            accept = None
            if accept_raw is not None:
                try:
                    accept = parse_rfc1123(accept_raw)
                except BadDatetime:
                    handler.respond(400, b"unparseable Accept-Datetime")
                    return
            bundle = self._nearest_bundle(site, accept)
            handler.respond(302, b"", headers={
                "Location": self.memento_uri(bundle.timestamp, site.original),
                "Vary": "accept-datetime",
            })
            return

        m = _REPLAY_PATH_RE.match(path)
        if m:
            self._serve_replay(handler, m.group(1), m.group(2))
            return

        handler.respond(404, b"unknown path")

    def _serve_replay(self, handler: _QuietHandler, timestamp: str, uri: str) -> None:
        site = self._sites_by_host.get(_host(uri))
        if site is None:
            handler.respond(404, b"host not archived")
            return
        bundle = next((b for b in site.mementos if b.timestamp == timestamp), None)
        if bundle is None:
            handler.respond(404, b"no memento at this timestamp")
            return
        memento_dt = format_rfc1123(parse_ts14(timestamp))

        if uri == site.original:
            body = self.substitute(bundle.html).encode("utf-8")
            handler.respond(200, body, "text/html",
                            headers={"Memento-Datetime": memento_dt})
            return

        concrete = concrete_responses(site, bundle).get(uri)
        if concrete is None:
            handler.respond(404, b"not archived",
                            headers={"Memento-Datetime": memento_dt})
            return
        self._serve_concrete(handler, timestamp, concrete, memento_dt)

    def _serve_concrete(self, handler: _QuietHandler, timestamp: str,
                        concrete: ConcreteResponse, memento_dt: str) -> None:
        headers = {"Memento-Datetime": memento_dt}
        if concrete.location is not None and 300 <= concrete.status < 400:
            target = self.substitute(concrete.location)
            if _host(target) == self.live_authority:
                headers["Location"] = target  # replay escaping to the live web
            else:
                headers["Location"] = f"{self.archive_base}/web/{timestamp}/{target}"
            handler.respond(concrete.status, b"", headers=headers)
            return
        body = concrete.body
        if is_text_media(concrete.media_type):
            body = self.substitute(body.decode("utf-8")).encode("utf-8")
        handler.respond(concrete.status, body, concrete.media_type, headers=headers)

    # -- live behavior --------------------------------------------------------

    def _serve_live(self, handler: _QuietHandler) -> None:
        res = self._live_map.get(handler.path)
        if res is None:
            handler.respond(404, b"live web: not found")
            return
        body = res.body
        if is_text_media(res.media_type):
            body = self.substitute(body.decode("utf-8")).encode("utf-8")
        handler.respond(res.status, body, res.media_type)

    # -- handler factories ----------------------------------------------------

    def _archive_handler(self):
        service = self

        class ArchiveHandler(_QuietHandler):
            def do_GET(self):
                service._serve_archive(self)

        return ArchiveHandler

    def _live_handler(self):
        service = self

        class LiveHandler(_QuietHandler):
            def do_GET(self):
                service._serve_live(self)

        return LiveHandler
