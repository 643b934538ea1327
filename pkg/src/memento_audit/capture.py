"""Capture a memento through archive replay and record every subresource fetch.

The static engine fetches the page over HTTP, extracts references from markup
and linked CSS, rewrites them into the archive, and dereferences each once.
The scripted engine (see bridge.py) drives an external browser instead; the
whole analysis pipeline works with no browser present.
"""

import hashlib
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .errors import BadTimestamp, MementoMismatch, UnresolvableReference
from .extract import extract_css_refs, extract_markup_refs
from .fetching import ChainResult, PoliteFetcher
from .errors import UnrecognizedShape
from .replay import ArchiveEndpoint, ReplayUri, parse_replay_uri, rewrite_subresource
from .timefmt import format_iso, parse_iso, utc_now_s

logger = logging.getLogger(__name__)

ENGINE_STATIC = "static"
ENGINE_SCRIPTED = "scripted"
SCRIPTING_ON = "on"
SCRIPTING_OFF = "off"

PHASE_PAGE = "page"
PHASE_SUBRESOURCE = "subresource"
TRIGGER_MARKUP = "markup"
TRIGGER_STYLESHEET = "stylesheet"
TRIGGER_SCRIPT = "script-runtime"

_TRIGGER_ORDER = {TRIGGER_MARKUP: 0, TRIGGER_STYLESHEET: 1, TRIGGER_SCRIPT: 2}

LOG_SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class ResourceFetch:
    """One dereferenced (or deliberately skipped) subresource request."""

    request_uri: str
    chain: tuple[tuple[int, str], ...]
    final_status: int | None
    content_type: str | None
    bytes: int
    trigger: str
    phase: str
    error: str | None = None


@dataclass(frozen=True)
class CaptureLog:
    """All fetches observed for one memento under one engine and script mode."""

    memento: ReplayUri
    engine: str
    scripting: str
    fetches: tuple[ResourceFetch, ...]
    started: datetime
    finished: datetime
    screenshot: str | None = None
    settle_ms: int | None = None
    page_timeout_s: float | None = None

    @property
    def page_fetch(self) -> ResourceFetch | None:
        for f in self.fetches:
            if f.phase == PHASE_PAGE:
                return f
        return None

    @property
    def page_failed(self) -> bool:
        page = self.page_fetch
        if page is None or page.error is not None:
            return True
        return page.final_status is None or page.final_status >= 400

    def subresources(self) -> list[ResourceFetch]:
        return [f for f in self.fetches if f.phase == PHASE_SUBRESOURCE]


@dataclass(frozen=True)
class DifferentialReport:
    """Set difference of subresource request URIs between script modes."""

    script_only: frozenset[str]
    noscript_only: frozenset[str]
    shared: frozenset[str]
    script_delta: int
    degraded: bool


def _fetch_from_chain(request_uri: str, result: ChainResult, trigger: str,
                      phase: str) -> ResourceFetch:
    content_type = None
    size = 0
    final_status = None
    if result.error is None and result.hops:
        final_status = result.hops[-1][0]
    if result.response is not None:
        raw_ct = result.response.headers.get("Content-Type")
        if raw_ct:
            content_type = raw_ct.split(";")[0].strip().lower()
        size = len(result.response.content or b"")
    return ResourceFetch(
        request_uri=request_uri,
        chain=tuple(result.hops),
        final_status=final_status,
        content_type=content_type,
        bytes=size,
        trigger=trigger,
        phase=phase,
        error=result.error,
    )


def _skipped_fetch(raw_ref: str, trigger: str) -> ResourceFetch:
    return ResourceFetch(
        request_uri=raw_ref, chain=(), final_status=None, content_type=None,
        bytes=0, trigger=trigger, phase=PHASE_SUBRESOURCE,
    )


def _order_fetches(page: ResourceFetch, subs: list[ResourceFetch]) -> tuple[ResourceFetch, ...]:
    ordered = sorted(subs, key=lambda f: (_TRIGGER_ORDER.get(f.trigger, 9), f.request_uri))
    return (page, *ordered)


def _looks_like_html(fetch: ResourceFetch) -> bool:
    return fetch.content_type is None or "html" in fetch.content_type


def _looks_like_css(fetch: ResourceFetch) -> bool:
    if fetch.content_type is not None:
        return "css" in fetch.content_type
    return fetch.request_uri.lower().endswith(".css")


class StaticEngine:
    """Crawler-perspective capture: markup and CSS only, no script execution."""

    def __init__(self, fetcher: PoliteFetcher | None = None, workers: int = 4):
        self.fetcher = fetcher if fetcher is not None else PoliteFetcher()
        self.workers = max(1, workers)

    def capture(self, m: ReplayUri, ep: ArchiveEndpoint) -> CaptureLog:
        started = utc_now_s()
        page_result = self.fetcher.follow(m.uri)
        page = _fetch_from_chain(m.uri, page_result, TRIGGER_MARKUP, PHASE_PAGE)

        subs: dict[str, ResourceFetch] = {}
        bodies: dict[str, str] = {}  # css request uri -> body, for recursion
        lock = threading.Lock()

        def dereference(request_uri: str, trigger: str) -> None:
            result = self.fetcher.follow(request_uri)
            fetch = _fetch_from_chain(request_uri, result, trigger, PHASE_SUBRESOURCE)
            with lock:
                subs[request_uri] = fetch
                ok = fetch.error is None and fetch.final_status is not None \
                    and fetch.final_status < 400
                if ok and _looks_like_css(fetch) and result.response is not None:
                    bodies[request_uri] = result.response.text

        def rewrite_batch(base: ReplayUri, refs: list[str], trigger: str) -> list[tuple[str, str]]:
            batch = []
            for ref in refs:
                try:
                    request_uri = rewrite_subresource(base, ref, ep)
                except UnresolvableReference:
                    if ref not in subs:
                        subs[ref] = _skipped_fetch(ref, trigger)
                    continue
                if request_uri not in subs and request_uri != m.uri:
                    subs[request_uri] = None  # reserve to dedup concurrent discovery
                    batch.append((request_uri, trigger))
            return batch

        page_ok = (page.error is None and page.final_status is not None
                   and page.final_status < 400 and _looks_like_html(page))
        if page_ok and page_result.response is not None:
            html = page_result.response.text
            pending = rewrite_batch(m, extract_markup_refs(html), TRIGGER_MARKUP)
            while pending:
                with ThreadPoolExecutor(max_workers=self.workers) as pool:
                    list(pool.map(lambda item: dereference(*item), pending))
                pending = []
                for css_uri, css_body in list(bodies.items()):
                    bodies.pop(css_uri)
                    try:
                        ts, css_original = parse_replay_uri(css_uri, ep)
                    except (UnrecognizedShape, BadTimestamp):
                        continue  # chrome or foreign stylesheet: do not recurse
                    css_base = ReplayUri(timestamp=ts, original=css_original, uri=css_uri)
                    pending.extend(
                        rewrite_batch(css_base, extract_css_refs(css_body), TRIGGER_STYLESHEET))

        finished = utc_now_s()
        sub_list = [f for f in subs.values() if f is not None]
        return CaptureLog(
            memento=m,
            engine=ENGINE_STATIC,
            scripting=SCRIPTING_OFF,
            fetches=_order_fetches(page, sub_list),
            started=started,
            finished=finished,
        )


def capture_static(m: ReplayUri, ep: ArchiveEndpoint,
                   fetcher: PoliteFetcher | None = None, workers: int = 4) -> CaptureLog:
    """Capture a memento with the static engine. The log is returned even when
    the page fetch itself fails; callers check `page_failed`."""
    return StaticEngine(fetcher=fetcher, workers=workers).capture(m, ep)


def diff_captures(on: CaptureLog, off: CaptureLog) -> DifferentialReport:
    """Compare the subresource URI sets of a scripting-on and a scripting-off
    capture of the same memento."""
    if on.memento.uri != off.memento.uri:
        raise MementoMismatch(
            f"cannot diff captures of {on.memento.uri} and {off.memento.uri}")
    on_set = {f.request_uri for f in on.subresources()}
    off_set = {f.request_uri for f in off.subresources()}
    script_only = frozenset(on_set - off_set)
    return DifferentialReport(
        script_only=script_only,
        noscript_only=frozenset(off_set - on_set),
        shared=frozenset(on_set & off_set),
        script_delta=len(script_only),
        degraded=on.page_failed or off.page_failed,
    )


# --- persistence -------------------------------------------------------------

def log_filename(log: CaptureLog) -> str:
    digest = hashlib.sha256(log.memento.original.encode("utf-8")).hexdigest()[:12]
    return f"{log.memento.timestamp}_{digest}_{log.engine}_{log.scripting}.json"


def log_to_document(log: CaptureLog) -> dict:
    return {
        "schema_version": LOG_SCHEMA_VERSION,
        "memento": {
            "timestamp": log.memento.timestamp,
            "original": log.memento.original,
            "uri": log.memento.uri,
        },
        "engine": log.engine,
        "scripting": log.scripting,
        "started": format_iso(log.started),
        "finished": format_iso(log.finished),
        "settle_ms": log.settle_ms,
        "page_timeout_s": log.page_timeout_s,
        "screenshot": log.screenshot,
        "fetches": [
            {
                "request_uri": f.request_uri,
                "chain": [[status, uri] for status, uri in f.chain],
                "final_status": f.final_status,
                "content_type": f.content_type,
                "bytes": f.bytes,
                "trigger": f.trigger,
                "phase": f.phase,
                "error": f.error,
            }
            for f in log.fetches
        ],
    }


def log_from_document(doc: dict) -> CaptureLog:
    mem = doc["memento"]
    fetches = tuple(
        ResourceFetch(
            request_uri=f["request_uri"],
            chain=tuple((int(s), u) for s, u in f["chain"]),
            final_status=f["final_status"],
            content_type=f["content_type"],
            bytes=f["bytes"],
            trigger=f["trigger"],
            phase=f["phase"],
            error=f.get("error"),
        )
        for f in doc["fetches"]
    )
    return CaptureLog(
        memento=ReplayUri(timestamp=mem["timestamp"], original=mem["original"], uri=mem["uri"]),
        engine=doc["engine"],
        scripting=doc["scripting"],
        fetches=fetches,
        started=parse_iso(doc["started"]),
        finished=parse_iso(doc["finished"]),
        screenshot=doc.get("screenshot"),
        settle_ms=doc.get("settle_ms"),
        page_timeout_s=doc.get("page_timeout_s"),
    )


def save_log(log: CaptureLog, directory: str | Path) -> Path:
    path = Path(directory) / log_filename(log)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(log_to_document(log), indent=2) + "\n", encoding="utf-8")
    return path


def load_log(path: str | Path) -> CaptureLog:
    return log_from_document(json.loads(Path(path).read_text(encoding="utf-8")))
