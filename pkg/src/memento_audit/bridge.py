"""Scripted capture via an external browser bridge.

The bridge is any HTTP service that loads a URL in a real browser and reports
every network request it made.  Protocol:

    GET  {bridge}/status
        -> 200 {"ok": true, ...}            bridge is up

    POST {bridge}/capture
         {"url": str, "scripting": "on"|"off", "settle_ms": int,
          "page_timeout_s": float, "screenshot": bool}
        -> 200 {"page": {"chain": [[status, uri], ...], "content_type": str?,
                         "bytes": int?, "error": str?},
                "subresources": [{"request_uri": str, "chain": [...],
                                  "content_type": str?, "bytes": int?,
                                  "initiator": "parser"|"stylesheet"|"script",
                                  "error": str?}, ...],
                "screenshot_b64": str?}

A bridge that cannot be reached raises BridgeUnavailable; one that accepts the
job but never settles raises BridgeTimeout.  Everything else in the pipeline
runs without a bridge — scripted captures are then skipped, not failed.
"""

import base64
import dataclasses
import logging
from pathlib import Path

import requests

from .capture import (
    ENGINE_SCRIPTED,
    PHASE_PAGE,
    PHASE_SUBRESOURCE,
    SCRIPTING_ON,
    TRIGGER_MARKUP,
    TRIGGER_SCRIPT,
    TRIGGER_STYLESHEET,
    CaptureLog,
    ResourceFetch,
    _order_fetches,
    log_filename,
)
from .errors import BridgeTimeout, BridgeUnavailable
from .replay import ArchiveEndpoint, ReplayUri
from .timefmt import utc_now_s

logger = logging.getLogger(__name__)

_INITIATOR_TRIGGERS = {
    "parser": TRIGGER_MARKUP,
    "stylesheet": TRIGGER_STYLESHEET,
    "script": TRIGGER_SCRIPT,
}

#: Extra wall-clock allowance on top of the page timeout for bridge round-trips.
BRIDGE_GRACE_S = 15.0


def bridge_available(bridge_url: str, timeout_s: float = 2.0) -> bool:
    """True when the bridge answers its status endpoint."""
    try:
        resp = requests.get(bridge_url.rstrip("/") + "/status", timeout=timeout_s)
    except requests.RequestException:
        return False
    return resp.status_code == 200


def _entry_to_fetch(entry: dict, request_uri: str, trigger: str, phase: str) -> ResourceFetch:
    chain = tuple((int(s), u) for s, u in entry.get("chain") or ())
    error = entry.get("error")
    final_status = chain[-1][0] if (error is None and chain) else None
    content_type = entry.get("content_type")
    if content_type:
        content_type = content_type.split(";")[0].strip().lower()
    return ResourceFetch(
        request_uri=request_uri,
        chain=chain,
        final_status=final_status,
        content_type=content_type or None,
        bytes=int(entry.get("bytes") or 0),
        trigger=trigger,
        phase=phase,
        error=error,
    )


class ScriptedEngine:
    """Browser-perspective capture through a bridge service."""

    def __init__(self, bridge_url: str, settle_ms: int = 3000,
                 page_timeout_s: float = 30.0, screenshot_dir: str | Path | None = None):
        self.bridge_url = bridge_url.rstrip("/")
        self.settle_ms = settle_ms
        self.page_timeout_s = page_timeout_s
        self.screenshot_dir = Path(screenshot_dir) if screenshot_dir else None

    def capture(self, m: ReplayUri, ep: ArchiveEndpoint,
                scripting: str = SCRIPTING_ON) -> CaptureLog:
        started = utc_now_s()
        payload = {
            "url": m.uri,
            "scripting": scripting,
            "settle_ms": self.settle_ms,
            "page_timeout_s": self.page_timeout_s,
            "screenshot": self.screenshot_dir is not None,
        }
        try:
            resp = requests.post(self.bridge_url + "/capture", json=payload,
                                 timeout=self.page_timeout_s + BRIDGE_GRACE_S)
        except requests.Timeout as exc:
            raise BridgeTimeout(f"bridge did not answer within "
                                f"{self.page_timeout_s + BRIDGE_GRACE_S:.0f}s: {exc}") from exc
        except requests.RequestException as exc:
            raise BridgeUnavailable(f"cannot reach bridge at {self.bridge_url}: {exc}") from exc
        if resp.status_code == 504:
            raise BridgeTimeout(f"bridge timed out loading {m.uri}")
        if resp.status_code != 200:
            raise BridgeUnavailable(
                f"bridge returned {resp.status_code} for {m.uri}")
        doc = resp.json()

        page = _entry_to_fetch(doc.get("page") or {}, m.uri, TRIGGER_MARKUP, PHASE_PAGE)
        subs: dict[str, ResourceFetch] = {}
        for entry in doc.get("subresources") or ():
            request_uri = entry["request_uri"]
            if request_uri == m.uri or request_uri in subs:
                continue
            trigger = _INITIATOR_TRIGGERS.get(entry.get("initiator"), TRIGGER_MARKUP)
            subs[request_uri] = _entry_to_fetch(entry, request_uri, trigger,
                                                PHASE_SUBRESOURCE)

        finished = utc_now_s()
        log = CaptureLog(
            memento=m,
            engine=ENGINE_SCRIPTED,
            scripting=scripting,
            fetches=_order_fetches(page, list(subs.values())),
            started=started,
            finished=finished,
            settle_ms=self.settle_ms,
            page_timeout_s=self.page_timeout_s,
        )
        shot = doc.get("screenshot_b64")
        if shot and self.screenshot_dir is not None:
            name = log_filename(log).rsplit(".", 1)[0] + ".png"
            self.screenshot_dir.mkdir(parents=True, exist_ok=True)
            (self.screenshot_dir / name).write_bytes(base64.b64decode(shot))
            log = dataclasses.replace(log, screenshot=name)
        return log


def capture_scripted(m: ReplayUri, ep: ArchiveEndpoint, bridge_url: str,
                     scripting: str = SCRIPTING_ON, settle_ms: int = 3000,
                     page_timeout_s: float = 30.0,
                     screenshot_dir: str | Path | None = None) -> CaptureLog:
    engine = ScriptedEngine(bridge_url, settle_ms=settle_ms,
                            page_timeout_s=page_timeout_s, screenshot_dir=screenshot_dir)
    return engine.capture(m, ep, scripting=scripting)
