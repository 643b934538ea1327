"""Polite HTTP fetch layer: per-host concurrency caps, inter-request delay,
one retry on transport errors, and manual redirect-chain following.

One PoliteFetcher instance should be shared across everything that talks to
the same hosts so the per-host limits hold globally.
"""

import logging
import threading
import time
from dataclasses import dataclass, field

import requests

from . import __version__

logger = logging.getLogger(__name__)

REDIRECT_STATUSES = (301, 302, 303, 307, 308)


@dataclass
class ChainResult:
    """Outcome of following one URI through its redirect chain."""

    hops: list[tuple[int, str]] = field(default_factory=list)
    response: requests.Response | None = None
    error: str | None = None

    @property
    def final_status(self) -> int | None:
        return self.hops[-1][0] if self.hops else None

    @property
    def final_uri(self) -> str | None:
        return self.hops[-1][1] if self.hops else None


class _HostGate:
    """Serializes request starts against one host: a concurrency cap plus a
    minimum spacing between starts."""

    def __init__(self, per_host: int, delay_s: float):
        self.semaphore = threading.Semaphore(per_host)
        self.lock = threading.Lock()
        self.delay_s = delay_s
        self.next_at = 0.0

    def __enter__(self):
        self.semaphore.acquire()
        with self.lock:
            now = time.monotonic()
            wait = self.next_at - now
            self.next_at = max(now, self.next_at) + self.delay_s
        if wait > 0:
            time.sleep(wait)
        return self

    def __exit__(self, *exc):
        self.semaphore.release()
        return False


class PoliteFetcher:
    def __init__(self, user_agent: str | None = None, timeout_s: float = 10.0,
                 politeness_s: float = 0.5, per_host: int = 2,
                 max_redirects: int = 10, retries: int = 1):
        self.timeout_s = timeout_s
        self.politeness_s = politeness_s
        self.per_host = per_host
        self.max_redirects = max_redirects
        self.retries = retries
        self.session = requests.Session()
        self.session.headers["User-Agent"] = user_agent or f"memento-audit/{__version__}"
        self._gates: dict[str, _HostGate] = {}
        self._gates_lock = threading.Lock()

    def close(self) -> None:
        self.session.close()

    def _gate_for(self, uri: str) -> _HostGate:
        host = requests.utils.urlparse(uri).netloc.lower()
        with self._gates_lock:
            gate = self._gates.get(host)
            if gate is None:
                gate = _HostGate(self.per_host, self.politeness_s)
                self._gates[host] = gate
            return gate

    def get_once(self, uri: str, headers: dict | None = None) -> requests.Response:
        """One GET, no redirect following. Raises requests exceptions after
        the configured retries are exhausted."""
        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            with self._gate_for(uri):
                try:
                    return self.session.get(
                        uri, headers=headers, allow_redirects=False,
                        timeout=self.timeout_s,
                    )
                except requests.RequestException as exc:
                    last_exc = exc
                    logger.debug("GET %s failed (attempt %d): %s", uri, attempt + 1, exc)
        assert last_exc is not None
        raise last_exc

    def follow(self, uri: str, headers: dict | None = None) -> ChainResult:
        """Follow `uri` through 3xx hops, recording (status, uri) per hop.

        Transport failures end the chain with `error` set; hops observed so
        far are kept. The chain is capped at max_redirects hops.
        """
        result = ChainResult()
        current = uri
        while True:
            try:
                resp = self.get_once(current, headers=headers)
            except requests.RequestException as exc:
                result.error = f"{type(exc).__name__}: {exc}"
                return result
            result.hops.append((resp.status_code, current))
            if resp.status_code in REDIRECT_STATUSES:
                location = resp.headers.get("Location")
                if not location:
                    # 3xx without Location terminates the chain as-is
                    result.response = resp
                    return result
                if len(result.hops) >= self.max_redirects:
                    result.response = resp
                    return result
                current = requests.compat.urljoin(current, location)
                continue
            result.response = resp
            return result
