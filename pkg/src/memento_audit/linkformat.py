"""TimeMap model plus application/link-format parsing and serialization.

A TimeMap is a comma-separated list of `<URI>; param=value; ...` entries.
Datetime parameter values contain commas ("Tue, 20 Jun 2000 ..."), so entries
are split by a small scanner that tracks quoting and angle brackets instead of
a plain `split(",")`.
"""

from dataclasses import dataclass, field
from datetime import datetime

from .errors import BadDatetime, MalformedEntry, MissingRole
from .timefmt import format_rfc1123, parse_rfc1123

REL_MEMENTO = "memento"
REL_FIRST = "first-memento"
REL_LAST = "last-memento"

_ROLE_RELS = ("original", "timemap", "timegate", "timebundle")
_MEMENTO_TOKENS = {"first", "last", "memento"}


@dataclass(frozen=True, order=True)
class MementoRecord:
    """One archived snapshot: URI, capture instant, and its rel roles."""

    datetime: datetime
    uri: str
    rels: frozenset[str] = field(default_factory=lambda: frozenset({REL_MEMENTO}))

    @property
    def is_first(self) -> bool:
        return REL_FIRST in self.rels

    @property
    def is_last(self) -> bool:
        return REL_LAST in self.rels


@dataclass(frozen=True)
class TimeMap:
    """Parsed archive index for one original resource."""

    original: str
    timegate_uri: str
    timemap_uri: str
    mementos: tuple[MementoRecord, ...]
    timebundle_uri: str | None = None

    @property
    def first(self) -> MementoRecord:
        return self.mementos[0]

    @property
    def last(self) -> MementoRecord:
        return self.mementos[-1]


def memento_record(uri: str, dt: datetime, first: bool = False, last: bool = False) -> MementoRecord:
    """Build a MementoRecord, always including the base memento rel."""
    rels = {REL_MEMENTO}
    if first:
        rels.add(REL_FIRST)
    if last:
        rels.add(REL_LAST)
    return MementoRecord(datetime=dt, uri=uri, rels=frozenset(rels))


def _split_entries(body: str) -> list[tuple[int, str]]:
    """Split on commas that sit outside <...> and outside quoted strings."""
    entries = []
    start = 0
    in_quote = False
    in_angle = False
    for i, ch in enumerate(body):
        if in_quote:
            if ch == '"':
                in_quote = False
        elif in_angle:
            if ch == ">":
                in_angle = False
        elif ch == '"':
            in_quote = True
        elif ch == "<":
            in_angle = True
        elif ch == ",":
            entries.append((start, body[start:i]))
            start = i + 1
    entries.append((start, body[start:]))
    return [(off, text) for off, text in entries if text.strip()]


def _split_params(segment: str) -> list[str]:
    parts = []
    start = 0
    in_quote = False
    for i, ch in enumerate(segment):
        if ch == '"':
            in_quote = not in_quote
        elif ch == ";" and not in_quote:
            parts.append(segment[start:i])
            start = i + 1
    parts.append(segment[start:])
    return parts


def _parse_entry(offset: int, text: str) -> tuple[str, dict[str, str]]:
    stripped = text.strip()
    if not stripped.startswith("<"):
        raise MalformedEntry(f"entry does not start with '<': {stripped[:40]!r}", offset)
    end = stripped.find(">")
    if end < 0:
        raise MalformedEntry(f"unterminated URI in entry: {stripped[:40]!r}", offset)
    uri = stripped[1:end]
    params: dict[str, str] = {}
    for raw in _split_params(stripped[end + 1:]):
        raw = raw.strip()
        if not raw:
            continue
        if "=" not in raw:
            raise MalformedEntry(f"parameter without '=': {raw!r}", offset)
        key, value = raw.split("=", 1)
        value = value.strip()
        if value.startswith('"') and value.endswith('"') and len(value) >= 2:
            value = value[1:-1]
        params[key.strip().lower()] = value
    return uri, params


def parse_link_format(body: str) -> TimeMap:
    """Parse a link-format TimeMap body.

    Raises MalformedEntry for unparseable segments or duplicated roles,
    MissingRole when no original/timegate/timemap entry exists, and
    BadDatetime when a memento entry has no valid RFC-1123 datetime.
    """
    roles: dict[str, str] = {}
    mementos: list[MementoRecord] = []
    for offset, text in _split_entries(body):
        uri, params = _parse_entry(offset, text)
        rel = params.get("rel")
        if rel is None:
            continue
        tokens = rel.split()
        if any(t in _ROLE_RELS for t in tokens):
            if len(tokens) != 1:
                raise MalformedEntry(f"role entry with extra rel tokens: {rel!r}", offset)
            role = tokens[0]
            if role in roles:
                raise MalformedEntry(f"duplicate {role!r} entry", offset)
            roles[role] = uri
        elif "memento" in tokens and set(tokens) <= _MEMENTO_TOKENS:
            raw_dt = params.get("datetime")
            if raw_dt is None:
                raise BadDatetime(f"memento entry without datetime: <{uri}>")
            dt = parse_rfc1123(raw_dt)
            mementos.append(memento_record(uri, dt, first="first" in tokens, last="last" in tokens))
        # entries with unknown rels (license, self, ...) are ignored

    for role in ("original", "timemap", "timegate"):
        if role not in roles:
            raise MissingRole(f"no rel={role!r} entry in TimeMap")
    firsts = sum(1 for m in mementos if m.is_first)
    lasts = sum(1 for m in mementos if m.is_last)
    if firsts > 1 or lasts > 1:
        raise MalformedEntry("more than one first-memento or last-memento entry")

    mementos.sort(key=lambda m: (m.datetime, m.uri))
    return TimeMap(
        original=roles["original"],
        timegate_uri=roles["timegate"],
        timemap_uri=roles["timemap"],
        timebundle_uri=roles.get("timebundle"),
        mementos=tuple(mementos),
    )


def _memento_rel(m: MementoRecord) -> str:
    prefix = ""
    if m.is_first:
        prefix += "first "
    if m.is_last:
        prefix += "last "
    return prefix + "memento"


def serialize_link_format(tm: TimeMap) -> str:
    """Emit the canonical link-format body; output re-parses to an equal TimeMap."""
    entries = []
    if tm.timebundle_uri is not None:
        entries.append(f'<{tm.timebundle_uri}>; rel="timebundle"')
    entries.append(f'<{tm.original}>; rel="original"')
    entries.append(f'<{tm.timemap_uri}>; rel="timemap"; type="application/link-format"')
    entries.append(f'<{tm.timegate_uri}>; rel="timegate"')
    for m in sorted(tm.mementos, key=lambda m: (m.datetime, m.uri)):
        entries.append(
            f'<{m.uri}>; rel="{_memento_rel(m)}"; datetime="{format_rfc1123(m.datetime)}"'
        )
    return ",\n".join(entries)
