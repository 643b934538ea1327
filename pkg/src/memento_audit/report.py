"""Serialize audit results: a versioned JSON report and a plot-ready CSV.

Equal report values serialize to identical bytes — field order is fixed, all
lists are sorted, and `generated` is derived from the capture logs rather than
the wall clock — so recomputing from cached logs reproduces the files exactly.
"""

import csv
import io
import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .analysis import (
    AnnualSeries,
    DropFlag,
    FetchClass,
    MementoMetrics,
    SeriesPoint,
    classify_fetch,
)
from .capture import CaptureLog
from .replay import ArchiveEndpoint, ReplayUri
from .sampling import AnnualSample
from .timefmt import format_iso, parse_iso

REPORT_SCHEMA_VERSION = "1"

CSV_HEADER = ("year", "resource_count", "archived_ok", "archived_missing",
              "leaked", "completeness", "script_delta")

#: Reader-facing counting rules, echoed in every report.
REPORT_NOTES = {
    "completeness": "archived_ok / (archived_ok + archived_missing + leaked "
                    "+ network_error); 1.0 when nothing was attempted",
    "count_includes_page": True,
    "replay_chrome_excluded": True,
}


@dataclass(frozen=True)
class SampleEntry:
    """One sampling decision: the target instant and the memento chosen."""

    target: datetime
    memento_uri: str
    memento_datetime: datetime
    deviation_s: int


@dataclass(frozen=True)
class LeakRecord:
    """One fetch that escaped to the live web, with its redirect chain."""

    memento_uri: str
    request_uri: str
    chain: tuple[tuple[int, str], ...]
    final_status: int | None
    trigger: str


@dataclass(frozen=True)
class AuditReport:
    site: str
    generated: datetime
    config_echo: dict
    sample: tuple[SampleEntry, ...]
    metrics: tuple[MementoMetrics, ...]
    series: AnnualSeries
    flags: tuple[DropFlag, ...]
    leaks: tuple[LeakRecord, ...]


def sample_entries(sample: AnnualSample) -> tuple[SampleEntry, ...]:
    return tuple(
        SampleEntry(
            target=sel.target,
            memento_uri=sel.chosen.uri,
            memento_datetime=sel.chosen.datetime,
            deviation_s=int(sel.deviation.total_seconds()),
        )
        for sel in sample.selections
    )


def collect_leaks(logs: list[CaptureLog], ep: ArchiveEndpoint) -> tuple[LeakRecord, ...]:
    """Every Leaked fetch across the given logs, deduplicated per memento and
    request URI, in stable order."""
    records: dict[tuple[str, str], LeakRecord] = {}
    for log in logs:
        for f in log.fetches:
            if classify_fetch(f, ep) != FetchClass.LEAKED:
                continue
            key = (log.memento.uri, f.request_uri)
            if key not in records:
                records[key] = LeakRecord(
                    memento_uri=log.memento.uri,
                    request_uri=f.request_uri,
                    chain=f.chain,
                    final_status=f.final_status,
                    trigger=f.trigger,
                )
    return tuple(records[key] for key in sorted(records))


# --- JSON --------------------------------------------------------------------

def _metrics_doc(m: MementoMetrics) -> dict:
    return {
        "uri": m.memento.uri,
        "timestamp": m.memento.timestamp,
        "original": m.memento.original,
        "year": m.year,
        "counts": {cls.value: m.counts.get(cls, 0) for cls in FetchClass},
        "total_requested": m.total_requested,
        "completeness": m.completeness,
        "script_delta": m.script_delta,
    }


def emit_json(r: AuditReport) -> str:
    """Render the report with fixed field order; equal reports give equal bytes."""
    doc = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "site": r.site,
        "generated": format_iso(r.generated),
        "config": dict(sorted(r.config_echo.items())),
        "notes": dict(sorted(REPORT_NOTES.items())),
        "sample": [
            {
                "target": format_iso(e.target),
                "memento": e.memento_uri,
                "datetime": format_iso(e.memento_datetime),
                "deviation_s": e.deviation_s,
            }
            for e in r.sample
        ],
        "mementos": [_metrics_doc(m) for m in sorted(r.metrics, key=lambda m: m.year)],
        "series": [
            {"year": p.year, "resource_count": p.resource_count}
            for p in r.series.points
        ],
        "drop_flags": [
            {
                "start_year": f.start_year,
                "end_year": f.end_year,
                "baseline": f.baseline,
                "dropped_value": f.dropped_value,
                "ratio": f.ratio,
            }
            for f in r.flags
        ],
        "leaks": [
            {
                "memento": leak.memento_uri,
                "request_uri": leak.request_uri,
                "chain": [[status, uri] for status, uri in leak.chain],
                "final_status": leak.final_status,
                "trigger": leak.trigger,
            }
            for leak in r.leaks
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=True) + "\n"


def parse_report(text: str) -> AuditReport:
    """Inverse of emit_json over reports this module produced."""
    doc = json.loads(text)
    metrics = []
    for entry in doc["mementos"]:
        memento = ReplayUri(timestamp=entry["timestamp"], original=entry["original"],
                            uri=entry["uri"])
        metrics.append(MementoMetrics(
            memento=memento,
            year=entry["year"],
            counts={FetchClass(name): n for name, n in entry["counts"].items()},
            total_requested=entry["total_requested"],
            completeness=entry["completeness"],
            script_delta=entry["script_delta"],
        ))
    by_year = {m.year: m for m in metrics}
    points = tuple(
        SeriesPoint(year=row["year"], resource_count=row["resource_count"],
                    metrics=by_year[row["year"]])
        for row in doc["series"]
    )
    return AuditReport(
        site=doc["site"],
        generated=parse_iso(doc["generated"]),
        config_echo=doc["config"],
        sample=tuple(
            SampleEntry(
                target=parse_iso(e["target"]),
                memento_uri=e["memento"],
                memento_datetime=parse_iso(e["datetime"]),
                deviation_s=e["deviation_s"],
            )
            for e in doc["sample"]
        ),
        metrics=tuple(metrics),
        series=AnnualSeries(site=doc["site"] if points else None, points=points),
        flags=tuple(
            DropFlag(start_year=f["start_year"], end_year=f["end_year"],
                     baseline=f["baseline"], dropped_value=f["dropped_value"],
                     ratio=f["ratio"])
            for f in doc["drop_flags"]
        ),
        leaks=tuple(
            LeakRecord(
                memento_uri=leak["memento"],
                request_uri=leak["request_uri"],
                chain=tuple((int(s), u) for s, u in leak["chain"]),
                final_status=leak["final_status"],
                trigger=leak["trigger"],
            )
            for leak in doc["leaks"]
        ),
    )


# --- CSV ---------------------------------------------------------------------

def emit_csv_series(s: AnnualSeries) -> str:
    """One row per year, ascending; completeness to 4 decimal places; the
    script_delta cell is empty when no scripted capture ran."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in s.points:
        m = p.metrics
        writer.writerow([
            p.year,
            p.resource_count,
            m.count(FetchClass.ARCHIVED_OK),
            m.count(FetchClass.ARCHIVED_MISSING),
            m.count(FetchClass.LEAKED),
            f"{m.completeness:.4f}",
            "" if m.script_delta is None else m.script_delta,
        ])
    return buf.getvalue()


def write_report(r: AuditReport, out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    csv_path = out / "series.csv"
    json_path.write_text(emit_json(r), encoding="utf-8")
    csv_path.write_text(emit_csv_series(r.series), encoding="utf-8")
    return json_path, csv_path
