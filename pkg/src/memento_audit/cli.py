"""Command-line pipeline: timemap -> sample -> capture -> analyze -> report.

    memento-audit timemap <uri>          print the TimeMap in link-format
    memento-audit sample  <uri>          print the annual memento selections
    memento-audit capture <memento-uri>  one capture, written to the cache
    memento-audit audit   <uri>          full pipeline, report.json + series.csv
    memento-audit report  <cache-dir>    recompute the report from cached logs

Exit codes: 0 success, 1 partial failure (some mementos failed but a report
was emitted), 2 fatal.  The cache directory resolves flag > MEMENTO_AUDIT_CACHE
environment variable > config file > default.
"""

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .analysis import build_series, compute_metrics, detect_drops
from .bridge import ScriptedEngine, bridge_available
from .capture import CaptureLog, StaticEngine, load_log, log_filename, save_log
from .client import fetch_timemap
from .config import (
    CACHE_ENV,
    AuditConfig,
    parse_config_file,
)
from .errors import AuditError, InsufficientData
from .fetching import PoliteFetcher
from .linkformat import serialize_link_format
from .replay import ArchiveEndpoint, to_replay_uri, validate_original_uri
from .report import (
    AuditReport,
    SampleEntry,
    collect_leaks,
    sample_entries,
    write_report,
)
from .sampling import parse_interval, select_annual
from .timefmt import format_iso, parse_iso

logger = logging.getLogger(__name__)

RUN_META_SCHEMA_VERSION = "1"

DEFAULT_ENDPOINT_BASE = "http://web.archive.org"


def _site_digest(site: str) -> str:
    return hashlib.sha256(site.encode("utf-8")).hexdigest()[:12]


def run_meta_filename(site: str) -> str:
    return f"run_{_site_digest(site)}.json"


# --- argument handling -------------------------------------------------------

def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file; flags win")
    parser.add_argument("--endpoint",
                        help=f"archive base URL (default {DEFAULT_ENDPOINT_BASE})")
    parser.add_argument("--timemap-template",
                        help="explicit TimeMap URI template with {original}")
    parser.add_argument("--replay-template",
                        help="explicit replay URI template with {timestamp}/{original}")
    parser.add_argument("--archive-host", action="append", default=None,
                        help="extra host to treat as the archive (repeatable)")
    parser.add_argument("--chrome-prefix", action="append", default=None,
                        help="path prefix of replay UI assets (repeatable)")
    parser.add_argument("--interval", help="sampling interval: Ny or Nd (default 1y)")
    parser.add_argument("--fixed-grid", action="store_true", default=None,
                        help="targets advance from the first memento, not the "
                             "previously chosen one")
    parser.add_argument("--engine", choices=("static", "scripted"))
    parser.add_argument("--scripting", choices=("on", "off", "both"))
    parser.add_argument("--bridge", help="browser bridge URL for the scripted engine")
    parser.add_argument("--drop-threshold", type=float)
    parser.add_argument("--sustain-window", type=int)
    parser.add_argument("--timeout-s", type=float)
    parser.add_argument("--politeness-ms", type=int)
    parser.add_argument("--per-host", type=int)
    parser.add_argument("--max-redirects", type=int)
    parser.add_argument("--settle-ms", type=int)
    parser.add_argument("--page-timeout-s", type=float)
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--screenshot", action="store_true", default=None)
    parser.add_argument("--cache-dir")
    parser.add_argument("--out-dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memento-audit",
        description="Audit how completely an archive can replay a page's history.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_timemap = sub.add_parser("timemap", help="fetch and print a TimeMap")
    p_timemap.add_argument("uri", help="original URI")
    _add_common_flags(p_timemap)

    p_sample = sub.add_parser("sample", help="print annual memento selections")
    p_sample.add_argument("uri", help="original URI")
    _add_common_flags(p_sample)

    p_capture = sub.add_parser("capture", help="capture one memento into the cache")
    p_capture.add_argument("memento", help="memento URI (API or replay form)")
    _add_common_flags(p_capture)

    p_audit = sub.add_parser("audit", help="run the full pipeline for a site")
    p_audit.add_argument("uri", help="original URI")
    _add_common_flags(p_audit)

    p_report = sub.add_parser("report",
                              help="recompute the report from cached capture logs")
    p_report.add_argument("cache", help="cache directory holding capture logs")
    p_report.add_argument("--site", help="site to report on when several are cached")
    p_report.add_argument("--out-dir")
    return parser


def resolve_config(args: argparse.Namespace) -> AuditConfig:
    """Merge flags, environment, config file, and defaults into an AuditConfig."""
    file_vals: dict[str, list[str]] = {}
    if getattr(args, "config", None):
        file_vals = parse_config_file(args.config)

    def from_file(key: str):
        values = file_vals.get(key)
        return values[-1] if values else None

    def pick(flag_value, key: str, cast, default):
        if flag_value is not None:
            return flag_value
        raw = from_file(key)
        if raw is not None:
            return cast(raw)
        return default

    def pick_repeat(flag_values, key: str, default: tuple) -> tuple:
        if flag_values:
            return tuple(flag_values)
        if key in file_vals:
            return tuple(file_vals[key])
        return default

    base = pick(getattr(args, "endpoint", None), "endpoint", str,
                DEFAULT_ENDPOINT_BASE).rstrip("/")
    base_host = base.split("://", 1)[-1].split("/", 1)[0]
    extra_hosts = pick_repeat(getattr(args, "archive_host", None), "archive-host", ())
    chrome = pick_repeat(getattr(args, "chrome_prefix", None), "chrome-prefix",
                         ("/static/",))
    timemap_template = pick(getattr(args, "timemap_template", None),
                            "timemap-template", str,
                            base + "/list/timemap/link/{original}")
    replay_template = pick(getattr(args, "replay_template", None),
                           "replay-template", str,
                           base + "/web/{timestamp}/{original}")
    endpoint = ArchiveEndpoint(
        timemap_template=timemap_template,
        replay_template=replay_template,
        archive_hosts=frozenset({base_host, *extra_hosts}),
        replay_chrome_prefixes=tuple(chrome),
    )

    def truthy(raw: str) -> bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")

    cache_flag = getattr(args, "cache_dir", None)
    cache_dir = (cache_flag or os.environ.get(CACHE_ENV)
                 or from_file("cache-dir") or ".memento-audit-cache")

    defaults = AuditConfig(endpoint=endpoint)
    cfg = AuditConfig(
        endpoint=endpoint,
        interval=parse_interval(pick(getattr(args, "interval", None), "interval",
                                     str, str(defaults.interval))),
        fixed_grid=pick(getattr(args, "fixed_grid", None), "fixed-grid", truthy,
                        defaults.fixed_grid),
        engine=pick(getattr(args, "engine", None), "engine", str, defaults.engine),
        scripting=pick(getattr(args, "scripting", None), "scripting", str,
                       defaults.scripting),
        bridge_url=pick(getattr(args, "bridge", None), "bridge", str,
                        defaults.bridge_url),
        drop_threshold=pick(getattr(args, "drop_threshold", None), "drop-threshold",
                            float, defaults.drop_threshold),
        sustain_window=pick(getattr(args, "sustain_window", None), "sustain-window",
                            int, defaults.sustain_window),
        timeout_s=pick(getattr(args, "timeout_s", None), "timeout-s", float,
                       defaults.timeout_s),
        politeness_ms=pick(getattr(args, "politeness_ms", None), "politeness-ms",
                           int, defaults.politeness_ms),
        per_host=pick(getattr(args, "per_host", None), "per-host", int,
                      defaults.per_host),
        max_redirects=pick(getattr(args, "max_redirects", None), "max-redirects",
                           int, defaults.max_redirects),
        settle_ms=pick(getattr(args, "settle_ms", None), "settle-ms", int,
                       defaults.settle_ms),
        page_timeout_s=pick(getattr(args, "page_timeout_s", None), "page-timeout-s",
                            float, defaults.page_timeout_s),
        jobs=pick(getattr(args, "jobs", None), "jobs", int, defaults.jobs),
        screenshot=pick(getattr(args, "screenshot", None), "screenshot", truthy,
                        defaults.screenshot),
        cache_dir=Path(cache_dir),
        out_dir=Path(pick(getattr(args, "out_dir", None), "out-dir", str, ".")),
    )
    cfg.validate()
    return cfg


def _fetcher(cfg: AuditConfig) -> PoliteFetcher:
    return PoliteFetcher(
        timeout_s=cfg.timeout_s,
        politeness_s=cfg.politeness_ms / 1000.0,
        per_host=cfg.per_host,
        max_redirects=cfg.max_redirects,
    )


# --- capture plumbing --------------------------------------------------------

def _modes(cfg: AuditConfig) -> list[tuple[str, str]]:
    if cfg.engine == "static":
        return [("static", "off")]
    if cfg.scripting == "both":
        return [("scripted", "on"), ("scripted", "off")]
    return [("scripted", cfg.scripting)]


def _cached_log(cfg: AuditConfig, m, engine: str, scripting: str) -> CaptureLog | None:
    path = cfg.cache_dir / f"{m.timestamp}_{_site_digest(m.original)}_{engine}_{scripting}.json"
    if not path.exists():
        return None
    log = load_log(path)
    if log.memento.uri != m.uri:
        return None
    if engine == "scripted" and (log.settle_ms != cfg.settle_ms
                                 or log.page_timeout_s != cfg.page_timeout_s):
        return None
    return log


def _capture_one(cfg: AuditConfig, m, engine: str, scripting: str,
                 fetcher: PoliteFetcher) -> CaptureLog:
    cached = _cached_log(cfg, m, engine, scripting)
    if cached is not None:
        logger.info("cache hit: %s %s/%s", m.uri, engine, scripting)
        return cached
    if engine == "static":
        log = StaticEngine(fetcher=fetcher, workers=cfg.per_host * 2).capture(
            m, cfg.endpoint)
    else:
        shots = cfg.out_dir / "screenshots" if cfg.screenshot else None
        log = ScriptedEngine(cfg.bridge_url, settle_ms=cfg.settle_ms,
                             page_timeout_s=cfg.page_timeout_s,
                             screenshot_dir=shots).capture(m, cfg.endpoint,
                                                           scripting=scripting)
    save_log(log, cfg.cache_dir)
    return log


# --- subcommands -------------------------------------------------------------

def cmd_timemap(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    tm = fetch_timemap(args.uri, cfg.endpoint, fetcher=_fetcher(cfg))
    print(serialize_link_format(tm))
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    tm = fetch_timemap(args.uri, cfg.endpoint, fetcher=_fetcher(cfg))
    sample = select_annual(tm, interval=cfg.interval, fixed_grid=cfg.fixed_grid)
    for sel in sample.selections:
        deviation = int(sel.deviation.total_seconds())
        print(f"{format_iso(sel.target)}\t{format_iso(sel.chosen.datetime)}"
              f"\t{deviation:+d}s\t{sel.chosen.uri}")
    return 0


def cmd_capture(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    m = to_replay_uri(args.memento, cfg.endpoint)
    engine, scripting = _modes(cfg)[0]
    if engine == "scripted" and not bridge_available(cfg.bridge_url):
        print(f"error: browser bridge unreachable at {cfg.bridge_url}",
              file=sys.stderr)
        return 2
    log = _capture_one(cfg, m, engine, scripting, _fetcher(cfg))
    path = cfg.cache_dir / log_filename(log)
    status = "failed" if log.page_failed else "ok"
    print(f"{status}\t{len(log.fetches)} fetches\t{path}")
    return 0 if not log.page_failed else 1


def _audit_site(cfg: AuditConfig, site: str) -> tuple[AuditReport, list[str], dict]:
    """Run the pipeline for one site.  Returns (report, failure messages,
    run metadata for the cache)."""
    fetcher = _fetcher(cfg)
    tm = fetch_timemap(site, cfg.endpoint, fetcher=fetcher)
    sample = select_annual(tm, interval=cfg.interval, fixed_grid=cfg.fixed_grid)
    if not sample.selections:
        raise AuditError(f"no mementos to audit for {site}")

    # One memento per calendar year: keep the first selection of each year.
    chosen: list = []
    seen_years: set[int] = set()
    for sel in sample.selections:
        year = sel.chosen.datetime.year
        if year not in seen_years:
            seen_years.add(year)
            chosen.append(sel)

    if cfg.engine == "scripted" and not bridge_available(cfg.bridge_url):
        raise AuditError(f"browser bridge unreachable at {cfg.bridge_url}")

    modes = _modes(cfg)
    failures: list[str] = []

    def work(sel):
        m = to_replay_uri(sel.chosen.uri, cfg.endpoint)
        logs = []
        for engine, scripting in modes:
            logs.append(_capture_one(cfg, m, engine, scripting, fetcher))
        return logs

    results: dict[int, list[CaptureLog]] = {}
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        futures = {pool.submit(work, sel): idx for idx, sel in enumerate(chosen)}
        for future, idx in futures.items():
            try:
                results[idx] = future.result()
            except (AuditError, OSError) as exc:
                failures.append(f"{chosen[idx].chosen.uri}: {exc}")

    ordered_logs: list[CaptureLog] = []
    metrics = []
    for idx in sorted(results):
        logs = results[idx]
        ordered_logs.extend(logs)
        metrics.append(compute_metrics(logs, cfg.endpoint))
    if not ordered_logs:
        raise AuditError("every capture failed; no report to emit")

    series = build_series(metrics)
    try:
        flags = tuple(detect_drops(series, cfg.drop_threshold, cfg.sustain_window))
    except InsufficientData:
        flags = ()
    leaks = collect_leaks(ordered_logs, cfg.endpoint)
    generated = max(log.finished for log in ordered_logs)

    report = AuditReport(
        site=site,
        generated=generated,
        config_echo=cfg.echo(),
        sample=sample_entries(sample),
        metrics=tuple(metrics),
        series=series,
        flags=flags,
        leaks=leaks,
    )
    meta = {
        "schema_version": RUN_META_SCHEMA_VERSION,
        "site": site,
        "config": cfg.echo(),
        "sample": [
            {
                "target": format_iso(e.target),
                "memento": e.memento_uri,
                "datetime": format_iso(e.memento_datetime),
                "deviation_s": e.deviation_s,
            }
            for e in report.sample
        ],
        "log_files": [log_filename(log) for log in ordered_logs],
        "failures": failures,
    }
    return report, failures, meta


def cmd_audit(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    site = validate_original_uri(args.uri)
    report, failures, meta = _audit_site(cfg, site)
    json_path, csv_path = write_report(report, cfg.out_dir)
    cfg.cache_dir.mkdir(parents=True, exist_ok=True)
    meta_path = cfg.cache_dir / run_meta_filename(site)
    meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    print(f"site:    {site}")
    print(f"points:  {len(report.series)}")
    print(f"flags:   {len(report.flags)}")
    print(f"leaks:   {len(report.leaks)}")
    print(f"report:  {json_path}")
    print(f"series:  {csv_path}")
    for failure in failures:
        print(f"failed:  {failure}", file=sys.stderr)
    return 1 if failures else 0


def cmd_report(args: argparse.Namespace) -> int:
    cache = Path(args.cache)
    metas = sorted(cache.glob("run_*.json"))
    if args.site:
        metas = [m for m in metas if m.name == run_meta_filename(args.site)]
    if not metas:
        print("error: no capture logs found", file=sys.stderr)
        return 2
    if len(metas) > 1:
        print("error: several audited sites are cached; pick one with --site",
              file=sys.stderr)
        return 2
    meta = json.loads(metas[0].read_text(encoding="utf-8"))
    echo = meta["config"]
    endpoint = ArchiveEndpoint(
        timemap_template=echo["timemap_template"],
        replay_template=echo["replay_template"],
        archive_hosts=frozenset(echo["archive_hosts"]),
        replay_chrome_prefixes=tuple(echo["chrome_prefixes"]),
    )
    logs = []
    for name in meta["log_files"]:
        path = cache / name
        if not path.exists():
            print(f"error: cached log missing: {name}", file=sys.stderr)
            return 2
        logs.append(load_log(path))
    if not logs:
        print("error: no capture logs found", file=sys.stderr)
        return 2

    by_memento: dict[str, list[CaptureLog]] = {}
    order: list[str] = []
    for log in logs:
        if log.memento.uri not in by_memento:
            order.append(log.memento.uri)
        by_memento.setdefault(log.memento.uri, []).append(log)
    metrics = [compute_metrics(by_memento[uri], endpoint) for uri in order]
    series = build_series(metrics)
    try:
        flags = tuple(detect_drops(series, echo["drop_threshold"],
                                   echo["sustain_window"]))
    except InsufficientData:
        flags = ()
    report = AuditReport(
        site=meta["site"],
        generated=max(log.finished for log in logs),
        config_echo=echo,
        sample=tuple(
            SampleEntry(
                target=parse_iso(e["target"]),
                memento_uri=e["memento"],
                memento_datetime=parse_iso(e["datetime"]),
                deviation_s=e["deviation_s"],
            )
            for e in meta["sample"]
        ),
        metrics=tuple(metrics),
        series=series,
        flags=flags,
        leaks=collect_leaks(logs, endpoint),
    )
    out_dir = Path(args.out_dir) if args.out_dir else Path(".")
    json_path, csv_path = write_report(report, out_dir)
    print(f"report:  {json_path}")
    print(f"series:  {csv_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    handlers = {
        "timemap": cmd_timemap,
        "sample": cmd_sample,
        "capture": cmd_capture,
        "audit": cmd_audit,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except (AuditError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
