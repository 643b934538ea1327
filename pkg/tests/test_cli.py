import json
from pathlib import Path

import pytest

from memento_audit.cli import build_parser, main, resolve_config, run_meta_filename
from memento_audit.config import CACHE_ENV, parse_config_file
from memento_audit.fixture_archive.scenarios import (
    NEWS_ORIGINAL,
    NEWS_TIMESTAMPS,
    ROBOTS_ORIGINAL,
    STATIC6_FETCH_TOTAL,
    STATIC6_ORIGINAL,
    STATIC6_TIMESTAMP,
    WHITEHOUSE_ORIGINAL,
)
from memento_audit.linkformat import parse_link_format


def _resolve(argv):
    return resolve_config(build_parser().parse_args(argv))


def _quiet(argv):
    # Flags belong to the subcommand, so they go after it.
    return [*argv, "--politeness-ms", "0"]


# --- configuration resolution ------------------------------------------------


def test_cache_dir_flag_beats_env_and_file(tmp_path, monkeypatch):
    conf = tmp_path / "audit.conf"
    conf.write_text("cache-dir=/from/file\n")
    monkeypatch.setenv(CACHE_ENV, "/from/env")
    cfg = _resolve(["audit", "http://s.example/", "--config", str(conf),
                    "--cache-dir", "/from/flag"])
    assert cfg.cache_dir == Path("/from/flag")


def test_cache_dir_env_beats_file(tmp_path, monkeypatch):
    conf = tmp_path / "audit.conf"
    conf.write_text("cache-dir=/from/file\n")
    monkeypatch.setenv(CACHE_ENV, "/from/env")
    cfg = _resolve(["audit", "http://s.example/", "--config", str(conf)])
    assert cfg.cache_dir == Path("/from/env")


def test_cache_dir_file_beats_default(tmp_path, monkeypatch):
    monkeypatch.delenv(CACHE_ENV, raising=False)
    conf = tmp_path / "audit.conf"
    conf.write_text("cache-dir=/from/file\n")
    cfg = _resolve(["audit", "http://s.example/", "--config", str(conf)])
    assert cfg.cache_dir == Path("/from/file")


def test_cache_dir_default(monkeypatch):
    monkeypatch.delenv(CACHE_ENV, raising=False)
    cfg = _resolve(["audit", "http://s.example/"])
    assert cfg.cache_dir == Path(".memento-audit-cache")


def test_flag_beats_config_file_for_knobs(tmp_path):
    conf = tmp_path / "audit.conf"
    conf.write_text("interval=365d\ndrop_threshold=0.7\n# comment\n")
    cfg = _resolve(["audit", "http://s.example/", "--config", str(conf),
                    "--interval", "1y"])
    assert str(cfg.interval) == "1y"       # flag wins
    assert cfg.drop_threshold == 0.7       # file beats default


def test_defaults_without_any_source(monkeypatch):
    monkeypatch.delenv(CACHE_ENV, raising=False)
    cfg = _resolve(["audit", "http://s.example/"])
    assert str(cfg.interval) == "1y"
    assert cfg.engine == "static"
    assert cfg.scripting == "off"
    assert cfg.drop_threshold == 0.5
    assert cfg.sustain_window == 2
    assert not cfg.fixed_grid


def test_endpoint_flag_shapes_templates():
    cfg = _resolve(["audit", "http://s.example/",
                    "--endpoint", "http://localhost:7777"])
    assert cfg.endpoint.expand_replay("20000101000000", "http://s.example/") == (
        "http://localhost:7777/web/20000101000000/http://s.example/")
    assert "localhost:7777" in cfg.endpoint.archive_hosts


def test_extra_archive_hosts_and_chrome_prefixes():
    cfg = _resolve(["audit", "http://s.example/",
                    "--archive-host", "cdn.archive.example",
                    "--chrome-prefix", "/banner/"])
    assert "cdn.archive.example" in cfg.endpoint.archive_hosts
    assert cfg.endpoint.replay_chrome_prefixes == ("/banner/",)


def test_config_file_grammar(tmp_path):
    conf = tmp_path / "audit.conf"
    conf.write_text(
        "# full-line comment\n"
        "engine = static   # trailing comment\n"
        "archive_host=a.example\n"
        "archive-host=b.example\n"
        "\n")
    values = parse_config_file(conf)
    assert values["engine"] == ["static"]
    assert values["archive-host"] == ["a.example", "b.example"]


def test_config_file_rejects_bare_words(tmp_path):
    conf = tmp_path / "audit.conf"
    conf.write_text("this is not an assignment\n")
    with pytest.raises(ValueError):
        parse_config_file(conf)


def test_invalid_combination_exits_2(capsys):
    rc = main(["audit", "http://s.example/", "--scripting", "on"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_scripted_engine_requires_bridge(capsys):
    rc = main(["audit", "http://s.example/", "--engine", "scripted"])
    assert rc == 2
    assert "bridge" in capsys.readouterr().err


# --- subcommands against the fixture archive ---------------------------------


def test_timemap_command_prints_link_format(service, capsys):
    rc = main(_quiet(["timemap", NEWS_ORIGINAL, "--endpoint", service.archive_base]))
    assert rc == 0
    tm = parse_link_format(capsys.readouterr().out)
    assert tm.original == NEWS_ORIGINAL
    assert len(tm.mementos) == len(NEWS_TIMESTAMPS)


def test_sample_command_one_line_per_selection(service, capsys):
    rc = main(_quiet(["sample", NEWS_ORIGINAL, "--endpoint", service.archive_base]))
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert 1 < len(lines) <= len(NEWS_TIMESTAMPS)
    first = lines[0].split("\t")
    assert len(first) == 4
    assert first[2] == "+0s"  # the pivot has no deviation
    assert first[3].endswith(NEWS_ORIGINAL)


def test_sample_single_memento_site(service, capsys):
    rc = main(_quiet(["sample", STATIC6_ORIGINAL, "--endpoint", service.archive_base]))
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1


def test_capture_command_writes_cache(service, capsys, tmp_path):
    memento = service.memento_uri(STATIC6_TIMESTAMP, STATIC6_ORIGINAL)
    rc = main(_quiet(["capture", memento, "--endpoint", service.archive_base,
                      "--cache-dir", str(tmp_path)]))
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("ok")
    assert f"{STATIC6_FETCH_TOTAL} fetches" in out
    logs = list(tmp_path.glob("*_static_off.json"))
    assert len(logs) == 1


def test_capture_of_missing_memento_reports_failure(service, capsys, tmp_path):
    memento = service.memento_uri("19990101000000", NEWS_ORIGINAL)
    rc = main(_quiet(["capture", memento, "--endpoint", service.archive_base,
                      "--cache-dir", str(tmp_path)]))
    assert rc == 1
    assert capsys.readouterr().out.startswith("failed")


def test_audit_of_excluded_site_exits_2(service, capsys, tmp_path):
    rc = main(_quiet(["audit", ROBOTS_ORIGINAL, "--endpoint", service.archive_base,
                      "--cache-dir", str(tmp_path / "cache"),
                      "--out-dir", str(tmp_path / "out")]))
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_report_on_empty_cache_exits_2(capsys, tmp_path):
    rc = main(["report", str(tmp_path)])
    assert rc == 2
    assert "no capture logs found" in capsys.readouterr().err


def _run_audit(service, tmp_path, site, label):
    cache = tmp_path / f"cache-{label}"
    out = tmp_path / f"out-{label}"
    rc = main(_quiet(["audit", site, "--endpoint", service.archive_base,
                      "--cache-dir", str(cache), "--out-dir", str(out)]))
    assert rc == 0
    return cache, out


def test_audit_writes_report_and_run_metadata(service, capsys, tmp_path):
    cache, out = _run_audit(service, tmp_path, STATIC6_ORIGINAL, "s6")
    assert (out / "report.json").exists()
    assert (out / "series.csv").exists()
    meta_path = cache / run_meta_filename(STATIC6_ORIGINAL)
    assert meta_path.exists()
    meta = json.loads(meta_path.read_text())
    assert meta["site"] == STATIC6_ORIGINAL
    assert meta["failures"] == []
    assert all((cache / name).exists() for name in meta["log_files"])


def test_report_recomputes_from_cache(service, capsys, tmp_path):
    cache, out = _run_audit(service, tmp_path, WHITEHOUSE_ORIGINAL, "wh")
    first = (out / "report.json").read_bytes()
    first_csv = (out / "series.csv").read_bytes()

    out2 = tmp_path / "out-wh-2"
    rc = main(["report", str(cache), "--out-dir", str(out2)])
    assert rc == 0
    assert (out2 / "report.json").read_bytes() == first
    assert (out2 / "series.csv").read_bytes() == first_csv


def test_report_with_two_cached_sites_needs_site_flag(service, capsys, tmp_path):
    cache_a, _ = _run_audit(service, tmp_path, STATIC6_ORIGINAL, "two-a")
    # Audit a second site into the same cache.
    out_b = tmp_path / "out-two-b"
    rc = main(_quiet(["audit", NEWS_ORIGINAL, "--endpoint", service.archive_base,
                      "--cache-dir", str(cache_a), "--out-dir", str(out_b)]))
    assert rc == 0
    capsys.readouterr()

    rc = main(["report", str(cache_a), "--out-dir", str(tmp_path / "out-two-c")])
    assert rc == 2
    assert "--site" in capsys.readouterr().err

    rc = main(["report", str(cache_a), "--site", NEWS_ORIGINAL,
               "--out-dir", str(tmp_path / "out-two-d")])
    assert rc == 0
    report = json.loads((tmp_path / "out-two-d" / "report.json").read_text())
    assert report["site"] == NEWS_ORIGINAL
