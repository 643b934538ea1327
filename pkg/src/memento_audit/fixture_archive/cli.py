"""Command line for the fixture archive.

    fixture-archive serve <dir> --port N [--live-port M] [--bridge-port K]
    fixture-archive write-scenarios <dir>

`write-scenarios` materializes the authored scenario manifest into a
directory; `serve` runs the archive (plus live-web companion and, when asked,
the stub browser bridge) from such a directory until interrupted.
"""

import argparse
import logging
import sys
import time

from ..errors import AuditError
from .manifest import load_manifest, save_manifest
from .scenarios import build_all
from .server import FixtureService
from .stub_bridge import StubBridge


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fixture-archive",
        description="Hermetic miniature web archive for audit testing.")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="serve a manifest directory")
    serve.add_argument("dir", help="directory produced by write-scenarios")
    serve.add_argument("--port", type=int, default=0,
                       help="archive port (default: ephemeral)")
    serve.add_argument("--live-port", type=int, default=0,
                       help="companion live-web port (default: ephemeral)")
    serve.add_argument("--bridge-port", type=int, default=None,
                       help="also run the stub browser bridge on this port")

    write = sub.add_parser("write-scenarios",
                           help="write the built-in scenarios to a directory")
    write.add_argument("dir", help="target directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "write-scenarios":
            root = save_manifest(build_all(), args.dir)
            print(f"wrote scenarios under {root}")
            return 0
        manifest = load_manifest(args.dir)
        service = FixtureService(manifest, port=args.port, live_port=args.live_port)
        bridge = StubBridge(port=args.bridge_port) if args.bridge_port is not None else None
        with service:
            print(f"archive:  {service.archive_base}")
            print(f"live web: {service.live_base}")
            if bridge is not None:
                bridge.start()
                print(f"bridge:   {bridge.url}")
            try:
                while True:
                    time.sleep(3600)
            except KeyboardInterrupt:
                return 0
            finally:
                if bridge is not None:
                    bridge.stop()
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
