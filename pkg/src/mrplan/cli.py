"""Umbrella CLI: benchmark subcommands and the HTTP service."""

from __future__ import annotations

import argparse
import sys

from .bench.cli import build_parser as build_bench_parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = argparse.ArgumentParser(prog="mrplan",
                                 description="2D multi-robot planning simulator and benchmark")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("bench", help="benchmark harness (see `bench --help`)",
                   add_help=False)
    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8008)
    p_serve.add_argument("--ui", default=None,
                         help="serve a built web UI directory at /ui")

    if argv and argv[0] == "bench":
        from .bench.cli import main as bench_main
        return bench_main(argv[1:])
    args = ap.parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .server import create_app
        uvicorn.run(create_app(ui_dir=args.ui), host=args.host, port=args.port)
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
