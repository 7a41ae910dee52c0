"""Command-line entry point.

    radnav-server --scenario demo.toml [--port 8474] [--seed 42]
                  [--headless] [--log-dir DIR] [--max-sim-s 120]
    radnav-server replay mission.jsonl

Exit codes: 0 success, 2 config error, 3 bind error, 4 corrupt log.
RADNAV_LOG_DIR provides the default for --log-dir.
"""
import argparse
import asyncio
import json
import sys
from dataclasses import replace

from radnav.protocol import DEFAULT_PORT
from radnav.scenario import ConfigInvalid, load_scenario
from radnav.server import BindFailure, CorruptLog, default_log_path, replay_station, run_server

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BIND = 3
EXIT_CORRUPT_LOG = 4


def _run_parser():
    parser = argparse.ArgumentParser(
        prog="radnav-server",
        description="Ground-station server for simulated radiation-mapping missions.",
    )
    parser.add_argument("--scenario", required=True, help="scenario TOML file")
    parser.add_argument("--port", type=int, default=DEFAULT_PORT)
    parser.add_argument("--host", default="0.0.0.0")
    parser.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    parser.add_argument("--headless", action="store_true",
                        help="run the simulated clock as fast as possible")
    parser.add_argument("--log-dir", default=None, help="mission log directory")
    parser.add_argument("--max-sim-s", type=float, default=None,
                        help="stop after this much simulated time")
    return parser


def _replay_parser():
    parser = argparse.ArgumentParser(
        prog="radnav-server replay", description="Re-run a mission log and print its digest."
    )
    parser.add_argument("log", help="mission log (JSONL)")
    parser.add_argument("--export-mesh", metavar="PATH", default=None,
                        help="write the reconstructed radiation map as a binary RMSH mesh")
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv

    if argv and argv[0] == "replay":
        args = _replay_parser().parse_args(argv[1:])
        try:
            station = replay_station(args.log)
        except FileNotFoundError:
            print(f"error: log not found: {args.log}", file=sys.stderr)
            return EXIT_CORRUPT_LOG
        except CorruptLog as exc:
            print(f"error: corrupt log: {exc}", file=sys.stderr)
            return EXIT_CORRUPT_LOG
        if args.export_mesh:
            from radnav.voxmap import extract_mesh

            mesh = extract_mesh(station.grid, station.colormap, min_exposure_s=1e-9)
            try:
                with open(args.export_mesh, "wb") as fh:
                    fh.write(mesh.to_bytes())
            except OSError as exc:
                print(f"error: cannot write mesh: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            print(
                f"mesh: {len(mesh.colors)} voxels, {len(mesh.vertices)} vertices "
                f"-> {args.export_mesh}",
                file=sys.stderr,
            )
        print(json.dumps(station.digest(), separators=(",", ":"), sort_keys=True))
        return EXIT_OK

    args = _run_parser().parse_args(argv)
    try:
        config = load_scenario(args.scenario)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    except ConfigInvalid as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    log_path = default_log_path(args.log_dir)
    print(f"log: {log_path}", file=sys.stderr)
    try:
        digest = asyncio.run(
            run_server(
                config,
                host=args.host,
                port=args.port,
                headless=args.headless,
                log_path=log_path,
                max_sim_s=args.max_sim_s,
            )
        )
    except BindFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BIND
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_OK
    print(json.dumps(digest, separators=(",", ":"), sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
