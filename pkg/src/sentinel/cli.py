"""Command line front door: serve the daemon, run the camera simulator,
or do subnet arithmetic."""
from __future__ import annotations

import argparse
import sys

from . import camsim, netcalc
from .config import AppConfig
from .detector import DetectorConfig, SensitivityLevel, ThresholdLevel
from .trigger import TriggerConfig


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sentinel", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the notification daemon")
    serve.add_argument("--config", help="path to a key=value configuration file")

    sim = sub.add_parser("sim", help="run a synthetic camera scenario")
    sim.add_argument(
        "--scenario",
        default="walk",
        help=f"named scenario ({', '.join(camsim.scenario_names())}) or a scenario file path",
    )
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--target", help="FTP endpoint host:port (omit to only count triggers)")
    sim.add_argument("--user", default="camera")
    sim.add_argument("--password", default="camera")
    sim.add_argument("--sensitivity", default="moderate", choices=["low", "moderate", "high"])
    sim.add_argument("--threshold", default="low", choices=["low", "moderate", "high"])
    sim.add_argument("--pre", type=int, default=1, help="pre-trigger frames to keep")
    sim.add_argument("--post", type=int, default=2, help="post-trigger frames to capture")
    sim.add_argument("--frequency", type=float, default=10.0, help="capture frequency, images/s")
    sim.add_argument("--deactivation", type=float, default=2.0, help="seconds between bursts")

    calc = sub.add_parser("netcalc", help="IPv4 network arithmetic")
    calc.add_argument("address", help="dotted IPv4 address")
    calc.add_argument("mask", nargs="?", help="dotted mask or /prefix; classful default if omitted")

    return parser


def _run_sim(args: argparse.Namespace) -> int:
    try:
        scenario = camsim.named_scenario(args.scenario)
    except KeyError:
        scenario = camsim.scenario_from_file(args.scenario)
    detector_config = DetectorConfig(
        sensitivity=SensitivityLevel.from_name(args.sensitivity),
        threshold=ThresholdLevel.from_name(args.threshold),
    )
    trigger_config = TriggerConfig(
        pre_count=args.pre,
        post_count=args.post,
        frequency_hz=args.frequency,
        deactivation_s=args.deactivation,
    )
    target = None
    if args.target:
        target = camsim.FtpTarget.parse(args.target, username=args.user, password=args.password)
    report = camsim.run_scenario(scenario, detector_config, trigger_config, target, seed=args.seed)
    print(report.csv_header())
    print(report.csv_row())
    return 0 if report.complete else 1


def _run_netcalc(args: argparse.Namespace) -> int:
    try:
        summary = netcalc.describe(args.address, args.mask)
    except netcalc.AddressError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for key, value in summary.items():
        print(f"{key:8s} {value}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "serve":
        import logging

        from .daemon import Daemon

        logging.basicConfig(
            level=logging.INFO, format="%(asctime)s %(name)s %(levelname)s %(message)s"
        )
        config = AppConfig.from_file(args.config) if args.config else AppConfig()
        Daemon(config).run_forever()
        return 0
    if args.command == "sim":
        return _run_sim(args)
    return _run_netcalc(args)


if __name__ == "__main__":
    sys.exit(main())
