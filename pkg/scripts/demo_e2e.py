#!/usr/bin/env python3
"""End-to-end demo on one machine: boot the daemon with the simulated modem,
seed two alert contacts, march a synthetic intruder past the camera, and show
what lands in the archive, the photo table, and the modem outbox.

Usage: python scripts/demo_e2e.py [--keep DIR]
"""
import argparse
import tempfile
import time
from pathlib import Path

from sentinel.camsim import FtpTarget, named_scenario, run_scenario
from sentinel.config import AppConfig
from sentinel.daemon import Daemon
from sentinel.detector import DetectorConfig, SensitivityLevel, ThresholdLevel
from sentinel.trigger import TriggerConfig


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--keep", help="data directory to use (kept afterwards)")
    args = parser.parse_args()
    data_dir = Path(args.keep) if args.keep else Path(tempfile.mkdtemp(prefix="sentinel-demo-"))

    config = AppConfig(
        data_dir=data_dir,
        ftp_port=0,
        ftp_pasv_low=0,
        ftp_pasv_high=0,
        http_port=0,
        sms_device="sim",
    )
    daemon = Daemon(config)
    daemon.start(serve_http=True)
    daemon.store.add_contact("0137179296")
    daemon.store.add_contact("0137519570")
    print(f"daemon up: ftp on {daemon.ftp.port}, http on {daemon.http_port}, data in {data_dir}")

    report = run_scenario(
        named_scenario("walk"),
        DetectorConfig(SensitivityLevel.MODERATE, ThresholdLevel.LOW),
        TriggerConfig(pre_count=1, post_count=2, frequency_hz=10.0, deactivation_s=600.0),
        destination=FtpTarget("127.0.0.1", daemon.ftp.port),
    )
    print(f"camera run: {report.triggers} trigger(s), {report.images_transferred} image(s) uploaded")

    deadline = time.monotonic() + 5.0
    expected = report.images_transferred * 2
    while len(daemon.modem.outbox_snapshot()) < expected and time.monotonic() < deadline:
        time.sleep(0.05)

    print("\narchive:")
    for path in sorted((data_dir / "image").iterdir()):
        print(f"  {path.name} ({path.stat().st_size} bytes)")
    print("\nphoto table (newest first):")
    for record in daemon.store.list_photos():
        print(f"  #{record.id} {record.photo_name} {record.photo_time} {record.photo_date}")
    print("\nmodem outbox:")
    for sms in daemon.modem.outbox_snapshot():
        print(f"  ref {sms.reference} -> {sms.recipient}: {sms.body}")

    daemon.stop()
    print("\ndaemon stopped")


if __name__ == "__main__":
    main()
