"""Daemon configuration.

One flat line-based format for everything: `key = value` pairs, `#` comments,
blank lines ignored. Keys are dotted per subsystem (ftp.port, trigger.pre_count,
sms.device, ...); unknown keys are rejected loudly rather than silently
misconfiguring a daemon that is supposed to run unattended.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .detector import DetectorConfig, SensitivityLevel, ThresholdLevel
from .trigger import TriggerConfig


def parse_kv_file(path: str | Path) -> dict[str, str]:
    """Read a `key = value` file into a dict; later keys win."""
    result: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        result[key.strip()] = value.strip()
    return result


@dataclass
class AppConfig:
    """Everything the daemon needs, with workable single-machine defaults.

    ``data_dir`` anchors the store file, the FTP source directory, and the
    image archive.
    """

    data_dir: Path = Path(".")
    store_path: str = "sentinel.db"
    ftp_port: int = 2121
    ftp_pasv_low: int = 50000
    ftp_pasv_high: int = 50100
    ftp_host: str = "127.0.0.1"
    ftp_source_dir: str = "source"
    ftp_username: str = "camera"
    ftp_password: str = "camera"
    trigger_pre_count: int = 2
    trigger_post_count: int = 2
    trigger_frequency_hz: float = 1.0
    trigger_deactivation_s: float = 10.0
    detector_sensitivity: str = "moderate"
    detector_threshold: str = "low"
    pipeline_archive_dir: str = "image"
    pipeline_retries: int = 3
    pipeline_timezone: str = "Asia/Kuala_Lumpur"
    sms_device: str = "sim"
    sms_baud: int = 115200
    sms_reply_timeout_s: float = 10.0
    http_host: str = "127.0.0.1"
    http_port: int = 8080
    admin_username: str = "admin"
    admin_password: str = "admin"
    ui_dist: str = ""

    _KEY_MAP = {
        "data_dir": "data_dir",
        "store.path": "store_path",
        "ftp.port": "ftp_port",
        "ftp.pasv_low": "ftp_pasv_low",
        "ftp.pasv_high": "ftp_pasv_high",
        "ftp.host": "ftp_host",
        "ftp.source_dir": "ftp_source_dir",
        "ftp.username": "ftp_username",
        "ftp.password": "ftp_password",
        "trigger.pre_count": "trigger_pre_count",
        "trigger.post_count": "trigger_post_count",
        "trigger.frequency_hz": "trigger_frequency_hz",
        "trigger.deactivation_s": "trigger_deactivation_s",
        "detector.sensitivity": "detector_sensitivity",
        "detector.threshold": "detector_threshold",
        "pipeline.archive_dir": "pipeline_archive_dir",
        "pipeline.retries": "pipeline_retries",
        "pipeline.timezone": "pipeline_timezone",
        "sms.device": "sms_device",
        "sms.baud": "sms_baud",
        "sms.reply_timeout_s": "sms_reply_timeout_s",
        "http.host": "http_host",
        "http.port": "http_port",
        "admin.username": "admin_username",
        "admin.password": "admin_password",
        "ui.dist": "ui_dist",
    }

    @classmethod
    def from_file(cls, path: str | Path) -> "AppConfig":
        pairs = parse_kv_file(path)
        config = cls()
        types = {f.name: f.type for f in fields(cls)}
        for key, value in pairs.items():
            if key.startswith("ftp.pasv_range"):
                low, _, high = value.partition("-")
                config.ftp_pasv_low = int(low)
                config.ftp_pasv_high = int(high or low)
                continue
            attr = cls._KEY_MAP.get(key)
            if attr is None:
                raise ValueError(f"unknown configuration key: {key}")
            current = getattr(config, attr)
            if isinstance(current, bool):
                setattr(config, attr, value.lower() in ("1", "true", "yes", "on"))
            elif isinstance(current, int):
                setattr(config, attr, int(value))
            elif isinstance(current, float):
                setattr(config, attr, float(value))
            elif isinstance(current, Path):
                setattr(config, attr, Path(value))
            else:
                setattr(config, attr, value)
        return config

    # -- derived views -------------------------------------------------------

    @property
    def source_dir(self) -> Path:
        return self.data_dir / self.ftp_source_dir

    @property
    def archive_root(self) -> Path:
        return self.data_dir

    @property
    def db_path(self) -> Path:
        return self.data_dir / self.store_path

    def detector_config(self) -> DetectorConfig:
        return DetectorConfig(
            sensitivity=SensitivityLevel.from_name(self.detector_sensitivity),
            threshold=ThresholdLevel.from_name(self.detector_threshold),
        )

    def trigger_config(self) -> TriggerConfig:
        return TriggerConfig(
            pre_count=self.trigger_pre_count,
            post_count=self.trigger_post_count,
            frequency_hz=self.trigger_frequency_hz,
            deactivation_s=self.trigger_deactivation_s,
        )
