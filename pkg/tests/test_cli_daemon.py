import time

import httpx
import pytest

from sentinel.cli import main
from sentinel.config import AppConfig, parse_kv_file
from sentinel.daemon import Daemon


class TestConfigFile:
    def test_parse_kv_file(self, tmp_path):
        path = tmp_path / "app.conf"
        path.write_text("# comment\n\nftp.port = 2121\nadmin.username= ops \n")
        assert parse_kv_file(path) == {"ftp.port": "2121", "admin.username": "ops"}

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "bad.conf"
        path.write_text("just words\n")
        with pytest.raises(ValueError):
            parse_kv_file(path)

    def test_app_config_round_trip(self, tmp_path):
        path = tmp_path / "app.conf"
        path.write_text(
            "data_dir = /tmp/sentinel\n"
            "ftp.port = 2221\n"
            "ftp.pasv_range = 51000-51050\n"
            "trigger.pre_count = 4\n"
            "trigger.frequency_hz = 2.5\n"
            "detector.sensitivity = high\n"
            "detector.threshold = moderate\n"
            "sms.device = sim\n"
            "pipeline.timezone = UTC\n"
            "admin.password = sesame\n"
        )
        config = AppConfig.from_file(path)
        assert config.ftp_port == 2221
        assert (config.ftp_pasv_low, config.ftp_pasv_high) == (51000, 51050)
        assert config.trigger_config().pre_count == 4
        assert config.trigger_config().frequency_hz == 2.5
        assert config.detector_config().sensitivity.name == "HIGH"
        assert config.detector_config().threshold.name == "MODERATE"
        assert config.admin_password == "sesame"
        assert str(config.db_path) == "/tmp/sentinel/sentinel.db"

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.conf"
        path.write_text("ftp.prot = 77\n")
        with pytest.raises(ValueError):
            AppConfig.from_file(path)


class TestCli:
    def test_netcalc_output(self, capsys):
        assert main(["netcalc", "10.61.46.142"]) == 0
        out = capsys.readouterr().out
        assert "10.0.0.0" in out
        assert "10.255.255.255" in out
        assert "16777216" in out
        assert "00001010.00111101.00101110.10001110" in out

    def test_netcalc_with_prefix(self, capsys):
        assert main(["netcalc", "192.168.1.77", "/30"]) == 0
        out = capsys.readouterr().out
        assert "192.168.1.76" in out and "192.168.1.79" in out

    def test_netcalc_bad_address(self, capsys):
        assert main(["netcalc", "999.1.1.1"]) == 2
        assert "error" in capsys.readouterr().err

    def test_sim_counts_without_target(self, capsys):
        assert main(["sim", "--scenario", "walk", "--seed", "3"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("scenario,triggers,")
        fields = lines[1].split(",")
        assert fields[0] == "walk"
        assert int(fields[1]) >= 1
        assert fields[4] == "True"

    def test_sim_scenario_file(self, tmp_path, capsys):
        path = tmp_path / "tiny.scenario"
        path.write_text("name = tiny\nwidth = 64\nheight = 48\nduration_s = 1\nspeed_px = 0\n")
        assert main(["sim", "--scenario", str(path)]) == 0
        assert "tiny,0," in capsys.readouterr().out


class TestDaemonLifecycle:
    def test_full_stack_boot_and_http(self, tmp_path):
        config = AppConfig(
            data_dir=tmp_path,
            ftp_port=0,
            ftp_pasv_low=0,
            ftp_pasv_high=0,
            http_port=0,
            admin_password="sesame",
        )
        daemon = Daemon(config)
        daemon.start(serve_http=True)
        try:
            base = f"http://127.0.0.1:{daemon.http_port}"
            login = httpx.post(
                f"{base}/api/login",
                json={"username": "admin", "password": "sesame"},
                timeout=5.0,
            )
            assert login.status_code == 200
            headers = {"Authorization": f"Bearer {login.json()['token']}"}
            photos = httpx.get(f"{base}/api/photos", headers=headers, timeout=5.0)
            assert photos.status_code == 200 and photos.json() == []
        finally:
            daemon.stop()

    def test_boot_is_idempotent_across_restarts(self, tmp_path):
        config = AppConfig(data_dir=tmp_path, ftp_port=0, ftp_pasv_low=0, ftp_pasv_high=0)
        first = Daemon(config)
        first.start(serve_http=False)
        first.store.add_contact("0137179296")
        first.stop()

        second = Daemon(config)
        second.start(serve_http=False)
        try:
            # bootstrap must not mint a second admin or lose contacts
            assert second.store.verify_login("admin", "admin") is not None
            assert [c.contact_no for c in second.store.list_contacts()] == ["0137179296"]
        finally:
            second.stop()
