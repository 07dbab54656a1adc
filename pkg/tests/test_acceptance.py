"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest tests/test_acceptance.py -v -s` to watch).
"""
import io
import random
import re
import socket
import time
from contextlib import contextmanager
from ftplib import FTP
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from sentinel.camsim import FtpTarget, named_scenario, run_scenario
from sentinel.config import AppConfig
from sentinel.daemon import Daemon
from sentinel.detector import (
    Classification,
    DetectorConfig,
    SensitivityLevel,
    ThresholdLevel,
    classify,
    detect,
    motion_grade,
)
from sentinel.netcalc import (
    Ipv4Address,
    NetworkMask,
    address_count,
    classful_mask,
    first_address,
    last_address,
)
from sentinel.pipeline import render_alert_body
from sentinel.store import Store
from sentinel.trigger import TriggerConfig, TriggerMachine
from sentinel.web_api import create_app

from conftest import make_frame
from test_detector import oracle_changed_count
from test_ftp import fuzz_lines, run_fuzz
from test_store import check_consistency, kill_during_write_once
from test_trigger import drive, random_config, random_sequence, replay_reference, steady_sequence


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"FAIL: {name}")
        raise
    print(f"PASS: {name}")


# -- 1. subnet arithmetic ------------------------------------------------------


def test_criterion_netcalc_campus_example():
    with criterion("netcalc reproduces the campus Class A figures exactly"):
        addr = Ipv4Address.parse("10.61.46.142")
        mask = classful_mask(addr)
        assert mask == NetworkMask.parse("255.0.0.0")
        assert first_address(addr, mask).dotted == "10.0.0.0"
        assert last_address(addr, mask).dotted == "10.255.255.255"
        assert address_count(mask) == 16777216
        assert address_count(NetworkMask.parse("0.0.0.0")) == 4294967296


# -- 2. detector oracle equivalence --------------------------------------------


def test_criterion_detector_oracle_equivalence():
    with criterion("detector matches the brute-force oracle on 10,000 seeded pairs"):
        rng = np.random.default_rng(20100412)
        palette = np.array([0, 100, 255], dtype=np.int64)
        for _ in range(10_000):
            width = int(rng.integers(1, 5))
            height = int(rng.integers(1, 5))
            n = width * height
            a = palette[rng.integers(0, 3, size=n)].tolist()
            b = palette[rng.integers(0, 3, size=n)].tolist()
            fa, fb = make_frame(width, height, a), make_frame(width, height, b)
            for sens in SensitivityLevel:
                expected = oracle_changed_count(a, b, sens.pixel_delta_cutoff)
                report = detect(fa, fb, DetectorConfig(sens, ThresholdLevel.LOW))
                assert report.changed_pixels == expected
                assert report.grade == expected / n

        # the four worked examples
        same = make_frame(4, 4, 90)
        for sens in SensitivityLevel:
            assert motion_grade(same, same, sens) == 0.0
            assert motion_grade(make_frame(2, 2, 0), make_frame(2, 2, 255), sens) == 1.0
        base = [100] * 16
        moved = [v + 60 if i in (0, 5, 10, 15) else v for i, v in enumerate(base)]
        assert motion_grade(
            make_frame(4, 4, base), make_frame(4, 4, moved), SensitivityLevel.MODERATE
        ) == 0.25
        assert motion_grade(
            make_frame(4, 4, 100), make_frame(4, 4, 164), SensitivityLevel.HIGH
        ) == 1.0


# -- 3. detector monotonicity ---------------------------------------------------


def test_criterion_detector_monotonicity():
    with criterion("sensitivity/threshold monotonicity holds on 1,000 random pairs"):
        rng = np.random.default_rng(1995)
        ladder = [SensitivityLevel.LOW, SensitivityLevel.MODERATE, SensitivityLevel.HIGH]
        thresholds = [ThresholdLevel.LOW, ThresholdLevel.MODERATE, ThresholdLevel.HIGH]
        for _ in range(1_000):
            width = int(rng.integers(1, 9))
            height = int(rng.integers(1, 9))
            n = width * height
            fa = make_frame(width, height, rng.integers(0, 256, size=n).tolist())
            fb = make_frame(width, height, rng.integers(0, 256, size=n).tolist())
            grades = [motion_grade(fa, fb, sens) for sens in ladder]
            assert grades == sorted(grades), "raising sensitivity lowered the grade"
            for grade in grades:
                for lower, higher in zip(thresholds, thresholds[1:]):
                    if classify(grade, lower) is not Classification.TRIGGERED:
                        assert classify(grade, higher) is not Classification.TRIGGERED


# -- 4. trigger state machine ----------------------------------------------------


def test_criterion_trigger_state_machine():
    with criterion("trigger debounce matches the scripted window and 500-replay oracle"):
        config = TriggerConfig(pre_count=1, post_count=2, frequency_hz=1.0, deactivation_s=10.0)
        sequence = steady_sequence({0.0, 5.0, 13.0}, start=-1.0, stop=16.0)
        events = drive(TriggerMachine(config), sequence)
        assert [e[0] for e in events] == [0.0, 13.0]  # t=5 swallowed by deactivation
        assert all(
            len(e[1]) == config.pre_count + 1 + config.post_count for e in events
        ), "burst length must be pre+1+post"
        assert replay_reference(config, sequence) == events

        rng = random.Random(29)
        for _ in range(500):
            cfg = random_config(rng)
            seq = random_sequence(rng, length=50)
            assert drive(TriggerMachine(cfg), seq) == replay_reference(cfg, seq)


# -- 5. qualitative capture grid --------------------------------------------------


GRID_TRIGGER = TriggerConfig(pre_count=1, post_count=1, frequency_hz=10.0, deactivation_s=1.0)
SENS_ORDER = [SensitivityLevel.LOW, SensitivityLevel.MODERATE, SensitivityLevel.HIGH]
THRESH_ORDER = [ThresholdLevel.LOW, ThresholdLevel.MODERATE, ThresholdLevel.HIGH]


def grid_triggers(scenario_name, sens, thresh):
    report = run_scenario(
        named_scenario(scenario_name),
        DetectorConfig(sens, thresh),
        GRID_TRIGGER,
        base_time=0.0,
    )
    return report.triggers


def test_criterion_capture_grid():
    with criterion("3x3x3 capture grid reproduces the qualitative setting table"):
        grid = {
            (name, sens, thresh): grid_triggers(name, sens, thresh)
            for name in ("walk", "walk_fast", "run")
            for sens in SENS_ORDER
            for thresh in THRESH_ORDER
        }
        for name in ("walk", "walk_fast", "run"):
            for sens in SENS_ORDER:
                counts = [grid[(name, sens, t)] for t in THRESH_ORDER]
                assert counts == sorted(counts, reverse=True), "triggers must not grow with threshold"
            for thresh in THRESH_ORDER:
                counts = [grid[(name, s, thresh)] for s in SENS_ORDER]
                assert counts == sorted(counts), "triggers must not drop with sensitivity"
            assert grid[(name, SensitivityLevel.LOW, ThresholdLevel.HIGH)] == 0
        assert grid[("walk", SensitivityLevel.MODERATE, ThresholdLevel.LOW)] >= 1

        # scene-wide light step is caught at high sensitivity (any threshold)
        light = named_scenario("light_change")
        for thresh in (ThresholdLevel.LOW, ThresholdLevel.HIGH):
            report = run_scenario(
                light, DetectorConfig(SensitivityLevel.HIGH, thresh), GRID_TRIGGER, base_time=0.0
            )
            assert report.triggers >= 1

        # mirror reflection: only the high-sensitivity/low-threshold corner fires
        corners = {}
        for sens in (SensitivityLevel.LOW, SensitivityLevel.HIGH):
            for thresh in (ThresholdLevel.LOW, ThresholdLevel.HIGH):
                corners[(sens, thresh)] = grid_triggers("mirror", sens, thresh)
        assert corners[(SensitivityLevel.HIGH, ThresholdLevel.LOW)] >= 1
        assert corners[(SensitivityLevel.HIGH, ThresholdLevel.HIGH)] == 0
        assert corners[(SensitivityLevel.LOW, ThresholdLevel.LOW)] == 0
        assert corners[(SensitivityLevel.LOW, ThresholdLevel.HIGH)] == 0


# -- 6. end-to-end pipeline --------------------------------------------------------


@pytest.fixture
def live_daemon(tmp_path):
    config = AppConfig(
        data_dir=tmp_path,
        ftp_port=0,
        ftp_pasv_low=0,
        ftp_pasv_high=0,
        ftp_password="secret",
        pipeline_timezone="Asia/Kuala_Lumpur",
        sms_device="sim",
    )
    daemon = Daemon(config)
    daemon.start(serve_http=False)
    yield daemon
    daemon.stop()


ARCHIVE_STEM = re.compile(r"^\d{4}-\d{2}-\d{2}_\d{2}-\d{2}-\d{2}(-\d+)?\.jpg$")


def test_criterion_end_to_end_pipeline(live_daemon, tmp_path):
    with criterion("upload -> archive + record + per-contact SMS inside 2 s"):
        daemon = live_daemon
        daemon.store.add_contact("0137179296")
        daemon.store.add_contact("0137519570")

        report = run_scenario(
            named_scenario("walk"),
            DetectorConfig(SensitivityLevel.MODERATE, ThresholdLevel.LOW),
            TriggerConfig(pre_count=0, post_count=1, frequency_hz=10.0, deactivation_s=600.0),
            destination=FtpTarget("127.0.0.1", daemon.ftp.port, password="secret"),
        )
        assert report.complete and report.images_transferred == 2
        handed_off = time.monotonic()

        expected_messages = 2 * report.images_transferred
        outbox = daemon.modem.outbox_snapshot()
        while len(outbox) < expected_messages:
            assert time.monotonic() - handed_off < 2.0, "pipeline missed the 2 s budget"
            time.sleep(0.02)
            outbox = daemon.modem.outbox_snapshot()

        archive = tmp_path / "image"
        files = sorted(p.name for p in archive.iterdir())
        assert len(files) == 2
        assert all(ARCHIVE_STEM.match(name) for name in files)
        assert any("-" not in name.replace("-", "", 4) for name in files)  # unsuffixed base exists

        records = daemon.store.list_photos()
        assert len(records) == 2
        for record in records:
            assert record.photo_name == f"image/{Path(record.photo_name).name}"
            assert (tmp_path / record.photo_name).exists()
            stem = Path(record.photo_name).stem
            assert stem.startswith(f"{record.photo_date}_{record.photo_time.replace(':', '-')}")

        want = sorted(
            (contact, render_alert_body(record))
            for record in records
            for contact in ("0137179296", "0137519570")
        )
        got = sorted((m.recipient, m.body) for m in daemon.modem.outbox_snapshot())
        assert got == want
        for _, body in got:
            assert re.fullmatch(
                r"Motion detected at \d{2}:\d{2}:\d{2} on \d{4}-\d{2}-\d{2}\.", body
            )


# -- 7. ftp robustness ---------------------------------------------------------------


def test_criterion_ftp_robustness(live_daemon, tmp_path):
    with criterion("FTP survives 1,000 fuzz lines, aborts cleanly, talks to a stock client"):
        daemon = live_daemon
        lines = [
            line
            for line in fuzz_lines(random.Random(959), 1_000)
            if "\r" not in line and "\n" not in line
        ]
        run_fuzz(daemon.ftp, lines)

        # aborted STOR: nothing stored, nothing recorded
        before = len(daemon.store.list_photos())
        client = FTP()
        client.connect("127.0.0.1", daemon.ftp.port, timeout=5.0)
        client.login("camera", "secret")
        client.voidcmd("TYPE I")
        data_sock = client.transfercmd("STOR aborted.jpg")
        data_sock.sendall(b"going nowhere")
        data_sock.setsockopt(
            socket.SOL_SOCKET, socket.SO_LINGER, b"\x01\x00\x00\x00\x00\x00\x00\x00"
        )
        data_sock.close()
        assert client.getline().startswith("426")
        client.close()
        time.sleep(0.2)
        assert not (tmp_path / "source" / "aborted.jpg").exists()
        assert len(daemon.store.list_photos()) == before

        # stock-client interop: USER/PASS/TYPE/PASV/STOR happy path
        client = FTP()
        client.connect("127.0.0.1", daemon.ftp.port, timeout=5.0)
        assert client.getwelcome().startswith("220")
        assert client.sendcmd("USER camera").startswith("331")
        assert client.sendcmd("PASS secret").startswith("230")
        assert client.sendcmd("TYPE I").startswith("200")
        assert client.sendcmd("PASV").startswith("227")
        reply = client.storbinary("STOR interop.jpg", io.BytesIO(b"\xff\xd8 interop"))
        assert reply.startswith("226")
        client.quit()
        assert (tmp_path / "source" / "interop.jpg").exists()


# -- 8. store crash safety --------------------------------------------------------------


def test_criterion_store_crash_safety(tmp_path):
    with criterion("100 kill-during-write rounds always reopen consistent"):
        db_path = tmp_path / "crash.db"
        Store(db_path).close()
        rng = random.Random(14)
        last_count = 0
        for _ in range(100):
            kill_during_write_once(db_path, delay_s=rng.uniform(0.01, 0.05))
            count = check_consistency(db_path)
            assert count >= last_count
            last_count = count

    with criterion("login and change-password behave per the settings screen"):
        store = Store(tmp_path / "acc.db")
        store.bootstrap_account("admin", "first-password")
        assert store.verify_login("admin", "first-password") is not None
        assert store.verify_login("admin", "guess") is None
        assert store.change_password("admin", "wrong-old", "next") is False
        assert store.change_password("admin", "first-password", "next") is True
        assert store.verify_login("admin", "next") is not None
        assert store.verify_login("admin", "first-password") is None
        store.close()


# -- 9. web api contract ------------------------------------------------------------------


def test_criterion_web_api_contract(tmp_path):
    with criterion("every route returns its specified status matrix"):
        store = Store(tmp_path / "api.db", media_root=tmp_path)
        store.bootstrap_account("admin", "hunter2")
        archive = tmp_path / "image"
        archive.mkdir()
        (archive / "seeded.jpg").write_bytes(b"\xff\xd8jpeg")
        photo_id = store.insert_photo("image/seeded.jpg", "21:57:21", "2010-04-12")
        contact_id = store.add_contact("0137179296")

        client = TestClient(create_app(store, archive_dir=archive))
        token = client.post(
            "/api/login", json={"username": "admin", "password": "hunter2"}
        ).json()["token"]
        auth = {"Authorization": f"Bearer {token}"}

        matrix = [
            ("POST", "/api/login", dict(json={"username": "admin", "password": "x"}), 401),
            ("POST", "/api/login", dict(json={}), 422),
            ("GET", "/api/photos", dict(), 401),
            ("GET", "/api/photos", dict(headers=auth), 200),
            ("GET", "/api/photos/latest", dict(headers=auth), 200),
            ("GET", "/images/seeded.jpg", dict(headers=auth), 200),
            ("GET", "/images/ghost.jpg", dict(headers=auth), 404),
            ("GET", "/images/seeded.jpg", dict(), 401),
            ("POST", "/api/password", dict(headers=auth, json={"old": "x", "new": "a", "confirm": "b"}), 422),
            ("POST", "/api/password", dict(headers=auth, json={"old": "x", "new": "a", "confirm": "a"}), 403),
            ("POST", "/api/contacts", dict(headers=auth, json={"contact_no": "nope"}), 422),
            ("POST", "/api/contacts", dict(headers=auth, json={"contact_no": "0137519570"}), 200),
            ("DELETE", f"/api/contacts/{contact_id}", dict(headers=auth), 200),
            ("DELETE", "/api/contacts/999", dict(headers=auth), 404),
            ("DELETE", f"/api/photos/{photo_id}", dict(headers=auth), 200),
            ("DELETE", f"/api/photos/{photo_id}", dict(headers=auth), 404),
            ("GET", "/api/photos/latest", dict(headers=auth), 204),
            ("POST", "/api/password", dict(headers=auth, json={"old": "hunter2", "new": "n", "confirm": "n"}), 200),
            ("POST", "/api/logout", dict(headers=auth), 200),
            ("GET", "/api/photos", dict(headers=auth), 401),
        ]
        for method, route, kwargs, expected in matrix:
            response = client.request(method, route, **kwargs)
            assert response.status_code == expected, (
                f"{method} {route}: wanted {expected}, got {response.status_code}"
            )
        store.close()
