import numpy as np
import pytest

from entryway import controller as ctl
from entryway import synth
from entryway.controller import Config
from entryway.devices import DoorRig, PipelineRecognizer, load_scenario
from entryway.errors import InvalidInput, ScenarioParseError
from entryway.lbph import Mode
from entryway.occlusion import AnnotationDetector
from entryway.pgm import decode_pgm, save_pgm

from conftest import check_golden

PINS = {"alice": "7816"}


# -- scenario parsing ----------------------------------------------------------


def test_parse_motion():
    events = load_scenario("@0 motion\n")
    assert events == [(0.0, ctl.MotionDetected())]


def test_parse_sorts_stably():
    text = "@5 key 1\n@0 motion\n@5 key 2\n"
    events = load_scenario(text)
    assert [t for t, _ in events] == [0.0, 5.0, 5.0]
    assert events[1][1].key == "1"  # file order preserved for equal times
    assert events[2][1].key == "2"


def test_parse_bad_timestamp():
    with pytest.raises(ScenarioParseError) as exc:
        load_scenario("@x motion\n")
    assert "line 1" in str(exc.value)


def test_parse_unknown_event():
    with pytest.raises(ScenarioParseError) as exc:
        load_scenario("@0 motion\n@1 dance\n")
    assert "line 2" in str(exc.value)


def test_parse_full_grammar():
    text = (
        "# full grammar tour\n"
        "@0 motion\n@1 frame faces/x.pgm\n@2 key #\n@3 key *\n@4 tick\n"
        "@5 noface\n@6 unknown 83\n@7 recognized alice 51\n"
        "@8 admin unlock\n@9 admin lock\n@10 admin mode1\n@11 admin mode2\n"
        "@12 admin register eve\n"
    )
    events = load_scenario(text)
    assert len(events) == 13
    assert events[6][1] == ctl.RecognitionDone(outcome="unknown", confidence=83.0)
    assert events[12][1] == ctl.AdminRegisterStranger(name="eve")


def test_empty_scenario_empty_trace():
    rig = DoorRig(Config(), PINS)
    assert rig.run_scenario(load_scenario("")) == ""


# -- rig behavior ------------------------------------------------------------------


def test_rejects_time_going_backwards():
    rig = DoorRig(Config(), PINS)
    rig.inject(5.0, ctl.Tick())
    with pytest.raises(InvalidInput):
        rig.inject(4.0, ctl.Tick())


def test_camera_empty_injects_noframe():
    rig = DoorRig(Config(), PINS)
    rig.inject(0.0, ctl.MotionDetected())
    assert any("EVENT NoFrame" in line for line in rig.trace)
    assert isinstance(rig.phase, ctl.Recognizing)


def test_camera_preload_feeds_recognition():
    frame = synth.make_frame(11, 0)
    rig = DoorRig(Config(), PINS, camera_frames=[frame.image])
    rig.inject(0.0, ctl.MotionDetected())
    assert any("EVENT FrameAvailable camera-0" in line for line in rig.trace)
    assert any("EFFECT StartRecognition full_face" in line for line in rig.trace)


def test_scenario_unlock_flow_trace(tmp_path):
    scenario = (
        "@0 motion\n"
        "@1 recognized alice 51\n"
        "@2 key 7\n@2.2 key 8\n@2.4 key 1\n@2.6 key 6\n@3 key #\n"
        "@9 tick\n"
    )
    rig = DoorRig(Config(), PINS)
    trace = rig.run_scenario(load_scenario(scenario))
    lines = trace.splitlines()
    lock_lines = [l for l in lines if "LockSet" in l]
    assert lock_lines[0].endswith("EFFECT LockSet false")
    assert lock_lines[1].endswith("EFFECT LockSet true")  # relocked after relock_after
    assert rig.locked is True
    assert rig.phase == ctl.Idle()


def test_stranger_flow_saves_photo_and_notifies(tmp_path):
    frame = synth.make_frame(99, 0)
    root = tmp_path / "frames"
    root.mkdir()
    save_pgm(root / "unknown.pgm", frame.image)
    notifications = []
    rig = DoorRig(Config(), PINS, image_root=root, notifier=notifications.append,
                  photo_dir=tmp_path / "photos")
    scenario = "@0 motion\n@1 frame unknown.pgm\n@2 unknown 83\n"
    rig.run_scenario(load_scenario(scenario))
    assert isinstance(rig.phase, ctl.StrangerAlert)
    assert "stranger.jpg" in rig.photos
    assert "stranger-2.000.jpg" in rig.photos  # timestamped copy survives overwrites
    assert (tmp_path / "photos" / "stranger.jpg").exists()
    assert np.array_equal(decode_pgm(rig.photos["stranger.jpg"]), frame.image)
    assert notifications == [ctl.UnknownUserAlert(photo="stranger.jpg", time=2.0)]


def test_notifier_failure_does_not_stall(tmp_path):
    def broken(_n):
        raise RuntimeError("transport down")

    rig = DoorRig(Config(), PINS, notifier=broken)
    rig.run_scenario(load_scenario("@0 motion\n@1 unknown 83\n"))
    assert isinstance(rig.phase, ctl.StrangerAlert)  # effect application survived


def test_mode_switch_updates_config():
    rig = DoorRig(Config(), PINS)
    rig.inject(0.0, ctl.AdminSetMode(Mode.OCCLUDED))
    assert rig.config.mode is Mode.OCCLUDED
    assert rig.state_snapshot()["mode"] == "occluded"


def test_full_pipeline_scenario(tmp_path, small_models):
    frames = small_models["frames"]
    det = AnnotationDetector()
    for fr in frames.values():
        det.register(fr.image, fr.landmarks)
    root = tmp_path / "img"
    root.mkdir()
    save_pgm(root / "alice.pgm", frames[("alice", 0)].image)
    recognize = PipelineRecognizer(
        {Mode.FULL_FACE: small_models["full"], Mode.OCCLUDED: small_models["occluded"]}, det
    )
    rig = DoorRig(Config(), PINS, recognize=recognize, image_root=root)
    scenario = "@0 motion\n@1 frame alice.pgm\n@2 key 7\n@2.1 key 8\n@2.2 key 1\n@2.3 key 6\n@3 key #\n"
    rig.run_scenario(load_scenario(scenario))
    assert rig.locked is False
    assert isinstance(rig.phase, ctl.Unlocked)
    # training frame recognized at confidence exactly 0
    assert any("RecognitionDone match alice 0.000" in line for line in rig.trace)


def test_feed_sequences_strictly_increasing():
    rig = DoorRig(Config(), PINS)
    rig.run_scenario(load_scenario("@0 motion\n@1 recognized alice 51\n@2 key 1\n"))
    seqs = [e["seq"] for e in rig.feed]
    assert seqs == list(range(1, len(seqs) + 1))
    assert rig.events_since(0) == rig.feed
    assert all(e["seq"] > 3 for e in rig.events_since(3))


def test_noop_recorded_in_trace():
    rig = DoorRig(Config(), PINS)
    rig.inject(0.0, ctl.KeyPressed("5"))  # idle + key: explicit no-op
    assert rig.trace[-1].endswith("NOOP")


def test_trace_deterministic_across_runs():
    scenario = load_scenario(
        "@0 motion\n@1 recognized alice 51\n@2 key 7\n@2.5 key #\n@40 tick\n"
    )
    a = DoorRig(Config(), PINS).run_scenario(scenario)
    b = DoorRig(Config(), PINS).run_scenario(scenario)
    assert a == b


# -- golden traces -------------------------------------------------------------------


def golden_rig():
    return DoorRig(Config(), PINS)


def test_golden_wrong_pins():
    scenario = (
        "@0 motion\n"
        "@1 recognized alice 51.000\n"
        "@2 key 7\n@2.1 key 5\n@2.2 key 1\n@2.3 key 4\n@2.4 key #\n"
        "@3 key 6\n@3.1 key 4\n@3.2 key 4\n@3.3 key 7\n@3.4 key #\n"
        "@4 key 1\n@4.1 key 4\n@4.2 key 8\n@4.3 key 9\n@4.4 key #\n"
    )
    rig = golden_rig()
    trace = rig.run_scenario(load_scenario(scenario))
    assert isinstance(rig.phase, ctl.Recognizing)
    assert rig.locked is True
    check_golden("pin_three_wrong.trace", trace)


def test_golden_third_try():
    scenario = (
        "@0 motion\n"
        "@1 recognized alice 51.000\n"
        "@2 key 4\n@2.1 key 7\n@2.2 key 1\n@2.3 key 8\n@2.4 key #\n"
        "@3 key 7\n@3.1 key 4\n@3.2 key 1\n@3.3 key 6\n@3.4 key #\n"
        "@4 key 7\n@4.1 key 8\n@4.2 key 1\n@4.3 key 6\n@4.4 key #\n"
        "@10 tick\n"
    )
    rig = golden_rig()
    trace = rig.run_scenario(load_scenario(scenario))
    assert rig.phase == ctl.Idle()
    check_golden("pin_third_try.trace", trace)


def test_golden_first_try():
    scenario = (
        "@0 motion\n"
        "@1 recognized alice 51.000\n"
        "@2 key 7\n@2.1 key 8\n@2.2 key 1\n@2.3 key 6\n@2.4 key #\n"
        "@8 tick\n"
    )
    rig = golden_rig()
    trace = rig.run_scenario(load_scenario(scenario))
    check_golden("pin_first_try.trace", trace)


def test_golden_timeout():
    scenario = (
        "@0 motion\n"
        "@1 recognized alice 51.000\n"
        "@2 key 7\n@2.1 key 8\n"
        "@31.01 tick\n"
    )
    rig = golden_rig()
    trace = rig.run_scenario(load_scenario(scenario))
    assert isinstance(rig.phase, ctl.Recognizing)
    check_golden("pin_timeout.trace", trace)
