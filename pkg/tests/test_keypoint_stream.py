import logging

import pytest

from errors import InvalidInputError, StreamOrderError
from fuzzy_controller import infer_omega
from interaction import VelocityCommand
from keypoint_stream import (format_command, keypoints_jsonl, parse_frame, read_frames, read_torque, replay,
                             frame_to_json)
from pose_geometry import arm_frame
from signals import Timestamped

HZ = 50.0


def frames_text(profile_file, angles, start=0.0):
    frames = [arm_frame(start + i / HZ, a, profile_file.camera) for i, a in enumerate(angles)]
    return keypoints_jsonl(frames).splitlines()


def torque_text(n, fx=5.0, tau=2.0):
    return ["t,fx_N,tauz_Nm"] + [f"{i / HZ},{fx},{tau}" for i in range(n)]


def test_frame_json_round_trip(camera):
    frame = arm_frame(0.42, 33.0, camera, confidence=0.8)
    back = parse_frame(frame_to_json(frame))
    assert back.t == 0.42
    assert back.joints == frame.joints


def test_empty_keypoint_stream_yields_nothing(user5_profile_file):
    assert list(replay(user5_profile_file, [], torque_text(10))) == []


def test_replay_emits_one_command_per_tick_until_last_frame(user5_profile_file):
    commands = list(replay(user5_profile_file, frames_text(user5_profile_file, [30.0] * 100), torque_text(100)))
    assert len(commands) == 100
    assert [c.t for c in commands[:3]] == pytest.approx([0.0, 0.02, 0.04])


def test_steady_replay_matches_inference(user5_profile_file):
    commands = list(replay(user5_profile_file, frames_text(user5_profile_file, [30.0] * 150), torque_text(150)))
    expected = infer_omega(user5_profile_file.fuzzy, 30.0, 2.0)
    assert commands[-1].value.omega == pytest.approx(expected, abs=1e-4)
    assert commands[-1].value.v > 0


def test_malformed_keypoint_lines_are_skipped(user5_profile_file, caplog):
    lines = frames_text(user5_profile_file, [30.0] * 80)
    clean = list(replay(user5_profile_file, lines, torque_text(80)))
    noisy_lines = lines[:10] + ["{not json", '{"t": 0.5}'] + lines[10:]
    # A jointless frame at t=0.5 parses, so the frame after it is out of order
    with pytest.raises(StreamOrderError):
        list(replay(user5_profile_file, noisy_lines, torque_text(80)))
    with caplog.at_level(logging.WARNING):
        noisy = list(replay(user5_profile_file, lines[:10] + ["{not json"] + lines[10:], torque_text(80)))
    assert noisy == clean
    assert "line 11" in caplog.text


def test_out_of_order_frames_report_line_number(camera):
    lines = keypoints_jsonl([arm_frame(0.1, 30.0, camera), arm_frame(0.2, 30.0, camera),
                             arm_frame(0.15, 30.0, camera)]).splitlines()
    with pytest.raises(StreamOrderError) as excinfo:
        read_frames(lines)
    assert excinfo.value.line_number == 3


def test_out_of_order_torque_is_rejected():
    with pytest.raises(StreamOrderError):
        read_torque(["t,fx_N,tauz_Nm", "0.1,5,1", "0.05,5,1"])


def test_torque_header_is_checked():
    with pytest.raises(InvalidInputError):
        read_torque(["time,force,torque", "0,5,1"])


def test_malformed_torque_line_is_skipped():
    events = read_torque(["t,fx_N,tauz_Nm", "0,5,1", "0.02,five,1", "0.04,5,nan", "0.06,6,2"])
    assert [e.t for e in events] == [0.0, 0.06]


def test_missing_torque_replays_with_zero_wrench(user5_profile_file, caplog):
    with caplog.at_level(logging.WARNING):
        commands = list(replay(user5_profile_file, frames_text(user5_profile_file, [27.17] * 20), []))
    assert len(commands) == 20
    assert all(c.value.v == 0.0 for c in commands)
    assert "empty" in caplog.text


def test_dropped_frames_are_bridged(user5_profile_file):
    lines = frames_text(user5_profile_file, [39.06] * 10) + frames_text(user5_profile_file, [39.06], start=1.0)
    commands = list(replay(user5_profile_file, lines, torque_text(60)))
    assert len(commands) == 51
    assert all(c.value.omega > 0 for c in commands[5:])


def test_command_line_format():
    assert format_command(Timestamped(0.02, VelocityCommand(0.25, -12.5))) == "0.020,0.250000,-12.500000"
