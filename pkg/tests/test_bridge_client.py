import sys
from pathlib import Path

import pytest

from mctrack.bridge import (
    BridgeClosedError,
    BridgeObserver,
    BridgeTimeoutError,
    ProtocolError,
)
from mctrack.geometry import BoundingBox

BACKEND = Path(__file__).parent / "fake_backend.py"
PROMPT = BoundingBox(50.0, 50.0, 10.0, 8.0)


def make_observer(mode: str, timeout: float = 10.0) -> BridgeObserver:
    return BridgeObserver(
        [sys.executable, str(BACKEND), mode],
        width=256,
        height=256,
        prompt_box=PROMPT,
        sequence="fake",
        timeout=timeout,
    )


def test_handshake_and_frames():
    with make_observer("ok") as obs:
        for t in range(5):
            frame = obs.observe(t)
            assert frame.frame_index == t
            assert len(frame.candidates) == 1
            assert frame.candidates[0].s_sam == 0.9
    assert obs.returncode == 0


def test_requests_must_be_in_order():
    with make_observer("ok") as obs:
        obs.observe(0)
        with pytest.raises(ValueError):
            obs.observe(2)


def test_extra_candidate_is_protocol_error():
    with make_observer("extra") as obs:
        with pytest.raises(ProtocolError):
            obs.observe(0)


def test_out_of_order_index_is_protocol_error():
    with make_observer("wrong_index") as obs:
        with pytest.raises(ProtocolError):
            obs.observe(0)


def test_non_json_line_is_protocol_error():
    with make_observer("garbage") as obs:
        with pytest.raises(ProtocolError):
            obs.observe(0)


def test_backend_death_is_bridge_closed():
    with make_observer("die") as obs:
        with pytest.raises(BridgeClosedError):
            obs.observe(0)


def test_timeout():
    with make_observer("slow", timeout=0.4) as obs:
        with pytest.raises(BridgeTimeoutError):
            obs.observe(0)


def test_bad_ready_is_protocol_error():
    with pytest.raises(ProtocolError):
        make_observer("no_ready")
