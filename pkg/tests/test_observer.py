import pytest

from mctrack.geometry import mask_stats
from mctrack.observer import (
    DISTRACTOR_AFFINITY_FACTOR,
    FrameOutOfRangeError,
    MAX_CANDIDATES,
    NoiseProfile,
    PROFILES,
    SyntheticObserver,
    TranscriptObserver,
    candidate_from_wire,
    frame_from_wire,
)
from mctrack.simulator import builtin_suites, generate


@pytest.fixture(scope="module")
def clear_scenario():
    return generate(builtin_suites()["linear_clear"])


@pytest.fixture(scope="module")
def bridge_scenario():
    return generate(builtin_suites()["occlusion_bridge"])


def test_noiseless_visible_frame_matches_truth(clear_scenario):
    obs = SyntheticObserver(clear_scenario, NoiseProfile.noiseless(), seed=0)
    for t in (0, 17, 99):
        frame = obs.observe(t)
        assert len(frame.candidates) == 1
        cand = frame.candidates[0]
        assert cand.stats.tight_box == clear_scenario.target.boxes[t]
        assert cand.s_sam == 0.85  # affinity_mean_visible, no noise


def test_fully_occluded_drops_target(bridge_scenario):
    profile = NoiseProfile.noiseless()
    obs = SyntheticObserver(bridge_scenario, profile, seed=0)
    for t in range(40, 60):
        assert obs.observe(t).candidates == ()
    assert len(obs.observe(30).candidates) == 1


def test_partial_occlusion_scales_affinity(bridge_scenario):
    profile = NoiseProfile.noiseless()
    obs = SyntheticObserver(bridge_scenario, profile, seed=0)
    # ramp into the occluder: affinity falls with visibility
    v38 = bridge_scenario.target.visibility[38]
    assert 0 < v38 < 1
    frame = obs.observe(38)
    assert frame.candidates[0].s_sam == pytest.approx(0.85 * v38)


def test_determinism_byte_identical_stream(bridge_scenario):
    profile = PROFILES["day"]
    a = SyntheticObserver(bridge_scenario, profile, seed=42)
    b = SyntheticObserver(bridge_scenario, profile, seed=42)
    for t in range(100):
        fa, fb = a.observe(t), b.observe(t)
        assert fa == fb
    # and observation order does not matter
    assert a.observe(7) == b.observe(7)


def test_different_seeds_differ(bridge_scenario):
    profile = PROFILES["day"]
    a = SyntheticObserver(bridge_scenario, profile, seed=1)
    b = SyntheticObserver(bridge_scenario, profile, seed=2)
    assert any(a.observe(t) != b.observe(t) for t in range(20))


def test_frame_out_of_range(clear_scenario):
    obs = SyntheticObserver(clear_scenario, NoiseProfile.noiseless(), seed=0)
    with pytest.raises(FrameOutOfRangeError):
        obs.observe(100)
    with pytest.raises(FrameOutOfRangeError):
        obs.observe(-1)


def test_candidate_cap_and_distractors():
    scenario = generate(builtin_suites()["distractor_cross"])
    obs = SyntheticObserver(scenario, PROFILES["day"], seed=3)
    for t in range(scenario.frames):
        frame = obs.observe(t)
        assert len(frame.candidates) <= MAX_CANDIDATES
    # distractor present with reduced affinity on a noiseless profile
    quiet = SyntheticObserver(
        scenario,
        NoiseProfile(
            box_jitter_sigma=0.0,
            affinity_sigma=0.0,
            distractor_count=2,
            drop_prob_visible=0.0,
            occlusion_junk_prob=0.0,
        ),
        seed=0,
    )
    frame = quiet.observe(0)
    assert len(frame.candidates) == 2
    assert frame.candidates[1].s_sam == pytest.approx(0.85 * DISTRACTOR_AFFINITY_FACTOR)


def test_junk_candidates_only_under_occlusion(bridge_scenario):
    profile = NoiseProfile(
        box_jitter_sigma=0.0,
        affinity_sigma=0.0,
        occlusion_junk_prob=1.0,
        affinity_mean_occluded=0.2,
    )
    obs = SyntheticObserver(bridge_scenario, profile, seed=5)
    frame = obs.observe(45)
    assert len(frame.candidates) == 1
    junk = frame.candidates[0]
    assert junk.s_sam == pytest.approx(0.2)
    occ = bridge_scenario.spec.occluders[0].box
    assert occ.left <= junk.stats.centroid[0] <= occ.right


def test_emitted_masks_consistent_with_stats(clear_scenario):
    profile = NoiseProfile(
        box_jitter_sigma=1.0, affinity_sigma=0.05, distractor_count=0, emit_masks=True
    )
    obs = SyntheticObserver(clear_scenario, profile, seed=9)
    for t in range(0, 20, 5):
        for cand in obs.observe(t).candidates:
            assert cand.mask is not None
            derived = mask_stats(cand.mask)
            assert derived == cand.stats


def test_observer_pure_function_of_profile(bridge_scenario):
    day = SyntheticObserver(bridge_scenario, PROFILES["day"], seed=4)
    night = SyntheticObserver(bridge_scenario, PROFILES["night"], seed=4)
    assert day.observe(3) != night.observe(3)


# --- wire-schema validation -------------------------------------------------


def wire_cand(**overrides):
    base = {
        "bbox": [50.0, 60.0, 10.0, 8.0],
        "area": 80.0,
        "centroid": [50.0, 60.0],
        "s_sam": 0.7,
        "s_obj": 0.6,
    }
    base.update(overrides)
    return base


def test_candidate_from_wire_ok():
    cand = candidate_from_wire(wire_cand())
    assert cand.stats.tight_box.cx == 50.0
    assert cand.s_sam == 0.7


def test_candidate_from_wire_rejects_bad_payloads():
    with pytest.raises(ValueError):
        candidate_from_wire(wire_cand(bbox=[1, 2, 3]))
    with pytest.raises(ValueError):
        candidate_from_wire(wire_cand(bbox=[1, 2, -3, 4]))
    with pytest.raises(ValueError):
        candidate_from_wire(wire_cand(area=0.0))
    with pytest.raises(ValueError):
        candidate_from_wire(wire_cand(centroid=[500.0, 60.0]))  # outside the box
    with pytest.raises(ValueError):
        candidate_from_wire(wire_cand(s_sam=float("nan")))


def test_candidate_from_wire_checks_rle_consistency():
    ok = wire_cand(
        bbox=[1.0, 1.0, 3.0, 3.0], area=9.0, centroid=[1.0, 1.0], rle="4 4 0 3 1 3 1 3 5"
    )
    cand = candidate_from_wire(ok)
    assert cand.mask is not None
    bad = dict(ok, area=8.0)
    with pytest.raises(ValueError):
        candidate_from_wire(bad)


def test_frame_from_wire_caps_candidates():
    with pytest.raises(ValueError):
        frame_from_wire([wire_cand()] * 4, 0)


def test_transcript_observer_replays():
    transcript = {
        "header": {"width": 64, "height": 64, "prompt_box": [10.0, 10.0, 6.0, 4.0]},
        "frames": [[wire_cand()], [], [wire_cand(s_sam=0.2)]],
    }
    obs = TranscriptObserver(transcript)
    assert obs.frames == 3
    assert obs.observe(0).candidates[0].s_sam == 0.7
    assert obs.observe(1).candidates == ()
    assert obs.observe(2).candidates[0].s_sam == 0.2
    with pytest.raises(FrameOutOfRangeError):
        obs.observe(3)


def test_transcript_observer_rejects_malformed():
    with pytest.raises(ValueError):
        TranscriptObserver({"frames": []})
    with pytest.raises(ValueError):
        TranscriptObserver(
            {"header": {"width": 4, "height": 4, "prompt_box": [1, 1, 2, 2]}, "frames": [[{"bbox": [0, 0, 0, 0]}]]}
        )
