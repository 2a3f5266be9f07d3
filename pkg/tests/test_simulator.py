import pytest

from mctrack.geometry import BoundingBox, iou
from mctrack.simulator import (
    MotionSegment,
    Occluder,
    ScenarioSpec,
    SpecError,
    SUITE_NAMES,
    TrackSpec,
    builtin_suites,
    generate,
    load_spec,
    save_spec,
    spec_from_dict,
    spec_to_dict,
    suite_variant,
)

from oracles import visibility_oracle


def simple_spec(**kwargs):
    defaults = dict(
        frames=10,
        arena=(256, 256),
        target=TrackSpec(BoundingBox(10, 50, 6, 6), (MotionSegment(0, 2.0, 0.0),)),
    )
    defaults.update(kwargs)
    return ScenarioSpec(**defaults)


def test_linear_integration():
    scenario = generate(simple_spec())
    assert [b.cx for b in scenario.target.boxes] == [10 + 2 * t for t in range(10)]
    assert all(b.cy == 50 for b in scenario.target.boxes)


def test_rigidity():
    for name in SUITE_NAMES:
        scenario = generate(builtin_suites()[name])
        sizes = {(b.w, b.h) for b in scenario.target.boxes}
        assert len(sizes) == 1


def test_no_occluders_full_visibility():
    scenario = generate(simple_spec())
    assert scenario.target.visibility == tuple([1.0] * 10)
    assert scenario.target.full_cover == tuple([0.0] * 10)


def test_spec_validation():
    with pytest.raises(SpecError):
        simple_spec(frames=0)
    with pytest.raises(SpecError):
        simple_spec(target=TrackSpec(BoundingBox(1, 1, 6, 6)))  # pokes out of the arena
    with pytest.raises(SpecError):
        simple_spec(
            target=TrackSpec(
                BoundingBox(10, 50, 6, 6),
                (MotionSegment(5, 1, 0), MotionSegment(5, 0, 1)),
            )
        )


def test_piecewise_segments():
    spec = simple_spec(
        target=TrackSpec(
            BoundingBox(10, 50, 6, 6),
            (MotionSegment(0, 2.0, 0.0), MotionSegment(4, 0.0, 1.0)),
        )
    )
    boxes = generate(spec).target.boxes
    assert boxes[4].cx == 18 and boxes[4].cy == 50
    assert boxes[5].cx == 18 and boxes[5].cy == 51
    assert boxes[9].cy == 55


def test_visibility_matches_rectangle_oracle():
    occ = Occluder(BoundingBox(30, 50, 20, 20), "full")
    spec = simple_spec(frames=30, occluders=(occ,))
    scenario = generate(spec)
    for t, box in enumerate(scenario.target.boxes):
        expected = visibility_oracle(
            (box.cx, box.cy, box.w, box.h), (30.0, 50.0, 20.0, 20.0)
        )
        assert scenario.target.visibility[t] == pytest.approx(expected, abs=1e-9)


def test_overlapping_occluders_not_double_counted():
    # Two identical occluders fully covering the target still give 0 visibility.
    occ_box = BoundingBox(10, 50, 30, 30)
    spec = simple_spec(
        frames=2,
        occluders=(Occluder(occ_box, "full"), Occluder(occ_box, "partial")),
    )
    scenario = generate(spec)
    assert scenario.target.visibility[0] == 0.0
    assert scenario.target.full_cover[0] == 1.0


def test_occlusion_bridge_window():
    scenario = generate(builtin_suites()["occlusion_bridge"])
    zero = [t for t, v in enumerate(scenario.target.visibility) if v == 0.0]
    assert zero == list(range(40, 60))  # exactly one 20-frame run
    assert all(scenario.target.full_cover[t] == 1.0 for t in zero)


@pytest.mark.parametrize("index", range(12))
def test_occlusion_bridge_variants_keep_window(index):
    scenario = generate(suite_variant("occlusion_bridge", index))
    zero = [t for t, v in enumerate(scenario.target.visibility) if v == 0.0]
    assert zero == list(range(40, 60))


def test_linear_clear_fully_visible():
    scenario = generate(builtin_suites()["linear_clear"])
    assert all(v == 1.0 for v in scenario.target.visibility)


def test_distractor_cross_overlaps_target():
    scenario = generate(builtin_suites()["distractor_cross"])
    overlaps = [
        iou(t, d) for t, d in zip(scenario.target.boxes, scenario.distractors[0].boxes)
    ]
    assert max(overlaps) > 0.3


def test_turn_under_occlusion_turns_while_hidden():
    scenario = generate(builtin_suites()["turn_under_occlusion"])
    hidden = [t for t, c in enumerate(scenario.target.full_cover) if c >= 1.0]
    assert hidden, "turn suite must contain fully hidden frames"
    boxes = scenario.target.boxes
    vx_before = boxes[hidden[0]].cx - boxes[hidden[0] - 1].cx
    vy_after = boxes[hidden[-1] + 1].cy - boxes[hidden[-1]].cy
    assert vx_before > 0 and vy_after > 0  # direction changed under the occluder


def test_generate_deterministic():
    spec = builtin_suites()["occlusion_bridge"]
    a = generate(spec)
    b = generate(spec)
    assert a.target.boxes == b.target.boxes
    assert a.target.visibility == b.target.visibility


def test_spec_json_round_trip(tmp_path):
    spec = builtin_suites()["distractor_cross"]
    assert spec_from_dict(spec_to_dict(spec)) == spec
    save_spec(spec, tmp_path / "s.json")
    assert load_spec(tmp_path / "s.json") == spec


def test_target_stays_in_arena_for_all_variants():
    for name in SUITE_NAMES:
        for index in range(12):
            spec = suite_variant(name, index)
            scenario = generate(spec)
            w, h = spec.arena
            for b in scenario.target.boxes:
                assert 0 <= b.left and b.right <= w, (name, index)
                assert 0 <= b.top and b.bottom <= h, (name, index)
