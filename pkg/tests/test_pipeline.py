import numpy as np
import pytest

from parkplate.imaging import Rect
from parkplate.imgfile import write_image
from parkplate.localization import PlateCandidate, blue_mask, estimate_tilt, extract_candidates, locate_plates
from parkplate.pipeline import (BatchReport, Diagnostic, ManifestEntry, SceneOutcome, batch_evaluate,
                                load_scene_dir, manifest_lines, match_plates, parse_manifest,
                                read_plate, score_scene)
from parkplate.platetype import PlateType
from parkplate.synth import PlateTruth, SceneSpec, generate_scene


def truth(text, box, kind=PlateType.WHITE):
    return PlateTruth(text, kind, 0.0, 1.0, (0.0, 0.0), box, box)


def test_blank_image_reads_nothing(model):
    assert read_plate(np.full((480, 640, 3), 128, dtype=np.uint8), model) == []


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_single_plate_scene_reads_truth(model, seed):
    scene = generate_scene(seed, SceneSpec(max_tilt_deg=8))
    [reading] = read_plate(scene.image, model)
    assert reading.text == scene.truth[0].text
    assert reading.plate_type is scene.truth[0].plate_type
    assert len(reading.per_glyph) == len(reading.text) and reading.elapsed >= 0
    assert reading.box.iou(scene.truth[0].box) >= 0.5


def test_two_plate_scene_reads_both(model):
    scene = generate_scene(5, SceneSpec(width=800, height=600, plates=2, max_tilt_deg=5))
    readings = read_plate(scene.image, model)
    assert sorted(r.text for r in readings) == sorted(t.text for t in scene.truth)


@pytest.mark.parametrize("kind", list(PlateType))
def test_generated_type_is_recovered(model, kind):
    scene = generate_scene(8, SceneSpec(plate_type=kind))
    [reading] = read_plate(scene.image, model)
    assert reading.plate_type is kind


def test_generated_scene_is_deterministic():
    spec = SceneSpec(max_tilt_deg=10, scale_range=(0.5, 2.0), speckle=0.001)
    a, b = generate_scene(77, spec), generate_scene(77, spec)
    assert a.image.tobytes() == b.image.tobytes() and a.truth == b.truth


def test_untilted_scene_has_no_estimated_tilt():
    scene = generate_scene(4, SceneSpec())
    mask = blue_mask(scene.image)
    [cand] = [c for c in extract_candidates(mask, scene.image) if c.box.iou(scene.truth[0].box) > 0.5]
    assert abs(estimate_tilt(cand, mask)) < 0.01


def test_read_plate_is_deterministic_and_pure(model):
    scene = generate_scene(12, SceneSpec(max_tilt_deg=10))
    before = scene.image.copy()
    a = read_plate(scene.image, model)
    b = read_plate(scene.image, model)
    assert np.array_equal(scene.image, before)
    assert [(r.text, r.plate_type, r.box, r.per_glyph) for r in a] == \
        [(r.text, r.plate_type, r.box, r.per_glyph) for r in b]


def test_readings_come_from_localization_candidates(model):
    scene = generate_scene(13, SceneSpec(plates=2, width=800, height=600))
    accepted, _ = locate_plates(scene.image)
    for r in read_plate(scene.image, model):
        assert r.candidate in accepted


def test_failed_candidate_goes_to_diagnostics(model):
    img = np.full((200, 400, 3), 200, dtype=np.uint8)
    img[60:104, 50:70] = (40, 70, 180)  # blue strip
    # stripes pass the scanline check but leave no character-sized component
    img[60:104, 80:250:6] = 20
    diags: list[Diagnostic] = []
    assert read_plate(img, model, diagnostics=diags) == []
    assert len(diags) == 1 and diags[0].stage


def test_match_plates_is_greedy_by_iou():
    truths = [truth("A", Rect(0, 0, 10, 10)), truth("B", Rect(100, 0, 10, 10))]
    boxes = [Rect(1, 0, 10, 10), Rect(50, 50, 5, 5), Rect(100, 1, 10, 10)]
    assert match_plates(truths, boxes) == {0: 0, 1: 2}
    assert match_plates(truths, [Rect(6, 0, 10, 10)]) == {}


def test_batch_of_blank_scenes_is_well_formed(model):
    scenes = [generate_scene(i, SceneSpec(plates=0)) for i in range(2)]
    report = batch_evaluate(scenes, model)
    assert report.total_images == 2 and report.total_plates == 0 and report.located == 0
    assert report.location_rate is None and report.char_rate is None
    assert "n/a" in report.table()


def test_batch_report_matches_independent_recount(model):
    scenes = [generate_scene(100 + i, SceneSpec(max_tilt_deg=10)) for i in range(6)]
    report = batch_evaluate(scenes, model)
    located = chars = correct = 0
    for scene in scenes:
        readings = read_plate(scene.image, model)
        for t in scene.truth:
            chars += len(t.text)
            hits = [r for r in readings if r.box.iou(t.box) >= 0.5]
            if hits:
                located += 1
                correct += sum(a == b for a, b in zip(hits[0].text, t.text))
    assert (report.located, report.total_chars, report.chars_correct) == (located, chars, correct)
    d = report.to_dict()
    assert d["total_images"] == 6 and d["correct_characters"] == correct


def test_report_table_columns():
    report = BatchReport([SceneOutcome(1, 1, 8, 7), SceneOutcome(1, 0, 8, 0)], [10.0, 30.0])
    lines = report.table().splitlines()
    assert lines[0].startswith("Total images | Total characters | Correct plate location")
    assert lines[1] == "2 | 16 | 1 | 7 | 50.0% | 43.8%"
    assert report.median_ms == 20.0


def test_score_counts_located_but_unread_plates():
    t = truth("12A34567", Rect(0, 0, 100, 20))
    cand = PlateCandidate(Rect(0, 0, 100, 20), Rect(0, 0, 10, 20), 0.0, 12, (5, 10), 20, 10)
    out = score_scene([t], [], [cand])
    assert (out.located, out.chars_correct) == (1, 0)


def test_manifest_round_trip(tmp_path):
    scenes = {"scene_0000.ppm": generate_scene(1, SceneSpec(tilt_deg=-3.5)),
              "scene_0001.ppm": generate_scene(2, SceneSpec(plates=0))}
    lines = []
    for name, scene in scenes.items():
        write_image(tmp_path / name, scene.image)
        lines += manifest_lines(name, scene.truth)
    (tmp_path / "truth.txt").write_text("\n".join(lines) + "\n")
    entries = parse_manifest((tmp_path / "truth.txt").read_text())
    t = scenes["scene_0000.ppm"].truth[0]
    assert entries[0] == ManifestEntry("scene_0000.ppm", t.text, t.plate_type, -3.5, t.box)
    assert entries[1].text == "" and entries[1].plate_type is None
    loaded = load_scene_dir(tmp_path)
    assert [s.name for s in loaded] == list(scenes)
    assert np.array_equal(loaded[0].image, scenes["scene_0000.ppm"].image)
    assert loaded[1].truth == []


def test_manifest_rejects_bad_lines():
    with pytest.raises(ValueError):
        parse_manifest("a|b|c\n")
    with pytest.raises(ValueError):
        parse_manifest("a|12|Blue|0.0|1,2,3,4\n")
