import itertools

import pytest

import tubelink as tl


def scenario(noise=0.0, jitter=0, seed=0):
    spec = tl.ScenarioSpec()
    spec.video_id = "py"
    spec.frame_count = 60
    spec.class_count = 3
    spec.distractors_per_frame = 4
    spec.score_noise = noise
    spec.box_jitter = jitter
    spec.seed = seed
    spec.planted = [
        tl.PlantedTube(1, 1, 60, tl.BoundingBox(10, 10, 60, 60), tl.BoundingBox(100, 80, 150, 130)),
        tl.PlantedTube(2, 25, 60, tl.BoundingBox(200, 10, 260, 70), tl.BoundingBox(250, 150, 310, 210), margin=2.0),
    ]
    return tl.generate_scenario(spec)


def test_box_iou():
    a = tl.BoundingBox(0, 0, 10, 10)
    assert tl.box_iou(a, a) == 1.0
    assert tl.box_iou(a, tl.BoundingBox(5, 0, 15, 10)) == pytest.approx(1 / 3)
    assert tl.box_iou(a, tl.BoundingBox(10, 0, 20, 10)) == 0.0
    with pytest.raises(ValueError):
        tl.BoundingBox(5, 5, 5, 9)


def test_mask_round_trip():
    m = tl.PixelMask.from_box(6, 4, tl.BoundingBox(1, 1, 3, 3))
    assert m.pixel_count() == 4
    back = tl.PixelMask.from_rle(6, 4, m.to_rle())
    assert back.bounding_box() == tl.BoundingBox(1, 1, 3, 3)
    assert back.contains(2, 2) and not back.contains(0, 0)


def test_best_path_matches_enumeration():
    v = scenario().video
    short = tl.VideoProposals()
    short.video_id = "s"
    short.frame_width, short.frame_height = v.frame_width, v.frame_height
    short.class_names = v.class_names
    short.frames = [f[:3] for f in v.frames[:4]]
    lam = 1.0
    best = None
    for choice in itertools.product(range(3), repeat=4):
        props = [short.frames[t][i] for t, i in enumerate(choice)]
        e = sum(a.scores[1] + b.scores[1] + lam * tl.box_iou(a.region.box, b.region.box) for a, b in zip(props, props[1:]))
        e /= 4
        if best is None or e > best[0] + 1e-12:
            best = (e, list(choice))
    path = tl.best_path(short, 1, lam)
    assert path.energy == pytest.approx(best[0], abs=1e-12)
    assert path.members == best[1]
    assert tl.path_energy(short, path, lam) == pytest.approx(path.energy)


def test_link_and_evaluate_noise_free():
    s = scenario()
    tubes = tl.link_video(s.video, tl.LinkerConfig())
    assert sorted(t.class_id for t in tubes) == [1, 2]
    assert [t.score for t in tubes] == sorted((t.score for t in tubes), reverse=True)
    report = tl.detection_metrics(tubes, s.ground_truth)
    assert (report.recall, report.precision, report.f1) == (1.0, 1.0, 1.0)
    scores = tl.integrated_scores(tubes, s.ground_truth)
    assert scores.overall == 1.0
    curve = tl.metric_curve(tubes, s.ground_truth, "tr")
    assert len(curve) == 11 and all(row[3] == 1.0 for row in curve)
    with pytest.raises(ValueError):
        tl.metric_curve(tubes, s.ground_truth, "xx")


def test_temporal_label_alpha_zero_is_argmax():
    v = scenario(noise=0.5, seed=3).video
    path = tl.best_path(v, 1, 1.0)
    labels = tl.temporal_label(path, v, 0.0)
    for t, (idx, label) in enumerate(zip(path.members, labels)):
        scores = v.frames[t][idx].scores
        assert label == max(range(len(scores)), key=lambda c: (scores[c], -c))


def test_thresholds_and_f1():
    assert tl.f1(0.5, 0.63) == pytest.approx(0.5575, abs=1e-4)
    assert tl.f1(0.0, 0.0) == 0.0
    th = tl.EvalThresholds(spatial_recall=0.6)
    assert th.spatial_recall == 0.6 and th.temporal_recall == 0.1


def test_file_round_trip(tmp_path):
    s = scenario(noise=0.1, jitter=2, seed=5)
    tl.save_proposals(tmp_path / "p.jsonl", [s.video])
    (back,) = tl.load_proposals(tmp_path / "p.jsonl")
    assert back.class_names == s.video.class_names
    assert [len(f) for f in back.frames] == [len(f) for f in s.video.frames]
    assert back.frames[7][0].scores == s.video.frames[7][0].scores

    tl.save_ground_truth(tmp_path / "g.jsonl", s.ground_truth, s.video.class_names)
    gts, names = tl.load_ground_truth(tmp_path / "g.jsonl")
    assert [g.tube_id for g in gts] == ["py#0", "py#1"]
    assert names == [s.video.class_names[1], s.video.class_names[2]]

    tubes = tl.link_video(s.video, tl.LinkerConfig())
    tl.save_tubes(tmp_path / "t.jsonl", tubes, s.video.class_names)
    loaded, _ = tl.load_tubes(tmp_path / "t.jsonl", s.video.class_names)
    assert [(t.class_id, t.t_start, t.t_end) for t in loaded] == [(t.class_id, t.t_start, t.t_end) for t in tubes]

    with pytest.raises(ValueError):
        tl.load_ground_truth(tmp_path / "g.jsonl", ["only_one"])
