import numpy as np
import pytest

from vineseg.analysis import AnalysisParams, region_label
from vineseg.annotation import count_objects, rasterize
from vineseg.synth import (PROFILES, PlacementError, SyntheticSceneSpec,
                           generate_scene)


class TestGenerateScene:
    def test_shapes_and_types(self):
        img, ann, mask = generate_scene(SyntheticSceneSpec(seed=1))
        assert img.shape == (256, 256, 3) and img.dtype == np.uint8
        assert mask.shape == (256, 256) and mask.dtype == np.bool_
        assert ann.kind == "circle"

    def test_count_within_range(self):
        for seed in range(5):
            spec = SyntheticSceneSpec(count_range=(20, 60), seed=seed)
            _, ann, _ = generate_scene(spec)
            assert 20 <= count_objects(ann) <= 60

    def test_mask_matches_annotation(self):
        spec = SyntheticSceneSpec(seed=3)
        _, ann, mask = generate_scene(spec)
        assert (rasterize(ann, check_overlap=False) == mask).all()

    def test_components_equal_annotation_count(self):
        spec = SyntheticSceneSpec(count_range=(10, 20), seed=4)
        _, ann, mask = generate_scene(spec)
        objs = region_label(mask, AnalysisParams())
        assert len(objs) == count_objects(ann)

    def test_seed_reproducible(self):
        spec = SyntheticSceneSpec(seed=9)
        a_img, a_ann, a_mask = generate_scene(spec)
        b_img, b_ann, b_mask = generate_scene(spec)
        assert np.array_equal(a_img, b_img)
        assert np.array_equal(a_mask, b_mask)
        assert a_ann.primitives == b_ann.primitives

    def test_different_seeds_differ(self):
        a = generate_scene(SyntheticSceneSpec(seed=0))[0]
        b = generate_scene(SyntheticSceneSpec(seed=1))[0]
        assert not np.array_equal(a, b)

    def test_profile_separation(self):
        for profile, (bg, obj) in PROFILES.items():
            spec = SyntheticSceneSpec(profile=profile, noise_level=0.0, seed=2)
            img, _, mask = generate_scene(spec)
            gray = img.mean(axis=2)
            # tint shifts the base grays by at most 10
            assert abs(gray[mask].mean() - obj) < 12
            assert abs(gray[~mask].mean() - bg) < 12

    def test_hard_profile_narrower_contrast(self):
        specs = {p: SyntheticSceneSpec(profile=p, seed=6) for p in ("easy", "hard")}
        sep = {}
        for p, spec in specs.items():
            img, _, mask = generate_scene(spec)
            gray = img.mean(axis=2)
            sep[p] = abs(gray[mask].mean() - gray[~mask].mean())
        assert sep["hard"] < sep["easy"] / 2

    def test_line_scene_analysable(self):
        spec = SyntheticSceneSpec(kind="line", count_range=(5, 10),
                                  radius=8.0, stroke_width=3.0, seed=5)
        _, ann, mask = generate_scene(spec)
        objs = region_label(mask, AnalysisParams())
        assert len(objs) == count_objects(ann)

    def test_polygon_blob_scene(self):
        spec = SyntheticSceneSpec(kind="polygon-blob", count_range=(5, 10),
                                  radius=5.0, seed=8)
        _, ann, mask = generate_scene(spec)
        assert mask.any()
        assert len(region_label(mask, AnalysisParams())) == count_objects(ann)

    def test_unknown_profile(self):
        with pytest.raises(ValueError):
            generate_scene(SyntheticSceneSpec(profile="impossible"))

    def test_overfull_canvas_reports_placement_failure(self):
        spec = SyntheticSceneSpec(width=64, height=64, count_range=(500, 500),
                                  radius=4.0, seed=0)
        with pytest.raises(PlacementError):
            generate_scene(spec)
