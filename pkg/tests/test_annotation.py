import numpy as np
import pytest

from vineseg.analysis import AnalysisParams, region_label
from vineseg.annotation import (AnnotationError, AnnotationSet,
                                binarize_annotated_image, count_objects,
                                load_annotations, rasterize, save_annotations)


def circles(points, radius, side=32):
    return AnnotationSet(image_id="t", width=side, height=side,
                         kind="circle", radius=radius, primitives=points)


class TestRasterizeCircles:
    def test_radius_zero_single_pixel(self):
        mask = rasterize(circles([[5, 5]], 0, side=10))
        assert mask.sum() == 1
        assert mask[5, 5]

    def test_diameter_is_2r_plus_1(self):
        mask = rasterize(circles([[16, 16]], 3))
        row = mask[16]
        col = mask[:, 16]
        assert row.sum() == 7
        assert col.sum() == 7

    def test_centroid_matches_center(self):
        mask = rasterize(circles([[12, 17]], 4))
        objs = region_label(mask, AnalysisParams())
        assert len(objs) == 1
        cx, cy = objs[0].centroid
        assert abs(cx - 12) <= 0.5 and abs(cy - 17) <= 0.5

    def test_deterministic(self):
        ann = circles([[8, 9], [20, 21]], 3)
        assert (rasterize(ann) == rasterize(ann)).all()

    def test_overlap_rejected(self):
        with pytest.raises(AnnotationError, match="overlap"):
            rasterize(circles([[10, 10], [12, 10]], 3))

    def test_out_of_bounds_rejected(self):
        with pytest.raises(AnnotationError, match="out of bounds"):
            rasterize(circles([[40, 5]], 2))

    def test_component_count_matches_primitives(self):
        ann = circles([[6, 6], [6, 24], [24, 6], [24, 24]], 3)
        mask = rasterize(ann)
        assert len(region_label(mask, AnalysisParams())) == 4


class TestRasterizePolygonsAndLines:
    def test_square_polygon_inclusive(self):
        ann = AnnotationSet(image_id="t", width=10, height=10, kind="polygon",
                            primitives=[[[2, 2], [5, 2], [5, 5], [2, 5]]])
        assert rasterize(ann).sum() == 16

    def test_degenerate_polygon_rejected(self):
        ann = AnnotationSet(image_id="t", width=10, height=10, kind="polygon",
                            primitives=[[[2, 2], [5, 2], [8, 2]]])
        with pytest.raises(AnnotationError, match="degenerate"):
            rasterize(ann)

    def test_horizontal_line_extent(self):
        ann = AnnotationSet(image_id="t", width=32, height=8, kind="line",
                            stroke_width=1, primitives=[[[3, 4], [22, 4]]])
        mask = rasterize(ann)
        objs = region_label(mask, AnalysisParams())
        assert len(objs) == 1
        x0, y0, x1, y1 = objs[0].bbox
        assert x1 - x0 == 19

    def test_diagonal_line_is_one_component(self):
        ann = AnnotationSet(image_id="t", width=32, height=32, kind="line",
                            stroke_width=1, primitives=[[[2, 2], [25, 29]]])
        assert len(region_label(rasterize(ann), AnalysisParams())) == 1

    def test_stroke_width_three(self):
        ann = AnnotationSet(image_id="t", width=16, height=16, kind="line",
                            stroke_width=3, primitives=[[[3, 8], [12, 8]]])
        mask = rasterize(ann)
        assert mask[7:10, 5].all()
        assert not mask[6, 5] and not mask[10, 5]


class TestDarkPixelBinarization:
    def test_black_blob_on_white(self):
        img = np.full((12, 12, 3), 240, dtype=np.uint8)
        img[3:6, 4:9] = 5
        mask = binarize_annotated_image(img, 30)
        expected = np.zeros((12, 12), dtype=bool)
        expected[3:6, 4:9] = True
        assert (mask == expected).all()

    def test_all_white_gives_empty(self):
        img = np.full((5, 5), 255, dtype=np.uint8)
        assert not binarize_annotated_image(img, 30).any()

    def test_threshold_255_takes_all(self):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(5, 5, 3)).astype(np.uint8)
        assert binarize_annotated_image(img, 255).all()

    def test_max_channel_rule(self):
        img = np.zeros((1, 1, 3), dtype=np.uint8)
        img[0, 0] = (10, 200, 10)   # one bright channel disqualifies
        assert not binarize_annotated_image(img, 30).any()


class TestCountsAndIO:
    def test_empty_set_counts_zero(self):
        assert count_objects(circles([], 3)) == 0

    def test_seventeen_circles(self):
        pts = [[2 + 4 * (i % 7), 2 + 4 * (i // 7)] for i in range(17)]
        assert count_objects(circles(pts, 0)) == 17

    def test_json_roundtrip(self, tmp_path):
        ann = circles([[4, 4], [20, 20]], 2.5)
        path = tmp_path / "ann.json"
        save_annotations(ann, path)
        loaded = load_annotations(path)
        assert loaded.kind == "circle"
        assert loaded.radius == 2.5
        assert loaded.primitives == [[4, 4], [20, 20]]
        assert (rasterize(loaded) == rasterize(ann)).all()
