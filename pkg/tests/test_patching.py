import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vineseg.imaging import InvalidInputError
from vineseg.patching import (Patch, PatchSpec, grid_patches,
                              overlap_grid_patches, random_patches, recompose)


def gray(h, w, seed=0):
    return np.random.default_rng(seed).integers(0, 256, size=(h, w)).astype(np.uint8)


class TestGridPatches:
    def test_exact_tiling(self):
        patches = grid_patches(gray(448, 448), spec=PatchSpec(224))
        assert sorted((p.x, p.y) for p in patches) == \
            [(0, 0), (0, 224), (224, 0), (224, 224)]

    def test_paper_resolution_count(self):
        patches = grid_patches(gray(3648, 5472), spec=PatchSpec(224))
        assert len(patches) == 25 * 17

    def test_edge_alignment(self):
        patches = grid_patches(gray(224, 300), spec=PatchSpec(224))
        assert sorted((p.x, p.y) for p in patches) == [(0, 0), (76, 0)]

    def test_too_small_rejected(self):
        with pytest.raises(InvalidInputError):
            grid_patches(gray(100, 300), spec=PatchSpec(224))

    def test_mask_excerpts_align(self):
        img = gray(64, 96)
        mask = img > 127
        for p in grid_patches(img, mask, PatchSpec(32)):
            assert (p.mask == (p.image > 127)).all()

    @given(st.integers(64, 400), st.integers(64, 400))
    @settings(max_examples=40, deadline=None)
    def test_count_formula_and_coverage(self, w, h):
        p = 64
        patches = grid_patches(np.zeros((h, w), dtype=np.uint8), spec=PatchSpec(p))
        assert len(patches) == -(-w // p) * -(-h // p)
        covered = np.zeros((h, w), dtype=bool)
        for patch in patches:
            covered[patch.y:patch.y + p, patch.x:patch.x + p] = True
        assert covered.all()


class TestRandomPatches:
    def test_count_and_bounds(self):
        img = gray(400, 500)
        patches = random_patches(img, None, PatchSpec(224, random_count=100), 7)
        assert len(patches) == 100
        for p in patches:
            assert 0 <= p.x <= 500 - 224 and 0 <= p.y <= 400 - 224

    def test_same_seed_same_origins(self):
        img = gray(300, 300)
        a = random_patches(img, None, PatchSpec(224, random_count=20), 42)
        b = random_patches(img, None, PatchSpec(224, random_count=20), 42)
        assert [(p.x, p.y) for p in a] == [(p.x, p.y) for p in b]

    def test_single_valid_position(self):
        img = gray(224, 224)
        patches = random_patches(img, None, PatchSpec(224, random_count=1), 0)
        assert [(p.x, p.y) for p in patches] == [(0, 0)]


class TestOverlapGrid:
    def test_three_by_three(self):
        spec = PatchSpec(224, mode="overlap_grid", overlap=112)
        patches = overlap_grid_patches(gray(448, 448), spec)
        origins = sorted({p.x for p in patches})
        assert origins == [0, 112, 224]
        assert len(patches) == 9

    def test_paper_resolution_factor(self):
        spec = PatchSpec(224, mode="overlap_grid", overlap=112)
        patches = overlap_grid_patches(gray(3648, 5472), spec)
        assert len(patches) == 48 * 32
        adjacent = grid_patches(gray(3648, 5472), spec=PatchSpec(224))
        assert 3.5 <= len(patches) / len(adjacent) <= 4.0

    def test_zero_overlap_equals_grid(self):
        img = gray(300, 450)
        a = overlap_grid_patches(img, PatchSpec(64, mode="overlap_grid", overlap=0))
        b = grid_patches(img, spec=PatchSpec(64))
        assert [(p.x, p.y) for p in a] == [(p.x, p.y) for p in b]

    def test_default_overlap_is_half(self):
        assert PatchSpec(224, mode="overlap_grid").effective_overlap() == 112


class TestRecompose:
    def test_exact_mosaic(self):
        tiles = [(0, 0, np.full((2, 2), 0.25)), (2, 0, np.full((2, 2), 0.75))]
        pmap = recompose(tiles, 4, 2)
        assert (pmap.values[:, :2] == 0.25).all()
        assert (pmap.values[:, 2:] == 0.75).all()
        assert (pmap.coverage == 1).all()

    def test_two_tile_mean(self):
        tiles = [(0, 0, np.full((1, 1), 0.2)), (0, 0, np.full((1, 1), 0.6))]
        pmap = recompose(tiles, 1, 1)
        assert pmap.values[0, 0] == pytest.approx(0.4)
        assert pmap.coverage[0, 0] == 2

    def test_constant_tiles_stay_constant(self):
        img = gray(96, 160)
        spec = PatchSpec(64, mode="overlap_grid", overlap=32)
        tiles = [(p.x, p.y, np.full((64, 64), 0.9))
                 for p in overlap_grid_patches(img, spec)]
        pmap = recompose(tiles, 160, 96)
        assert np.allclose(pmap.values, 0.9)

    def test_uncovered_pixel_rejected(self):
        with pytest.raises(InvalidInputError, match="coverage"):
            recompose([(0, 0, np.zeros((2, 2)))], 4, 4)


class TestTilingIdentity:
    """Per-pixel functions pushed through tiling + recomposition must equal
    whole-image application."""

    @pytest.mark.parametrize("tiling", ["grid", "overlap"])
    def test_identity(self, tiling):
        rng = np.random.default_rng(5)
        for _ in range(10):
            h = int(rng.integers(64, 200))
            w = int(rng.integers(64, 200))
            img = rng.integers(0, 256, size=(h, w)).astype(np.uint8)
            # dyadic values (16-bit significands) keep the overlap means
            # IEEE-exact, so the comparison can be bitwise
            fn = lambda a: (a.astype(np.float64) / 256.0) ** 2
            if tiling == "grid":
                patches = grid_patches(img, spec=PatchSpec(64))
            else:
                patches = overlap_grid_patches(
                    img, PatchSpec(64, mode="overlap_grid", overlap=32))
            tiles = [(p.x, p.y, fn(p.image)) for p in patches]
            pmap = recompose(tiles, w, h)
            assert np.array_equal(pmap.values, fn(img))
