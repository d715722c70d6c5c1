import pytest

from vineseg.manifest import (DatasetManifest, ImageRecord, ManifestError,
                              load_manifest, save_manifest)


def record(i, split="train", mask="m.png"):
    return ImageRecord(image_id=f"img{i}", image=f"images/img{i}.png",
                       split=split, mask=mask)


class TestValidate:
    def test_duplicate_id_rejected(self):
        m = DatasetManifest(name="d", records=[record(1), record(1)])
        with pytest.raises(ManifestError, match="duplicate"):
            m.validate()

    def test_unknown_split_rejected(self):
        m = DatasetManifest(name="d", records=[record(1, split="validation")])
        with pytest.raises(ManifestError, match="split"):
            m.validate()

    def test_train_needs_ground_truth(self):
        m = DatasetManifest(name="d", records=[record(1, mask="")])
        with pytest.raises(ManifestError, match="ground truth"):
            m.validate()

    def test_test_split_without_truth_ok(self):
        m = DatasetManifest(name="d", records=[record(1, split="test", mask="")])
        m.validate()


class TestRoundtrip:
    def test_save_load(self, tmp_path):
        m = DatasetManifest(
            name="demo",
            params={"radius": 4.0, "tolerance": 9.0},
            records=[record(1), record(2, split="eval"),
                     record(3, split="test", mask="")],
            root=tmp_path)
        path = tmp_path / "manifest.json"
        save_manifest(m, path)
        loaded = load_manifest(path)
        assert loaded.name == "demo"
        assert loaded.params["tolerance"] == 9.0
        assert [r.image_id for r in loaded.records] == ["img1", "img2", "img3"]
        assert [r.image_id for r in loaded.split("eval")] == ["img2"]
        assert loaded.root == tmp_path
        assert loaded.path("images/img1.png") == tmp_path / "images/img1.png"

    def test_invalid_saved_manifest_rejected_on_load(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"name": "x", "images": ['
                        '{"id": "a", "image": "a.png", "split": "train"}]}')
        with pytest.raises(ManifestError):
            load_manifest(path)
