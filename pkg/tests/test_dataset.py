import pytest

from exactnn.dataset import (
    DatasetManifest,
    FaceImage,
    HAPPY,
    SAD,
    VARIANT_SPACE,
    _build_image,
    generate,
    happy_spec,
    load_manifest,
    manifest_from_document,
    manifest_to_document,
    save_manifest,
    smile_pixels,
    write_pgm,
)
from exactnn.matrix import Matrix


class TestTemplates:
    def test_canonical_smile_satisfies_spec(self):
        img = _build_image(1, 2, 5, 7, 1, HAPPY)
        assert happy_spec(img)

    def test_canonical_frown_violates_spec(self):
        img = _build_image(1, 2, 5, 7, 1, SAD)
        assert not happy_spec(img)

    def test_smile_has_diagonals_and_horizontal(self):
        pix = set(smile_pixels(7))
        assert {(0, 0), (1, 1)} <= pix          # left diagonal
        assert {(1, 5), (0, 6)} <= pix          # right diagonal
        assert {(2, 2), (2, 3), (2, 4)} <= pix  # connecting horizontal


class TestGenerate:
    def test_full_dataset(self):
        manifest = generate(seed=0, count=144)
        assert len(manifest.images) == 144
        assert manifest.counts == {HAPPY: 72, SAD: 72}
        bitsets = {img.bits() for img in manifest.images}
        assert len(bitsets) == 144

    def test_determinism(self):
        a = generate(seed=7, count=40)
        b = generate(seed=7, count=40)
        assert [img.bits() for img in a.images] == [img.bits() for img in b.images]
        c = generate(seed=8, count=40)
        assert [img.bits() for img in a.images] != [img.bits() for img in c.images]

    def test_labels_agree_with_spec(self):
        manifest = generate(seed=3, count=144)
        for img in manifest.images:
            assert (img.label == HAPPY) == happy_spec(img)

    def test_count_exceeds_variant_space(self):
        with pytest.raises(ValueError):
            generate(seed=0, count=VARIANT_SPACE + 1)

    def test_balanced_when_even(self):
        manifest = generate(seed=1, count=50)
        assert manifest.counts == {HAPPY: 25, SAD: 25}

    def test_binary_9x9(self):
        manifest = generate(seed=0, count=10)
        for img in manifest.images:
            assert img.pixels.shape == (9, 9)
            assert set(img.bits()) <= {0, 1}


class TestOnDisk:
    def test_manifest_round_trip(self, tmp_path):
        manifest = generate(seed=5, count=12)
        path = save_manifest(manifest, tmp_path / "d")
        loaded = load_manifest(path)
        assert loaded.seed == manifest.seed
        assert loaded.counts == manifest.counts
        assert [img.bits() for img in loaded.images] == [
            img.bits() for img in manifest.images
        ]
        assert [img.mouth_region for img in loaded.images] == [
            img.mouth_region for img in manifest.images
        ]

    def test_document_round_trip(self):
        manifest = generate(seed=5, count=6)
        again = manifest_from_document(manifest_to_document(manifest))
        assert [img.bits() for img in again.images] == [img.bits() for img in manifest.images]

    def test_pgm_dump(self, tmp_path):
        manifest = generate(seed=0, count=2)
        save_manifest(manifest, tmp_path / "d", pgm=True)
        files = sorted((tmp_path / "d").glob("*.pgm"))
        assert len(files) == 2
        text = files[0].read_text()
        assert text.startswith("P2\n9 9\n1\n")
        assert set(text.split()[4:]) <= {"0", "1"}


class TestFaceImageValidation:
    def test_rejects_non_binary(self):
        grid = [[0] * 9 for _ in range(9)]
        grid[0][0] = 2
        with pytest.raises(ValueError):
            FaceImage(
                pixels=Matrix.from_rows(grid), label=HAPPY, mouth_region=((5, 3), (1, 7))
            )

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            FaceImage(
                pixels=Matrix.zeros(8, 9), label=HAPPY, mouth_region=((5, 3), (1, 7))
            )

    def test_rejects_out_of_bounds_mouth(self):
        with pytest.raises(ValueError):
            FaceImage(
                pixels=Matrix.zeros(9, 9), label=SAD, mouth_region=((7, 3), (1, 7))
            )
