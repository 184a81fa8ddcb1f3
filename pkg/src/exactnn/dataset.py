"""Procedural 9x9 binary face dataset and the human smile specification.

The family is parametrised by eye placement (row 1 or 2, inset 1..3) and
mouth placement (top row 5 or 6, width 5 or 7, column offset 0..2), which
yields 72 distinct configurations per label and 144 unique images total.

A smile occupies a 3-row mouth region of width w: a left diagonal falling
from the region's top-left corner, a horizontal run along the bottom row,
and a mirrored right diagonal rising to the top-right corner::

    X.....X        X...X
    .X...X.        .X.X.      (widths 7 and 5)
    ..XXX..        ..X..

A frown is the vertical mirror of the same shape. ``happy_spec`` holds iff
the smile template's pixels are all set inside the image's mouth region.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .matrix import Matrix

HAPPY = "happy"
SAD = "sad"
LABELS = (HAPPY, SAD)

IMAGE_SIZE = 9
MOUTH_HEIGHT = 3

EYE_ROWS = (1, 2)
EYE_INSETS = (1, 2, 3)
MOUTH_TOP_ROWS = (5, 6)
MOUTH_WIDTHS = (5, 7)
MOUTH_OFFSETS = (0, 1, 2)

# Distinct (eyes x mouth placement) configurations per label.
CONFIGS_PER_LABEL = (
    len(EYE_ROWS) * len(EYE_INSETS) * len(MOUTH_TOP_ROWS) * len(MOUTH_WIDTHS) * len(MOUTH_OFFSETS)
)
VARIANT_SPACE = 2 * CONFIGS_PER_LABEL  # 144


@dataclass(frozen=True)
class FaceImage:
    """9x9 binary image with its label and mouth region (row span, col span)."""

    pixels: Matrix
    label: str
    mouth_region: tuple  # ((row_start, height), (col_start, width))

    def __post_init__(self):
        if self.pixels.shape != (IMAGE_SIZE, IMAGE_SIZE):
            raise ValueError(f"pixels must be 9x9, got {self.pixels.shape}")
        if self.label not in LABELS:
            raise ValueError(f"unknown label: {self.label!r}")
        (r0, h), (c0, w) = self.mouth_region
        if not (0 <= r0 and r0 + h <= IMAGE_SIZE and 0 <= c0 and c0 + w <= IMAGE_SIZE):
            raise ValueError(f"mouth region out of bounds: {self.mouth_region}")
        for i in range(IMAGE_SIZE):
            for v in self.pixels.row(i):
                if v not in (0, 1):
                    raise ValueError(f"non-binary pixel: {v!r}")

    def bits(self) -> tuple:
        return tuple(v for i in range(IMAGE_SIZE) for v in self.pixels.row(i))


@dataclass(frozen=True)
class DatasetManifest:
    seed: int
    images: tuple
    counts: dict

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))


def smile_pixels(width: int) -> list:
    """Template offsets (row, col) within a 3 x width mouth region."""
    left = [(0, 0), (1, 1)]
    horizontal = [(2, j) for j in range(2, width - 2)]
    right = [(1, width - 2), (0, width - 1)]
    return left + horizontal + right


def frown_pixels(width: int) -> list:
    return [(MOUTH_HEIGHT - 1 - r, c) for r, c in smile_pixels(width)]


def _build_image(eye_row, eye_inset, mouth_row, width, offset, label) -> FaceImage:
    grid = [[0] * IMAGE_SIZE for _ in range(IMAGE_SIZE)]
    grid[eye_row][eye_inset] = 1
    grid[eye_row][IMAGE_SIZE - 1 - eye_inset] = 1
    template = smile_pixels(width) if label == HAPPY else frown_pixels(width)
    for r, c in template:
        grid[mouth_row + r][offset + c] = 1
    return FaceImage(
        pixels=Matrix.from_rows(grid),
        label=label,
        mouth_region=((mouth_row, MOUTH_HEIGHT), (offset, width)),
    )


def _all_configs() -> list:
    return [
        (er, ei, mr, w, off)
        for er in EYE_ROWS
        for ei in EYE_INSETS
        for mr in MOUTH_TOP_ROWS
        for w in MOUTH_WIDTHS
        for off in MOUTH_OFFSETS
    ]


def happy_spec(img: FaceImage) -> bool:
    """True iff the smile template's pixels are all set in the mouth region."""
    (r0, h), (c0, w) = img.mouth_region
    if h != MOUTH_HEIGHT or w < 5:
        return False
    return all(img.pixels.get(r0 + r, c0 + c) == 1 for r, c in smile_pixels(w))


def generate(seed: int, count: int) -> DatasetManifest:
    """Deterministic manifest of ``count`` unique images, balanced when even.

    Happy images satisfy :func:`happy_spec` by construction and sad images
    violate it; the order interleaves the two shuffled pools.
    """
    if count < 0 or count > VARIANT_SPACE:
        raise ValueError(f"count must be within [0, {VARIANT_SPACE}]: {count}")
    rng = random.Random(seed)
    configs = _all_configs()
    happy_pool = [_build_image(*cfg, HAPPY) for cfg in configs]
    sad_pool = [_build_image(*cfg, SAD) for cfg in configs]
    rng.shuffle(happy_pool)
    rng.shuffle(sad_pool)
    n_happy = (count + 1) // 2
    n_sad = count // 2
    images = []
    for k in range(max(n_happy, n_sad)):
        if k < n_happy:
            images.append(happy_pool[k])
        if k < n_sad:
            images.append(sad_pool[k])
    return DatasetManifest(
        seed=seed,
        images=tuple(images),
        counts={HAPPY: n_happy, SAD: n_sad},
    )


# -- on-disk form -----------------------------------------------------------


def manifest_to_document(manifest: DatasetManifest) -> dict:
    return {
        "seed": manifest.seed,
        "counts": {k: manifest.counts[k] for k in LABELS},
        "images": [
            {
                "label": img.label,
                "mouth_region": [list(img.mouth_region[0]), list(img.mouth_region[1])],
                "pixels": img.pixels.to_rows(),
            }
            for img in manifest.images
        ],
    }


def manifest_from_document(doc: dict) -> DatasetManifest:
    images = []
    for entry in doc["images"]:
        (r0, h), (c0, w) = entry["mouth_region"]
        images.append(
            FaceImage(
                pixels=Matrix.from_rows(entry["pixels"]),
                label=entry["label"],
                mouth_region=((r0, h), (c0, w)),
            )
        )
    return DatasetManifest(seed=doc["seed"], images=tuple(images), counts=dict(doc["counts"]))


def save_manifest(manifest: DatasetManifest, directory, pgm: bool = False) -> Path:
    """Write manifest.json (and optional P2 PGM dumps) under ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest_to_document(manifest), fh, indent=1)
        fh.write("\n")
    if pgm:
        for idx, img in enumerate(manifest.images):
            write_pgm(img, directory / f"{idx:03d}_{img.label}.pgm")
    return path


def load_manifest(path) -> DatasetManifest:
    with open(path, "r", encoding="utf-8") as fh:
        return manifest_from_document(json.load(fh))


def write_pgm(img: FaceImage, path) -> None:
    lines = ["P2", f"{IMAGE_SIZE} {IMAGE_SIZE}", "1"]
    lines += [" ".join(str(v) for v in img.pixels.row(i)) for i in range(IMAGE_SIZE)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
