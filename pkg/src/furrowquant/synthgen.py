"""Synthetic trench scenes with exact ground-truth masks, plus dataset utilities.

A scene is soil with random straw strokes and an optional machinery band at the
top. Generation is a pure function of (params, seed) using numpy's PCG64
generator, so reruns are byte-identical on one platform. Achieved class
fractions are always recounted from the emitted mask, never taken from the
drawing plan.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import SceneError
from .raster import ClassScheme, LabelMask, RgbFrame, save_frame, save_mask
from .util import atomic_write_text

BACKGROUND_ID, SOIL_ID, STRAW_ID = 0, 1, 2

SOIL_RGB = (101, 67, 33)
STRAW_RGB = (218, 190, 112)
MACHINERY_RGB = (60, 60, 60)

STROKE_WIDTH_RANGE = (2, 6)  # px, inclusive
STROKE_LENGTH_RANGE = (20, 120)  # px, inclusive
OVERSHOOT_TOLERANCE = 0.01  # absolute fraction
_MAX_STALLED_STROKES = 10_000


@dataclass(frozen=True)
class SceneParams:
    width: int = 512
    height: int = 512
    target_straw_fraction: float = 0.0
    machinery_band_rows: int = 0
    noise_amplitude: int = 15
    soil_rgb: tuple[int, int, int] = SOIL_RGB
    straw_rgb: tuple[int, int, int] = STRAW_RGB
    machinery_rgb: tuple[int, int, int] = MACHINERY_RGB

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise SceneError(f"scene dimensions must be positive, got {self.width}x{self.height}")
        if not 0.0 <= self.target_straw_fraction <= 1.0:
            raise SceneError(f"target straw fraction {self.target_straw_fraction} out of [0, 1]")
        if not 0 <= self.machinery_band_rows < self.height:
            raise SceneError(
                f"machinery band of {self.machinery_band_rows} rows does not fit "
                f"a height of {self.height}"
            )
        if not 0 <= self.noise_amplitude <= 255:
            raise SceneError(f"noise amplitude {self.noise_amplitude} out of [0, 255]")
        if self.target_straw_fraction + self.machinery_band_rows / self.height > 1.0:
            raise SceneError(
                "unreachable straw target: machinery band leaves too little soil "
                f"(target {self.target_straw_fraction}, band rows {self.machinery_band_rows})"
            )


@dataclass(frozen=True)
class SceneMeta:
    """Seed and exact achieved composition, recounted from the emitted mask."""

    seed: int
    class_counts: tuple[int, int, int]  # background, soil, straw
    total_pixels: int

    @property
    def fractions(self) -> tuple[float, float, float]:
        return tuple(c / self.total_pixels for c in self.class_counts)

    @property
    def straw_fraction(self) -> float:
        return self.class_counts[STRAW_ID] / self.total_pixels


def generate_scene(params: SceneParams, seed: int) -> tuple[RgbFrame, LabelMask, SceneMeta]:
    """Deterministically render one scene and its ground-truth mask.

    Straw strokes (rotated rectangles) are added until the mask's straw
    fraction reaches the target, stopping before the first stroke that would
    overshoot it by more than 1% absolute.
    """
    width, height, band = params.width, params.height, params.machinery_band_rows
    total = width * height
    rng = np.random.default_rng(seed)

    mask = np.full((height, width), SOIL_ID, dtype=np.uint8)
    image = np.empty((height, width, 3), dtype=np.uint8)
    image[:, :] = params.soil_rgb
    if band:
        mask[:band] = BACKGROUND_ID
        image[:band] = params.machinery_rgb

    sr, sg, sb = params.straw_rgb
    straw_px = 0
    stalled = 0
    while straw_px / total < params.target_straw_fraction:
        cx = float(rng.integers(0, width))
        cy = float(rng.integers(band, height))
        angle = rng.uniform(0.0, math.pi)
        half_wid = int(rng.integers(STROKE_WIDTH_RANGE[0], STROKE_WIDTH_RANGE[1] + 1)) / 2.0
        half_len = int(rng.integers(STROKE_LENGTH_RANGE[0], STROKE_LENGTH_RANGE[1] + 1)) / 2.0
        cos_a, sin_a = math.cos(angle), math.sin(angle)
        added = kernels.paint_stroke(
            mask, image, cx, cy, cos_a, sin_a, half_len, half_wid,
            band, STRAW_ID, sr, sg, sb, False,
        )
        if (straw_px + added) / total > params.target_straw_fraction + OVERSHOOT_TOLERANCE:
            break
        if added:
            kernels.paint_stroke(
                mask, image, cx, cy, cos_a, sin_a, half_len, half_wid,
                band, STRAW_ID, sr, sg, sb, True,
            )
            straw_px += added
            stalled = 0
        else:
            stalled += 1
            if stalled > _MAX_STALLED_STROKES:
                raise SceneError(
                    f"straw target {params.target_straw_fraction} unreachable: "
                    f"stuck at fraction {straw_px / total:.4f}"
                )

    if params.noise_amplitude:
        amp = params.noise_amplitude
        noise = rng.integers(-amp, amp + 1, size=(height, width, 3), dtype=np.int16)
        image = np.clip(image.astype(np.int16) + noise, 0, 255).astype(np.uint8)

    counts = kernels.label_counts(mask, 3)
    meta = SceneMeta(seed, (int(counts[0]), int(counts[1]), int(counts[2])), total)
    return RgbFrame(image), LabelMask(mask), meta


@dataclass(frozen=True)
class Manifest:
    """Index of a generated dataset: stems, seeds, and achieved class fractions."""

    stems: tuple[str, ...]
    seeds: tuple[int, ...]
    fractions: tuple[dict[str, float], ...]  # keyed by class name

    def __len__(self) -> int:
        return len(self.stems)

    def to_json(self) -> str:
        doc = {
            "stems": list(self.stems),
            "seeds": list(self.seeds),
            "fractions": list(self.fractions),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Manifest":
        try:
            doc = json.loads(text)
            stems = tuple(doc["stems"])
            seeds = tuple(int(s) for s in doc["seeds"])
            fractions = tuple(dict(f) for f in doc["fractions"])
        except (ValueError, KeyError, TypeError) as exc:
            raise SceneError(f"malformed manifest: {exc}") from exc
        if not (len(stems) == len(seeds) == len(fractions)):
            raise SceneError("malformed manifest: stems/seeds/fractions lengths differ")
        return cls(stems, seeds, fractions)


def load_manifest(path: str | Path) -> Manifest:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneError(f"cannot read manifest {path}: {exc}") from exc
    return Manifest.from_json(text)


def generate_dataset(
    n: int, params: SceneParams, base_seed: int, out_dir: str | Path
) -> Manifest:
    """Render n scenes (seeds base_seed..base_seed+n-1) into out_dir.

    Layout: frames/<stem>.png and masks/<stem>.png share the stem
    frame_%05d so directory scans pair them, plus manifest.json.
    """
    if n < 1:
        raise SceneError(f"dataset size must be >= 1, got {n}")
    out_dir = Path(out_dir)
    frames_dir = out_dir / "frames"
    masks_dir = out_dir / "masks"
    try:
        frames_dir.mkdir(parents=True, exist_ok=True)
        masks_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SceneError(f"cannot create dataset directory {out_dir}: {exc}") from exc

    names = ClassScheme.default().names
    stems, seeds, fractions = [], [], []
    for i in range(n):
        seed = base_seed + i
        stem = f"frame_{i:05d}"
        frame, mask, meta = generate_scene(params, seed)
        save_frame(frame, frames_dir / f"{stem}.png")
        save_mask(mask, masks_dir / f"{stem}.png")
        stems.append(stem)
        seeds.append(seed)
        fractions.append({name: frac for name, frac in zip(names, meta.fractions)})

    manifest = Manifest(tuple(stems), tuple(seeds), tuple(fractions))
    atomic_write_text(out_dir / "manifest.json", manifest.to_json())
    return manifest


def split_dataset(manifest: Manifest, ratio: float, seed: int) -> tuple[list[str], list[str]]:
    """Seeded shuffle, then first ceil(ratio*n) stems to train, rest to validation."""
    if not 0.0 < ratio < 1.0:
        raise SceneError(f"split ratio must be in (0, 1), got {ratio}")
    if len(manifest) == 0:
        raise SceneError("cannot split an empty manifest")
    stems = list(manifest.stems)
    random.Random(seed).shuffle(stems)
    cut = math.ceil(ratio * len(stems))
    return stems[:cut], stems[cut:]


_GEOMETRIC = {"rotate90": 1, "rotate180": 2, "rotate270": 3}


def augment(frame: RgbFrame, mask: LabelMask, transform: str) -> tuple[RgbFrame, LabelMask]:
    """Apply one named transform to a frame/mask pair.

    Geometric transforms (`rotate90|rotate180|rotate270|flip_h|flip_v|scale:F`)
    move frame and mask pixels identically, masks via nearest neighbor so class
    ids survive untouched. Photometric transforms (`brightness:D|contrast:G`)
    alter only the frame, clamped to [0, 255].
    """
    name, _, arg = transform.partition(":")
    px, lb = frame.pixels, mask.labels

    if name in _GEOMETRIC:
        k = _GEOMETRIC[name]
        return RgbFrame(np.rot90(px, k)), LabelMask(np.rot90(lb, k))
    if name == "flip_h":
        return RgbFrame(np.fliplr(px)), LabelMask(np.fliplr(lb))
    if name == "flip_v":
        return RgbFrame(np.flipud(px)), LabelMask(np.flipud(lb))
    if name == "scale":
        factor = _float_arg(transform, arg)
        if factor <= 0.0:
            raise SceneError(f"scale factor must be positive, got {factor}")
        new_h = max(1, round(frame.height * factor))
        new_w = max(1, round(frame.width * factor))
        # integer nearest-neighbor index maps, identical for frame and mask
        ys = np.arange(new_h) * frame.height // new_h
        xs = np.arange(new_w) * frame.width // new_w
        return RgbFrame(px[ys][:, xs]), LabelMask(lb[ys][:, xs])
    if name == "brightness":
        delta = int(_float_arg(transform, arg))
        out = np.clip(px.astype(np.int16) + delta, 0, 255).astype(np.uint8)
        return RgbFrame(out), mask
    if name == "contrast":
        gain = _float_arg(transform, arg)
        out = np.clip(np.rint((px.astype(np.float64) - 128.0) * gain + 128.0), 0, 255)
        return RgbFrame(out.astype(np.uint8)), mask
    raise SceneError(f"unknown transform {transform!r}")


def _float_arg(transform: str, arg: str) -> float:
    try:
        return float(arg)
    except ValueError:
        raise SceneError(f"transform {transform!r} needs a numeric argument") from None
