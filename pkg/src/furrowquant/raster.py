"""Frame and mask rasters, image I/O, and ordered frame-sequence ingestion.

Frames are 8-bit RGB images (PNG or binary PPM in, PNG out). Masks are 8-bit
single-channel PNGs whose pixel values are raw class ids, not palette colors.
All raster types are immutable after construction: the backing numpy arrays
are marked read-only so instances can be shared freely across threads.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import MaskClassError, RasterError, SequenceError

logger = logging.getLogger(__name__)

DEFAULT_CLASS_NAMES = ("background", "soil", "straw")

FRAME_SUFFIXES = {".png", ".ppm"}
MASK_SUFFIXES = {".png"}


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ClassScheme:
    """Ordered class labels; position in `names` is the class id."""

    names: tuple[str, ...] = DEFAULT_CLASS_NAMES

    def __post_init__(self):
        if len(self.names) < 2:
            raise RasterError("a class scheme needs at least 2 classes")
        if any(not n for n in self.names):
            raise RasterError("class names must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise RasterError(f"class names must be unique, got {self.names}")
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def class_count(self) -> int:
        return len(self.names)

    def id_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise RasterError(f"scheme has no class named {name!r}") from None

    @classmethod
    def default(cls) -> "ClassScheme":
        return cls(DEFAULT_CLASS_NAMES)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ClassScheme":
        """Load a scheme from a JSON document with an ordered `classes` array."""
        import json

        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise RasterError(f"cannot read scheme file {path}: {exc}") from exc
        classes = doc.get("classes") if isinstance(doc, dict) else None
        if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
            raise RasterError(f"scheme file {path} must contain a `classes` string array")
        return cls(tuple(classes))


@dataclass(frozen=True)
class RgbFrame:
    """8-bit RGB raster, row-major (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise RasterError(f"frame pixels must be uint8 (H, W, 3), got {p.dtype} {p.shape}")
        if p.shape[0] == 0 or p.shape[1] == 0:
            raise RasterError(f"frame dimensions must be positive, got {p.shape[1]}x{p.shape[0]}")
        object.__setattr__(self, "pixels", _frozen(p))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class LabelMask:
    """Per-pixel class ids, row-major (height, width)."""

    labels: np.ndarray

    def __post_init__(self):
        a = self.labels
        if a.ndim != 2 or a.dtype != np.uint8:
            raise RasterError(f"mask labels must be uint8 (H, W), got {a.dtype} {a.shape}")
        object.__setattr__(self, "labels", _frozen(a))

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def pixel_count(self) -> int:
        return self.labels.size


def validate_mask(mask: LabelMask, scheme: ClassScheme) -> LabelMask:
    """Check every label against the scheme; identify the first offender."""
    labels = mask.labels
    if labels.size and int(labels.max()) >= scheme.class_count:
        flat = labels.ravel()
        bad = int(np.argmax(flat >= scheme.class_count))
        raise MaskClassError(int(flat[bad]), bad, scheme.class_count)
    return mask


def _open_image(path: str | Path) -> Image.Image:
    path = Path(path)
    if not path.is_file():
        raise RasterError(f"no such image file: {path}")
    try:
        img = Image.open(path)
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise RasterError(f"cannot decode {path}: {exc}") from exc
    return img


def load_frame(path: str | Path) -> RgbFrame:
    """Load an 8-bit RGB frame from a PNG or binary PPM file, losslessly."""
    img = _open_image(path)
    if img.mode != "RGB":
        raise RasterError(f"{path}: expected an 8-bit RGB image, got mode {img.mode!r}")
    return RgbFrame(np.asarray(img, dtype=np.uint8))


def save_frame(frame: RgbFrame, path: str | Path) -> None:
    Image.fromarray(frame.pixels, mode="RGB").save(Path(path), format="PNG")


def load_mask(path: str | Path, scheme: ClassScheme) -> LabelMask:
    """Load a mask PNG (8-bit grayscale, pixel value = class id) and validate it."""
    img = _open_image(path)
    if img.mode != "L":
        raise RasterError(f"{path}: expected an 8-bit single-channel mask, got mode {img.mode!r}")
    return validate_mask(LabelMask(np.asarray(img, dtype=np.uint8)), scheme)


def save_mask(mask: LabelMask, path: str | Path) -> None:
    Image.fromarray(mask.labels, mode="L").save(Path(path), format="PNG")


@dataclass(frozen=True)
class SequenceEntry:
    stem: str
    frame_path: Path
    mask_path: Path | None = None


@dataclass(frozen=True)
class FrameSequence:
    """Frame files (optionally paired with masks) in strict stem order."""

    entries: tuple[SequenceEntry, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def scan_sequence(frames_dir: str | Path, masks_dir: str | Path | None = None) -> FrameSequence:
    """Enumerate frames (and same-stem masks) sorted lexicographically by stem.

    Frames without a matching mask are kept but logged, with mask_path None.
    """
    frames_dir = Path(frames_dir)
    if not frames_dir.is_dir():
        raise SequenceError(f"frames directory does not exist: {frames_dir}")

    frames: dict[str, Path] = {}
    for path in sorted(frames_dir.iterdir()):
        if not path.is_file() or path.suffix.lower() not in FRAME_SUFFIXES:
            continue
        if path.stem in frames:
            raise SequenceError(f"duplicate frame stem {path.stem!r}: {frames[path.stem].name} and {path.name}")
        frames[path.stem] = path
    if not frames:
        raise SequenceError(f"no frames found in {frames_dir}")

    masks: dict[str, Path] = {}
    if masks_dir is not None:
        masks_dir = Path(masks_dir)
        if not masks_dir.is_dir():
            raise SequenceError(f"masks directory does not exist: {masks_dir}")
        for path in sorted(masks_dir.iterdir()):
            if path.is_file() and path.suffix.lower() in MASK_SUFFIXES:
                masks[path.stem] = path

    entries = []
    unmatched = []
    for stem in sorted(frames):
        mask_path = masks.get(stem)
        if masks_dir is not None and mask_path is None:
            unmatched.append(stem)
        entries.append(SequenceEntry(stem, frames[stem], mask_path))
    if unmatched:
        logger.warning("frames without masks: %s", ", ".join(unmatched))
    return FrameSequence(tuple(entries))
