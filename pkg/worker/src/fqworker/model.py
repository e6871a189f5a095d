"""ONNX model mode: run an exported inference graph and emit per-pixel argmax labels.

The worker resizes each request to the model's expected input shape (bilinear),
normalizes it per a sidecar JSON next to the model file, runs the graph,
arg-maxes the class scores per pixel, and resizes the label map back to the
request size via nearest neighbor.

Sidecar `<model>.json` keys (all optional): `mean` and `std`, each a 3-list
applied per channel after scaling pixel values to [0, 1].
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image


class ModelError(Exception):
    """Model loading or inference failed."""


def load_sidecar(model_path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Normalization constants for the model; identity when no sidecar exists."""
    sidecar = Path(model_path).with_suffix(".json")
    mean, std = [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]
    if sidecar.is_file():
        try:
            doc = json.loads(sidecar.read_text(encoding="utf-8"))
            mean = [float(v) for v in doc.get("mean", mean)]
            std = [float(v) for v in doc.get("std", std)]
        except (ValueError, TypeError) as exc:
            raise ModelError(f"malformed sidecar {sidecar}: {exc}") from exc
        if len(mean) != 3 or len(std) != 3 or any(s == 0.0 for s in std):
            raise ModelError(f"sidecar {sidecar} needs 3-channel mean/std with nonzero std")
    return np.asarray(mean, dtype=np.float32), np.asarray(std, dtype=np.float32)


def preprocess(rgb: np.ndarray, size: tuple[int, int], mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    """uint8 (H, W, 3) -> normalized float32 NCHW batch of one at `size` = (h, w)."""
    h, w = size
    if (rgb.shape[0], rgb.shape[1]) != (h, w):
        rgb = np.asarray(Image.fromarray(rgb, mode="RGB").resize((w, h), Image.BILINEAR))
    scaled = rgb.astype(np.float32) / 255.0
    normalized = (scaled - mean) / std
    return normalized.transpose(2, 0, 1)[None, ...]


def labels_from_scores(scores: np.ndarray, out_size: tuple[int, int]) -> np.ndarray:
    """(1, C, h, w) class scores -> (H, W) uint8 argmax labels at out_size."""
    if scores.ndim != 4 or scores.shape[0] != 1:
        raise ModelError(f"expected (1, C, h, w) model output, got {scores.shape}")
    labels = scores[0].argmax(axis=0).astype(np.uint8)
    out_h, out_w = out_size
    if labels.shape != (out_h, out_w):
        labels = np.asarray(Image.fromarray(labels, mode="L").resize((out_w, out_h), Image.NEAREST))
    return labels


class OnnxSegmenter:
    """Wraps one onnxruntime session; safe for concurrent read-only use."""

    def __init__(self, model_path: str | Path, class_count: int):
        try:
            import onnxruntime
        except ImportError as exc:
            raise ModelError(
                "model mode requires the onnxruntime package (install the "
                "`model` extra); threshold mode needs no model runtime"
            ) from exc
        model_path = Path(model_path)
        if not model_path.is_file():
            raise ModelError(f"model file does not exist: {model_path}")
        try:
            self.session = onnxruntime.InferenceSession(
                str(model_path), providers=["CPUExecutionProvider"]
            )
        except Exception as exc:
            raise ModelError(f"cannot load {model_path}: {exc}") from exc

        spec = self.session.get_inputs()[0]
        if len(spec.shape) != 4:
            raise ModelError(f"expected NCHW model input, got shape {spec.shape}")
        self.input_name = spec.name
        # dynamic axes fall back to the request's own size
        self.fixed_h = spec.shape[2] if isinstance(spec.shape[2], int) else None
        self.fixed_w = spec.shape[3] if isinstance(spec.shape[3], int) else None
        self.class_count = class_count
        self.mean, self.std = load_sidecar(model_path)

    def segment(self, rgb: np.ndarray) -> np.ndarray:
        in_h = self.fixed_h or rgb.shape[0]
        in_w = self.fixed_w or rgb.shape[1]
        batch = preprocess(rgb, (in_h, in_w), self.mean, self.std)
        try:
            scores = self.session.run(None, {self.input_name: batch})[0]
        except Exception as exc:
            raise ModelError(f"inference failed: {exc}") from exc
        if scores.shape[1] != self.class_count:
            raise ModelError(
                f"model emits {scores.shape[1]} classes, worker configured for {self.class_count}"
            )
        return labels_from_scores(np.asarray(scores), (rgb.shape[0], rgb.shape[1]))
