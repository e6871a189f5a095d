"""Hot per-pixel kernels: numba-jitted versions with pure-numpy fallbacks.

The jitted path is used when numba imports cleanly and the environment
variable FURROWQUANT_NO_NUMBA is unset/empty; otherwise the numpy
implementations are selected. Both paths are kept importable so tests and
benchmarks/bench_kernels.py can compare them; they must produce
byte-identical outputs (same IEEE-754 operations in the same order).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    HAS_NUMBA = False

_USE_NUMBA = HAS_NUMBA and not os.environ.get("FURROWQUANT_NO_NUMBA")


# ---------------------------------------------------------------------------
# numpy implementations (always available)
# ---------------------------------------------------------------------------

def label_counts_np(labels: np.ndarray, class_count: int) -> np.ndarray:
    """Per-class pixel counts, int64, length class_count."""
    return np.bincount(labels.ravel(), minlength=class_count).astype(np.int64)


def confusion_tally_np(gt: np.ndarray, pred: np.ndarray, class_count: int) -> np.ndarray:
    """C x C pixel tally with rows = ground truth, columns = prediction."""
    joint = gt.ravel().astype(np.int64) * class_count + pred.ravel().astype(np.int64)
    return np.bincount(joint, minlength=class_count * class_count).reshape(
        class_count, class_count
    )


def hsv_classify_np(
    rgb: np.ndarray,
    straw_lo: float,
    straw_hi: float,
    straw_min_value: float,
    soil_lo: float,
    soil_hi: float,
    soil_min_saturation: float,
    straw_id: int,
    soil_id: int,
    background_id: int,
) -> np.ndarray:
    """Classify (N, 3) uint8 RGB rows into straw / soil / background ids.

    Hue is in degrees [0, 360); saturation and value are on the 0-255 scale.
    Straw wins over soil where the hue intervals overlap.
    """
    r = rgb[:, 0].astype(np.float64)
    g = rgb[:, 1].astype(np.float64)
    b = rgb[:, 2].astype(np.float64)
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = mx - mn

    safe_delta = np.where(delta == 0.0, 1.0, delta)
    h = np.select(
        [delta == 0.0, mx == r, mx == g],
        [0.0, (60.0 * (g - b) / safe_delta) % 360.0, 60.0 * (b - r) / safe_delta + 120.0],
        default=60.0 * (r - g) / safe_delta + 240.0,
    )
    s = np.where(mx == 0.0, 0.0, 255.0 * delta / np.where(mx == 0.0, 1.0, mx))
    v = mx

    def hue_in(lo, hi):
        if lo <= hi:
            return (h >= lo) & (h <= hi)
        return (h >= lo) | (h <= hi)

    out = np.full(rgb.shape[0], background_id, dtype=np.uint8)
    soil_sel = hue_in(soil_lo, soil_hi) & (s >= soil_min_saturation)
    out[soil_sel] = soil_id
    straw_sel = hue_in(straw_lo, straw_hi) & (v >= straw_min_value)
    out[straw_sel] = straw_id
    return out


def paint_stroke_np(
    mask: np.ndarray,
    image: np.ndarray,
    cx: float,
    cy: float,
    cos_a: float,
    sin_a: float,
    half_len: float,
    half_wid: float,
    row_min: int,
    class_id: int,
    cr: int,
    cg: int,
    cb: int,
    apply: bool,
) -> int:
    """Rasterize a rotated rectangle stroke; returns newly covered pixel count.

    Pixels above row_min are never touched. With apply=False only counts.
    """
    height, width = mask.shape
    reach = half_len + half_wid + 1.0
    x0 = max(0, int(np.floor(cx - reach)))
    x1 = min(width - 1, int(np.ceil(cx + reach)))
    y0 = max(row_min, int(np.floor(cy - reach)))
    y1 = min(height - 1, int(np.ceil(cy + reach)))
    if x0 > x1 or y0 > y1:
        return 0

    ys = np.arange(y0, y1 + 1, dtype=np.float64) - cy
    xs = np.arange(x0, x1 + 1, dtype=np.float64) - cx
    dy = ys[:, None]
    dx = xs[None, :]
    along = dx * cos_a + dy * sin_a
    across = -dx * sin_a + dy * cos_a
    inside = (np.abs(along) <= half_len) & (np.abs(across) <= half_wid)

    window = mask[y0 : y1 + 1, x0 : x1 + 1]
    fresh = inside & (window != class_id)
    added = int(np.count_nonzero(fresh))
    if apply and added:
        window[fresh] = class_id
        img_window = image[y0 : y1 + 1, x0 : x1 + 1]
        img_window[fresh] = (cr, cg, cb)
    return added


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def label_counts_nb(labels, class_count):
        counts = np.zeros(class_count, dtype=np.int64)
        flat = labels.ravel()
        for i in range(flat.size):
            counts[flat[i]] += 1
        return counts

    @njit(cache=True)
    def confusion_tally_nb(gt, pred, class_count):
        counts = np.zeros((class_count, class_count), dtype=np.int64)
        g = gt.ravel()
        p = pred.ravel()
        for i in range(g.size):
            counts[g[i], p[i]] += 1
        return counts

    @njit(cache=True)
    def hsv_classify_nb(
        rgb,
        straw_lo,
        straw_hi,
        straw_min_value,
        soil_lo,
        soil_hi,
        soil_min_saturation,
        straw_id,
        soil_id,
        background_id,
    ):
        n = rgb.shape[0]
        out = np.empty(n, dtype=np.uint8)
        for i in range(n):
            r = np.float64(rgb[i, 0])
            g = np.float64(rgb[i, 1])
            b = np.float64(rgb[i, 2])
            mx = max(r, g, b)
            mn = min(r, g, b)
            delta = mx - mn
            if delta == 0.0:
                h = 0.0
            elif mx == r:
                h = (60.0 * (g - b) / delta) % 360.0
            elif mx == g:
                h = 60.0 * (b - r) / delta + 120.0
            else:
                h = 60.0 * (r - g) / delta + 240.0
            s = 0.0 if mx == 0.0 else 255.0 * delta / mx
            v = mx

            if straw_lo <= straw_hi:
                in_straw = straw_lo <= h <= straw_hi
            else:
                in_straw = h >= straw_lo or h <= straw_hi
            if soil_lo <= soil_hi:
                in_soil = soil_lo <= h <= soil_hi
            else:
                in_soil = h >= soil_lo or h <= soil_hi

            if in_straw and v >= straw_min_value:
                out[i] = straw_id
            elif in_soil and s >= soil_min_saturation:
                out[i] = soil_id
            else:
                out[i] = background_id
        return out

    @njit(cache=True)
    def paint_stroke_nb(
        mask,
        image,
        cx,
        cy,
        cos_a,
        sin_a,
        half_len,
        half_wid,
        row_min,
        class_id,
        cr,
        cg,
        cb,
        apply,
    ):
        height, width = mask.shape
        reach = half_len + half_wid + 1.0
        x0 = max(0, int(np.floor(cx - reach)))
        x1 = min(width - 1, int(np.ceil(cx + reach)))
        y0 = max(row_min, int(np.floor(cy - reach)))
        y1 = min(height - 1, int(np.ceil(cy + reach)))
        added = 0
        for y in range(y0, y1 + 1):
            dy = np.float64(y) - cy
            for x in range(x0, x1 + 1):
                dx = np.float64(x) - cx
                along = dx * cos_a + dy * sin_a
                across = -dx * sin_a + dy * cos_a
                if abs(along) <= half_len and abs(across) <= half_wid:
                    if mask[y, x] != class_id:
                        added += 1
                        if apply:
                            mask[y, x] = class_id
                            image[y, x, 0] = cr
                            image[y, x, 1] = cg
                            image[y, x, 2] = cb
        return added

else:  # pragma: no cover
    label_counts_nb = None
    confusion_tally_nb = None
    hsv_classify_nb = None
    paint_stroke_nb = None


if _USE_NUMBA:
    ACTIVE_BACKEND = "numba"
    label_counts = label_counts_nb
    confusion_tally = confusion_tally_nb
    hsv_classify = hsv_classify_nb
    paint_stroke = paint_stroke_nb
else:
    ACTIVE_BACKEND = "numpy"
    label_counts = label_counts_np
    confusion_tally = confusion_tally_np
    hsv_classify = hsv_classify_np
    paint_stroke = paint_stroke_np
