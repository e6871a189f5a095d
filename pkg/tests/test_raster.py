import numpy as np
import pytest
from PIL import Image

from furrowquant.errors import MaskClassError, RasterError, SequenceError
from furrowquant.raster import (
    ClassScheme,
    LabelMask,
    RgbFrame,
    load_frame,
    load_mask,
    save_frame,
    save_mask,
    scan_sequence,
)


def test_default_scheme_is_background_soil_straw():
    scheme = ClassScheme.default()
    assert scheme.names == ("background", "soil", "straw")
    assert scheme.class_count == 3
    assert scheme.id_of("soil") == 1


@pytest.mark.parametrize("names", [("a",), ("a", "a"), ("a", "")])
def test_bad_schemes_rejected(names):
    with pytest.raises(RasterError):
        ClassScheme(names)


def test_scheme_from_json_file(tmp_path):
    path = tmp_path / "scheme.json"
    path.write_text('{"classes": ["bg", "residue"]}')
    assert ClassScheme.from_json_file(path).names == ("bg", "residue")
    path.write_text('{"classes": "nope"}')
    with pytest.raises(RasterError):
        ClassScheme.from_json_file(path)


def test_frame_png_round_trip_preserves_bytes(tmp_path):
    pixels = np.array(
        [[[1, 2, 3], [4, 5, 6]], [[7, 8, 9], [250, 251, 252]]], dtype=np.uint8
    )
    path = tmp_path / "f.png"
    save_frame(RgbFrame(pixels), path)
    loaded = load_frame(path)
    assert loaded.width == 2 and loaded.height == 2
    assert np.array_equal(loaded.pixels, pixels)


def test_frame_ppm_input(tmp_path):
    pixels = np.arange(24, dtype=np.uint8).reshape(2, 4, 3)
    path = tmp_path / "f.ppm"
    Image.fromarray(pixels, mode="RGB").save(path, format="PPM")
    assert np.array_equal(load_frame(path).pixels, pixels)


def test_truncated_frame_is_a_decode_error(tmp_path):
    pixels = np.zeros((16, 16, 3), dtype=np.uint8)
    path = tmp_path / "f.png"
    save_frame(RgbFrame(pixels), path)
    path.write_bytes(path.read_bytes()[:20])
    with pytest.raises(RasterError):
        load_frame(path)


def test_non_rgb_frame_rejected(tmp_path):
    path = tmp_path / "gray.png"
    Image.fromarray(np.zeros((4, 4), dtype=np.uint8), mode="L").save(path)
    with pytest.raises(RasterError, match="RGB"):
        load_frame(path)


def test_missing_frame_file(tmp_path):
    with pytest.raises(RasterError, match="no such image"):
        load_frame(tmp_path / "absent.png")


def test_mask_round_trip_and_values(tmp_path):
    scheme = ClassScheme.default()
    labels = np.array([[0, 1], [2, 1]], dtype=np.uint8)
    path = tmp_path / "m.png"
    save_mask(LabelMask(labels), path)
    loaded = load_mask(path, scheme)
    assert np.array_equal(loaded.labels, labels)


def test_mask_with_unknown_class_id_names_value_and_pixel(tmp_path):
    path = tmp_path / "m.png"
    Image.fromarray(np.array([[7, 0], [0, 0]], dtype=np.uint8), mode="L").save(path)
    with pytest.raises(MaskClassError) as err:
        load_mask(path, ClassScheme.default())
    assert err.value.value == 7
    assert err.value.pixel_index == 0


def test_rgb_mask_file_rejected(tmp_path):
    path = tmp_path / "m.png"
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8), mode="RGB").save(path)
    with pytest.raises(RasterError, match="single-channel"):
        load_mask(path, ClassScheme.default())


def test_frames_are_immutable():
    frame = RgbFrame(np.zeros((2, 2, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        frame.pixels[0, 0, 0] = 1


def _touch_png(path):
    Image.fromarray(np.zeros((2, 2, 3), dtype=np.uint8), mode="RGB").save(path)


def test_scan_sequence_orders_by_stem(tmp_path):
    for name in ("b.png", "a.png", "c.png"):
        _touch_png(tmp_path / name)
    seq = scan_sequence(tmp_path)
    assert [e.stem for e in seq] == ["a", "b", "c"]


def test_scan_sequence_is_creation_order_invariant(tmp_path):
    d1, d2 = tmp_path / "d1", tmp_path / "d2"
    d1.mkdir(), d2.mkdir()
    for name in ("x.png", "m.png", "a.png"):
        _touch_png(d1 / name)
    for name in ("a.png", "x.png", "m.png"):
        _touch_png(d2 / name)
    assert [e.stem for e in scan_sequence(d1)] == [e.stem for e in scan_sequence(d2)]


def test_scan_sequence_pairs_masks_and_reports_gaps(tmp_path, caplog):
    frames, masks = tmp_path / "frames", tmp_path / "masks"
    frames.mkdir(), masks.mkdir()
    _touch_png(frames / "a.png")
    _touch_png(frames / "b.png")
    Image.fromarray(np.zeros((2, 2), dtype=np.uint8), mode="L").save(masks / "a.png")
    with caplog.at_level("WARNING"):
        seq = scan_sequence(frames, masks)
    assert seq.entries[0].mask_path == masks / "a.png"
    assert seq.entries[1].mask_path is None
    assert "b" in caplog.text


def test_scan_sequence_empty_dir_errors(tmp_path):
    with pytest.raises(SequenceError, match="no frames"):
        scan_sequence(tmp_path)


def test_scan_sequence_duplicate_stems_error(tmp_path):
    _touch_png(tmp_path / "a.png")
    Image.fromarray(np.zeros((2, 2, 3), dtype=np.uint8), mode="RGB").save(
        tmp_path / "a.ppm", format="PPM"
    )
    with pytest.raises(SequenceError, match="duplicate"):
        scan_sequence(tmp_path)


def test_scan_sequence_missing_dir_errors(tmp_path):
    with pytest.raises(SequenceError, match="does not exist"):
        scan_sequence(tmp_path / "nope")
