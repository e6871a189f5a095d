"""Model-mode plumbing; full session tests only run where onnxruntime exists."""

import json

import numpy as np
import pytest

from fqworker.model import ModelError, OnnxSegmenter, labels_from_scores, load_sidecar, preprocess


def test_sidecar_defaults_when_absent(tmp_path):
    mean, std = load_sidecar(tmp_path / "model.onnx")
    assert mean.tolist() == [0.0, 0.0, 0.0]
    assert std.tolist() == [1.0, 1.0, 1.0]


def test_sidecar_parsing(tmp_path):
    model = tmp_path / "model.onnx"
    model.touch()
    model.with_suffix(".json").write_text(json.dumps({"mean": [0.5, 0.5, 0.5], "std": [0.25, 0.25, 0.25]}))
    mean, std = load_sidecar(model)
    assert mean.tolist() == [0.5, 0.5, 0.5]
    assert std.tolist() == [0.25, 0.25, 0.25]


def test_sidecar_rejects_zero_std(tmp_path):
    model = tmp_path / "model.onnx"
    model.with_suffix(".json").write_text(json.dumps({"std": [0, 1, 1]}))
    with pytest.raises(ModelError, match="nonzero std"):
        load_sidecar(model)


def test_preprocess_scales_and_normalizes():
    rgb = np.full((4, 6, 3), 255, dtype=np.uint8)
    mean = np.asarray([0.5, 0.5, 0.5], dtype=np.float32)
    std = np.asarray([0.5, 0.5, 0.5], dtype=np.float32)
    batch = preprocess(rgb, (4, 6), mean, std)
    assert batch.shape == (1, 3, 4, 6)
    assert np.allclose(batch, 1.0)


def test_preprocess_resizes_to_model_shape():
    rgb = np.zeros((10, 10, 3), dtype=np.uint8)
    batch = preprocess(rgb, (4, 6), np.zeros(3, np.float32), np.ones(3, np.float32))
    assert batch.shape == (1, 3, 4, 6)


def test_labels_from_scores_argmax_and_resize():
    scores = np.zeros((1, 3, 2, 2), dtype=np.float32)
    scores[0, 2, 0, 0] = 5.0  # top-left pixel is class 2
    scores[0, 1, 1, 1] = 3.0  # bottom-right pixel is class 1
    labels = labels_from_scores(scores, (2, 2))
    assert labels.tolist() == [[2, 0], [0, 1]]
    upscaled = labels_from_scores(scores, (4, 4))
    assert upscaled.shape == (4, 4)
    assert set(np.unique(upscaled)) <= {0, 1, 2}


def test_labels_from_scores_rejects_batches():
    with pytest.raises(ModelError, match="1, C, h, w"):
        labels_from_scores(np.zeros((2, 3, 4, 4), dtype=np.float32), (4, 4))


def test_missing_model_file(tmp_path):
    pytest.importorskip("onnxruntime")
    with pytest.raises(ModelError, match="does not exist"):
        OnnxSegmenter(tmp_path / "absent.onnx", 3)


def test_model_session_roundtrip(tmp_path):
    onnxruntime = pytest.importorskip("onnxruntime")
    onnx = pytest.importorskip("onnx")
    from onnx import TensorProto, helper

    # identity 1x1 conv from 3 input channels to 3 class scores
    weight = np.eye(3, dtype=np.float32).reshape(3, 3, 1, 1)
    node = helper.make_node("Conv", ["x", "w"], ["y"], kernel_shape=[1, 1])
    graph = helper.make_graph(
        [node],
        "identity_scores",
        [helper.make_tensor_value_info("x", TensorProto.FLOAT, [1, 3, 8, 8])],
        [helper.make_tensor_value_info("y", TensorProto.FLOAT, [1, 3, 8, 8])],
        [helper.make_tensor("w", TensorProto.FLOAT, weight.shape, weight.ravel())],
    )
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 13)])
    path = tmp_path / "identity.onnx"
    onnx.save(model, str(path))

    segmenter = OnnxSegmenter(path, 3)
    rgb = np.zeros((8, 8, 3), dtype=np.uint8)
    rgb[:4] = (0, 255, 0)  # strongest channel 1 -> class 1
    rgb[4:] = (0, 0, 255)  # strongest channel 2 -> class 2
    labels = segmenter.segment(rgb)
    assert (labels[:4] == 1).all() and (labels[4:] == 2).all()
