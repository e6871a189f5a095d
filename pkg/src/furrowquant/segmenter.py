"""Pluggable segmentation backends: oracle masks, HSV color threshold, remote worker.

Oracle and threshold backends are pure functions of their inputs, so repeated
runs give byte-identical masks. A remote backend owns one TCP connection and
keeps exactly one request in flight; concurrent pipelines should open one
backend per worker connection.
"""

from __future__ import annotations

import json
import socket
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Union

import numpy as np

from . import kernels, wire
from .errors import ProtocolError, RasterError, RemoteStatusError, SegmenterError
from .raster import ClassScheme, LabelMask, RgbFrame, load_mask, validate_mask


@dataclass(frozen=True)
class HueInterval:
    """Closed hue interval in degrees on the HSV circle; wraps when lo > hi."""

    lo: float
    hi: float

    def __post_init__(self):
        for v in (self.lo, self.hi):
            if not 0.0 <= v <= 360.0:
                raise SegmenterError(f"hue bound {v} out of [0, 360]")

    def contains(self, hue: float) -> bool:
        if self.lo <= self.hi:
            return self.lo <= hue <= self.hi
        return hue >= self.lo or hue <= self.hi


@dataclass(frozen=True)
class ThresholdParams:
    """HSV thresholds for the model-free baseline.

    Defaults separate the synthetic palette with margin: straw hue 35-75 deg
    with value >= 140, soil hue 10-35 deg with saturation >= 60. Straw is
    tested before soil, so hue 35 with enough value classifies as straw.
    """

    straw_hue: HueInterval = field(default_factory=lambda: HueInterval(35.0, 75.0))
    straw_min_value: int = 140
    soil_hue: HueInterval = field(default_factory=lambda: HueInterval(10.0, 35.0))
    soil_min_saturation: int = 60

    def __post_init__(self):
        if not 0 <= self.straw_min_value <= 255:
            raise SegmenterError(f"straw_min_value {self.straw_min_value} out of [0, 255]")
        if not 0 <= self.soil_min_saturation <= 255:
            raise SegmenterError(f"soil_min_saturation {self.soil_min_saturation} out of [0, 255]")

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ThresholdParams":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise SegmenterError(f"cannot read threshold params {path}: {exc}") from exc
        try:
            return cls(
                straw_hue=HueInterval(*doc["straw_hue"]),
                straw_min_value=int(doc["straw_min_value"]),
                soil_hue=HueInterval(*doc["soil_hue"]),
                soil_min_saturation=int(doc["soil_min_saturation"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SegmenterError(f"malformed threshold params in {path}: {exc}") from exc


@dataclass(frozen=True)
class OracleSpec:
    masks_dir: Path


@dataclass(frozen=True)
class ThresholdSpec:
    params: ThresholdParams = field(default_factory=ThresholdParams)


@dataclass(frozen=True)
class RemoteSpec:
    host: str
    port: int

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise SegmenterError(f"port {self.port} out of [1, 65535]")


SegmenterSpec = Union[OracleSpec, ThresholdSpec, RemoteSpec]


def parse_spec(text: str) -> SegmenterSpec:
    """Parse `oracle:DIR` | `hsv[:PARAMS_FILE]` | `remote:HOST:PORT`."""
    kind, _, rest = text.partition(":")
    if kind == "oracle":
        if not rest:
            raise SegmenterError("oracle spec needs a masks directory: oracle:DIR")
        return OracleSpec(Path(rest))
    if kind == "hsv":
        return ThresholdSpec(ThresholdParams.from_json_file(rest) if rest else ThresholdParams())
    if kind == "remote":
        host, sep, port = rest.rpartition(":")
        if not sep or not host:
            raise SegmenterError("remote spec needs host and port: remote:HOST:PORT")
        try:
            return RemoteSpec(host, int(port))
        except ValueError:
            raise SegmenterError(f"remote port must be an integer, got {port!r}") from None
    raise SegmenterError(f"unknown segmenter spec {text!r} (expected oracle:/hsv/remote:)")


@dataclass(frozen=True)
class SegResult:
    mask: LabelMask
    elapsed_ms: float


class Segmenter(Protocol):
    def segment(self, frame: RgbFrame, stem: str) -> SegResult: ...

    def close(self) -> None: ...


def threshold_segment(
    params: ThresholdParams, frame: RgbFrame, scheme: ClassScheme | None = None
) -> LabelMask:
    """Label every pixel straw, soil, or background by HSV rules.

    The three rules partition color space: straw first, then soil, else
    background, so every RGB value maps to exactly one class.
    """
    scheme = scheme or ClassScheme.default()
    flat = frame.pixels.reshape(-1, 3)
    labels = kernels.hsv_classify(
        flat,
        float(params.straw_hue.lo),
        float(params.straw_hue.hi),
        float(params.straw_min_value),
        float(params.soil_hue.lo),
        float(params.soil_hue.hi),
        float(params.soil_min_saturation),
        scheme.id_of("straw"),
        scheme.id_of("soil"),
        scheme.id_of("background"),
    )
    return LabelMask(labels.reshape(frame.height, frame.width))


class ThresholdSegmenter:
    def __init__(self, params: ThresholdParams | None = None, scheme: ClassScheme | None = None):
        self.params = params or ThresholdParams()
        self.scheme = scheme or ClassScheme.default()

    def segment(self, frame: RgbFrame, stem: str) -> SegResult:
        start = time.perf_counter()
        mask = threshold_segment(self.params, frame, self.scheme)
        return SegResult(mask, (time.perf_counter() - start) * 1000.0)

    def close(self) -> None:
        pass


class OracleSegmenter:
    """Returns the pre-existing mask `<stem>.png` from the masks directory."""

    def __init__(self, masks_dir: str | Path, scheme: ClassScheme | None = None):
        self.masks_dir = Path(masks_dir)
        self.scheme = scheme or ClassScheme.default()
        if not self.masks_dir.is_dir():
            raise SegmenterError(f"oracle masks directory does not exist: {self.masks_dir}")

    def segment(self, frame: RgbFrame, stem: str) -> SegResult:
        start = time.perf_counter()
        path = self.masks_dir / f"{stem}.png"
        if not path.is_file():
            raise SegmenterError(f"oracle has no mask for stem {stem!r} in {self.masks_dir}")
        mask = load_mask(path, self.scheme)
        _check_dims(mask, frame, stem)
        return SegResult(mask, (time.perf_counter() - start) * 1000.0)

    def close(self) -> None:
        pass


class RemoteSegmenter:
    """Client of the binary segmentation protocol; connects lazily, reconnects never."""

    def __init__(
        self,
        host: str,
        port: int,
        scheme: ClassScheme | None = None,
        timeout: float = 5.0,
    ):
        self.host = host
        self.port = port
        self.scheme = scheme or ClassScheme.default()
        self.timeout = timeout
        self._sock: socket.socket | None = None

    def _connect(self) -> socket.socket:
        if self._sock is not None:
            return self._sock
        try:
            sock = socket.create_connection((self.host, self.port), timeout=self.timeout)
        except OSError as exc:
            raise ProtocolError(f"cannot connect to {self.host}:{self.port}: {exc}") from exc
        try:
            wire.do_handshake(sock)
        except ProtocolError:
            sock.close()
            raise
        self._sock = sock
        return sock

    def segment(self, frame: RgbFrame, stem: str) -> SegResult:
        start = time.perf_counter()
        sock = self._connect()
        try:
            sock.sendall(wire.encode_request(frame.width, frame.height, frame.pixels.tobytes()))
            status, width, height, class_count, payload, message = wire.read_response(sock)
        except ProtocolError:
            self.close()
            raise
        if status != wire.STATUS_OK:
            raise RemoteStatusError(status, message)
        if (width, height) != (frame.width, frame.height):
            self.close()
            raise SegmenterError(
                f"worker returned {width}x{height} mask for {frame.width}x{frame.height} "
                f"frame (stem {stem!r})"
            )
        if class_count != self.scheme.class_count:
            self.close()
            raise SegmenterError(
                f"worker speaks {class_count} classes, scheme has {self.scheme.class_count}"
            )
        labels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
        try:
            mask = validate_mask(LabelMask(labels), self.scheme)
        except RasterError as exc:
            self.close()
            raise SegmenterError(f"worker mask invalid (stem {stem!r}): {exc}") from exc
        return SegResult(mask, (time.perf_counter() - start) * 1000.0)

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None


def make_segmenter(
    spec: SegmenterSpec, scheme: ClassScheme | None = None, timeout: float = 5.0
) -> Segmenter:
    scheme = scheme or ClassScheme.default()
    if isinstance(spec, OracleSpec):
        return OracleSegmenter(spec.masks_dir, scheme)
    if isinstance(spec, ThresholdSpec):
        return ThresholdSegmenter(spec.params, scheme)
    if isinstance(spec, RemoteSpec):
        return RemoteSegmenter(spec.host, spec.port, scheme, timeout)
    raise SegmenterError(f"unsupported segmenter spec: {spec!r}")


def _check_dims(mask: LabelMask, frame: RgbFrame, stem: str) -> None:
    if (mask.width, mask.height) != (frame.width, frame.height):
        raise SegmenterError(
            f"mask is {mask.width}x{mask.height} but frame is "
            f"{frame.width}x{frame.height} (stem {stem!r})"
        )
