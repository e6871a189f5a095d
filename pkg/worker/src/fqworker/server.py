"""TCP server: one handler thread per connection, strictly sequential requests.

Handlers share nothing mutable; model mode shares one read-only loaded model.
Malformed requests get status 2 and the connection is dropped (framing is no
longer trustworthy); segmentation failures get status 1 and the connection
survives.
"""

from __future__ import annotations

import logging
import socketserver
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import protocol, threshold
from .model import ModelError, OnnxSegmenter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WorkerConfig:
    port: int
    mode: str = "threshold"  # threshold | model
    model_path: str | Path | None = None
    class_count: int = 3

    def __post_init__(self):
        if self.mode not in ("threshold", "model"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "model" and not self.model_path:
            raise ValueError("model mode needs --model PATH")
        if self.mode == "threshold" and self.class_count != threshold.CLASS_COUNT:
            raise ValueError(
                f"threshold mode is fixed at {threshold.CLASS_COUNT} classes, "
                f"got {self.class_count}"
            )
        if self.class_count < 2 or self.class_count > 255:
            raise ValueError(f"class count {self.class_count} out of [2, 255]")


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        conn = self.request
        server: WorkerServer = self.server  # type: ignore[assignment]
        try:
            version = protocol.read_handshake(conn)
            if version != protocol.ACCEPTED_VERSION:
                logger.info("client offered protocol version %d; answered %d",
                            version, protocol.ACCEPTED_VERSION)
            while True:
                try:
                    rgb = protocol.read_request(conn)
                except protocol.BadRequest as exc:
                    logger.warning("bad request from %s: %s", self.client_address, exc)
                    protocol.send_error(conn, protocol.STATUS_BAD_REQUEST, str(exc))
                    return
                try:
                    labels = server.segment(rgb)
                except ModelError as exc:
                    logger.warning("segmentation failed: %s", exc)
                    protocol.send_error(conn, protocol.STATUS_MODEL_ERROR, str(exc))
                    continue
                if labels.size and int(labels.max()) >= server.config.class_count:
                    protocol.send_error(
                        conn, protocol.STATUS_MODEL_ERROR,
                        f"model produced class id {int(labels.max())} "
                        f">= {server.config.class_count}",
                    )
                    continue
                protocol.send_mask(conn, labels, server.config.class_count)
        except protocol.Disconnect as exc:
            logger.debug("connection from %s ended: %s", self.client_address, exc)
        except OSError as exc:
            logger.debug("socket error with %s: %s", self.client_address, exc)


class WorkerServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: WorkerConfig, host: str = "127.0.0.1"):
        self.config = config
        self._model = OnnxSegmenter(config.model_path, config.class_count) if config.mode == "model" else None
        super().__init__((host, config.port), _Handler)

    @property
    def port(self) -> int:
        return self.server_address[1]

    def segment(self, rgb: np.ndarray) -> np.ndarray:
        if self._model is not None:
            return self._model.segment(rgb)
        return threshold.classify(rgb)

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


def serve(config: WorkerConfig, host: str = "127.0.0.1") -> None:
    """Run until interrupted."""
    with WorkerServer(config, host) as server:
        logger.info("worker listening on %s:%d (%s mode)", host, server.port, config.mode)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            logger.info("shutting down")
