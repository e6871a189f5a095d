"""Segmentation inference worker speaking the furrowquant binary protocol."""

from .server import WorkerConfig, WorkerServer, serve

__version__ = "0.1.0"
