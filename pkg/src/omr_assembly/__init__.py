"""Measure-based sheet music assembly: detection results to MusicXML."""

__version__ = "0.1.0"

from .detect_io import (Detection, LABEL_REGISTRY, SemanticsTable,
                        filter_confidence, load_detections, load_semantics)
from .voicing import TimeSpec

__all__ = [
    "Detection", "LABEL_REGISTRY", "SemanticsTable", "TimeSpec",
    "filter_confidence", "load_detections", "load_semantics",
]
