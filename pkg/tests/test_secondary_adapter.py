"""Interchange-format conformance of the detector adapter CLI.

These tests drive the adapter only through its public surface (the
``detect`` subprocess and its stdout format) and skip cleanly when the
adapter package has not been built.
"""

import json
import pathlib
import shutil
import subprocess

import pytest

from omr_assembly import synthetic
from omr_assembly.detect_io import load_detections
from omr_assembly.errors import DetectionParseError
from omr_assembly.pipeline import external_detector

ADAPTER_CLI = pathlib.Path(__file__).parents[1] / "detector" / "dist" / "cli.js"


@pytest.fixture(scope="module")
def node():
    path = shutil.which("node")
    if path is None or not ADAPTER_CLI.exists():
        pytest.skip("detector adapter not built")
    return path


@pytest.fixture
def unit_image(tmp_path):
    image = tmp_path / "unit.png"
    synthetic.save_page(image, synthetic.PageLayout(width=416, height=416))
    return str(image)


def write_weights(tmp_path, category, boxes):
    path = tmp_path / f"{category}.json"
    path.write_text(json.dumps({"category": category, "boxes": boxes}))
    return str(path)


def run_detect(node, *args):
    return subprocess.run([node, str(ADAPTER_CLI), "detect", *args],
                          capture_output=True, text=True)


def test_output_parses_as_detections(node, unit_image, tmp_path):
    weights = write_weights(tmp_path, "body", [
        {"label": "bd0", "confidence": 0.95,
         "cx": 0.3, "cy": 0.5, "w": 0.05, "h": 0.04},
        {"label": "bd4", "confidence": 0.85,
         "cx": 1.2, "cy": -0.1, "w": 0.05, "h": 0.04},  # gets clamped
    ])
    proc = run_detect(node, unit_image, "--category", "body",
                      "--weights", weights)
    assert proc.returncode == 0, proc.stderr
    detections = load_detections(proc.stdout.encode())
    assert [d.label for d in detections] == ["bd0", "bd4"]
    for det in detections:
        assert 0.0 <= det.bbox[0] <= 1.0 and 0.0 <= det.bbox[1] <= 1.0


def test_empty_stub_zero_records(node, unit_image, tmp_path):
    weights = write_weights(tmp_path, "rest", [])
    proc = run_detect(node, unit_image, "--category", "rest",
                      "--weights", weights)
    assert proc.returncode == 0
    assert load_detections(proc.stdout.encode()) == []


def test_unknown_category_fails(node, unit_image, tmp_path):
    weights = write_weights(tmp_path, "body", [])
    proc = run_detect(node, unit_image, "--category", "nonsense",
                      "--weights", weights)
    assert proc.returncode != 0
    assert "unknown category" in proc.stderr


def test_missing_weights_fails(node, unit_image, tmp_path):
    proc = run_detect(node, unit_image, "--category", "body",
                      "--weights", str(tmp_path / "nope.json"))
    assert proc.returncode != 0


def test_works_through_external_detector(node, unit_image, tmp_path):
    """The adapter satisfies the detector command contract end to end."""
    for category in ("body", "rest"):
        write_weights(tmp_path, category, [])
    write_weights(tmp_path, "body", [
        {"label": "bd0", "confidence": 0.9,
         "cx": 0.5, "cy": 0.5, "w": 0.05, "h": 0.04}])
    template = (f"{node} {ADAPTER_CLI} detect {{image}} "
                f"--category {{category}} "
                f"--weights {tmp_path}/{{category}}.json")
    detections = external_detector(template, unit_image, category="body")
    assert [d.label for d in detections] == ["bd0"]
