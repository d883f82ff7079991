#!/usr/bin/env python3
"""Regenerate the end-to-end golden MusicXML fixtures.

Renders each named synthetic score, runs the full pipeline on it, and
freezes the serialized output under tests/golden/. Run from the repo
root after an intentional output-format change, then inspect the diff.
"""

import pathlib
import sys
import tempfile

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from omr_assembly import synthetic  # noqa: E402
from omr_assembly.pipeline import PipelineConfig, run  # noqa: E402

GOLDEN_DIR = pathlib.Path(__file__).resolve().parents[1] / "tests" / "golden"
FIXTURES = ("melody", "two_voice", "chord")


def main():
    GOLDEN_DIR.mkdir(exist_ok=True)
    for name in FIXTURES:
        with tempfile.TemporaryDirectory() as tmp:
            image_path, det_dir = synthetic.build_score(
                tmp, *synthetic.fixture_units(name))
            text, report = run(PipelineConfig(
                image_path=image_path, detections_dir=det_dir,
                output_path=None))
        target = GOLDEN_DIR / f"fixture_{name}.musicxml"
        target.write_text(text)
        unresolved = report.counts["unresolved_components"]
        print(f"{name}: {report.counts['measures']} measures, "
              f"{report.counts['events']} events, "
              f"{unresolved} unresolved -> {target}")
        if unresolved:
            print(f"  WARNING: {name} has unresolved components")


if __name__ == "__main__":
    main()
