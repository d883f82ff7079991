"""End-to-end orchestration: page leveling, measure extraction, staff
fitting, symbol assembly, voice adjustment, and MusicXML output.

Per-measure work (detection ingest, staff fitting, grouping) can run
sequentially or on a thread pool; results are merged in reading order
and the clef-chaining pass stays sequential, so both modes produce
byte-identical output.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
import io
import json
import logging
import os
import shlex
import subprocess
import tempfile
import time

import cv2
import numpy as np

from . import assembly, detect_io, measures, mxml, raster, staffref, voicing
from .errors import AlignmentError, ConfigError, DetectorError
from .measures import MeasureBox

logger = logging.getLogger(__name__)

SYMBOL_CATEGORIES = ("accidental", "arm_beam", "body", "clef", "rest")
MEASURE_FIXTURE_NAME = "measures.det"

# clef in effect before the first measure of each staff
INITIAL_CLEF = {1: "G", 2: "F"}


@dataclass
class PipelineConfig:
    image_path: str
    detections_dir: str = None
    detector_command: str = None
    output_path: str = "score.musicxml"
    fifths: int = 0
    time_spec: voicing.TimeSpec = field(default_factory=voicing.TimeSpec)
    thresholds: dict = field(default_factory=dict)
    mode: str = "sequential"
    workers: int = 1
    split_staves: bool = False
    dump_measures: str = None
    dump_overlays: str = None
    side: int = raster.DEFAULT_SQUARE_SIDE
    semantics_path: str = None
    # test/benchmark knob: extra per-measure latency standing in for
    # real detector inference
    simulated_detection_delay_ms: float = 0.0

    def validate(self):
        if self.detections_dir is None and self.detector_command is None:
            raise ConfigError("no detection source: give a fixture "
                              "directory or a detector command")
        if self.workers < 1:
            raise ConfigError("worker count must be >= 1")
        if self.mode not in ("sequential", "parallel"):
            raise ConfigError(f"unknown mode {self.mode!r}")


@dataclass
class RunReport:
    mode: str
    workers: int
    stage_times: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    measure_diagnostics: list = field(default_factory=list)
    removed_duplicates: int = 0

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def table(self):
        lines = [f"mode: {self.mode} (workers: {self.workers})"]
        lines.append("stage times (s):")
        for stage, seconds in self.stage_times.items():
            lines.append(f"  {stage:<12} {seconds:8.3f}")
        for name, value in sorted(self.counts.items()):
            lines.append(f"{name}: {value}")
        if self.measure_diagnostics:
            lines.append("diagnostics:")
            for index, message in self.measure_diagnostics:
                where = f"measure {index}" if index is not None else "page"
                lines.append(f"  {where}: {message}")
        return "\n".join(lines) + "\n"


def external_detector(command_template, image_path, category=None):
    """Run a detector subprocess and parse its stdout.

    The template must contain an ``{image}`` placeholder; ``{category}``
    is substituted when given.
    """
    if "{image}" not in command_template:
        raise ConfigError("detector command lacks an {image} placeholder")
    command = command_template.format(image=image_path,
                                      category=category or "")
    proc = subprocess.run(shlex.split(command), capture_output=True,
                          text=True)
    if proc.returncode != 0:
        raise DetectorError(
            f"detector exited {proc.returncode}: {proc.stderr.strip()}")
    return detect_io.load_detections(io.StringIO(proc.stdout))


def _load_fixture(path):
    if not os.path.exists(path):
        return []
    return detect_io.load_detections(path)


def _measure_detections(config, page_path):
    if config.detections_dir is not None:
        path = os.path.join(config.detections_dir, MEASURE_FIXTURE_NAME)
        if not os.path.exists(path):
            raise ConfigError(f"missing measure detection fixture: {path}")
        dets = detect_io.load_detections(path)
    else:
        dets = external_detector(config.detector_command, page_path,
                                 category="measure")
    return [d for d in dets if d.category == "measure"]


def _unit_detections(config, index, unit_image_path):
    detections = []
    for category in SYMBOL_CATEGORIES:
        if config.detections_dir is not None:
            path = os.path.join(config.detections_dir,
                                f"{index}.{category}.det")
            detections.extend(_load_fixture(path))
        else:
            detections.extend(external_detector(
                config.detector_command, unit_image_path, category=category))
    return detections


def _boxes_from_detections(detections, page_shape):
    h, w = page_shape[:2]
    boxes = []
    for det in detections:
        boxes.append(MeasureBox(
            label=det.label,
            x_min=max(0.0, det.x_min) * w,
            y_min=max(0.0, det.y_min) * h,
            x_max=min(1.0, det.x_max) * w,
            y_max=min(1.0, det.y_max) * h,
            confidence=det.confidence))
    return boxes


def process_measures(units, work, mode="sequential", workers=1):
    """Run per-measure work and merge results in unit order.

    A failing worker yields None for its measure (reported upstream),
    the run continues.
    """
    def safe(args):
        index, unit = args
        try:
            return work(index, unit)
        except Exception as exc:  # per-measure isolation
            logger.exception("measure %d failed", index)
            return exc

    jobs = list(enumerate(units))
    if mode == "parallel" and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(safe, jobs))
    else:
        results = [safe(job) for job in jobs]
    return results


def _dump_overlay(unit, geometry, path):
    canvas = cv2.cvtColor(unit.image, cv2.COLOR_GRAY2BGR)
    height = canvas.shape[0]
    for i, y in enumerate(geometry.line_ys):
        color = (0, 0, 255) if i == 2 else (255, 0, 0)  # middle line red
        for row in staffref.line_rows(y, height):
            canvas[row, :] = color
    for y in geometry.ledger_ys:
        for row in staffref.line_rows(y, height):
            canvas[row, :] = (255, 0, 0)
    cv2.imwrite(path, canvas)


def run(config):
    """Execute the whole pipeline. Returns (musicxml_text, report)."""
    config.validate()
    semantics = detect_io.load_semantics(config.semantics_path)
    capacity = voicing.measure_capacity(config.time_spec)
    report = RunReport(mode=config.mode, workers=config.workers)
    times = report.stage_times

    t0 = time.perf_counter()
    page = raster.load_image(config.image_path)
    times["load"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    tilt = raster.estimate_tilt(page)
    page = raster.rotate_level(page, tilt)
    times["level_page"] = time.perf_counter() - t0

    with tempfile.TemporaryDirectory(prefix="omr-assembly-") as tmp:
        leveled_path = os.path.join(tmp, "page.png")
        if config.detector_command is not None:
            cv2.imwrite(leveled_path, page)

        t0 = time.perf_counter()
        measure_dets = detect_io.filter_confidence(
            _measure_detections(config, leveled_path), config.thresholds)
        boxes = _boxes_from_detections(measure_dets, page.shape)
        if not boxes:
            raise AlignmentError(
                f"no measures detected on {config.image_path} "
                f"(page tilt was {tilt:.2f} deg)")
        rows, removed = measures.align_measures(boxes)
        measures.assign_staves(rows)
        units = measures.extract_measure_units(page, rows, side=config.side)
        report.removed_duplicates = len(removed)
        times["measures"] = time.perf_counter() - t0

        if config.dump_measures:
            os.makedirs(config.dump_measures, exist_ok=True)
            for index, unit in enumerate(units):
                cv2.imwrite(os.path.join(config.dump_measures,
                                         f"unit{index:03d}.png"), unit.image)

        t0 = time.perf_counter()

        def per_unit(index, unit):
            if config.detector_command is not None:
                unit_path = os.path.join(tmp, f"unit{index:03d}.png")
                cv2.imwrite(unit_path, unit.image)
            else:
                unit_path = None
            detections = _unit_detections(config, index, unit_path)
            if config.simulated_detection_delay_ms:
                time.sleep(config.simulated_detection_delay_ms / 1000.0)
            detections = detect_io.filter_confidence(detections,
                                                     config.thresholds)
            alpha, beta, geometry = staffref.fit_staff(unit.image)
            components = assembly.components_from_detections(detections,
                                                             geometry)
            return geometry, components

        results = process_measures(units, per_unit, mode=config.mode,
                                   workers=config.workers)
        times["per_measure"] = time.perf_counter() - t0

        if config.dump_overlays:
            os.makedirs(config.dump_overlays, exist_ok=True)
            for index, result in enumerate(results):
                if not isinstance(result, Exception):
                    _dump_overlay(units[index], result[0],
                                  os.path.join(config.dump_overlays,
                                               f"overlay{index:03d}.png"))

    t0 = time.perf_counter()
    staff_measures = {1: [], 2: []}
    clefs = {1: assembly.ClefState(INITIAL_CLEF[1]),
             2: assembly.ClefState(INITIAL_CLEF[2])}
    events_total = 0
    unresolved_total = 0
    for index, (unit, result) in enumerate(zip(units, results)):
        if isinstance(result, Exception):
            report.measure_diagnostics.append(
                (index, f"worker failed: {result}"))
            staff_measures[unit.staff_id].append(([], None))
            continue
        geometry, components = result
        if not components:
            report.measure_diagnostics.append(
                (index, "no symbol detections; measure left empty"))
            staff_measures[unit.staff_id].append(
                ([], clefs[unit.staff_id].current))
            continue
        events, clef_out, diags = assembly.assemble_measure(
            components, clefs[unit.staff_id], config.fifths, semantics,
            divisions=config.time_spec.divisions)
        clefs[unit.staff_id] = clef_out
        events, voice_diags = voicing.adjust_voices(events, capacity)
        for message in diags + voice_diags:
            report.measure_diagnostics.append((index, message))
        unresolved_total += len(diags)
        events_total += len(events)
        staff_measures[unit.staff_id].append((events, clef_out.current))
    times["assemble"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    tree = mxml.build_tree(staff_measures[1], staff_measures[2],
                           config.time_spec, config.fifths)
    for message in tree.diagnostics:
        report.measure_diagnostics.append((None, message))
    text = mxml.serialize(tree)
    times["serialize"] = time.perf_counter() - t0

    report.counts = {
        "measures": len(units),
        "events": events_total,
        "unresolved_components": unresolved_total,
    }

    if config.output_path:
        _write_atomic(config.output_path, text)
        if config.split_staves:
            base, ext = os.path.splitext(config.output_path)
            for staff_id, sub in enumerate(mxml.split_by_staff(tree), start=1):
                _write_atomic(f"{base}.staff{staff_id}{ext}",
                              mxml.serialize(sub))
        _write_atomic(config.output_path + ".report.json", report.to_json())
    return text, report


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
