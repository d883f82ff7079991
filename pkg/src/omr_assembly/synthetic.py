"""Synthetic fixture rendering and detection-file generation.

Used by the test suite and the demo scripts: clean staves at known
geometry, whole pages with measure layouts, and detection fixture
directories in the interchange format.
"""

import os

import cv2
import numpy as np

from . import raster
from .detect_io import Detection, serialize_detections
from .staffref import BASE_GAP, line_rows, simulate_lines

WHITE = 255
HALF_GAP = BASE_GAP / 2.0


def blank(width, height):
    return np.full((height, width), WHITE, dtype=np.uint8)


def render_unit(side=416, alpha=0.0, beta=0.0, thickness=2):
    """Clean measure unit with its staff at the given fit parameters.

    Rasterizes through the same helper the fit scorer uses, so an
    exactly matching candidate adds no black pixels.
    """
    unit = blank(side, side)
    geometry = simulate_lines(alpha, beta)
    for y in geometry.line_ys:
        for row in line_rows(y, side, thickness):
            unit[row, :] = 0
    return unit


def draw_staff(image, x0, x1, center_y, gap, thickness=3):
    """Five staff lines spanning x0..x1, centered at center_y."""
    for k in range(-2, 3):
        y = int(round(center_y + k * gap))
        top = y - thickness // 2
        image[max(0, top):top + thickness, x0:x1] = 0
    return image


def draw_barline(image, x, y0, y1, thickness=3):
    image[y0:y1, x:x + thickness] = 0
    return image


def rotate_by(image, angle):
    """Rotate the content so its lines tilt by +angle degrees."""
    return raster.rotate_level(image, -angle)


def unit_y(position):
    """Normalized unit ordinate of a staff position (half-gap steps
    above the middle line), for a perfectly centered staff."""
    return 0.5 - position * HALF_GAP


class PageLayout:
    """A synthetic grand-staff page plus its measure detections."""

    def __init__(self, width=1400, height=1000, staff_height=80,
                 x_start=100, measure_width=300):
        self.width = width
        self.height = height
        self.staff_height = staff_height
        self.gap = staff_height / 4.0
        self.x_start = x_start
        self.measure_width = measure_width
        self.image = blank(width, height)
        self.measure_detections = []

    def add_row(self, center_y, n_measures, seed_label):
        """One staff row of n measures; the first box carries the seed
        label (x0/x1), the rest are y0."""
        x_end = self.x_start + n_measures * self.measure_width
        draw_staff(self.image, self.x_start, x_end, center_y, self.gap)
        half = self.staff_height / 2.0
        for i in range(n_measures + 1):
            draw_barline(self.image, self.x_start + i * self.measure_width,
                         int(center_y - half), int(center_y + half))
        for i in range(n_measures):
            label = seed_label if i == 0 else "y0"
            cx = (self.x_start + (i + 0.5) * self.measure_width) / self.width
            cy = center_y / self.height
            self.measure_detections.append(Detection(
                "measure", label, 0.9,
                (cx, cy, self.measure_width / self.width,
                 self.staff_height / self.height)))
        return self


def symbol(category, label, cx, position=None, cy=None, w=0.05, h=0.05,
           confidence=0.9):
    """A unit-level detection placed at a staff position (or raw cy)."""
    if cy is None:
        cy = unit_y(position)
    return Detection(category, label, confidence, (cx, cy, w, h))


def note(label, position, cx, arm_label=None, arm_above=True,
         arm_length=3.0):
    """Detections for one notehead, optionally with a stem/beam box
    horizontally overlapping it."""
    records = [symbol("body", label, cx, position=position,
                      w=0.05, h=0.045)]
    if arm_label is not None:
        offset = arm_length * HALF_GAP
        cy = unit_y(position) + (-offset if arm_above else offset)
        records.append(symbol("arm_beam", arm_label, cx, cy=cy,
                              w=0.04, h=0.05))
    return records


def write_detection_dir(path, measure_detections, per_unit):
    """Write measures.det plus <index>.<category>.det files.

    ``per_unit`` is a list (indexed by reading-order unit) of detection
    lists in unit coordinates.
    """
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "measures.det"), "w", encoding="utf-8") as fh:
        fh.write(serialize_detections(measure_detections))
    for index, detections in enumerate(per_unit):
        by_category = {}
        for det in detections:
            by_category.setdefault(det.category, []).append(det)
        for category, dets in by_category.items():
            name = f"{index}.{category}.det"
            with open(os.path.join(path, name), "w", encoding="utf-8") as fh:
                fh.write(serialize_detections(dets))
    return path


def save_page(path, layout):
    cv2.imwrite(str(path), layout.image)
    return path


def build_score(root, staff1_units, staff2_units):
    """Render a two-row page plus its detection fixture directory.

    Each staff argument is a list of per-measure detection lists in unit
    coordinates; both staves must have equal measure counts. Returns
    (image_path, detections_dir) under ``root``.
    """
    assert len(staff1_units) == len(staff2_units)
    n = len(staff1_units)
    layout = PageLayout(width=200 + n * 300, height=900)
    layout.add_row(250, n, "x0")
    layout.add_row(600, n, "x1")
    os.makedirs(str(root), exist_ok=True)
    image_path = os.path.join(str(root), "page.png")
    save_page(image_path, layout)
    det_dir = os.path.join(str(root), "detections")
    write_detection_dir(det_dir, layout.measure_detections,
                        list(staff1_units) + list(staff2_units))
    return image_path, det_dir


def fixture_units(name):
    """Per-unit detections for the named demo score.

    ``melody``: four quarter notes then a whole note over whole rests.
    ``two_voice``: one stack with stems at both vertical ends, which
    splits into two voices.
    ``chord``: two noteheads sharing one stem.
    """
    clef_g = symbol("clef", "cf0", 0.06, cy=0.5, w=0.08, h=0.3)
    clef_f = symbol("clef", "cf1", 0.06, cy=0.5, w=0.08, h=0.3)
    whole_rest = symbol("rest", "re0", 0.5, position=1)
    if name == "melody":
        unit0 = [clef_g]
        for i, pos in enumerate((-2, -1, 0, 1)):
            unit0 += note("bd0", pos, 0.25 + i * 0.2, "am0")
        unit1 = note("bd4", 0, 0.5)
        return ([unit0, unit1],
                [[clef_f, whole_rest], [whole_rest]])
    if name == "two_voice":
        unit0 = [clef_g]
        for cx in (0.3, 0.7):
            unit0 += note("bd1", -3, cx, "am1", arm_above=False)
            unit0 += note("bd0", 3, cx, "am0", arm_above=True)
        return [unit0], [[clef_f, whole_rest]]
    if name == "chord":
        unit0 = [clef_g,
                 symbol("body", "bd0", 0.4, position=0, w=0.05, h=0.045),
                 symbol("body", "bd0", 0.4, position=2, w=0.05, h=0.045),
                 symbol("arm_beam", "am0", 0.4, cy=unit_y(6), w=0.04, h=0.05)]
        for i in range(3):
            unit0 += note("bd0", -2, 0.6 + i * 0.12, "am0")
        return [unit0], [[clef_f, whole_rest]]
    raise ValueError(f"unknown fixture {name!r}")
