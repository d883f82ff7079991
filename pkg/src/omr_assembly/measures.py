"""Measure alignment, staff assignment, and unit extraction.

Measure detections on a leveled page are grouped into rows seeded by
clef-bearing boxes, rows alternate between staff 1 and staff 2, and
each box is cropped (with vertical margins), leveled individually, and
resized to the standard square.
"""

from dataclasses import dataclass, field
import logging

import cv2
import numpy as np

from . import raster
from .errors import AlignmentError
from .staffref import MARGIN_FACTOR

logger = logging.getLogger(__name__)

OVERLAP_MIN_FRAC = 0.5   # of the shorter box height, for row membership
DUPLICATE_IOU = 0.6      # same-row boxes above this IoU are duplicates


@dataclass(frozen=True)
class MeasureBox:
    label: str               # x0 | x1 | y0
    x_min: float             # page pixels
    y_min: float
    x_max: float
    y_max: float
    confidence: float

    @property
    def height(self):
        return self.y_max - self.y_min

    @property
    def y_center(self):
        return (self.y_min + self.y_max) / 2.0


@dataclass
class MeasureRow:
    seed_label: str
    boxes: list
    staff_id: int = 0
    pair_index: int = 0


@dataclass
class MeasureUnit:
    row_index: int
    col_index: int
    staff_id: int
    pair_index: int
    source_rect: tuple       # (x_min, y_min, x_max, y_max) page pixels
    image: np.ndarray


def _vertical_overlap(a, b):
    inter = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    shorter = min(a.height, b.height)
    return inter / shorter if shorter > 0 else 0.0


def _iou(a, b):
    ix = max(0.0, min(a.x_max, b.x_max) - max(a.x_min, b.x_min))
    iy = max(0.0, min(a.y_max, b.y_max) - max(a.y_min, b.y_min))
    inter = ix * iy
    union = ((a.x_max - a.x_min) * a.height
             + (b.x_max - b.x_min) * b.height - inter)
    return inter / union if union > 0 else 0.0


def align_measures(boxes):
    """Group measure boxes into top-to-bottom rows.

    Clef-bearing boxes (x0/x1) seed the rows; every y0 box joins the
    seed it vertically overlaps most. Same-row near-duplicates are
    dropped, keeping the higher confidence.

    Returns (rows, removed) where removed lists eliminated duplicates.
    """
    # near-duplicates (e.g. one measure labeled both x0 and x1) are
    # eliminated before seeding, keeping the higher confidence
    removed = []
    kept = []
    for candidate in sorted(boxes, key=lambda b: (-b.confidence,
                                                  b.x_min, b.y_min)):
        if any(_iou(candidate, k) > DUPLICATE_IOU for k in kept):
            removed.append(candidate)
        else:
            kept.append(candidate)
    boxes = kept

    seeds = sorted((b for b in boxes if b.label in ("x0", "x1")),
                   key=lambda b: (b.y_center, b.x_min))
    if not seeds:
        raise AlignmentError("no clef-bearing (x0/x1) measure box to seed rows")
    rows = [MeasureRow(seed_label=s.label, boxes=[s]) for s in seeds]

    for box in sorted((b for b in boxes if b.label == "y0"),
                      key=lambda b: (b.y_center, b.x_min)):
        overlaps = [(_vertical_overlap(box, row.boxes[0]), i)
                    for i, row in enumerate(rows)]
        frac, index = max(overlaps)
        if frac >= OVERLAP_MIN_FRAC:
            rows[index].boxes.append(box)
        else:
            # no seed overlaps this box enough; best-effort join anyway
            logger.warning("align_measures: y0 box at y=%.0f overlaps no seed "
                           "row well (%.2f), joining nearest", box.y_center, frac)
            rows[index].boxes.append(box)

    for row in rows:
        row.boxes.sort(key=lambda b: b.x_min)
    rows.sort(key=lambda r: r.boxes[0].y_center)
    return rows, removed


def assign_staves(rows):
    """Alternate staff 1 / staff 2 down the page.

    A row seeded by an F-clef measure (x1) anchors to staff 2 and the
    alternation re-synchronizes from it.
    """
    expected = 1
    for row in rows:
        row.staff_id = 2 if row.seed_label == "x1" else expected
        expected = 1 if row.staff_id == 2 else 2
    # pair consecutive (staff 1, staff 2) rows into grand-staff systems
    previous = None
    for row in rows:
        if previous is None:
            row.pair_index = 0
        elif previous.staff_id == 1 and row.staff_id == 2:
            row.pair_index = previous.pair_index
        else:
            row.pair_index = previous.pair_index + 1
        previous = row
    return rows


def extract_measure_units(page, rows, side=raster.DEFAULT_SQUARE_SIDE):
    """Crop, level, and standardize each measure box.

    The crop extends 1.2x the staff height above and below the box (the
    box follows the staff's top and bottom lines), the unit is leveled
    with horizontal-only tilt estimation, and resized to the standard
    square. Output ordered by (staff_id, pair_index, col_index).

    The resize stretches anamorphically so the staff band always spans
    the same fraction of unit height, which the staff-fit search
    depends on.
    """
    page_h, page_w = page.shape[:2]
    units = []
    for row_index, row in enumerate(rows):
        for col_index, box in enumerate(row.boxes):
            margin = MARGIN_FACTOR * box.height
            x0 = int(round(box.x_min))
            x1 = int(round(box.x_max))
            y0 = int(round(box.y_min - margin))
            y1 = int(round(box.y_max + margin))
            cx0, cy0 = max(0, x0), max(0, y0)
            cx1, cy1 = min(page_w, x1), min(page_h, y1)
            if (cx0, cy0, cx1, cy1) != (x0, y0, x1, y1):
                logger.warning("extract_measure_units: crop clamped to page "
                               "for row %d col %d", row_index, col_index)
            crop = page[cy0:cy1, cx0:cx1]
            tilt = raster.estimate_tilt(crop, horizontal_only=True)
            leveled = raster.rotate_level(crop, tilt)
            units.append(MeasureUnit(
                row_index=row_index,
                col_index=col_index,
                staff_id=row.staff_id,
                pair_index=row.pair_index,
                source_rect=(cx0, cy0, cx1, cy1),
                image=cv2.resize(leveled, (side, side),
                                 interpolation=cv2.INTER_AREA),
            ))
    units.sort(key=lambda u: (u.staff_id, u.pair_index, u.col_index))
    return units
