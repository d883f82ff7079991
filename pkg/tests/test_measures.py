import random

import pytest

from omr_assembly import measures, raster, synthetic
from omr_assembly.errors import AlignmentError
from omr_assembly.measures import (MeasureBox, align_measures, assign_staves,
                                   extract_measure_units)


def box(label, x, y, w=100, h=40, confidence=0.9):
    return MeasureBox(label, x, y, x + w, y + h, confidence)


def menuet_layout():
    """66 measure boxes: 6 rows of 11, alternating G/F clef seeds."""
    boxes = []
    for row in range(6):
        y = 100 + row * 120
        seed = "x0" if row % 2 == 0 else "x1"
        for col in range(11):
            label = seed if col == 0 else "y0"
            boxes.append(box(label, 50 + col * 110, y))
    return boxes


class TestAlignMeasures:
    def test_menuet_count_preserved(self):
        rows, removed = align_measures(menuet_layout())
        assert removed == []
        assert sum(len(r.boxes) for r in rows) == 66
        assert [len(r.boxes) for r in rows] == [11] * 6

    def test_single_box(self):
        rows, removed = align_measures([box("x0", 10, 10)])
        assert len(rows) == 1 and len(rows[0].boxes) == 1

    def test_double_label_duplicate_removed(self):
        # the same measure recognized as both x0 and x1
        dup_lo = box("x1", 50, 100, confidence=0.7)
        dup_hi = box("x0", 52, 101, confidence=0.9)
        other = box("y0", 160, 100)
        rows, removed = align_measures([dup_lo, dup_hi, other])
        assert removed == [dup_lo]
        kept = [b for r in rows for b in r.boxes]
        assert dup_hi in kept and dup_lo not in kept

    def test_no_seed_raises(self):
        with pytest.raises(AlignmentError):
            align_measures([box("y0", 10, 10)])

    def test_rows_sorted_and_columns_increasing(self):
        rows, _ = align_measures(menuet_layout())
        centers = [r.boxes[0].y_center for r in rows]
        assert centers == sorted(centers)
        for row in rows:
            lefts = [b.x_min for b in row.boxes]
            assert lefts == sorted(lefts)

    def test_permutation_invariant(self):
        baseline, _ = align_measures(menuet_layout())
        shuffled = menuet_layout()
        random.Random(7).shuffle(shuffled)
        rows, _ = align_measures(shuffled)
        assert [[(b.label, b.x_min) for b in r.boxes] for r in rows] == \
            [[(b.label, b.x_min) for b in r.boxes] for r in baseline]

    def test_no_box_silently_dropped(self):
        boxes = menuet_layout() + [box("x0", 51, 100, confidence=0.5)]
        rows, removed = align_measures(boxes)
        assert sum(len(r.boxes) for r in rows) + len(removed) == len(boxes)


class TestAssignStaves:
    def staves(self, seeds):
        rows, _ = align_measures(
            [box(seed, 10, 100 + i * 120) for i, seed in enumerate(seeds)])
        return [r.staff_id for r in assign_staves(rows)]

    def test_alternation(self):
        assert self.staves(["x0", "x1", "x0", "x1"]) == [1, 2, 1, 2]

    def test_two_g_clef_rows(self):
        assert self.staves(["x0", "x0"]) == [1, 2]

    def test_f_clef_anchor_overrides(self):
        assert self.staves(["x1", "x0"]) == [2, 1]

    def test_pairing(self):
        rows, _ = align_measures(
            [box(s, 10, 100 + i * 120)
             for i, s in enumerate(["x0", "x1", "x0", "x1"])])
        assign_staves(rows)
        assert [r.pair_index for r in rows] == [0, 0, 1, 1]


def two_row_page(n_measures=2):
    layout = synthetic.PageLayout(width=1000, height=800)
    layout.add_row(250, n_measures, "x0")
    layout.add_row(550, n_measures, "x1")
    boxes = [
        MeasureBox(d.label,
                   d.x_min * layout.width, d.y_min * layout.height,
                   d.x_max * layout.width, d.y_max * layout.height,
                   d.confidence)
        for d in layout.measure_detections
    ]
    return layout, boxes


class TestExtractMeasureUnits:
    def test_straight_page_level_units(self):
        layout, boxes = two_row_page()
        rows, _ = align_measures(boxes)
        assign_staves(rows)
        units = extract_measure_units(layout.image, rows)
        assert len(units) == 4
        for unit in units:
            assert unit.image.shape == (416, 416)
            assert abs(raster.estimate_tilt(unit.image,
                                            horizontal_only=True)) <= 0.5

    def test_margin_factor(self):
        layout, boxes = two_row_page()
        rows, _ = align_measures(boxes)
        assign_staves(rows)
        units = extract_measure_units(layout.image, rows)
        expected = layout.staff_height * (1 + 2 * 1.2)
        for unit in units:
            x0, y0, x1, y1 = unit.source_rect
            assert (y1 - y0) == pytest.approx(expected, abs=1)

    def test_locally_tilted_measure_leveled(self):
        layout, boxes = two_row_page()
        # overwrite the second measure of the top row with a tilted staff
        x0 = layout.x_start + layout.measure_width
        region = synthetic.blank(layout.measure_width, 300)
        synthetic.draw_staff(region, 10, layout.measure_width - 10, 150,
                             layout.gap)
        tilted = synthetic.rotate_by(region, 2.0)
        layout.image[100:400, x0:x0 + layout.measure_width] = tilted
        rows, _ = align_measures(boxes)
        assign_staves(rows)
        units = extract_measure_units(layout.image, rows)
        tilted_unit = [u for u in units if u.staff_id == 1][1]
        assert abs(raster.estimate_tilt(tilted_unit.image,
                                        horizontal_only=True)) <= 0.5

    def test_crop_clamped_at_page_edge(self):
        layout, boxes = two_row_page()
        near_top = MeasureBox("y0", 100, 5, 400, 85, 0.9)
        rows, _ = align_measures(boxes + [near_top])
        assign_staves(rows)
        units = extract_measure_units(layout.image, rows)
        for unit in units:
            x0, y0, x1, y1 = unit.source_rect
            assert y0 >= 0 and y1 <= layout.height

    def test_reading_order(self):
        layout, boxes = two_row_page()
        rows, _ = align_measures(boxes)
        assign_staves(rows)
        units = extract_measure_units(layout.image, rows)
        keys = [(u.staff_id, u.pair_index, u.col_index) for u in units]
        assert keys == sorted(keys)
