"""Staff-line fitting inside a standardized measure unit.

The unit's whole height is normalized to 1.0 and the staff occupies the
central band, with margins of 1.2x the staff height above and below.
Two parameters position the simulated five lines: a vertical offset of
the middle line from the unit center, and a uniform increment of the
gap between adjacent lines. Both are searched exhaustively on a small
grid; the candidate whose superimposed lines add the least black area
after adaptive thresholding wins.
"""

from dataclasses import dataclass, field
import logging

import cv2
import numpy as np

logger = logging.getLogger(__name__)

MARGIN_FACTOR = 1.2                       # extra area above and below the staff
STAFF_HEIGHT_NORM = 1.0 / (1.0 + 2.0 * MARGIN_FACTOR)
BASE_GAP = STAFF_HEIGHT_NORM / 4.0

LINE_THICKNESS = 2                        # px, when drawing simulated lines
THRESH_BLOCK_SIZE = 15
THRESH_C = 4
DARK_FLOOR = 64  # absolutely dark pixels stay black even where the
                 # local mean is itself dark (thick lines, saturation)

POSITION_LIMIT = 12                       # |staff position| beyond this is ignored


@dataclass(frozen=True)
class StaffGeometry:
    alpha: float
    beta: float
    line_ys: tuple          # 5 ordinates, top to bottom, in [0,1]
    ledger_ys: tuple = ()   # extension lines continued through the margins

    @property
    def middle_y(self):
        return self.line_ys[2]

    @property
    def gap(self):
        return self.line_ys[1] - self.line_ys[0]


@dataclass(frozen=True)
class SearchGrid:
    alpha_min: float = -0.03
    alpha_max: float = 0.03
    alpha_step: float = 0.01
    beta_min: float = -0.005
    beta_max: float = 0.005
    beta_step: float = 0.001

    def alphas(self):
        n = round((self.alpha_max - self.alpha_min) / self.alpha_step)
        return [round(self.alpha_min + i * self.alpha_step, 9) for i in range(n + 1)]

    def betas(self):
        n = round((self.beta_max - self.beta_min) / self.beta_step)
        return [round(self.beta_min + i * self.beta_step, 9) for i in range(n + 1)]


def simulate_lines(alpha, beta, with_ledger=True):
    """Five-line geometry for the given offset/spacing parameters."""
    middle = 0.5 + alpha
    gap = BASE_GAP + beta
    lines = tuple(middle + k * gap for k in range(-2, 3))
    ledger = ()
    if with_ledger:
        above = []
        y = lines[0] - gap
        while y >= 0.0:
            above.append(y)
            y -= gap
        below = []
        y = lines[4] + gap
        while y <= 1.0:
            below.append(y)
            y += gap
        ledger = tuple(reversed(above)) + tuple(below)
    return StaffGeometry(alpha, beta, lines, ledger)


def line_rows(y_norm, height, thickness=LINE_THICKNESS):
    """Pixel rows covered by a horizontal line at normalized ordinate y.

    Shared by the scorer and the synthetic renderers so a matching
    candidate rasterizes onto exactly the same rows.
    """
    top = int(np.floor(y_norm * height + 0.5)) - thickness // 2
    return [r for r in range(top, top + thickness) if 0 <= r < height]


def _threshold(unit):
    binary = cv2.adaptiveThreshold(
        unit, 255, cv2.ADAPTIVE_THRESH_GAUSSIAN_C, cv2.THRESH_BINARY,
        THRESH_BLOCK_SIZE, THRESH_C)
    binary[unit <= DARK_FLOOR] = 0
    return binary


def black_area_score(unit, geometry):
    """Black pixel count after drawing the candidate lines and applying
    Gaussian adaptive thresholding; lower means better line overlap."""
    canvas = unit.copy()
    height = canvas.shape[0]
    for y in geometry.line_ys:
        for row in line_rows(y, height):
            canvas[row, :] = 0
    binary = _threshold(canvas)
    return int(np.count_nonzero(binary == 0))


def fit_staff(unit, grid=SearchGrid()):
    """Exhaustive grid search for the best-fitting staff geometry.

    Ties break toward smaller |alpha| then smaller |beta|; a completely
    flat score surface falls back to (0, 0) with a warning.
    """
    best = None
    scores = set()
    for alpha in grid.alphas():
        for beta in grid.betas():
            geometry = simulate_lines(alpha, beta)
            score = black_area_score(unit, geometry)
            scores.add(score)
            key = (score, abs(alpha), abs(beta))
            if best is None or key < best[0]:
                best = (key, alpha, beta, geometry)
    if len(scores) == 1:
        logger.warning("fit_staff: flat score surface, falling back to (0, 0)")
        geometry = simulate_lines(0.0, 0.0)
        return 0.0, 0.0, geometry
    _, alpha, beta, geometry = best
    return alpha, beta, geometry


def y_to_position(geometry, y):
    """Staff position of a normalized ordinate: half-gap steps from the
    middle line, up positive. Returns None (out-of-range marker) beyond
    +/-12."""
    half_gap = geometry.gap / 2.0
    position = round((geometry.middle_y - y) / half_gap)
    if abs(position) > POSITION_LIMIT:
        logger.warning("y_to_position: position %d out of range", position)
        return None
    return int(position)
