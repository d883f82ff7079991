"""Grayscale page handling: tilt estimation and leveling.

Images are 2-D uint8 numpy arrays (row-major grayscale, 0=black,
255=white). Color inputs are accepted by :func:`to_grayscale` as
H x W x 3 BGR arrays, matching what ``cv2.imread`` returns.
"""

from dataclasses import dataclass
import logging
import math

import cv2
import numpy as np

from .errors import InputFormatError

logger = logging.getLogger(__name__)

# Edge / line detection defaults. Tunable through the functions' keyword
# arguments; staff lines span most of a measure or page, hence the long
# minimum segment length.
CANNY_LOW = 50
CANNY_HIGH = 150
BLUR_SIGMA = 1.0
HOUGH_MIN_LINE_FRAC = 0.25  # of image width
HOUGH_MAX_GAP = 5
HOUGH_THRESHOLD = 50
HORIZONTAL_MAX_ANGLE = 30.0  # per-measure mode keeps only near-horizontal lines

DEFAULT_SQUARE_SIDE = 416
WHITE = 255


@dataclass(frozen=True)
class LineSegment:
    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def length(self):
        return math.hypot(self.x2 - self.x1, self.y2 - self.y1)

    @property
    def angle_deg(self):
        """Angle above horizontal in (-90, 90], y axis pointing down."""
        dx = self.x2 - self.x1
        dy = self.y2 - self.y1
        ang = math.degrees(math.atan2(-dy, dx))
        if ang <= -90.0:
            ang += 180.0
        elif ang > 90.0:
            ang -= 180.0
        return ang


def load_image(path):
    """Read a PNG/JPEG file as grayscale."""
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise InputFormatError(f"cannot decode image: {path}")
    return to_grayscale(img)


def to_grayscale(image):
    """Convert a color (BGR) or grayscale array to 2-D uint8 grayscale."""
    arr = np.asarray(image)
    if arr.ndim == 2:
        return arr.astype(np.uint8, copy=False)
    if arr.ndim == 3 and arr.shape[2] in (3, 4):
        if arr.shape[0] == 0 or arr.shape[1] == 0:
            raise InputFormatError("empty image")
        code = cv2.COLOR_BGR2GRAY if arr.shape[2] == 3 else cv2.COLOR_BGRA2GRAY
        return cv2.cvtColor(arr.astype(np.uint8, copy=False), code)
    raise InputFormatError(f"unsupported image shape {arr.shape}")


def detect_lines(image, min_line_frac=HOUGH_MIN_LINE_FRAC):
    """Canny edges followed by probabilistic Hough segments."""
    blurred = cv2.GaussianBlur(image, (0, 0), BLUR_SIGMA)
    edges = cv2.Canny(blurred, CANNY_LOW, CANNY_HIGH)
    min_len = max(10, int(image.shape[1] * min_line_frac))
    raw = cv2.HoughLinesP(
        edges,
        rho=1,
        theta=np.pi / 360,
        threshold=HOUGH_THRESHOLD,
        minLineLength=min_len,
        maxLineGap=HOUGH_MAX_GAP,
    )
    if raw is None:
        return []
    return [LineSegment(float(x1), float(y1), float(x2), float(y2))
            for x1, y1, x2, y2 in raw.reshape(-1, 4)]


def estimate_tilt(image, horizontal_only=False):
    """Tilt of the longest detected straight line, in degrees.

    With ``horizontal_only`` set, lines steeper than 30 degrees are
    ignored (per-measure mode, where barlines would otherwise win).
    Returns 0.0 with a warning when no line is found.
    """
    lines = detect_lines(image)
    if horizontal_only:
        lines = [ln for ln in lines if abs(ln.angle_deg) <= HORIZONTAL_MAX_ANGLE]
    if not lines:
        logger.warning("estimate_tilt: no straight line found, assuming level")
        return 0.0
    # Longest line wins; ties go to the smaller |angle| (level hypothesis).
    best = max(lines, key=lambda ln: (ln.length, -abs(ln.angle_deg)))
    return best.angle_deg


def rotate_level(image, angle):
    """Rotate the image by -angle about its center so a line tilted by
    ``angle`` becomes horizontal. Bilinear resampling, white fill,
    dimensions preserved."""
    if angle == 0.0:
        return image.copy()
    if abs(angle) > 45.0:
        logger.warning("rotate_level: angle %.1f beyond +/-45, clamping", angle)
        angle = math.copysign(45.0, angle)
    h, w = image.shape[:2]
    center = ((w - 1) / 2.0, (h - 1) / 2.0)
    # cv2's positive angle turns the content counter-clockwise on screen,
    # which cancels a positive (upward-to-the-right) tilt.
    matrix = cv2.getRotationMatrix2D(center, -angle, 1.0)
    return cv2.warpAffine(
        image, matrix, (w, h),
        flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_CONSTANT,
        borderValue=WHITE,
    )


def resize_square(image, side=DEFAULT_SQUARE_SIDE):
    """Pad to square with white, then scale to side x side.

    Padding before scaling keeps staff-line spacing isotropic.
    """
    if side <= 0:
        raise ValueError("side must be positive")
    h, w = image.shape[:2]
    if h == w:
        padded = image
    else:
        size = max(h, w)
        padded = np.full((size, size), WHITE, dtype=np.uint8)
        top = (size - h) // 2
        left = (size - w) // 2
        padded[top:top + h, left:left + w] = image
    if padded.shape[0] == side:
        return padded.copy()
    interp = cv2.INTER_AREA if padded.shape[0] > side else cv2.INTER_LINEAR
    return cv2.resize(padded, (side, side), interpolation=interp)
