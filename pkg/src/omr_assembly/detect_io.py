"""Detection interchange format, label registry, and symbol semantics.

A detection file has one record per line::

    category label confidence cx cy w h

with `#` comments, UTF-8, coordinates normalized to [0,1] relative to
the image the detection was made in.
"""

from dataclasses import dataclass, field
import io
import logging

import yaml

from .errors import ConfigError, DetectionParseError, DetectionValidationError

logger = logging.getLogger(__name__)

CATEGORIES = ("measure", "accidental", "arm_beam", "body", "clef", "rest")

LABEL_REGISTRY = {
    "measure": ("x0", "x1", "y0"),
    "accidental": ("ac0", "ac1", "ac2"),
    "arm_beam": ("am0", "am1", "am2", "am3", "bm0", "bm1", "bm2", "bm3"),
    "body": ("bd0", "bd1", "bd2", "bd3", "bd4", "bd5"),
    "clef": ("cf0", "cf1", "cf2"),
    "rest": ("re0", "re1", "re2", "re3", "re4", "re5"),
}

ARM_LABELS = ("am0", "am1", "am2", "am3")
BEAM_LABELS = ("bm0", "bm1", "bm2", "bm3")

DEFAULT_CONFIDENCE_THRESHOLD = 0.60


@dataclass(frozen=True)
class Detection:
    category: str
    label: str
    confidence: float
    bbox: tuple  # (cx, cy, w, h), normalized

    def __post_init__(self):
        if self.category not in LABEL_REGISTRY:
            raise DetectionValidationError(f"unknown category {self.category!r}")
        if self.label not in LABEL_REGISTRY[self.category]:
            raise DetectionValidationError(
                f"label {self.label!r} not valid for category {self.category!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise DetectionValidationError(
                f"confidence {self.confidence} outside [0,1]")
        cx, cy, w, h = self.bbox
        if not (0.0 < w <= 1.0 and 0.0 < h <= 1.0):
            raise DetectionValidationError(f"bbox size ({w}, {h}) outside (0,1]")

    @property
    def x_min(self):
        return self.bbox[0] - self.bbox[2] / 2.0

    @property
    def x_max(self):
        return self.bbox[0] + self.bbox[2] / 2.0

    @property
    def y_min(self):
        return self.bbox[1] - self.bbox[3] / 2.0

    @property
    def y_max(self):
        return self.bbox[1] + self.bbox[3] / 2.0


def load_detections(source):
    """Parse detection records from a byte/text stream or a file path."""
    if isinstance(source, (str, bytes)) and not isinstance(source, bytes):
        with open(source, "r", encoding="utf-8") as fh:
            return load_detections(fh)
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))
    detections = []
    for lineno, line in enumerate(source, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        fields = text.split()
        if len(fields) != 7:
            raise DetectionParseError(
                f"expected 7 fields, got {len(fields)}", line=lineno)
        category, label = fields[0], fields[1]
        try:
            numbers = [float(v) for v in fields[2:]]
        except ValueError as exc:
            raise DetectionParseError(str(exc), line=lineno) from exc
        detections.append(Detection(category, label, numbers[0],
                                    tuple(numbers[1:])))
    return detections


def serialize_detections(detections):
    """Canonical text form; round-trips byte-identically through
    :func:`load_detections`."""
    lines = []
    for d in detections:
        cx, cy, w, h = d.bbox
        lines.append(f"{d.category} {d.label} {d.confidence!r} "
                     f"{cx!r} {cy!r} {w!r} {h!r}\n")
    return "".join(lines)


def filter_confidence(detections, thresholds=None):
    """Keep detections at or above their category's threshold.

    ``thresholds`` maps category -> [0,1]; missing categories use the
    default 0.60.
    """
    thresholds = thresholds or {}
    for cat, value in thresholds.items():
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"threshold for {cat} outside [0,1]: {value}")
    return [d for d in detections
            if d.confidence >= thresholds.get(d.category,
                                              DEFAULT_CONFIDENCE_THRESHOLD)]


# --- symbol semantics ------------------------------------------------------

UNMAPPED = "unmapped"

# Note type names ordered long to short; divisions-per-quarter fixes the
# integer duration of each.
TYPE_NAMES = ("whole", "half", "quarter", "eighth", "16th", "32nd")


def duration_of(type_name, divisions):
    quarters = {"whole": 4.0, "half": 2.0, "quarter": 1.0,
                "eighth": 0.5, "16th": 0.25, "32nd": 0.125}[type_name]
    value = quarters * divisions
    if value != int(value):
        raise ConfigError(
            f"divisions {divisions} cannot represent a {type_name}")
    return int(value)


@dataclass(frozen=True)
class SemanticsTable:
    """Per-label semantic attributes for the five symbol categories."""

    accidental_alter: dict = field(default_factory=dict)   # label -> -1/0/+1
    clef_sign: dict = field(default_factory=dict)          # label -> "G"/"F"
    body_class: dict = field(default_factory=dict)         # label -> closed/open/whole
    arm_flags: dict = field(default_factory=dict)          # label -> flag count
    arm_direction: dict = field(default_factory=dict)      # label -> up/down
    beam_count: dict = field(default_factory=dict)         # label -> beams
    rest_type: dict = field(default_factory=dict)          # label -> type name

    def is_unmapped(self, category, label):
        table = {
            "accidental": self.accidental_alter,
            "clef": self.clef_sign,
            "body": self.body_class,
            "rest": self.rest_type,
        }.get(category)
        if table is None:
            table = self.arm_flags if label in ARM_LABELS else self.beam_count
        return table.get(label, UNMAPPED) == UNMAPPED

    def note_type(self, body_label, arm_beam_label=None):
        """Note type name for a body, optionally annotated by an arm or
        beam label. Returns None for an unresolvable combination."""
        cls = self.body_class.get(body_label)
        if cls in (None, UNMAPPED):
            return None
        if cls == "whole":
            return "whole"
        if cls == "open":
            return "half"
        # closed bodies: plain stem = quarter, flags/beams shorten
        if arm_beam_label is None:
            return "quarter"
        if arm_beam_label in ARM_LABELS:
            flags = self.arm_flags.get(arm_beam_label, 0)
            return {0: "quarter", 1: "eighth", 2: "16th", 3: "32nd"}[flags]
        beams = self.beam_count.get(arm_beam_label, 1)
        return {1: "eighth", 2: "16th", 3: "32nd"}[beams]


_DEFAULT_SEMANTICS = {
    "accidental": {"ac0": 1, "ac1": -1, "ac2": 0},
    "clef": {"cf0": "G", "cf1": "F", "cf2": UNMAPPED},
    "body": {"bd0": "closed", "bd1": "closed", "bd2": "open", "bd3": "open",
             "bd4": "whole", "bd5": "whole"},
    "arm": {"am0": {"flags": 0, "direction": "up"},
            "am1": {"flags": 0, "direction": "down"},
            "am2": {"flags": 1, "direction": "up"},
            "am3": {"flags": 1, "direction": "down"}},
    "beam": {"bm0": 1, "bm1": 1, "bm2": 2, "bm3": 2},
    "rest": {"re0": "whole", "re1": "half", "re2": "quarter",
             "re3": "eighth", "re4": "16th", "re5": "32nd"},
}


def load_semantics(source=None):
    """Build the semantics table from a YAML config, or the defaults.

    The config mirrors the registry label keys; any label may be set to
    the string ``unmapped``. A registry label missing from the config
    (and not marked unmapped) is a config error.
    """
    data = _DEFAULT_SEMANTICS
    if source is not None:
        if isinstance(source, (str, bytes)):
            with open(source, "r", encoding="utf-8") as fh:
                data = yaml.safe_load(fh)
        else:
            data = yaml.safe_load(source)
        _validate_semantics_config(data)
    table = SemanticsTable()
    table.accidental_alter.update(data["accidental"])
    table.clef_sign.update(data["clef"])
    table.body_class.update(data["body"])
    for label, entry in data["arm"].items():
        if entry == UNMAPPED:
            table.arm_flags[label] = UNMAPPED
            table.arm_direction[label] = UNMAPPED
        else:
            table.arm_flags[label] = entry["flags"]
            table.arm_direction[label] = entry["direction"]
    table.beam_count.update(data["beam"])
    table.rest_type.update(data["rest"])
    return table


def _validate_semantics_config(data):
    sections = {
        "accidental": LABEL_REGISTRY["accidental"],
        "clef": LABEL_REGISTRY["clef"],
        "body": LABEL_REGISTRY["body"],
        "arm": ARM_LABELS,
        "beam": BEAM_LABELS,
        "rest": LABEL_REGISTRY["rest"],
    }
    for section, labels in sections.items():
        entries = data.get(section)
        if entries is None:
            raise ConfigError(f"semantics config missing section {section!r}")
        for label in labels:
            if label not in entries:
                raise ConfigError(
                    f"semantics config missing label {label!r} "
                    f"(mark it {UNMAPPED!r} to skip)")
