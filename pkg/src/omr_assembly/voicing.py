"""Per-measure duration capacity checks and voice reassignment.

An overfull measure is repaired by escalating reassignments: notes
stemmed from above move to voice 2, then notes stemmed from below pin
to voice 1 with the stemless remainder moving to voice 2, then whole
notes move to voice 2. Each stage is followed by a recheck.
"""

from dataclasses import dataclass
import logging

from .errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeSpec:
    beats: int = 4
    beat_type: int = 4
    divisions: int = 8

    def __post_init__(self):
        if self.beats <= 0:
            raise ConfigError(f"beats must be positive, got {self.beats}")
        if self.beat_type <= 0 or self.beat_type & (self.beat_type - 1):
            raise ConfigError(
                f"beat_type must be a power of two, got {self.beat_type}")
        if self.divisions <= 0:
            raise ConfigError("divisions must be positive")


def measure_capacity(spec):
    """Total divisions a full measure holds."""
    capacity = spec.beats * spec.divisions * 4 // spec.beat_type
    if capacity * spec.beat_type != spec.beats * spec.divisions * 4:
        raise ConfigError(
            f"divisions {spec.divisions} cannot represent {spec.beats}/"
            f"{spec.beat_type}")
    return capacity


def _chord_groups(events):
    """Events grouped so a chord (anchor plus members) moves together."""
    groups = []
    for event in events:
        if event.chord_member and groups:
            groups[-1].append(event)
        else:
            groups.append([event])
    return groups


def _voice_totals(events):
    totals = {1: 0, 2: 0}
    for group in _chord_groups(events):
        anchor = group[0]
        totals[anchor.voice] = totals.get(anchor.voice, 0) + anchor.duration
    return totals


def _fits(events, capacity):
    totals = _voice_totals(events)
    return all(total <= capacity for total in totals.values())


def adjust_voices(sequence, capacity):
    """Reassign voices until both fit the capacity, or give up with a
    diagnostic. Only the voice field ever changes.

    Returns (events, diagnostics).
    """
    events = sequence
    diagnostics = []
    if _fits(events, capacity):
        return events, diagnostics

    def move(group, voice):
        for event in group:
            event.voice = voice

    groups = _chord_groups(events)

    # (i) bodies annotated via a top arm/beam -> voice 2
    for group in groups:
        if not group[0].is_rest and group[0].arm_attachment == "top":
            move(group, 2)
    if _fits(events, capacity):
        return events, diagnostics

    # (ii) bodies via a bottom arm/beam -> voice 1; stemless rest -> voice 2
    for group in groups:
        if group[0].is_rest:
            continue
        if group[0].arm_attachment == "bottom":
            move(group, 1)
        elif group[0].arm_attachment is None:
            move(group, 2)
    if _fits(events, capacity):
        return events, diagnostics

    # (iii) whole notes -> voice 2
    for group in groups:
        if not group[0].is_rest and group[0].type_name == "whole":
            move(group, 2)
    if not _fits(events, capacity):
        totals = _voice_totals(events)
        diagnostics.append(
            f"overfull measure after voice adjustment: voice totals "
            f"{totals[1]}/{totals[2]} against capacity {capacity}")
    return events, diagnostics
