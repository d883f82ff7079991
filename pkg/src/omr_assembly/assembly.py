"""Symbol assembly inside one measure unit.

Confidence-filtered symbol detections become components with staff
positions, horizontally co-located components are stacked into vertical
groups (top to bottom), and each group is resolved into note, chord,
and rest events by a fixed case order. Clef changes and accidentals
update running state as the scan moves left to right.
"""

from dataclasses import dataclass, field, replace
import logging

from . import detect_io
from .detect_io import ARM_LABELS, BEAM_LABELS, duration_of
from .errors import ConfigError
from .staffref import y_to_position

logger = logging.getLogger(__name__)

HORIZONTAL_OVERLAP_FRAC = 0.30   # of the narrower box, for stacking
LETTERS = "CDEFGAB"

# diatonic number = octave * 7 + letter index; position 0 sits on the
# middle staff line (B4 under a G clef, D3 under an F clef)
_CLEF_CENTER = {"G": 4 * 7 + 6, "F": 3 * 7 + 1}

DEFAULT_DIVISIONS = 8


@dataclass(eq=False)  # identity semantics: components are distinct boxes
class SymbolComponent:
    category: str
    label: str
    bbox: tuple                  # (cx, cy, w, h) in unit coordinates
    confidence: float = 1.0
    staff_position: int = None   # bodies, accidentals, rests
    consumed: bool = False

    @property
    def cx(self):
        return self.bbox[0]

    @property
    def cy(self):
        return self.bbox[1]

    @property
    def x_min(self):
        return self.bbox[0] - self.bbox[2] / 2.0

    @property
    def x_max(self):
        return self.bbox[0] + self.bbox[2] / 2.0

    @property
    def is_arm_beam(self):
        return self.category == "arm_beam"

    @property
    def is_arm(self):
        return self.label in ARM_LABELS

    @property
    def is_beam(self):
        return self.label in BEAM_LABELS

    @property
    def is_body(self):
        return self.category == "body"

    @property
    def is_rest(self):
        return self.category == "rest"


@dataclass
class ClefState:
    current: str = "G"


@dataclass
class AccidentalTable:
    key_fifths: int
    key_alters: dict                      # letter -> -1/0/+1
    overrides: dict = field(default_factory=dict)  # (letter, octave) -> alter

    def effective_alter(self, letter, octave):
        if (letter, octave) in self.overrides:
            return self.overrides[(letter, octave)]
        return self.key_alters.get(letter, 0)


@dataclass
class NoteEvent:
    is_rest: bool
    letter: str
    octave: int
    alter: int
    duration: int
    type_name: str
    voice: int
    chord_member: bool = False
    beam_role: str = None        # start | continue | stop
    arm_attachment: str = None   # top | bottom, which arm/beam annotated it
    beam_id: int = None          # identity of the annotating beam component


def init_accidental_table(fifths):
    """Key-signature alters per the circle of fifths."""
    if not -7 <= fifths <= 7:
        raise ConfigError(f"fifths {fifths} outside [-7, +7]")
    sharps = "FCGDAEB"
    flats = "BEADGCF"
    alters = {letter: 0 for letter in LETTERS}
    if fifths > 0:
        for letter in sharps[:fifths]:
            alters[letter] = 1
    elif fifths < 0:
        for letter in flats[:-fifths]:
            alters[letter] = -1
    return AccidentalTable(key_fifths=fifths, key_alters=alters)


def position_to_pitch(clef, position):
    """(letter, octave) for a staff position under the given clef.

    The 25 usable positions run -12..+12; anything outside returns
    None (out-of-range marker).
    """
    sign = clef.current if isinstance(clef, ClefState) else clef
    if position is None or abs(position) > 12:
        return None
    diatonic = _CLEF_CENTER[sign] + position
    return LETTERS[diatonic % 7], diatonic // 7


def components_from_detections(detections, geometry, unit_side=None):
    """Wrap unit-level detections as components with staff positions."""
    components = []
    for det in detections:
        position = None
        if det.category in ("body", "accidental", "rest"):
            position = y_to_position(geometry, det.bbox[1])
        components.append(SymbolComponent(
            category=det.category, label=det.label, bbox=det.bbox,
            confidence=det.confidence, staff_position=position))
    return components


def _h_overlap(a, b):
    inter = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    narrower = min(a.x_max - a.x_min, b.x_max - b.x_min)
    return inter / narrower if narrower > 0 else 0.0


def build_vodms(components):
    """Group horizontally co-located components into vertical stacks.

    Grouping is transitive over pairwise x-interval overlap of at least
    30% of the narrower box. Beams are handled separately: a beam spans
    several note columns, so it joins every group it overlaps instead
    of fusing them (it is reused stack by stack). Each group is ordered
    top to bottom; the groups themselves are ordered by left edge.
    """
    beams = [c for c in components if c.is_beam]
    stackers = [c for c in components if not c.is_beam]
    groups = []
    for comp in sorted(stackers, key=lambda c: (c.x_min, c.cy)):
        matches = [g for g in groups
                   if any(_h_overlap(comp, member) >= HORIZONTAL_OVERLAP_FRAC
                          for member in g)]
        if not matches:
            groups.append([comp])
        else:
            matches[0].append(comp)
            for other in matches[1:]:
                matches[0].extend(other)
                groups.remove(other)
    for beam in sorted(beams, key=lambda c: (c.x_min, c.cy)):
        placed = False
        for group in groups:
            if any(_h_overlap(beam, member) >= HORIZONTAL_OVERLAP_FRAC
                   for member in group if not member.is_beam):
                group.append(beam)
                placed = True
        if not placed:
            groups.append([beam])
    for group in groups:
        group.sort(key=lambda c: (c.cy, c.x_min))
    groups.sort(key=group_left_edge)
    return groups


def group_left_edge(group):
    """Left edge of a stack, ignoring shared beams where possible."""
    anchors = [c.x_min for c in group if not c.is_beam]
    return min(anchors) if anchors else min(c.x_min for c in group)


def _note_from_body(body, arm_beam, voice, clef, table, semantics,
                    divisions, attachment=None):
    pitch = position_to_pitch(clef, body.staff_position)
    if pitch is None:
        return None
    letter, octave = pitch
    label = arm_beam.label if arm_beam is not None else None
    type_name = semantics.note_type(body.label, label)
    if type_name is None:
        return None
    beam_id = id(arm_beam) if arm_beam is not None and arm_beam.is_beam else None
    return NoteEvent(
        is_rest=False, letter=letter, octave=octave,
        alter=table.effective_alter(letter, octave),
        duration=duration_of(type_name, divisions), type_name=type_name,
        voice=voice, arm_attachment=attachment, beam_id=beam_id)


def _rest_event(rest, voice, semantics, divisions):
    type_name = semantics.rest_type.get(rest.label)
    if type_name in (None, detect_io.UNMAPPED):
        return None
    return NoteEvent(is_rest=True, letter=None, octave=None, alter=0,
                     duration=duration_of(type_name, divisions),
                     type_name=type_name, voice=voice)


def _mark_chords(events):
    """Events of the same voice emitted together share one onset; all
    after the first become chord members."""
    seen_voices = set()
    for event in events:
        if event.is_rest:
            continue
        if event.voice in seen_voices:
            event.chord_member = True
        else:
            seen_voices.add(event.voice)
    return events


def _nearest_arm_beam(body, candidates, group=()):
    """Closest unconsumed arm/beam; arms inside the current group stay
    usable for the whole group (a chord shares its stem)."""
    usable = [c for c in candidates
              if c.is_arm_beam and (not c.consumed or c in group)]
    if not usable:
        return None
    return min(usable, key=lambda c: (abs(c.cy - body.cy), c.x_min))


def resolve_vodms(group, clef, table, semantics, measure_components=None,
                  divisions=DEFAULT_DIVISIONS, diagnostics=None):
    """Resolve one vertical stack into note/chord/rest events.

    The first matching case applies, examined in this order: (i) arm or
    beam at both ends, (ii) rest on top, (iii) rest at bottom, (iv) arm
    or beam on top, (v) arm or beam at bottom, (vi) bodies at both ends.
    """
    diagnostics = diagnostics if diagnostics is not None else []
    if not group:
        return []
    members = [c for c in group
               if c.is_body or c.is_rest or c.is_arm_beam]
    mapped = [c for c in members
              if not semantics.is_unmapped(c.category, c.label)]
    if not mapped:
        if members:
            logger.warning("resolve_vodms: group has only unmapped labels")
            diagnostics.extend(f"unmapped {c.category} {c.label}"
                               for c in members)
        return []
    group = mapped
    bodies = [c for c in group if c.is_body]
    rests = [c for c in group if c.is_rest]
    top, bottom = group[0], group[-1]

    def annotate(body, arm_beam, voice, attachment):
        event = _note_from_body(body, arm_beam, voice, clef, table,
                                semantics, divisions, attachment)
        body.consumed = True
        if arm_beam is not None and arm_beam.is_arm:
            arm_beam.consumed = True
        if event is None:
            diagnostics.append(f"unresolvable body {body.label} "
                               f"at position {body.staff_position}")
        return event

    def mid_rest_events(voice=1):
        """Rests inside the stack, split into before/after the bodies."""
        before, after = [], []
        body_top = min((b.cy for b in bodies), default=0.0)
        for rest in rests:
            event = _rest_event(rest, voice, semantics, divisions)
            rest.consumed = True
            if event is None:
                diagnostics.append(f"unmapped rest {rest.label}")
                continue
            (before if rest.cy <= body_top else after).append(event)
        return before, after

    events = []

    if len(group) >= 2 and top.is_arm_beam and bottom.is_arm_beam and bodies:
        # case (i): split bodies between the two arms/beams
        top_group, bottom_group = _split_between_arms(bodies)
        top_group.sort(key=lambda b: b.cy)
        bottom_group.sort(key=lambda b: b.cy)
        before, after = mid_rest_events()
        bottom_events = [annotate(b, bottom, 1, "bottom") for b in bottom_group]
        top_events = [annotate(b, top, 2, "top") for b in top_group]
        events = before + [e for e in bottom_events + top_events
                           if e is not None] + after
    elif top.is_rest and bodies:
        # case (ii): top rest takes voice 2, bodies voice 1
        rest_event = _rest_event(top, 2, semantics, divisions)
        top.consumed = True
        inner = [r for r in rests if r is not top]
        body_events = [_body_with_group_arm(b, group, 1, annotate,
                                            measure_components, diagnostics)
                       for b in bodies]
        events = ([rest_event] if rest_event else []) \
            + [e for e in body_events if e is not None]
        for rest in inner:
            extra = _rest_event(rest, 1, semantics, divisions)
            rest.consumed = True
            if extra is not None:
                events.append(extra)
    elif bottom.is_rest and bodies:
        # case (iii): bottom rest takes voice 1, bodies voice 2
        rest_event = _rest_event(bottom, 1, semantics, divisions)
        bottom.consumed = True
        inner = [r for r in rests if r is not bottom]
        body_events = [_body_with_group_arm(b, group, 2, annotate,
                                            measure_components, diagnostics)
                       for b in bodies]
        events = [e for e in body_events if e is not None]
        for rest in inner:
            extra = _rest_event(rest, 2, semantics, divisions)
            rest.consumed = True
            if extra is not None:
                events.append(extra)
        if rest_event is not None:
            events.append(rest_event)
    elif top.is_arm_beam and bodies:
        # case (iv): single arm/beam on top annotates the stemmed bodies
        before, after = mid_rest_events()
        body_events = []
        for body in bodies:
            if semantics.body_class.get(body.label) == "whole":
                body_events.append(annotate(body, None, 1, None))
            else:
                body_events.append(annotate(body, top, 1, "top"))
        events = before + [e for e in body_events if e is not None] + after
    elif bottom.is_arm_beam and bodies:
        # case (v): mirror of (iv) with the bottom arm/beam
        before, after = mid_rest_events()
        body_events = []
        for body in bodies:
            if semantics.body_class.get(body.label) == "whole":
                body_events.append(annotate(body, None, 1, None))
            else:
                body_events.append(annotate(body, bottom, 1, "bottom"))
        events = before + [e for e in body_events if e is not None] + after
    elif bodies:
        # case (vi): bodies at both ends; stemmed bodies here are
        # misrecognitions and pair with the nearest arm/beam around
        before, after = mid_rest_events()
        body_events = []
        for body in bodies:
            if semantics.body_class.get(body.label) == "whole":
                body_events.append(annotate(body, None, 1, None))
            else:
                arm_beam = _nearest_arm_beam(body, measure_components or [],
                                             group=group)
                if arm_beam is None:
                    diagnostics.append(
                        f"stemmed body {body.label} without arm/beam, "
                        "assuming quarter")
                attachment = None
                if arm_beam is not None:
                    attachment = "top" if arm_beam.cy <= body.cy else "bottom"
                body_events.append(annotate(body, arm_beam, 1, attachment))
        events = before + [e for e in body_events if e is not None] + after
    else:
        # no bodies: free rests, stray arms/beams
        for rest in rests:
            event = _rest_event(rest, 1, semantics, divisions)
            rest.consumed = True
            if event is not None:
                events.append(event)
        for comp in group:
            if comp.is_arm:
                diagnostics.append(f"stray arm {comp.label}")

    return _mark_chords(events)


def _split_between_arms(bodies):
    """Case (i) body split: with two bodies the lower one joins the
    bottom arm; with more, each remaining body joins the side whose
    nearest already-anchored body is vertically closer (ties go to the
    bottom arm, voice 1)."""
    ordered = sorted(bodies, key=lambda b: b.cy)
    if len(ordered) == 1:
        return [], ordered
    top_group = [ordered[0]]
    bottom_group = [ordered[-1]]
    for body in ordered[1:-1]:
        d_top = min(abs(body.cy - b.cy) for b in top_group)
        d_bottom = min(abs(body.cy - b.cy) for b in bottom_group)
        if d_top < d_bottom:
            top_group.append(body)
        else:
            bottom_group.append(body)
    return top_group, bottom_group


def _body_with_group_arm(body, group, voice, annotate, measure_components,
                         diagnostics):
    """Annotate a body using an arm/beam from its own stack when one is
    present, otherwise fall back like case (vi)."""
    arms = [c for c in group if c.is_arm_beam]
    if body is not None and arms:
        arm_beam = min(arms, key=lambda c: abs(c.cy - body.cy))
        attachment = "top" if arm_beam.cy <= body.cy else "bottom"
        return annotate(body, arm_beam, voice, attachment)
    return _resolve_loose_body(body, voice, annotate, measure_components,
                               diagnostics)


def _resolve_loose_body(body, voice, annotate, measure_components,
                        diagnostics):
    arm_beam = _nearest_arm_beam(body, measure_components or [])
    attachment = None
    if arm_beam is not None:
        attachment = "top" if arm_beam.cy <= body.cy else "bottom"
    return annotate(body, arm_beam, voice, attachment)


def assign_beam_roles(events):
    """Derive begin/continue/end roles from horizontal order under each
    beam. Beamed singletons keep no role."""
    by_beam = {}
    for index, event in enumerate(events):
        if event.beam_id is not None and not event.chord_member:
            by_beam.setdefault(event.beam_id, []).append(index)
    for indices in by_beam.values():
        if len(indices) < 2:
            continue
        for rank, index in enumerate(indices):
            if rank == 0:
                events[index].beam_role = "start"
            elif rank == len(indices) - 1:
                events[index].beam_role = "stop"
            else:
                events[index].beam_role = "continue"
    return events


def assemble_measure(components, clef_in, fifths, semantics,
                     divisions=DEFAULT_DIVISIONS):
    """Scan one measure's components left to right and emit its events.

    Returns (events, clef_out, diagnostics). Clefs and accidentals are
    state updates; everything else resolves through the vertical-stack
    cases. A fresh accidental table is built from the key signature, so
    accidental overrides never leak across measures.
    """
    diagnostics = []
    clef = ClefState(clef_in.current if isinstance(clef_in, ClefState)
                     else clef_in)
    table = init_accidental_table(fifths)

    state_updates = [c for c in components
                     if c.category in ("clef", "accidental")]
    stackable = [c for c in components
                 if c.category in ("body", "arm_beam", "rest")]
    groups = build_vodms(stackable)

    items = [(c.x_min, 0, c) for c in state_updates]
    items += [(group_left_edge(g), 1, g) for g in groups]
    items.sort(key=lambda t: (t[0], t[1]))

    events = []
    for _, kind, payload in items:
        if kind == 0:
            comp = payload
            if comp.category == "clef":
                sign = semantics.clef_sign.get(comp.label)
                if sign in (None, detect_io.UNMAPPED):
                    logger.warning("unmapped clef label %s skipped", comp.label)
                    diagnostics.append(f"unmapped clef {comp.label}")
                else:
                    clef.current = sign
                comp.consumed = True
            else:
                alter = semantics.accidental_alter.get(comp.label)
                pitch = position_to_pitch(clef, comp.staff_position)
                if alter in (None, detect_io.UNMAPPED) or pitch is None:
                    diagnostics.append(f"unresolvable accidental {comp.label}")
                else:
                    table.overrides[pitch] = alter
                comp.consumed = True
        else:
            events.extend(resolve_vodms(
                payload, clef, table, semantics,
                measure_components=stackable, divisions=divisions,
                diagnostics=diagnostics))

    for comp in stackable:
        if comp.is_arm and not comp.consumed:
            if not any(f"stray arm {comp.label}" == d for d in diagnostics):
                diagnostics.append(f"stray arm {comp.label}")

    assign_beam_roles(events)
    return events, clef, diagnostics
