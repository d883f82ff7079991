"""Document tree construction and MusicXML score-partwise output.

Staff 1 and staff 2 become two parts (P1, P2) of one score-partwise
document; serialization is byte-deterministic (fixed element order,
two-space indentation).
"""

from dataclasses import dataclass, field
import logging
import xml.etree.ElementTree as ET

from .voicing import measure_capacity

logger = logging.getLogger(__name__)

DOCTYPE = ('<!DOCTYPE score-partwise PUBLIC '
           '"-//Recordare//DTD MusicXML 3.1 Partwise//EN" '
           '"http://www.musicxml.org/dtds/partwise.dtd">')

CLEF_LINES = {"G": 2, "F": 4}
BEAM_TEXT = {"start": "begin", "continue": "continue", "stop": "end"}


@dataclass
class Measure:
    number: int
    events: list = field(default_factory=list)
    clef: str = None        # emitted when set (measure 1 or on change)
    first: bool = False     # carries divisions/key/time attributes


@dataclass
class Part:
    part_id: str
    name: str
    measures: list = field(default_factory=list)


@dataclass
class ScoreTree:
    parts: list
    time_spec: object
    fifths: int
    diagnostics: list = field(default_factory=list)


def _whole_measure_rest(capacity):
    from .assembly import NoteEvent
    return NoteEvent(is_rest=True, letter=None, octave=None, alter=0,
                     duration=capacity, type_name="whole", voice=1)


def build_tree(staff1_measures, staff2_measures, spec, fifths):
    """Assemble two part trees from per-measure (events, clef_in) lists.

    Each staff list holds (events, clef_sign) tuples in reading order.
    A shorter part is padded with whole-rest measures (with a
    diagnostic); clef attributes are emitted in measure 1 and whenever
    the clef changed from the previous measure.
    """
    diagnostics = []
    capacity = measure_capacity(spec)
    count = max(len(staff1_measures), len(staff2_measures))
    default_clefs = ("G", "F")
    parts = []
    for part_index, (part_id, name, source) in enumerate(
            (("P1", "Staff 1", staff1_measures),
             ("P2", "Staff 2", staff2_measures))):
        part = Part(part_id=part_id, name=name)
        previous_clef = None
        for number in range(1, count + 1):
            if number <= len(source):
                events, clef_sign = source[number - 1]
            else:
                events, clef_sign = ([_whole_measure_rest(capacity)],
                                     previous_clef or default_clefs[part_index])
                diagnostics.append(
                    f"{part_id}: padded empty measure {number}")
            if clef_sign is None:
                clef_sign = previous_clef or default_clefs[part_index]
            measure = Measure(number=number, events=list(events),
                              first=(number == 1))
            if previous_clef is None or clef_sign != previous_clef:
                measure.clef = clef_sign
            previous_clef = clef_sign
            part.measures.append(measure)
        parts.append(part)
    return ScoreTree(parts=parts, time_spec=spec, fifths=fifths,
                     diagnostics=diagnostics)


def _note_element(parent, event):
    note = ET.SubElement(parent, "note")
    if event.chord_member:
        ET.SubElement(note, "chord")
    if event.is_rest:
        ET.SubElement(note, "rest")
    else:
        pitch = ET.SubElement(note, "pitch")
        ET.SubElement(pitch, "step").text = event.letter
        if event.alter:
            ET.SubElement(pitch, "alter").text = str(event.alter)
        ET.SubElement(pitch, "octave").text = str(event.octave)
    ET.SubElement(note, "duration").text = str(event.duration)
    ET.SubElement(note, "voice").text = str(event.voice)
    ET.SubElement(note, "type").text = event.type_name
    if event.beam_role is not None:
        beam = ET.SubElement(note, "beam", number="1")
        beam.text = BEAM_TEXT[event.beam_role]
    return note


def serialize(tree):
    """Byte-deterministic MusicXML 3.1 score-partwise text."""
    root = ET.Element("score-partwise", version="3.1")
    part_list = ET.SubElement(root, "part-list")
    for part in tree.parts:
        score_part = ET.SubElement(part_list, "score-part", id=part.part_id)
        ET.SubElement(score_part, "part-name").text = part.name
    for part in tree.parts:
        part_el = ET.SubElement(root, "part", id=part.part_id)
        for measure in part.measures:
            measure_el = ET.SubElement(part_el, "measure",
                                       number=str(measure.number))
            if measure.first or measure.clef is not None:
                attributes = ET.SubElement(measure_el, "attributes")
                if measure.first:
                    ET.SubElement(attributes, "divisions").text = \
                        str(tree.time_spec.divisions)
                    key = ET.SubElement(attributes, "key")
                    ET.SubElement(key, "fifths").text = str(tree.fifths)
                    time = ET.SubElement(attributes, "time")
                    ET.SubElement(time, "beats").text = \
                        str(tree.time_spec.beats)
                    ET.SubElement(time, "beat-type").text = \
                        str(tree.time_spec.beat_type)
                if measure.clef is not None:
                    clef = ET.SubElement(attributes, "clef")
                    ET.SubElement(clef, "sign").text = measure.clef
                    ET.SubElement(clef, "line").text = \
                        str(CLEF_LINES[measure.clef])
            for event in measure.events:
                _note_element(measure_el, event)
    ET.indent(root, space="  ")
    body = ET.tostring(root, encoding="unicode")
    return ('<?xml version="1.0" encoding="UTF-8"?>\n'
            + DOCTYPE + "\n" + body + "\n")


def split_by_staff(tree):
    """Two single-part trees, one per staff, for --split-staves."""
    result = []
    for part in tree.parts:
        result.append(ScoreTree(parts=[part], time_spec=tree.time_spec,
                                fifths=tree.fifths,
                                diagnostics=list(tree.diagnostics)))
    return result
