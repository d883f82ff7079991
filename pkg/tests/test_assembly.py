import random

import pytest

from omr_assembly import assembly
from omr_assembly.assembly import (AccidentalTable, ClefState,
                                   SymbolComponent, assemble_measure,
                                   build_vodms, init_accidental_table,
                                   position_to_pitch, resolve_vodms)
from omr_assembly.errors import ConfigError
from omr_assembly.synthetic import unit_y

LETTERS = "CDEFGAB"


def comp(category, label, cy, cx=0.5, w=0.08, h=0.05, pos=None):
    return SymbolComponent(category=category, label=label,
                           bbox=(cx, cy, w, h), staff_position=pos)


def body(label="bd0", pos=0, cx=0.5):
    return comp("body", label, unit_y(pos), cx=cx, pos=pos)


def arm(label="am0", cy=0.3, cx=0.5):
    return comp("arm_beam", label, cy, cx=cx)


def rest(label="re2", pos=0, cx=0.5):
    return comp("rest", label, unit_y(pos), cx=cx, pos=pos)


class TestAccidentalTable:
    def test_fifths_zero(self):
        table = init_accidental_table(0)
        assert all(table.effective_alter(l, 4) == 0 for l in LETTERS)

    def test_two_sharps(self):
        table = init_accidental_table(2)
        assert {l for l in LETTERS if table.key_alters[l] == 1} == {"F", "C"}

    def test_one_flat(self):
        table = init_accidental_table(-1)
        assert table.key_alters["B"] == -1
        assert sum(v != 0 for v in table.key_alters.values()) == 1

    @pytest.mark.parametrize("fifths", range(-7, 8))
    def test_circle_of_fifths_oracle(self, fifths):
        # independent oracle: walk the circle from F (sharps) or B (flats)
        table = init_accidental_table(fifths)
        order = "FCGDAEB"
        expected = {l: 0 for l in LETTERS}
        for i in range(abs(fifths)):
            letter = order[i] if fifths > 0 else order[len(order) - 1 - i]
            expected[letter] = 1 if fifths > 0 else -1
        assert table.key_alters == expected

    def test_override_beats_key(self):
        table = init_accidental_table(2)
        table.overrides[("F", 5)] = 0
        assert table.effective_alter("F", 5) == 0
        assert table.effective_alter("F", 4) == 1

    def test_out_of_range(self):
        with pytest.raises(ConfigError):
            init_accidental_table(8)


class TestPositionToPitch:
    @pytest.mark.parametrize("clef,pos,expected", [
        ("G", -12, ("D", 3)), ("G", 12, ("G", 6)), ("G", 0, ("B", 4)),
        ("F", -12, ("F", 1)), ("F", 12, ("B", 4)), ("F", 0, ("D", 3)),
    ])
    def test_spans(self, clef, pos, expected):
        assert position_to_pitch(clef, pos) == expected

    def test_consecutive_diatonic(self):
        for clef in ("G", "F"):
            previous = None
            for pos in range(-12, 13):
                letter, octave = position_to_pitch(clef, pos)
                number = octave * 7 + LETTERS.index(letter)
                if previous is not None:
                    assert number == previous + 1
                previous = number

    def test_out_of_range(self):
        assert position_to_pitch("G", 13) is None
        assert position_to_pitch("G", None) is None

    def test_clef_state_argument(self):
        assert position_to_pitch(ClefState("F"), 0) == ("D", 3)


class TestBuildVodms:
    def test_singleton(self):
        groups = build_vodms([body()])
        assert len(groups) == 1 and len(groups[0]) == 1

    def test_stem_and_notehead(self):
        a, b = arm(cy=0.35), body(pos=0)
        groups = build_vodms([b, a])
        assert groups == [[a, b]]

    def test_chord_under_beam(self):
        beam = comp("arm_beam", "bm0", 0.30)
        upper = body(pos=2)
        lower = body(pos=0)
        groups = build_vodms([lower, beam, upper])
        assert groups == [[beam, upper, lower]]

    def test_disjoint_columns(self):
        left = body(cx=0.2)
        right = body(cx=0.8)
        groups = build_vodms([right, left])
        assert groups == [[left], [right]]

    def test_transitive_grouping(self):
        a = comp("body", "bd0", 0.5, cx=0.30, w=0.12)
        b = comp("body", "bd0", 0.4, cx=0.38, w=0.12)
        c = comp("body", "bd0", 0.3, cx=0.46, w=0.12)
        assert len(build_vodms([a, b, c])) == 1

    def test_beam_joins_each_column(self):
        beam = comp("arm_beam", "bm0", 0.30, cx=0.5, w=0.6)
        left = body(pos=0, cx=0.3)
        right = body(pos=2, cx=0.7)
        groups = build_vodms([beam, left, right])
        assert groups == [[beam, left], [beam, right]]


def resolve(group, semantics, fifths=0, clef="G", measure=None):
    table = init_accidental_table(fifths)
    return resolve_vodms(group, ClefState(clef), table, semantics,
                         measure_components=measure or group)


class TestResolveVodms:
    def test_case_i_two_bodies(self, semantics):
        group = [arm("am0", cy=0.25), body(pos=4), body(pos=0),
                 arm("am1", cy=0.68)]
        events = resolve(group, semantics)
        assert len(events) == 2
        lower = next(e for e in events if e.voice == 1)
        upper = next(e for e in events if e.voice == 2)
        assert (lower.letter, lower.octave) == ("B", 4)
        assert (upper.letter, upper.octave) == ("F", 5)
        assert lower.arm_attachment == "bottom"
        assert upper.arm_attachment == "top"

    def test_case_i_three_bodies_nearest(self, semantics):
        group = [arm("am0", cy=0.20), body(pos=6), body(pos=4),
                 body(pos=-4), arm("am1", cy=0.80)]
        events = resolve(group, semantics)
        voices = sorted((e.letter, e.octave, e.voice) for e in events)
        # middle body (pos 4) is nearer the top-anchored body (pos 6)
        by_voice = {2: [], 1: []}
        for e in events:
            by_voice[e.voice].append(e.letter + str(e.octave))
        assert len(by_voice[2]) == 2 and len(by_voice[1]) == 1

    def test_case_ii_top_rest(self, semantics):
        group = [rest("re2", pos=8), body(pos=0), arm("am1", cy=0.70)]
        events = resolve(group, semantics)
        assert events[0].is_rest and events[0].voice == 2
        assert not events[1].is_rest and events[1].voice == 1

    def test_case_iii_bottom_rest(self, semantics):
        group = [arm("am0", cy=0.25), body(pos=0), rest("re2", pos=-8)]
        events = resolve(group, semantics)
        assert events[-1].is_rest and events[-1].voice == 1
        note = next(e for e in events if not e.is_rest)
        assert note.voice == 2

    def test_case_iv_top_arm(self, semantics):
        group = [arm("am0", cy=0.30), body(pos=0)]
        events = resolve(group, semantics)
        assert len(events) == 1
        assert events[0].type_name == "quarter"
        assert events[0].voice == 1
        assert events[0].arm_attachment == "top"

    def test_case_iv_whole_body_kept_as_is(self, semantics):
        group = [arm("am0", cy=0.30), body("bd4", pos=0), body(pos=-2)]
        events = resolve(group, semantics)
        whole = next(e for e in events if e.type_name == "whole")
        assert whole.arm_attachment is None

    def test_case_v_bottom_arm(self, semantics):
        group = [body(pos=2), arm("am1", cy=0.75)]
        events = resolve(group, semantics)
        assert events[0].arm_attachment == "bottom"

    def test_case_vi_whole_singleton(self, semantics):
        events = resolve([body("bd4", pos=0)], semantics)
        assert len(events) == 1
        event = events[0]
        assert event.type_name == "whole" and event.voice == 1
        assert event.duration == 32

    def test_case_vi_misrecognized_stem(self, semantics):
        stray_arm = arm("am0", cy=0.30, cx=0.8)
        group = [body("bd4", pos=2), body("bd0", pos=0)]
        events = resolve(group, semantics, measure=group + [stray_arm])
        stemmed = next(e for e in events if e.type_name == "quarter")
        assert stemmed.arm_attachment == "top"

    def test_chord_marking(self, semantics):
        group = [arm("am0", cy=0.25), body(pos=2), body(pos=0)]
        events = resolve(group, semantics)
        assert [e.chord_member for e in events] == [False, True]
        assert {(e.letter, e.octave) for e in events} == \
            {("B", 4), ("D", 5)}

    def test_unmapped_only_group(self, semantics):
        group = [comp("clef", "cf2", 0.5)]
        assert resolve(group, semantics) == []

    def test_accidental_applied(self, semantics):
        table = init_accidental_table(0)
        table.overrides[("B", 4)] = 1
        events = resolve_vodms([arm("am0", cy=0.3), body(pos=0)],
                               ClefState("G"), table, semantics,
                               measure_components=[])
        assert events[0].alter == 1


class TestAssembleMeasure:
    def test_clef_then_whole_note(self, semantics):
        components = [comp("clef", "cf0", 0.5, cx=0.05),
                      body("bd4", pos=0, cx=0.5)]
        events, clef, diags = assemble_measure(components, ClefState("G"),
                                               0, semantics)
        assert diags == []
        assert len(events) == 1
        assert (events[0].letter, events[0].octave) == ("B", 4)
        assert events[0].type_name == "whole" and events[0].voice == 1

    def test_accidental_override(self, semantics):
        components = [comp("clef", "cf0", 0.5, cx=0.05),
                      comp("accidental", "ac0", unit_y(1), cx=0.3, pos=1),
                      body(pos=1, cx=0.5), arm("am0", cy=0.35, cx=0.5)]
        events, _, _ = assemble_measure(components, ClefState("G"), 0,
                                        semantics)
        assert len(events) == 1
        assert (events[0].letter, events[0].octave, events[0].alter) == \
            ("C", 5, 1)

    def test_clef_only_measure(self, semantics):
        events, clef, _ = assemble_measure([comp("clef", "cf1", 0.5)],
                                           ClefState("G"), 0, semantics)
        assert events == []
        assert clef.current == "F"

    def test_free_rest_emitted(self, semantics):
        events, _, _ = assemble_measure([rest("re0", pos=2)],
                                        ClefState("G"), 0, semantics)
        assert len(events) == 1 and events[0].is_rest
        assert events[0].type_name == "whole"

    def test_conservation(self, semantics):
        components = [
            comp("clef", "cf0", 0.5, cx=0.05),
            comp("accidental", "ac1", unit_y(2), cx=0.18, pos=2),
            body(pos=2, cx=0.3), arm("am0", cy=0.32, cx=0.3),
            rest("re2", pos=0, cx=0.5),
            body("bd4", pos=-2, cx=0.7),
            arm("am2", cy=0.6, cx=0.9),  # stray arm, nothing to attach
        ]
        events, _, diags = assemble_measure(components, ClefState("G"), 0,
                                            semantics)
        consumed = sum(1 for c in components if c.consumed)
        # every component is consumed, represented by an event, or reported
        stray = [c for c in components if not c.consumed]
        assert all(c.category == "arm_beam" for c in stray)
        assert len(diags) == len(stray)

    def test_order_determinism(self, semantics):
        def make():
            return [
                comp("clef", "cf0", 0.5, cx=0.05),
                body(pos=2, cx=0.3), arm("am0", cy=0.32, cx=0.3),
                rest("re2", pos=0, cx=0.5),
                body(pos=-2, cx=0.7), arm("am1", cy=0.7, cx=0.7),
            ]
        baseline, _, _ = assemble_measure(make(), ClefState("G"), 0,
                                          semantics)
        for seed in range(5):
            shuffled = make()
            random.Random(seed).shuffle(shuffled)
            events, _, _ = assemble_measure(shuffled, ClefState("G"), 0,
                                            semantics)
            assert events == baseline

    def test_accidental_locality(self, semantics):
        first = [comp("accidental", "ac0", unit_y(0), cx=0.2, pos=0),
                 body(pos=0, cx=0.4), arm("am0", cy=0.35, cx=0.4)]
        events1, clef, _ = assemble_measure(first, ClefState("G"), 0,
                                            semantics)
        assert events1[0].alter == 1
        second = [body(pos=0, cx=0.4), arm("am0", cy=0.35, cx=0.4)]
        events2, _, _ = assemble_measure(second, clef, 0, semantics)
        assert events2[0].alter == 0

    def test_beam_roles(self, semantics):
        beam = comp("arm_beam", "bm0", 0.30, cx=0.5, w=0.6)
        components = [beam,
                      body(pos=0, cx=0.25), body(pos=1, cx=0.5),
                      body(pos=2, cx=0.75)]
        events, _, _ = assemble_measure(components, ClefState("G"), 0,
                                        semantics)
        roles = [e.beam_role for e in events if not e.chord_member]
        assert roles == ["start", "continue", "stop"]
        assert all(e.type_name == "eighth" for e in events)
