"""Serializer / parser tests, including the messy-vs-canonical fixture corpus."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import swarmtable
from swarmtable.protocol import (
    ActionSequence,
    ActionStep,
    ExtractionError,
    RobotTrack,
    SchemaError,
    StrictSyntaxError,
    extract_block,
    parse_lenient,
    parse_strict,
    serialize,
)

CORPUS = Path(swarmtable.__file__).parent / "assets" / "parser_corpus"
GOLDEN = Path(__file__).parent / "fixtures" / "golden"


def random_step(rng: random.Random) -> ActionStep:
    kind = rng.choice(["translate", "rotate", "pair_orient", "wait"])
    speed = rng.randint(1, 3)
    if kind == "translate":
        return ActionStep.translate((rng.randint(0, 29), rng.randint(0, 29)), speed)
    if kind == "rotate":
        return ActionStep.rotate(round(rng.uniform(-720, 720), 3), speed,
                                 rng.choice(["center", "left", "right"]))
    if kind == "pair_orient":
        return ActionStep.pair_orient(
            rng.choice(["face_to_face", "back_to_back", "face_to_back", "parallel", "counter_parallel"]),
            f"r{rng.randint(0, 9)}",
            speed,
        )
    return ActionStep.wait(round(rng.uniform(1, 10000), 2))


def random_sequence(rng: random.Random) -> ActionSequence:
    n = rng.randint(0, 5)
    tracks = tuple(
        RobotTrack(id=f"bot{i}", actions=tuple(random_step(rng) for _ in range(rng.randint(0, 6))))
        for i in range(n)
    )
    return ActionSequence(robots=tracks, parallel=rng.random() < 0.7)


def test_empty_sequence_canonical_form():
    assert serialize(ActionSequence()) == '{"robots":[],"parallel":true}'


def test_single_step_round_trip_bit_identical():
    seq = ActionSequence(
        robots=(RobotTrack("walker", (ActionStep.translate((10, 10), 2),)),),
    )
    text = serialize(seq)
    assert parse_strict(text) == seq
    assert serialize(parse_strict(text)) == text


def test_golden_fixture_bytes():
    seq = ActionSequence(
        robots=(RobotTrack("walker", (ActionStep.translate((10, 10), 2),)),),
    )
    golden = (GOLDEN / "walker_sequence.json").read_bytes()
    assert serialize(seq).encode() == golden


def test_round_trip_1000_random_sequences():
    rng = random.Random(20240312)
    for _ in range(1000):
        seq = random_sequence(rng)
        assert parse_strict(serialize(seq)) == seq


def test_strict_rejects_bad_shapes():
    with pytest.raises(SchemaError) as e:
        parse_strict('{"robots": 5}')
    assert "$.robots" in str(e.value)
    with pytest.raises(SchemaError) as e:
        parse_strict('{"robots":[{"id":"a","actions":[{"type":"translate","target":[1,2],"speed":7}]}]}')
    assert "speed" in str(e.value)
    with pytest.raises(SchemaError):
        parse_strict('{"robots":[{"id":"a","actions":[{"type":"warp","speed":1}]}]}')
    with pytest.raises(SchemaError):
        parse_strict('{"robots":[{"id":"a","actions":[]},{"id":"a","actions":[]}]}')


def test_strict_syntax_error_carries_offset():
    with pytest.raises(StrictSyntaxError) as e:
        parse_strict('{"robots": [,]}')
    assert e.value.offset == 12


def test_lenient_on_fenced_canonical():
    seq = ActionSequence(robots=(RobotTrack("a", (ActionStep.wait(100.0),)),))
    text = "Moving now.\n```json\n" + serialize(seq) + "\n```"
    out = parse_lenient(text)
    assert out.sequence == seq
    assert out.narration == "Moving now."


def test_lenient_pure_prose_raises_extraction_error():
    with pytest.raises(ExtractionError):
        parse_lenient("The robots should probably move north, I think.")


def test_lenient_schema_error_carries_block():
    with pytest.raises(SchemaError) as e:
        parse_lenient("plan:\n{'robots': [{'id': 'a', 'actions': [{'type': 'teleport', 'speed': 1}]}]}")
    assert e.value.block is not None
    assert "teleport" in e.value.block


def test_last_block_wins():
    text = (
        'Draft: {"robots": [{"id": "old", "actions": []}], "parallel": true}\n'
        'Final: {"robots": [{"id": "new", "actions": []}], "parallel": true}'
    )
    out = parse_lenient(text)
    assert out.sequence.robot_ids() == ["new"]
    assert "Draft" in out.narration


def test_unknown_step_keys_ignored_with_warning(caplog):
    text = '{"robots":[{"id":"a","actions":[{"type":"wait","duration_ms":5,"mood":"calm"}]}]}'
    with caplog.at_level("WARNING"):
        out = parse_lenient(text)
    assert out.sequence.robots[0].actions[0] == ActionStep.wait(5.0)
    assert any("mood" in rec.getMessage() for rec in caplog.records)


@settings(max_examples=60, deadline=None)
@given(
    prefix=st.text(alphabet=st.characters(blacklist_characters="{}`", blacklist_categories=("Cs",)), max_size=80),
    suffix=st.text(alphabet=st.characters(blacklist_characters="{}`", blacklist_categories=("Cs",)), max_size=80),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_lenient_recovers_serialized_sequence_from_prose(prefix, suffix, seed):
    seq = random_sequence(random.Random(seed))
    text = prefix + "\n" + serialize(seq) + "\n" + suffix
    out = parse_lenient(text)
    assert out.sequence == seq


def test_corpus_pairs_lenient_equals_strict():
    pairs = sorted(CORPUS.glob("*.messy.txt"))
    assert len(pairs) >= 10
    for messy in pairs:
        canonical = messy.with_name(messy.name.replace(".messy.txt", ".canonical.json"))
        want = parse_strict(canonical.read_text())
        got = parse_lenient(messy.read_text())
        assert got.sequence == want, f"corpus pair {messy.name} diverged"


def test_corpus_steps_all_present_in_source_block():
    # leniency soundness: each parsed step's type string appears in the raw block
    for messy in sorted(CORPUS.glob("*.messy.txt")):
        text = messy.read_text()
        _, obj, raw = extract_block(text)
        out = parse_lenient(text)
        for track in out.sequence.robots:
            for step in track.actions:
                assert step.type in raw


def test_extract_block_prefers_fences_over_loose_braces():
    text = (
        "Loose {\"robots\": [], \"parallel\": true} draft.\n"
        "```json\n{\"robots\": [{\"id\": \"z\", \"actions\": []}], \"parallel\": false}\n```\n"
        "trailing note"
    )
    out = parse_lenient(text)
    assert out.sequence.robot_ids() == ["z"]
    assert out.sequence.parallel is False


def test_canonical_schema_document_is_valid_json():
    import swarmtable

    schema_path = Path(swarmtable.__file__).parent / "assets" / "action_sequence.schema.json"
    schema = json.loads(schema_path.read_text())
    assert schema["title"] == "ActionSequence"
    assert set(schema["properties"]) == {"robots", "parallel"}
