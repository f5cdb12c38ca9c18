"""Symbol templates, motion motifs, and relationship policy validators."""

from __future__ import annotations

import math
import string

import pytest

from swarmtable.behaviors import (
    MOTIFS,
    PolicyContext,
    get_template,
    hausdorff_mm,
    instantiate_motif,
    load_font,
    place_strokes,
    policy_pack,
    run_policy_validators,
    symbol_formation,
    symbol_trajectory,
)
from swarmtable.geometry import (
    GridCoord,
    KinematicConfig,
    Pose,
    Translate,
    compile_action,
    grid_to_world,
)
from swarmtable.protocol import ActionSequence, ActionStep, RobotTrack
from swarmtable.world import World, compile_tracks, dispatch

CFG = KinematicConfig()
CELL = CFG.cell_mm


# --- font -------------------------------------------------------------------


def test_every_letter_loads_upright_in_unit_box():
    font = load_font()
    assert set(font) == set(string.ascii_uppercase)
    for glyph, template in font.items():
        assert template.strokes, f"{glyph} has no strokes"
        ys = []
        for stroke in template.strokes:
            assert len(stroke) >= 2
            for x, y in stroke:
                assert 0.0 <= x <= 1.0 and 0.0 <= y <= 1.0, f"{glyph} leaves the unit box"
                ys.append(y)
        assert max(ys) > min(ys) or glyph == "-", f"{glyph} is degenerate"


def test_templates_not_vertically_mirrored():
    # letters with a distinguishable top must keep it at high y
    t = get_template("T")
    bar = t.strokes[0]
    assert all(y == max(p[1] for s in t.strokes for p in s) for _, y in bar)
    v = get_template("V")
    apex_y = v.strokes[0][1][1]
    assert apex_y < v.strokes[0][0][1]  # the point of the V hangs low


# --- trajectory -------------------------------------------------------------


def test_i_trajectory_matches_template_file():
    template = get_template("I")
    actions = symbol_trajectory("I", GridCoord(10, 10), 4.0, CFG)
    translates = [a for a in actions if isinstance(a, Translate)]
    assert len(template.strokes) == 1
    assert len(translates) >= 2


def test_zero_scale_rejected():
    with pytest.raises(ValueError):
        symbol_trajectory("I", GridCoord(10, 10), 0, CFG)


def test_glyph_must_fit_table():
    with pytest.raises(Exception):
        place_strokes("H", GridCoord(28, 28), 6.0, CFG)


def test_t_trace_trail_hausdorff_under_half_cell():
    strokes = place_strokes("T", GridCoord(10, 10), 6.0, CFG)
    actions = symbol_trajectory("T", GridCoord(10, 10), 6.0, CFG)

    w = World(cfg=CFG)
    robot = w.add_robot("tracer", GridCoord(10, 10))
    robot.pose = Pose(strokes[0][0][0], strokes[0][0][1], 0.0)  # start on the first stroke

    pose = robot.pose
    for meta in actions:
        for cmd in compile_action(meta, pose, CFG):
            robot.enqueue(cmd)
            from swarmtable.geometry import apply

            pose = apply(pose, cmd, CFG)
    w.run_until_quiescent()

    trail = [list(robot.trail)]
    dist = hausdorff_mm(trail, strokes)
    assert dist < 0.5 * CELL, f"trace wandered {dist:.2f} mm from the template"


# --- formation ---------------------------------------------------------------


def test_h_formation_seven_robots_covers_all_strokes():
    cells = symbol_formation("H", 7, GridCoord(10, 10), 6.0, CFG)
    assert len(cells) == 7
    assert len({(c.col, c.row) for c in cells}) == 7
    strokes = place_strokes("H", GridCoord(10, 10), 6.0, CFG)
    left_x = strokes[0][0][0]
    right_x = strokes[2][0][0]
    mid_y = strokes[1][0][1]
    centers = [grid_to_world(c, CFG) for c in cells]
    assert any(abs(x - left_x) < CELL for x, _ in centers), "left vertical uncovered"
    assert any(abs(x - right_x) < CELL for x, _ in centers), "right vertical uncovered"
    assert any(abs(y - mid_y) < CELL and left_x + CELL / 2 < x < right_x - CELL / 2
               for x, y in centers), "crossbar uncovered"


def test_i_formation_three_collinear_cells():
    cells = symbol_formation("I", 3, GridCoord(12, 10), 6.0, CFG)
    assert len(cells) == 3
    cols = {c.col for c in cells}
    assert len(cols) == 1, "stem cells should share a column"
    rows = sorted(c.row for c in cells)
    assert rows[0] < rows[1] < rows[2]


def test_formation_below_minimum_errors():
    with pytest.raises(ValueError):
        symbol_formation("H", 1, GridCoord(10, 10), 6.0, CFG)


@pytest.mark.parametrize("glyph,n", [("H", 7), ("H", 10), ("I", 3), ("I", 6), ("O", 8), ("S", 5)])
def test_formation_cells_pairwise_distinct(glyph, n):
    cells = symbol_formation(glyph, n, GridCoord(8, 8), 8.0, CFG)
    assert len({(c.col, c.row) for c in cells}) == n


# --- motifs -------------------------------------------------------------------


def test_excitement_hops_forward_then_spins():
    seq = instantiate_motif("excitement", {"g": Pose(*grid_to_world(GridCoord(5, 5), CFG), 90.0)}, CFG)
    track = seq.robots[0]
    assert track.id == "g"
    assert track.actions[0] == ActionStep.translate((5, 6), 2)
    assert track.actions[1].type == "rotate"
    assert track.actions[1].angle == 360.0


def test_motif_wrong_arity():
    with pytest.raises(ValueError):
        instantiate_motif("argument", {"only_one": Pose(100, 100, 0)}, CFG)
    with pytest.raises(KeyError):
        instantiate_motif("victory_lap", {"g": Pose(100, 100, 0)}, CFG)


def test_argument_meets_spins_and_retreats():
    w = World(cfg=CFG)
    w.add_robot("left", GridCoord(8, 10), heading=0.0)
    w.add_robot("right", GridCoord(16, 10), heading=180.0)
    seq = instantiate_motif("argument", {"left": w.robots["left"].pose, "right": w.robots["right"].pose}, CFG)
    queues = compile_tracks(w, seq)
    dispatch(w, queues)

    closest = math.inf
    while w.any_moving():
        w.step(20.0)
        a, b = w.robots["left"].pose, w.robots["right"].pose
        closest = min(closest, math.hypot(a.x - b.x, a.y - b.y))
    a, b = w.robots["left"].pose, w.robots["right"].pose
    final = math.hypot(a.x - b.x, a.y - b.y)
    assert closest >= 32.0, "robots overlapped during the argument"
    assert final >= closest + CELL, "robots did not retreat after the argument"
    for robot in w.robots.values():
        assert 0 <= robot.pose.x <= CFG.table_size_mm
        assert 0 <= robot.pose.y <= CFG.table_size_mm


def test_greeting_keeps_clearance():
    w = World(cfg=CFG)
    w.add_robot("a", GridCoord(5, 5), heading=45.0)
    w.add_robot("b", GridCoord(11, 11), heading=200.0)
    seq = instantiate_motif("greeting", {"a": w.robots["a"].pose, "b": w.robots["b"].pose}, CFG)
    queues = compile_tracks(w, seq)
    dispatch(w, queues)
    closest = math.inf
    while w.any_moving():
        w.step(20.0)
        pa, pb = w.robots["a"].pose, w.robots["b"].pose
        closest = min(closest, math.hypot(pa.x - pb.x, pa.y - pb.y))
    assert closest >= 32.0


def test_all_motifs_instantiable_anywhere():
    for name, motif in MOTIFS.items():
        for cell in (GridCoord(0, 0), GridCoord(29, 29), GridCoord(15, 0)):
            poses = {"p0": Pose(*grid_to_world(cell, CFG), 90.0)}
            if motif.roles == 2:
                poses["p1"] = Pose(*grid_to_world(GridCoord(15, 15), CFG), 0.0)
            seq = instantiate_motif(name, poses, CFG)
            for track in seq.robots:
                for step in track.actions:
                    if step.type == "translate":
                        assert 0 <= step.target[0] < 30 and 0 <= step.target[1] < 30


# --- policies ------------------------------------------------------------------


def ctx(**ownership) -> PolicyContext:
    return PolicyContext(ownership=ownership)


def seq_for(*ids: str) -> ActionSequence:
    return ActionSequence(robots=tuple(
        RobotTrack(i, (ActionStep.translate((5, 5), 2),)) for i in ids
    ))


def test_opponent_rejects_user_robots():
    problems = run_policy_validators(
        ("opponent",), seq_for("monster1"), ctx(monster1="user", monster2="system"))
    assert problems and "user-owned" in problems[0]
    assert run_policy_validators(("opponent",), seq_for("monster2"),
                                 ctx(monster1="user", monster2="system")) == []


def test_pair_orient_partner_counts_as_commanded():
    seq = ActionSequence(robots=(
        RobotTrack("sys", (ActionStep.pair_orient("face_to_face", "ava", 2),)),
    ))
    problems = run_policy_validators(("teammate",), seq, ctx(sys="system", ava="user"))
    assert problems


def test_designer_minting_within_pool():
    owner = ctx(hero="user", npc1="idle", npc2="idle", npc3="idle")
    assert run_policy_validators(("designer",), seq_for("npc1", "npc2", "npc3"), owner) == []
    bad = run_policy_validators(("designer",), seq_for("ghost"), owner)
    assert bad and "not on the table" in bad[0]


def test_idle_robots_need_a_designer():
    owner = ctx(hero="user", npc1="idle")
    problems = run_policy_validators(("opponent",), seq_for("npc1"), owner)
    assert problems and "designer" in problems[0]


def test_apprentice_speed_compliance():
    prior = ActionSequence(robots=(RobotTrack("g", (ActionStep.translate((10, 10), 2),)),))
    faster = ActionSequence(robots=(RobotTrack("g", (ActionStep.translate((10, 10), 3),)),))
    same = prior
    c = PolicyContext(ownership={"g": "user"}, prior=prior, feedback="please move faster")
    assert run_policy_validators(("apprentice",), faster, c) == []
    assert run_policy_validators(("apprentice",), same, c) != []


def test_apprentice_floor_behavior():
    prior = ActionSequence(robots=(RobotTrack("g", (ActionStep.translate((10, 10), 1),)),))
    c = PolicyContext(ownership={"g": "user"}, prior=prior, feedback="slower please")
    # already at the floor: unchanged speeds are compliant
    assert run_policy_validators(("apprentice",), prior, c) == []


def test_policy_pack_lookup():
    pack = policy_pack("teammate")
    assert pack.prompt_assets == ("addon_teammate",)
    with pytest.raises(KeyError):
        policy_pack("rival")
