"""Path planner tests against the BFS oracle."""

from __future__ import annotations

import random

import pytest

from swarmtable.geometry import GridCoord
from swarmtable.planning import PlanningError, bfs_path_length, plan_path, waypoints


def test_start_equals_goal():
    assert plan_path(set(), GridCoord(4, 4), GridCoord(4, 4)) == [GridCoord(4, 4)]


def test_straight_corridor_meets_manhattan_bound():
    path = plan_path(set(), GridCoord(0, 0), GridCoord(5, 0))
    assert len(path) == 6
    assert path[0] == GridCoord(0, 0)
    assert path[-1] == GridCoord(5, 0)


def test_deterministic_tie_break_prefers_east_then_north():
    path = plan_path(set(), GridCoord(0, 0), GridCoord(2, 2))
    assert path == plan_path(set(), GridCoord(0, 0), GridCoord(2, 2))
    # first expansion is east under E,N,W,S ordering
    assert path[1] == GridCoord(1, 0)


def test_path_around_vertical_wall_matches_bfs():
    wall = {(10, 5), (10, 6), (10, 7)}
    start, goal = GridCoord(8, 6), GridCoord(12, 6)
    path = plan_path(wall, start, goal)
    assert path, "goal should be reachable around the wall"
    assert all((c.col, c.row) not in wall for c in path)
    for a, b in zip(path, path[1:]):
        assert abs(a.col - b.col) + abs(a.row - b.row) == 1
    assert len(path) == bfs_path_length(wall, start, goal)


def test_unreachable_returns_empty():
    # box the goal in completely
    box = {(14, 14), (16, 14), (14, 16), (16, 16), (15, 14), (15, 16), (14, 15), (16, 15)}
    free_goal = GridCoord(15, 15)
    path = plan_path(box, GridCoord(0, 0), free_goal)
    assert path == []
    assert bfs_path_length(box, GridCoord(0, 0), free_goal) is None


def test_occupied_endpoint_is_precondition_error():
    with pytest.raises(PlanningError):
        plan_path({(1, 1)}, GridCoord(1, 1), GridCoord(5, 5))
    with pytest.raises(PlanningError):
        plan_path({(5, 5)}, GridCoord(1, 1), GridCoord(5, 5))
    with pytest.raises(PlanningError):
        plan_path(set(), GridCoord(-1, 0), GridCoord(5, 5))


def test_bfs_equivalence_on_random_grids():
    rng = random.Random(1234)
    for _ in range(50):
        occupied = {(rng.randrange(30), rng.randrange(30)) for _ in range(rng.randrange(40, 220))}
        free = sorted(set((c, r) for c in range(30) for r in range(30)) - occupied)
        start = GridCoord(*rng.choice(free))
        goal = GridCoord(*rng.choice(free))
        oracle = bfs_path_length(occupied, start, goal)
        path = plan_path(occupied, start, goal)
        if oracle is None:
            assert path == []
        else:
            assert len(path) == oracle
            assert all((c.col, c.row) not in occupied for c in path)
            for a, b in zip(path, path[1:]):
                assert abs(a.col - b.col) + abs(a.row - b.row) == 1


def test_waypoints_compression():
    path = [GridCoord(0, 0), GridCoord(1, 0), GridCoord(2, 0), GridCoord(2, 1), GridCoord(2, 2)]
    assert waypoints(path) == [GridCoord(2, 0), GridCoord(2, 2)]
    assert waypoints([GridCoord(0, 0)]) == []
    assert waypoints([GridCoord(0, 0), GridCoord(0, 1)]) == [GridCoord(0, 1)]
