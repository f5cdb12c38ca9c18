"""Grid path planning over the occupancy map.

4-connected A* with a Manhattan heuristic. Neighbor expansion order is fixed
(east, north, west, south) and ties break by insertion order, so the planner
is fully deterministic and its path length always matches plain BFS.
"""

from __future__ import annotations

import heapq
from typing import Optional

from .geometry import GridCoord

NEIGHBOR_ORDER = ((1, 0), (0, 1), (-1, 0), (0, -1))  # E, N, W, S


class PlanningError(ValueError):
    """Planner precondition violated (occupied or out-of-range endpoint)."""


def _neighbors(cell: tuple[int, int], occupied: set[tuple[int, int]], n: int):
    c, r = cell
    for dc, dr in NEIGHBOR_ORDER:
        nc, nr = c + dc, r + dr
        if 0 <= nc < n and 0 <= nr < n and (nc, nr) not in occupied:
            yield (nc, nr)


def plan_path(
    occupied: set[tuple[int, int]],
    start: GridCoord,
    goal: GridCoord,
    grid_n: int = 30,
) -> list[GridCoord]:
    """Shortest 4-connected path from start to goal avoiding occupied cells.

    Returns the cell list including both endpoints, [start] when start == goal,
    and [] when the goal is unreachable. Occupied or out-of-range endpoints are
    precondition errors.
    """
    s = (start.col, start.row)
    g = (goal.col, goal.row)
    for name, cell in (("start", s), ("goal", g)):
        if not (0 <= cell[0] < grid_n and 0 <= cell[1] < grid_n):
            raise PlanningError(f"{name} cell {cell} outside grid")
        if cell in occupied:
            raise PlanningError(f"{name} cell {cell} is occupied")
    if s == g:
        return [start]

    def h(cell: tuple[int, int]) -> int:
        return abs(cell[0] - g[0]) + abs(cell[1] - g[1])

    counter = 0
    open_heap: list[tuple[int, int, tuple[int, int]]] = [(h(s), counter, s)]
    g_score: dict[tuple[int, int], int] = {s: 0}
    came_from: dict[tuple[int, int], tuple[int, int]] = {}
    closed: set[tuple[int, int]] = set()

    while open_heap:
        _, _, current = heapq.heappop(open_heap)
        if current == g:
            path = [current]
            while path[-1] != s:
                path.append(came_from[path[-1]])
            path.reverse()
            return [GridCoord(c, r) for c, r in path]
        if current in closed:
            continue
        closed.add(current)
        for nb in _neighbors(current, occupied, grid_n):
            tentative = g_score[current] + 1
            if nb not in g_score or tentative < g_score[nb]:
                g_score[nb] = tentative
                came_from[nb] = current
                counter += 1
                heapq.heappush(open_heap, (tentative + h(nb), counter, nb))
    return []


def bfs_path_length(
    occupied: set[tuple[int, int]],
    start: GridCoord,
    goal: GridCoord,
    grid_n: int = 30,
) -> Optional[int]:
    """Breadth-first path length in cells (both endpoints counted); None if unreachable.

    Kept as the planner's independent oracle; shares nothing with plan_path
    beyond the neighbor definition of 4-adjacency.
    """
    s = (start.col, start.row)
    g = (goal.col, goal.row)
    if s == g:
        return 1
    frontier = [s]
    dist = {s: 1}
    while frontier:
        nxt = []
        for cell in frontier:
            for dc in (-1, 0, 1):
                for dr in (-1, 0, 1):
                    if abs(dc) + abs(dr) != 1:
                        continue
                    nb = (cell[0] + dc, cell[1] + dr)
                    if not (0 <= nb[0] < grid_n and 0 <= nb[1] < grid_n):
                        continue
                    if nb in occupied or nb in dist:
                        continue
                    dist[nb] = dist[cell] + 1
                    if nb == g:
                        return dist[nb]
                    nxt.append(nb)
        frontier = nxt
    return None


def waypoints(path: list[GridCoord]) -> list[GridCoord]:
    """Compress a cell path to its direction-change corners (plus the endpoint)."""
    if len(path) <= 2:
        return path[1:] if len(path) == 2 else []
    out: list[GridCoord] = []
    for i in range(1, len(path) - 1):
        d_in = (path[i].col - path[i - 1].col, path[i].row - path[i - 1].row)
        d_out = (path[i + 1].col - path[i].col, path[i + 1].row - path[i].row)
        if d_in != d_out:
            out.append(path[i])
    out.append(path[-1])
    return out
