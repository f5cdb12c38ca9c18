"""Scenario files: world layout, rules, add-ons, ownership, and fixtures.

A scenario is a single JSON document. Fixture scenarios bundled with the
package carry a mock gateway script next to them so every game is replayable
offline, byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from ..behaviors.policies import BEHAVIOR_TAGS, RELATIONSHIP_KINDS
from ..geometry import KinematicConfig
from ..world import World

OWNERS = ("user", "system", "idle")


class ScenarioError(ValueError):
    """Scenario document failed validation; carries every problem found."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class Scenario:
    name: str
    rules_text: str
    world: dict
    behaviors: tuple[str, ...] = ()
    relationships: tuple[str, ...] = ()
    robot_ownership: dict[str, str] = field(default_factory=dict)
    board_mapping: dict[str, list[int]] = field(default_factory=dict)
    mock_script: Optional[str] = None
    pose_source: str = "simulator"
    kinematics: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    base_dir: Optional[Path] = None

    @classmethod
    def from_dict(cls, data: dict, base_dir: Optional[Path] = None) -> "Scenario":
        addons = data.get("addons", {})
        return cls(
            name=data.get("name", "unnamed"),
            rules_text=data.get("rules_text", ""),
            world=data.get("world", {}),
            behaviors=tuple(addons.get("behaviors", ())),
            relationships=tuple(addons.get("relationships", ())),
            robot_ownership=dict(data.get("robot_ownership", {})),
            board_mapping=dict(data.get("board_mapping", {})),
            mock_script=data.get("mock_script"),
            pose_source=data.get("pose_source", "simulator"),
            kinematics=dict(data.get("kinematics", {})),
            meta=dict(data.get("meta", {})),
            base_dir=base_dir,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "Scenario":
        path = Path(path)
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f), base_dir=path.parent)

    def kinematic_config(self) -> KinematicConfig:
        return KinematicConfig.from_dict(self.kinematics) if self.kinematics else KinematicConfig()

    def mock_script_path(self) -> Optional[Path]:
        if self.mock_script is None:
            return None
        p = Path(self.mock_script)
        if not p.is_absolute() and self.base_dir is not None:
            p = self.base_dir / p
        return p

    def problems(self) -> list[str]:
        """Everything wrong with this scenario; empty means valid."""
        out: list[str] = []
        robot_ids = [r.get("id") for r in self.world.get("robots", [])]
        if len(set(robot_ids)) != len(robot_ids):
            out.append("duplicate robot ids in world")
        for tag in self.behaviors:
            if tag not in BEHAVIOR_TAGS:
                out.append(f"unknown behavior add-on {tag!r}")
        for kind in self.relationships:
            if kind not in RELATIONSHIP_KINDS:
                out.append(f"unknown relationship add-on {kind!r}")
        for rid in robot_ids:
            if rid not in self.robot_ownership:
                out.append(f"robot {rid!r} missing from robot_ownership")
        for rid, owner in self.robot_ownership.items():
            if owner not in OWNERS:
                out.append(f"ownership for {rid!r} must be one of {OWNERS}")
            if rid not in robot_ids:
                out.append(f"ownership names unknown robot {rid!r}")
        grid_n = self.kinematic_config().grid_n
        for name, cell in self.board_mapping.items():
            if not (isinstance(cell, (list, tuple)) and len(cell) == 2
                    and 0 <= cell[0] < grid_n and 0 <= cell[1] < grid_n):
                out.append(f"board mapping {name!r} -> {cell} outside the grid")
        if self.pose_source not in ("simulator", "external"):
            out.append(f"unknown pose source {self.pose_source!r}")
        seen_cells: dict[tuple[int, int], str] = {}
        for spec in self.world.get("robots", []):
            cell = tuple(spec.get("cell", ()))
            if len(cell) != 2 or not (0 <= cell[0] < grid_n and 0 <= cell[1] < grid_n):
                out.append(f"robot {spec.get('id')!r} cell {cell} outside the grid")
                continue
            if cell in seen_cells:
                out.append(f"robots {seen_cells[cell]!r} and {spec.get('id')!r} share cell {cell}")
            seen_cells[cell] = spec.get("id")
        script = self.mock_script_path()
        if script is not None and not script.exists():
            out.append(f"mock script {script} does not exist")
        return out

    def build_world(self) -> World:
        return World.from_scenario(self.world, cfg=self.kinematic_config())

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rules_text": self.rules_text,
            "world": self.world,
            "addons": {"behaviors": list(self.behaviors),
                       "relationships": list(self.relationships)},
            "robot_ownership": dict(self.robot_ownership),
            "board_mapping": dict(self.board_mapping),
            "mock_script": self.mock_script,
            "pose_source": self.pose_source,
            "kinematics": dict(self.kinematics),
            "meta": dict(self.meta),
        }


def bundled_dir() -> Path:
    return Path(str(resources.files("swarmtable"))) / "scenarios"


def list_bundled() -> list[str]:
    return sorted(p.stem for p in bundled_dir().glob("*.json") if not p.stem.endswith(".mock"))


def bundled_path(name: str) -> Path:
    path = bundled_dir() / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return path


def load_bundled(name: str) -> Scenario:
    return Scenario.from_file(bundled_path(name))
