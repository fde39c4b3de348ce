"""Python front end for the hitmap core.

    >>> import hitmap
    >>> r = hitmap.run_scenario("open_room")
    >>> r.outcome, len(r.metrics)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from os import PathLike
from typing import Any

from ._hitmap import (
    Frame,
    HitmapError,
    Pose2,
    Vec2,
    World,
    builtin_scenario,
    exit_code,
    frontier_utility,
    least_squares_slope,
    load_world,
    parse_ascii_world,
    scenario_names,
)
from . import _hitmap

__all__ = [
    "Frame",
    "HitmapError",
    "Pose2",
    "RunResult",
    "Vec2",
    "World",
    "builtin_scenario",
    "exit_code",
    "frontier_utility",
    "least_squares_slope",
    "load_world",
    "parse_ascii_world",
    "run",
    "run_scenario",
    "scenario",
    "scenario_names",
]


@dataclass
class RunResult:
    outcome: str
    reason: str
    frames: int
    goals_reached: int
    submaps: int
    first_unvalidated_plan_frame: int
    baseline_replayed_writes: int
    metrics: list[dict[str, Any]]
    loops: list[dict[str, Any]]
    true_path: list[tuple[float, float]]
    topology: dict[str, Any] = field(repr=False)

    @property
    def exit_code(self) -> int:
        return exit_code(self.outcome)

    def series(self, key: str) -> list[Any]:
        return [m[key] for m in self.metrics]


def scenario(name: str) -> tuple[World, dict[str, Any]]:
    """A built-in scenario as (world, config dict)."""
    world, cfg = builtin_scenario(name)
    return world, json.loads(cfg)


def run(world: World, config: dict[str, Any], out_dir: str | PathLike[str] | None = None,
        baseline: bool = False) -> RunResult:
    s = _hitmap.run(world, json.dumps(config), "" if out_dir is None else str(out_dir), baseline)
    return RunResult(
        outcome=s.outcome,
        reason=s.reason,
        frames=s.frames,
        goals_reached=s.goals_reached,
        submaps=s.submaps,
        first_unvalidated_plan_frame=s.first_unvalidated_plan_frame,
        baseline_replayed_writes=s.baseline_replayed_writes,
        metrics=[json.loads(m) for m in s.metrics_json],
        loops=list(s.loops),
        true_path=list(s.true_path),
        topology=json.loads(s.topology_json),
    )


def run_scenario(name: str, out_dir: str | PathLike[str] | None = None, baseline: bool = False,
                 **overrides: Any) -> RunResult:
    """Runs a built-in scenario; keyword arguments replace top-level config keys."""
    world, cfg = scenario(name)
    for key, value in overrides.items():
        if key not in cfg:
            raise KeyError(f"unknown config key {key!r}")
        cfg[key] = value
    return run(world, cfg, out_dir, baseline)
