"""Command-line interface: headless runs, replays, validation, and rendering.

Exit codes: 0 success, 1 failed turns or failed checks, 2 usage errors and
missing files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .geometry import KinematicConfig
from .protocol import parse_strict
from .server.artifacts import write_poses_csv, write_run_artifacts, write_trails_csv
from .server.render import render_snapshot
from .server.scenario import Scenario, ScenarioError, bundled_path, list_bundled
from .server.session import GameSession, LogDriver, replay_transcript
from .world import validate_sequence

USAGE_EXIT = 2


def _fail_usage(parser: argparse.ArgumentParser, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    parser.print_usage(sys.stderr)
    return USAGE_EXIT


def _load_scenario(parser: argparse.ArgumentParser, ref: str,
                   config: str | None) -> Scenario | int:
    path = Path(ref)
    if not path.exists():
        try:
            path = bundled_path(ref)
        except FileNotFoundError:
            return _fail_usage(
                parser, f"scenario {ref!r} not found (bundled: {', '.join(list_bundled())})")
    scenario = Scenario.from_file(path)
    if config is not None:
        cfg_path = Path(config)
        if not cfg_path.exists():
            return _fail_usage(parser, f"config file {config!r} not found")
        with open(cfg_path, "r", encoding="utf-8") as f:
            scenario.kinematics.update(json.load(f))
        KinematicConfig.from_dict(scenario.kinematics)  # fail fast on bad values
    return scenario


def cmd_run(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    scenario = _load_scenario(parser, args.scenario, args.config)
    if isinstance(scenario, int):
        return scenario

    commands: list[str] = []
    if args.commands is not None:
        commands_path = Path(args.commands)
        if not commands_path.exists():
            return _fail_usage(parser, f"commands file {args.commands!r} not found")
        commands = [line.strip() for line in commands_path.read_text().splitlines()
                    if line.strip()]
    elif scenario.meta.get("commands") and scenario.base_dir is not None:
        bundled_commands = scenario.base_dir / scenario.meta["commands"]
        if bundled_commands.exists():
            commands = [line.strip() for line in bundled_commands.read_text().splitlines()
                        if line.strip()]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    extra_driver = LogDriver(args.command_log) if args.command_log else None
    try:
        session = GameSession(scenario, transcript_path=out / "transcript.jsonl",
                              extra_driver=extra_driver)
    except ScenarioError as e:
        print(f"invalid scenario: {e}", file=sys.stderr)
        return 1

    all_ok = True
    results = [session.start().to_dict()]
    all_ok &= results[0]["ok"]
    for text in commands:
        result = session.submit_command(text)
        results.append(result.to_dict())
        all_ok &= result.ok
        status = "ok" if result.ok else f"FAILED ({result.error})"
        print(f"turn {len(results) - 1}: {text!r} -> {status}")
    session.close()

    paths = write_run_artifacts(session.world, out)
    (out / "turns.json").write_text(json.dumps(results, indent=1) + "\n")
    if args.figure:
        paths["figure"] = render_snapshot(session.snapshot(), out / "figure.png",
                                          title=scenario.name)
    print(f"artifacts in {out}")
    return 0 if all_ok else 1


def cmd_replay(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    scenario = _load_scenario(parser, args.scenario, args.config)
    if isinstance(scenario, int):
        return scenario
    transcript_path = Path(args.transcript)
    if not transcript_path.exists():
        return _fail_usage(parser, f"transcript {args.transcript!r} not found")
    entries = [json.loads(line) for line in transcript_path.read_text().splitlines() if line]
    world = replay_transcript(scenario, entries)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    final = out / "world_final.json"
    snapshot = world.snapshot()
    final.write_text(json.dumps(snapshot, separators=(",", ":")) + "\n")
    print(f"replayed {len(entries)} entries -> {final}")
    if args.check:
        want = Path(args.check).read_text()
        got = final.read_text()
        if want != got:
            print("replay mismatch: final world differs from the check file", file=sys.stderr)
            return 1
        print("replay matches the check file")
    return 0


def cmd_validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    scenario = _load_scenario(parser, args.scenario, args.config)
    if isinstance(scenario, int):
        return scenario
    problems = scenario.problems()
    report: dict = {"scenario_ok": not problems, "problems": problems}
    ok = not problems
    if args.sequence is not None:
        seq_path = Path(args.sequence)
        if not seq_path.exists():
            return _fail_usage(parser, f"sequence file {args.sequence!r} not found")
        if ok:
            world = scenario.build_world()
            seq_report = validate_sequence(world, parse_strict(seq_path.read_text()))
            report["sequence"] = seq_report.to_dict()
            ok = ok and seq_report.ok
    print(json.dumps(report, indent=1))
    return 0 if ok else 1


def cmd_render(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    world_path = Path(args.world)
    if not world_path.exists():
        return _fail_usage(parser, f"world snapshot {args.world!r} not found")
    snapshot = json.loads(world_path.read_text())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    figure = render_snapshot(snapshot, out / "figure.png", title=args.title or "")
    write_poses_csv(snapshot, out / "poses.csv")
    write_trails_csv(snapshot, out / "trail_points.csv")
    print(f"wrote {figure}, poses.csv, trail_points.csv")
    return 0


def cmd_serve(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    import uvicorn

    from .server.api import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmtable",
        description="Tabletop swarm game system: simulator, agents, server.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario headlessly with its mock script")
    run.add_argument("scenario", help="scenario file path or bundled scenario name")
    run.add_argument("--commands", help="text file with one game command per line")
    run.add_argument("--out", default="out", help="artifact directory")
    run.add_argument("--config", help="kinematic config JSON file")
    run.add_argument("--command-log", help="also log intended wheel commands to this file")
    run.add_argument("--figure", action="store_true", help="render the final table to PNG")

    replay = sub.add_parser("replay", help="re-execute a transcript's dispatches")
    replay.add_argument("scenario")
    replay.add_argument("--transcript", required=True)
    replay.add_argument("--out", default="out_replay")
    replay.add_argument("--config")
    replay.add_argument("--check", help="compare the final world against this snapshot file")

    validate = sub.add_parser("validate", help="check a scenario (and optionally a sequence)")
    validate.add_argument("scenario")
    validate.add_argument("--sequence", help="canonical action sequence JSON to dry-run")
    validate.add_argument("--config")

    render = sub.add_parser("render", help="draw a world snapshot to PNG + CSV tables")
    render.add_argument("world", help="world_final.json from a run")
    render.add_argument("--out", default="out_render")
    render.add_argument("--title")

    serve = sub.add_parser("serve", help="start the HTTP/WS session server")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8040)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": cmd_run, "replay": cmd_replay, "validate": cmd_validate,
                "render": cmd_render, "serve": cmd_serve}
    return handlers[args.command](parser, args)


if __name__ == "__main__":
    sys.exit(main())
