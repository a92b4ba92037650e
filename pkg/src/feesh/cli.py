"""Command line front end: experiments, calibration, trace replay, serving."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness, trace as trace_mod
from .harness import Treatment
from .world import GameConfig


def _load_config(path: str | None) -> GameConfig:
    if path is None:
        return GameConfig()
    with open(path, encoding="utf-8") as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        raise SystemExit(f"{path}: config file must hold a JSON object")
    try:
        return GameConfig.from_dict(overrides)
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"{path}: {exc}") from exc


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    if args.treatment == "both":
        treatments = (Treatment.MAPEK_ON, Treatment.NORMAL)
    else:
        treatments = (Treatment.MAPEK_ON if args.treatment == "mapek"
                      else Treatment.NORMAL,)

    trace_dir = Path(args.trace_dir) if args.trace_dir else None
    if trace_dir:
        trace_dir.mkdir(parents=True, exist_ok=True)

    results = []
    for treatment in treatments:
        for i in range(args.replicates):
            seed = args.seed + i
            trace_path = (trace_dir / f"{treatment.value}-{seed}.trace"
                          if trace_dir else None)
            result = harness.run_replicate(seed, treatment, config,
                                           args.tick_limit,
                                           trace_path=trace_path)
            results.append(result)
            print(f"seed={result.seed} treatment={result.treatment.value} "
                  f"ticks={result.ticks_survived} outcome={result.outcome.value} "
                  f"score={result.final_score}", file=sys.stderr)

    report = harness.build_report(results, args.replicates, args.seed,
                                  args.tick_limit, config.to_dict())
    paths = harness.write_report_files(report, args.out)
    print(harness.report_to_text(report))
    for p in paths:
        print(f"wrote {p}", file=sys.stderr)

    if args.strict and any(r.outcome is harness.Outcome.FAILED for r in results):
        print("strict mode: at least one replicate Failed", file=sys.stderr)
        return 2
    return 0


def _cmd_calibrate(args) -> int:
    config = _load_config(args.config)
    points, crossing_on, crossing_off = harness.calibrate(
        config, max_enemies=args.max_enemies)
    print("enemies\tfps_collision_on\tfps_collision_off")
    for p in points:
        if p.enemy_count % args.stride == 0:
            print(f"{p.enemy_count}\t{p.fps_collision_on:.2f}\t{p.fps_collision_off:.2f}")
    on = crossing_on if crossing_on is not None else f">{args.max_enemies}"
    off = crossing_off if crossing_off is not None else f">{args.max_enemies}"
    print(f"fps drops below 30 at {on} enemies with collision, {off} without")
    return 0


def _cmd_replay(args) -> int:
    tr = trace_mod.read_trace(args.trace)
    result = trace_mod.replay(tr)
    if result.ok:
        print(f"replay ok: {result.ticks_checked} ticks verified, "
              f"outcome {tr.outcome}, hash {tr.final_hash[:16]}")
        return 0
    for line in result.mismatches:
        print(f"mismatch: {line}", file=sys.stderr)
    return 1


def _cmd_serve(args) -> int:
    # Imported here so the experiment path never loads the server stack.
    import uvicorn

    from .service import build_app

    config = _load_config(args.config)
    app = build_app(config=config, base_seed=args.seed, real_fps=args.real_fps,
                    tick_rate=args.tick_rate)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_bench(args) -> int:
    from . import bench

    results = bench.run_bench(ticks=args.ticks,
                              enemy_counts=tuple(args.enemies))
    print(bench.format_results(results))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="feesh",
        description="Self-adaptive feesh game: experiments, replay, serving.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run seeded replicates and write reports")
    run.add_argument("--treatment", choices=["mapek", "normal", "both"],
                     default="both")
    run.add_argument("--replicates", type=int, default=harness.DEFAULT_REPLICATES)
    run.add_argument("--seed", type=int, default=harness.DEFAULT_BASE_SEED)
    run.add_argument("--tick-limit", type=int, default=harness.DEFAULT_TICK_LIMIT)
    run.add_argument("--config", help="JSON file with game config overrides")
    run.add_argument("--out", default="results", help="report output directory")
    run.add_argument("--trace-dir", help="also write one trace file per replicate")
    run.add_argument("--strict", action="store_true",
                     help="exit nonzero if any replicate ends Failed")
    run.set_defaults(func=_cmd_run)

    cal = sub.add_parser("calibrate",
                         help="sweep enemy counts; report the fps-30 crossing")
    cal.add_argument("--config", help="JSON file with game config overrides")
    cal.add_argument("--max-enemies", type=int, default=600)
    cal.add_argument("--stride", type=int, default=20,
                     help="print every Nth sweep point")
    cal.set_defaults(func=_cmd_calibrate)

    rep = sub.add_parser("replay", help="re-execute a trace and verify it")
    rep.add_argument("--trace", required=True)
    rep.set_defaults(func=_cmd_replay)

    srv = sub.add_parser("serve", help="serve live sessions and the web client")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--config", help="JSON file with game config overrides")
    srv.add_argument("--seed", type=int, default=None,
                     help="base seed for session worlds (default: random)")
    srv.add_argument("--tick-rate", type=float, default=60.0)
    srv.add_argument("--real-fps", action="store_true",
                     help="feed measured wall-clock fps to the monitor "
                          "instead of the synthetic cost model")
    srv.set_defaults(func=_cmd_serve)

    ben = sub.add_parser("bench", help="compare kernel backends")
    ben.add_argument("--ticks", type=int, default=2000)
    ben.add_argument("--enemies", type=int, nargs="+", default=[20, 300])
    ben.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
