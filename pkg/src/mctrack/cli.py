"""Command-line surface: simulate, track, eval, ablate, sweep.

Report-producing commands write delimited output plus rendered figures
(PNG) into the same directory; pass --no-figures to skip rendering. The
MCSM_LOG environment variable (debug|info|warning|error) controls log
verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .bridge import BridgeObserver
from .config import RunConfig, load_run_config
from .geometry import BoundingBox
from .metrics import aggregate, aggregate_csv, evaluate, report_to_dict, save_report
from .results import read_gt, read_results, write_gt, write_results
from .runner import (
    SWEEPABLE_PARAMS,
    SequenceDef,
    TrackingError,
    expand_suite,
    run_sequence,
    sweep,
    track_frames,
)
from .simulator import (
    SUITE_NAMES,
    builtin_suites,
    generate,
    load_spec,
    save_scenario,
    save_spec,
)
from .tracker import VARIANTS

logger = logging.getLogger(__name__)

SUITE_CHOICES = tuple(builtin_suites())


def _setup_logging() -> None:
    level = os.environ.get("MCSM_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_box(text: str) -> BoundingBox:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("box must be cx,cy,w,h")
    return BoundingBox(*parts)


def _load_run_config(args) -> RunConfig:
    cfg = load_run_config(args.config)
    if getattr(args, "variant", None):
        cfg.variant = args.variant
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "profile", None):
        cfg.profile = args.profile
    if getattr(args, "observer", None):
        cfg.observer = args.observer
    return cfg


def cmd_simulate(args) -> int:
    out = _out_dir(args)
    if args.spec:
        spec = load_spec(args.spec)
        name = Path(args.spec).stem
    else:
        spec = builtin_suites()[args.suite]
        name = args.suite
    scenario = generate(spec)
    save_spec(spec, out / f"{name}.spec.json")
    save_scenario(scenario, out / f"{name}.scenario.json")
    write_gt(out / f"{name}.gt.txt", list(scenario.target.boxes))
    print(f"wrote {name}.spec.json, {name}.scenario.json, {name}.gt.txt to {out}")
    return 0


def _track_bridge(args, cfg: RunConfig, out: Path) -> int:
    command = cfg.observer.split(":", 1)[1]
    if not args.frames or not args.prompt:
        raise SystemExit("bridge tracking needs --frames and --prompt")
    width, height = (int(v) for v in args.arena.split("x"))
    name = args.name or "bridge"
    observer = BridgeObserver(
        command, width, height, args.prompt, sequence=name, timeout=args.timeout
    )
    try:
        results = track_frames(
            observer, args.prompt, args.frames, cfg.tracker, cfg.variant
        )
    except TrackingError as exc:
        write_results(out / f"{name}.results.csv", exc.partial, truncation_note=str(exc))
        logger.error("bridge run failed: %s", exc)
        return 1
    finally:
        observer.close()
    write_results(out / f"{name}.results.csv", results)
    print(f"wrote {name}.results.csv ({len(results)} frames) to {out}")
    return 0


def cmd_track(args) -> int:
    out = _out_dir(args)
    cfg = _load_run_config(args)
    if cfg.observer.startswith("bridge:"):
        return _track_bridge(args, cfg, out)

    if args.spec:
        profile = cfg.profile if cfg.profile != "cycle" else "day"
        seqs = [SequenceDef(Path(args.spec).stem, load_spec(args.spec), profile, cfg.seed, "custom")]
    else:
        suite = args.suite or "linear_clear"
        seqs = expand_suite(suite, args.sequences, cfg.seed, cfg.profile)

    manifest = {"variant": cfg.variant, "seed": cfg.seed, "sequences": []}
    status = 0
    for seq in seqs:
        try:
            run = run_sequence(seq, cfg.tracker, cfg.variant)
        except TrackingError as exc:
            write_results(out / f"{seq.name}.results.csv", exc.partial, truncation_note=str(exc))
            logger.error("sequence %s failed: %s", seq.name, exc)
            status = 1
            continue
        write_results(out / f"{seq.name}.results.csv", run.results)
        write_gt(out / f"{seq.name}.gt.txt", run.gt)
        manifest["sequences"].append(
            {
                "name": seq.name,
                "suite": seq.suite,
                "profile": seq.profile,
                "seed": seq.seed,
                "results": f"{seq.name}.results.csv",
                "gt": f"{seq.name}.gt.txt",
            }
        )
        if args.figures:
            from .report import save_run_figure

            save_run_figure(run.results, run.gt, out / f"{seq.name}.trace.png", title=seq.name)
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"tracked {len(manifest['sequences'])}/{len(seqs)} sequences into {out}")
    return status


def cmd_eval(args) -> int:
    out = _out_dir(args)
    figures = not args.no_figures
    if args.run_dir:
        run_dir = Path(args.run_dir)
        manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
        groups: dict[str, list] = {}
        for entry in manifest["sequences"]:
            results, note = read_results(run_dir / entry["results"])
            if note is not None:
                logger.warning("skipping truncated sequence %s", entry["name"])
                continue
            gt = read_gt(run_dir / entry["gt"])
            report = evaluate([r.box for r in results], gt)
            save_report(report, out / f"{entry['name']}.report.json")
            for tag in ("all", entry["suite"], entry["profile"]):
                groups.setdefault(tag, []).append(report)
            if figures:
                from .report import save_eval_figure

                save_eval_figure(report, out / f"{entry['name']}.curves.png", title=entry["name"])
        rows = aggregate(groups)
        (out / "aggregate.csv").write_text(aggregate_csv(rows), encoding="utf-8")
        print(aggregate_csv(rows), end="")
        return 0
    if not args.results or not args.gt:
        raise SystemExit("eval needs either --run-dir or both --results and --gt")
    results, note = read_results(args.results)
    if note is not None:
        logger.warning("results file is truncated: %s", note)
    gt = read_gt(args.gt)
    report = evaluate([r.box for r in results], gt)
    stem = Path(args.results).stem.replace(".results", "")
    save_report(report, out / f"{stem}.report.json")
    if figures:
        from .report import save_eval_figure

        save_eval_figure(report, out / f"{stem}.curves.png", title=stem)
    print(json.dumps({k: report_to_dict(report)[k] for k in ("n_frames", "auc", "precision_at_20", "p_norm")}))
    return 0


def cmd_ablate(args) -> int:
    out = _out_dir(args)
    cfg = _load_run_config(args)
    suites = args.suites.split(",") if args.suites else list(SUITE_NAMES)
    from .runner import ablate as run_ablate

    rows = run_ablate(suites, args.sequences, cfg.seed, cfg.tracker, profile=cfg.profile)
    lines = ["variant,auc,p20,pnorm,n_seq,n_frames"]
    for row in rows:
        lines.append(
            f"{row['variant']},{row['auc']:.6f},{row['p20']:.6f},{row['pnorm']:.6f},"
            f"{row['n_seq']},{row['n_frames']}"
        )
    text = "\n".join(lines) + "\n"
    (out / "ablation.csv").write_text(text, encoding="utf-8")
    print(text, end="")
    if not args.no_figures:
        from .report import save_ablation_figure

        save_ablation_figure(rows, out / "ablation.png")
    return 0


def cmd_sweep(args) -> int:
    out = _out_dir(args)
    cfg = _load_run_config(args)
    values = [float(v) for v in args.values.split(",")]
    rows = sweep(
        args.param,
        values,
        args.suite,
        args.sequences,
        cfg.seed,
        cfg.tracker,
        variant=cfg.variant,
        profile=cfg.profile,
    )
    lines = ["value,auc,p20,error"]
    for row in rows:
        lines.append(
            f"{row['value']},{row['auc']:.6f},{row['p20']:.6f},{row.get('error', '')}"
        )
    text = "\n".join(lines) + "\n"
    (out / f"sweep_{args.param}.csv").write_text(text, encoding="utf-8")
    print(text, end="")
    if not args.no_figures:
        from .report import save_sweep_figure

        save_sweep_figure(args.param, [r for r in rows if "error" not in r], out / f"sweep_{args.param}.png")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mctrack",
        description="Motion-constrained tracker: simulate scenarios, run trackers, evaluate results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="TOML or JSON config file")
        p.add_argument("--seed", type=int, default=None, help="base seed")
        p.add_argument("--out", required=True, help="output directory")

    p_sim = sub.add_parser("simulate", help="expand a scenario spec into ground truth")
    p_sim.add_argument("--suite", choices=SUITE_CHOICES, default="linear_clear")
    p_sim.add_argument("--spec", default=None, help="scenario spec JSON file")
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_track = sub.add_parser("track", help="run a tracker over an observer")
    add_common(p_track)
    p_track.add_argument("--suite", choices=SUITE_CHOICES, default=None)
    p_track.add_argument("--spec", default=None, help="scenario spec JSON file")
    p_track.add_argument("--sequences", type=int, default=1)
    p_track.add_argument("--variant", choices=VARIANTS, default=None)
    p_track.add_argument("--profile", default=None, help="day|dusk|night|cycle")
    p_track.add_argument(
        "--observer", default=None, help='"synthetic" or "bridge:<command line>"'
    )
    p_track.add_argument("--frames", type=int, default=None, help="frame count (bridge mode)")
    p_track.add_argument("--prompt", type=_parse_box, default=None, help="cx,cy,w,h (bridge mode)")
    p_track.add_argument("--arena", default="1024x1024", help="WxH (bridge mode)")
    p_track.add_argument("--name", default=None, help="sequence name (bridge mode)")
    p_track.add_argument("--timeout", type=float, default=30.0, help="bridge response deadline [s]")
    p_track.add_argument("--figures", action="store_true", help="render per-sequence trace figures")
    p_track.set_defaults(func=cmd_track)

    p_eval = sub.add_parser("eval", help="evaluate results against ground truth")
    p_eval.add_argument("--results", default=None, help="results CSV")
    p_eval.add_argument("--gt", default=None, help="ground-truth txt (left,top,w,h)")
    p_eval.add_argument("--run-dir", default=None, help="directory with manifest.json from track")
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--no-figures", action="store_true")
    p_eval.set_defaults(func=cmd_eval)

    p_abl = sub.add_parser("ablate", help="run all module ablations over builtin suites")
    add_common(p_abl)
    p_abl.add_argument("--suites", default=None, help="comma-separated suite names")
    p_abl.add_argument("--sequences", type=int, default=6, help="sequences per suite")
    p_abl.add_argument("--profile", default="cycle")
    p_abl.add_argument("--no-figures", action="store_true")
    p_abl.set_defaults(func=cmd_ablate)

    p_sweep = sub.add_parser("sweep", help="sweep one hyperparameter over a suite")
    add_common(p_sweep)
    p_sweep.add_argument("--param", choices=SWEEPABLE_PARAMS, required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--suite", choices=SUITE_CHOICES, default="distractor_cross")
    p_sweep.add_argument("--sequences", type=int, default=10)
    p_sweep.add_argument("--variant", choices=VARIANTS, default=None)
    p_sweep.add_argument("--profile", default=None)
    p_sweep.add_argument("--no-figures", action="store_true")
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
