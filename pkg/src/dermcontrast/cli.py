"""Command-line pipeline: score, split, audit, consistency, splits-gen,
weights, trend, serve.

Stages are file-mediated (CSV / JSON Lines) because external training jobs sit
between split generation and auditing. Every output file gets a sidecar
``.manifest.json`` recording the command, input digests, and config. Exit
codes: 0 success, 2 input/contract error, 3 partial completion with per-item
errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from ._version import __version__
from . import audit as audit_mod
from . import cohort as cohort_mod
from .contrast import DEFAULT_LUMINANCE_FLOOR
from .errors import UndefinedMetricError
from .fileio import (
    FileFormatError,
    ScoreRow,
    atomic_write_text,
    read_annotations_jsonl,
    read_cohort_csv,
    read_groups_csv,
    read_predictions_csv,
    read_scores_csv,
    write_groups_csv,
    write_manifest,
    write_report_csv,
    write_scores_csv,
    write_splits_csv,
    write_trend_csv,
)
from .records import GROUP_EXCLUDED, ImageRecord
from .stats import class_weights

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_PARTIAL = 3

ENV_PREFIX = "DERMCONTRAST_"


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT_ERROR


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _out_path(args: argparse.Namespace, name: str) -> Path:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / name


def _config_dict(args: argparse.Namespace) -> dict:
    skip = {"func", "config"}
    return {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k not in skip and not callable(v)
    }


def _parse_seeds(args: argparse.Namespace) -> list[int]:
    if args.seed_list:
        return [int(s) for s in args.seed_list.split(",") if s.strip()]
    return list(range(args.seeds))


def cmd_score(args: argparse.Namespace) -> int:
    records = read_cohort_csv(args.cohort)
    annotations = read_annotations_jsonl(args.annotations)
    result = cohort_mod.score_cohort(
        records, annotations, args.labeller, l_min=args.l_min
    )
    scored = result.scored
    if not scored:
        return _fail(
            f"no image scored: labeller {args.labeller!r} has no annotations "
            f"for this cohort"
        )
    rows = [
        ScoreRow(
            image_id=r.image_id,
            fst_group=r.fst_group,
            malignant=r.malignant,
            score=r.contrast_score,
            excluded=r.contrast_group == GROUP_EXCLUDED,
        )
        for r in scored
    ]
    scores_path = _out_path(args, "scores.csv")
    write_scores_csv(scores_path, rows)
    summary = {
        "labeller": args.labeller,
        "l_min": args.l_min,
        "n_cohort": len(records),
        "n_scored": len(scored),
        "n_excluded": len(result.exclusions),
        "missing": [e.image_id for e in result.errors],
        "exclusions": [
            {
                "image_id": r.image_id,
                "l_lighter": r.contrast_score.lighter,
                "l_darker": r.contrast_score.darker,
            }
            for r in result.exclusions
        ],
    }
    summary_path = _out_path(args, "scores.summary.json")
    atomic_write_text(summary_path, json.dumps(summary, indent=2) + "\n")
    write_manifest(
        scores_path, "score", [args.cohort, args.annotations], _config_dict(args)
    )
    print(
        f"scored {len(scored)}/{len(records)} images "
        f"({len(result.exclusions)} excluded by luminance floor {args.l_min})"
    )
    for entry in summary["exclusions"]:
        print(
            f"excluded: {entry['image_id']} "
            f"(L1={entry['l_lighter']:.6g}, L2={entry['l_darker']:.6g})"
        )
    if result.errors:
        for err in result.errors:
            _warn(f"missing annotation: {err.image_id} ({err.message})")
        return EXIT_PARTIAL
    return EXIT_OK


def _records_from_scores(rows: Sequence[ScoreRow]) -> list[ImageRecord]:
    records = []
    for row in rows:
        rec = ImageRecord(
            image_id=row.image_id,
            file_path="",
            fst_group=row.fst_group,
            malignant=row.malignant,
            contrast_score=row.score,
        )
        if row.excluded:
            rec.contrast_group = GROUP_EXCLUDED
        records.append(rec)
    return records


def cmd_split(args: argparse.Namespace) -> int:
    rows = read_scores_csv(args.scores)
    records = _records_from_scores(rows)
    grouping = cohort_mod.split_by_median(records)
    if grouping.n_high == 0:
        _warn("all scores at or below the median cutoff; high group is empty")
    groups_path = _out_path(args, "groups.csv")
    write_groups_csv(groups_path, grouping.records, grouping.cutoff)
    tab = cohort_mod.cross_tab(grouping.records)
    summary = {
        "cutoff": grouping.cutoff,
        "n_high": grouping.n_high,
        "n_low": grouping.n_low,
        "n_excluded": grouping.n_excluded,
        "excluded": [
            r.image_id for r in grouping.records if r.contrast_group == GROUP_EXCLUDED
        ],
    }
    summary_path = _out_path(args, "groups.summary.json")
    atomic_write_text(summary_path, json.dumps(summary, indent=2) + "\n")
    table_text = tab.to_text()
    atomic_write_text(_out_path(args, "groups.crosstab.txt"), table_text + "\n")
    write_manifest(groups_path, "split", [args.scores], _config_dict(args))
    print(f"median cutoff {grouping.cutoff!r}")
    print(
        f"groups: high={grouping.n_high} low={grouping.n_low} "
        f"excluded={grouping.n_excluded}"
    )
    print(table_text)
    return EXIT_OK


def _parse_gap_pairs(spec: Optional[str]) -> Optional[list[tuple[str, str]]]:
    if spec is None:
        return None
    pairs = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise FileFormatError(
                f"gap pair {chunk!r} must be 'A:B' (meaning AUC(A) - AUC(B))"
            )
        a, b = chunk.split(":", 1)
        pairs.append((a.strip(), b.strip()))
    return pairs


def cmd_audit(args: argparse.Namespace) -> int:
    predictions = read_predictions_csv(args.predictions)
    groups, _scores, _cutoff = read_groups_csv(args.groups)
    records = read_cohort_csv(args.cohort)
    n_ungrouped = 0
    for rec in records:
        group = groups.get(rec.image_id)
        if group is None:
            n_ungrouped += 1
        else:
            rec.contrast_group = group
    if n_ungrouped:
        _warn(f"{n_ungrouped} cohort record(s) missing from the grouping manifest")
    bootstrap = None
    if args.bootstrap:
        bootstrap = audit_mod.BootstrapSpec(
            n_resamples=args.bootstrap, level=args.level, seed=args.seed
        )
    report = audit_mod.subgroup_audit(
        predictions,
        records,
        axis=args.axis,
        gap_pairs=_parse_gap_pairs(args.gaps),
        bootstrap=bootstrap,
    )
    for message in report.warnings:
        _warn(message)
    report_path = _out_path(args, "report.csv")
    write_report_csv(report_path, report, with_ci=bootstrap is not None)
    table_text = report.to_table_text()
    atomic_write_text(_out_path(args, "report.txt"), table_text)
    write_manifest(
        report_path,
        "audit",
        [args.predictions, args.groups, args.cohort],
        _config_dict(args),
    )
    print(table_text, end="")
    return EXIT_OK


def cmd_consistency(args: argparse.Namespace) -> int:
    annotations = read_annotations_jsonl(args.annotations)
    names = [n.strip() for n in args.labellers.split(",") if n.strip()]
    if len(names) != 2:
        return _fail(f"--labellers needs exactly two names, got {names!r}")
    report = audit_mod.consistency_report(annotations, names[0], names[1])
    payload = {
        "labeller_a": report.labeller_a,
        "labeller_b": report.labeller_b,
        "n_shared": report.n_shared,
        "t": report.ttest.t,
        "p": report.ttest.p,
        "df": report.ttest.df,
        "mean_diff": report.ttest.mean_diff,
        "sd_diff": report.ttest.sd_diff,
        "only_a": report.only_a,
        "only_b": report.only_b,
        "summaries": {
            report.labeller_a: vars(report.summary_a),
            report.labeller_b: vars(report.summary_b),
        },
    }
    out_path = _out_path(args, "consistency.json")
    atomic_write_text(out_path, json.dumps(payload, indent=2) + "\n")
    write_manifest(out_path, "consistency", [args.annotations], _config_dict(args))
    print(report.to_text())
    return EXIT_OK


def cmd_splits_gen(args: argparse.Namespace) -> int:
    groups, _scores, _cutoff = read_groups_csv(args.groups)
    records = read_cohort_csv(args.cohort)
    for rec in records:
        rec.contrast_group = groups.get(rec.image_id)
    seeds = _parse_seeds(args)
    result = cohort_mod.make_splits(records, seeds, train_fraction=args.fraction)
    for message in result.warnings:
        _warn(message)
    splits_path = _out_path(args, "splits.csv")
    write_splits_csv(splits_path, result.assignments)
    write_manifest(
        splits_path, "splits-gen", [args.groups, args.cohort], _config_dict(args)
    )
    n_train = sum(1 for a in result.assignments if a.phase == "finetune_train")
    print(
        f"wrote {len(result.assignments)} assignments over {len(seeds)} seed(s) "
        f"({n_train} train rows)"
    )
    return EXIT_OK


def cmd_weights(args: argparse.Namespace) -> int:
    records = read_cohort_csv(args.cohort)
    counts = {
        "benign": sum(1 for r in records if not r.malignant),
        "malignant": sum(1 for r in records if r.malignant),
    }
    if counts["benign"] == 0 or counts["malignant"] == 0:
        return _fail(
            f"both classes required for weights, got counts {counts}"
        )
    weights = class_weights(counts)
    out_path = _out_path(args, "weights.json")
    atomic_write_text(out_path, json.dumps(weights, indent=2, sort_keys=True) + "\n")
    write_manifest(out_path, "weights", [args.cohort], _config_dict(args))
    for name in sorted(weights):
        print(f"{name}: count={counts[name]} weight={weights[name]!r}")
    return EXIT_OK


def cmd_trend(args: argparse.Namespace) -> int:
    annotations = read_annotations_jsonl(args.annotations)
    records = read_cohort_csv(args.cohort)
    report = audit_mod.background_trend(annotations, records)
    if report.n_unmatched:
        _warn(f"{report.n_unmatched} annotation(s) not in the cohort; skipped")
    trend_path = _out_path(args, "trend.csv")
    write_trend_csv(trend_path, report)
    summary = {
        "verdict": report.verdict,
        "n_unmatched": report.n_unmatched,
        "groups": [
            {
                "fst_group": g.fst_group,
                "n": g.n,
                "mean_rgb": list(g.mean_rgb),
                "mean_luminance": g.mean_luminance,
            }
            for g in report.groups
        ],
    }
    atomic_write_text(
        _out_path(args, "trend.summary.json"), json.dumps(summary, indent=2) + "\n"
    )
    write_manifest(
        trend_path, "trend", [args.annotations, args.cohort], _config_dict(args)
    )
    print(report.to_text())
    return EXIT_OK


def _env_default(name: str, fallback):
    return os.environ.get(ENV_PREFIX + name, fallback)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(
        cohort_path=args.cohort,
        image_root=args.image_root,
        log_path=args.log,
        patch_size=args.patch_size,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dermcontrast",
        description=(
            "Score lesion-skin color contrast from point annotations, group a "
            "cohort by the median score, and audit model performance across "
            "contrast and skin-tone subgroups."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--config",
        type=Path,
        default=None,
        help="JSON file of default option values (overridden by explicit flags)",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--out-dir", type=Path, default=Path("."), help="directory for output files"
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "score", parents=[common], help="score a cohort from an annotation log"
    )
    p.add_argument("cohort", type=Path, help="cohort metadata CSV")
    p.add_argument("annotations", type=Path, help="annotation log (JSON Lines)")
    p.add_argument("--labeller", required=True, help="labeller whose scores to use")
    p.add_argument(
        "--l-min",
        type=float,
        default=DEFAULT_LUMINANCE_FLOOR,
        help="abnormal-score luminance floor (default %(default)s)",
    )
    p.set_defaults(func=cmd_score)

    p = sub.add_parser(
        "split", parents=[common], help="assign high/low groups by the median score"
    )
    p.add_argument("scores", type=Path, help="scores CSV from the score command")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser(
        "audit", parents=[common], help="audit predictions across subgroups"
    )
    p.add_argument("predictions", type=Path, help="predictions CSV")
    p.add_argument("groups", type=Path, help="grouping manifest from split")
    p.add_argument("cohort", type=Path, help="cohort metadata CSV")
    p.add_argument(
        "--axis",
        choices=list(audit_mod.AXES),
        default=audit_mod.AXIS_CONTRAST,
        help="subgroup axis (default %(default)s)",
    )
    p.add_argument(
        "--gaps",
        default=None,
        help="comma-separated gap pairs 'A:B' (default: standard pairs per axis)",
    )
    p.add_argument(
        "--bootstrap",
        type=int,
        default=0,
        metavar="N",
        help="add percentile bootstrap CIs from N resamples (0 = off)",
    )
    p.add_argument("--level", type=float, default=0.95, help="CI level (default 0.95)")
    p.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser(
        "consistency", parents=[common], help="compare two labellers' scores"
    )
    p.add_argument("annotations", type=Path, help="annotation log (JSON Lines)")
    p.add_argument(
        "--labellers", required=True, help="two labeller ids, comma-separated"
    )
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser(
        "splits-gen", parents=[common], help="generate seeded stratified splits"
    )
    p.add_argument("groups", type=Path, help="grouping manifest from split")
    p.add_argument("cohort", type=Path, help="cohort metadata CSV")
    p.add_argument(
        "--seeds", type=int, default=5, help="number of seeds, 0..N-1 (default 5)"
    )
    p.add_argument(
        "--seed-list", default=None, help="explicit comma-separated seeds (overrides --seeds)"
    )
    p.add_argument(
        "--fraction", type=float, default=0.8, help="train fraction (default 0.8)"
    )
    p.set_defaults(func=cmd_splits_gen)

    p = sub.add_parser(
        "weights", parents=[common], help="inverse-frequency class weights"
    )
    p.add_argument("cohort", type=Path, help="cohort metadata CSV")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser(
        "trend", parents=[common], help="background color means by FST group"
    )
    p.add_argument("annotations", type=Path, help="annotation log (JSON Lines)")
    p.add_argument("cohort", type=Path, help="cohort metadata CSV")
    p.set_defaults(func=cmd_trend)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument(
        "--host", default=_env_default("HOST", "127.0.0.1"), help="listen address"
    )
    p.add_argument(
        "--port", type=int, default=int(_env_default("PORT", "8321")), help="listen port"
    )
    p.add_argument(
        "--cohort",
        type=Path,
        default=_env_default("COHORT", None),
        required=ENV_PREFIX + "COHORT" not in os.environ,
        help="cohort metadata CSV",
    )
    p.add_argument(
        "--image-root",
        type=Path,
        default=_env_default("IMAGE_ROOT", "."),
        help="directory that relative image paths resolve against",
    )
    p.add_argument(
        "--log",
        type=Path,
        default=_env_default("LOG", "annotations.jsonl"),
        help="annotation log path (JSON Lines, append-only)",
    )
    p.add_argument(
        "--patch-size",
        type=int,
        default=int(_env_default("PATCH_SIZE", "1")),
        help="odd pixel-sampling patch size; 1 reads exactly one pixel",
    )
    p.add_argument(
        "--ui-dir",
        type=Path,
        default=_env_default("UI_DIR", None),
        help="serve the annotation UI (a built frontend/ directory) at /",
    )
    p.set_defaults(func=cmd_serve)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Install --config values as parser defaults (explicit flags still win)."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path, default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return
    with open(known.config, "r", encoding="utf-8") as handle:
        config = json.load(handle)
    if not isinstance(config, dict):
        raise FileFormatError(f"{known.config}: config must be a JSON object")
    reserved = {"func", "command", "config"}
    normalized = {
        k.replace("-", "_"): v
        for k, v in config.items()
        if k.replace("-", "_") not in reserved
    }
    # Subparsers parse into a fresh namespace, so defaults must be installed
    # on every subparser that defines the option, not just the root parser.
    for action in parser._actions:  # noqa: SLF001
        if isinstance(action, argparse._SubParsersAction):  # noqa: SLF001
            for sub in action.choices.values():
                dests = {a.dest for a in sub._actions}  # noqa: SLF001
                applicable = {k: v for k, v in normalized.items() if k in dests}
                if applicable:
                    sub.set_defaults(**applicable)
    top_dests = {a.dest for a in parser._actions}
    parser.set_defaults(**{k: v for k, v in normalized.items() if k in top_dests})


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except FileFormatError as exc:
        return _fail(str(exc))
    except UndefinedMetricError as exc:
        return _fail(str(exc))
    except ValueError as exc:
        return _fail(str(exc))
    except FileNotFoundError as exc:
        return _fail(f"{exc.filename}: file not found")


if __name__ == "__main__":
    sys.exit(main())
