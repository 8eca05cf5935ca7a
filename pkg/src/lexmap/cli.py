"""Command-line entry point wiring the library into reproducible runs.

Every subcommand writes a config snapshot (config.json) next to its
outputs; rerunning with --config <snapshot> reproduces the primary outputs
byte for byte. All randomness derives from --seed. Usage errors exit 2;
runtime failures exit 1 after printing one machine-parsable line of the
form ``error: <category>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, synth
from .embeddings import load_embeddings
from .lexicon import build_dataset, build_full_dataset, load_lexicon
from .mapper import TrainConfig, load_map, save_map, train_least_squares, train_max_margin
from .neighborhoods import build_neighborhood, growth_profile, profile_to_tsv
from .translate import load_atlas, piecewise_translate, translate_topk


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trainer", choices=["maxmargin", "lsq"], default="maxmargin")
    parser.add_argument("--gamma", type=float, default=0.4)
    parser.add_argument("--negatives", type=int, default=1)
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--lr", type=float, default=0.1)
    parser.add_argument("--lr-decay", type=float, default=0.99)
    parser.add_argument("--init", choices=["identity", "zeros", "scaled-random"], default="identity")
    parser.add_argument("--ortho-weight", type=float, default=0.0)
    parser.add_argument("--lam", type=float, default=0.0, help="ridge weight for --trainer lsq")


def _train_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        gamma=args.gamma,
        negatives=args.negatives,
        epochs=args.epochs,
        learning_rate=args.lr,
        lr_decay=args.lr_decay,
        seed=args.seed,
        init=args.init,
        ortho_weight=args.ortho_weight,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexmap",
        description="Locally linear word-translation maps: training, diagnostics, serving.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("neighborhood", help="emit neighborhood growth profiles")
    p.add_argument("--src-emb")
    p.add_argument("--anchors", help="comma-separated anchor words")
    p.add_argument("--thresholds", default="0.9,0.8,0.7,0.6,0.5,0.4,0.3",
                   help="comma-separated descending thresholds")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--no-normalize", action="store_true")

    p = sub.add_parser("train", help="train one map (whole lexicon or one neighborhood)")
    p.add_argument("--src-emb")
    p.add_argument("--tgt-emb")
    p.add_argument("--lexicon")
    p.add_argument("--anchor", default=None, help="train on this word's neighborhood only")
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--no-normalize", action="store_true")
    _add_train_flags(p)

    p = sub.add_parser("experiment", help="full multi-anchor report")
    p.add_argument("--src-emb")
    p.add_argument("--tgt-emb")
    p.add_argument("--lexicon")
    p.add_argument("--anchors", help="comma list; first anchor is the reference")
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--test-size", type=int, default=500)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--min-train", type=int, default=50)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--split-method", choices=["random", "frequency"], default="random")
    _add_train_flags(p)

    p = sub.add_parser("translate", help="batch translation via a map or an atlas")
    p.add_argument("--src-emb")
    p.add_argument("--tgt-emb")
    p.add_argument("--map", dest="map_path", default=None)
    p.add_argument("--atlas", default=None, help="directory written by experiment/save_atlas")
    p.add_argument("--words", default=None, help="comma-separated source words")
    p.add_argument("--input", default=None, help="file with one source word per line")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--floor", type=float, default=0.0)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--no-normalize", action="store_true")

    p = sub.add_parser("synth", help="generate a synthetic world on disk")
    p.add_argument("--kind", choices=["linear", "nonlinear"], default="linear")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--d", type=int, default=50)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--variation-strength", type=float, default=1.5)
    p.add_argument("--clusters", type=int, default=8)
    p.add_argument("--cluster-std", type=float, default=0.3)

    p = sub.add_parser("diagnose", help="locality diagnostic on an exported world")
    p.add_argument("--world", help="directory written by the synth subcommand")
    p.add_argument("--anchors", default=None, help="comma list; default: one per cluster")
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--test-size", type=int, default=100)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--min-train", type=int, default=50)
    p.add_argument("--jobs", type=int, default=1)
    _add_train_flags(p)

    for sp in sub.choices.values():
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--config", default=None, help="rerun from a config.json snapshot")
    return parser


# flags that must be present after any --config snapshot is applied
_REQUIRED = {
    "neighborhood": ("src_emb", "anchors", "out"),
    "train": ("src_emb", "tgt_emb", "lexicon", "out"),
    "experiment": ("src_emb", "tgt_emb", "lexicon", "anchors", "out"),
    "translate": ("src_emb", "tgt_emb", "out"),
    "synth": ("out",),
    "diagnose": ("world", "out"),
}


def _apply_snapshot(args: argparse.Namespace, argv: list[str]) -> argparse.Namespace:
    """Fill args from a snapshot; flags given explicitly on argv still win."""
    with open(args.config, "r", encoding="utf-8") as fh:
        snapshot = json.load(fh)
    if snapshot.get("subcommand") != args.subcommand:
        raise ValueError(
            f"snapshot is for subcommand {snapshot.get('subcommand')!r}, not {args.subcommand!r}"
        )
    explicit = {tok.split("=", 1)[0] for tok in argv if tok.startswith("--")}
    for key, value in snapshot.get("args", {}).items():
        flag = "--" + key.replace("_", "-")
        if flag not in explicit:
            setattr(args, key, value)
    return args


def _write_snapshot(args: argparse.Namespace, out: Path) -> None:
    payload = {k: v for k, v in vars(args).items() if k not in ("subcommand", "config")}
    with (out / "config.json").open("w", encoding="utf-8") as fh:
        json.dump({"subcommand": args.subcommand, "args": payload}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _comma_list(value: str) -> list[str]:
    items = [w for w in value.split(",") if w]
    if not items:
        raise ValueError("empty comma list")
    return items


def _safe_name(token: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in token)


def _cmd_neighborhood(args) -> int:
    space = load_embeddings(args.src_emb, limit=args.limit, normalize=not args.no_normalize)
    thresholds = [float(t) for t in _comma_list(args.thresholds)]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for anchor in _comma_list(args.anchors):
        profile = growth_profile(space, anchor, thresholds)
        name = f"profile_{_safe_name(anchor)}.tsv"
        (out / name).write_text(profile_to_tsv(profile), encoding="utf-8")
    _write_snapshot(args, out)
    return 0


def _cmd_train(args) -> int:
    normalize = not args.no_normalize
    src_space = load_embeddings(args.src_emb, limit=args.limit, normalize=normalize)
    tgt_space = load_embeddings(args.tgt_emb, limit=args.limit, normalize=normalize)
    lexicon = load_lexicon(args.lexicon)
    if args.anchor is not None:
        nb = build_neighborhood(src_space, args.anchor, args.s)
        train = build_dataset(nb, lexicon, src_space, tgt_space)
        anchor = args.anchor
    else:
        train = build_full_dataset(lexicon, src_space, tgt_space)
        anchor = "global"
    if args.trainer == "maxmargin":
        fitted = train_max_margin(train, tgt_space, _train_config(args), anchor=anchor)
    else:
        fitted = train_least_squares(train, tgt_space, lam=args.lam, anchor=anchor)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_map(fitted, out / "map.txt")
    _write_snapshot(args, out)
    print(f"trained {fitted.trainer} map on {fitted.train_size} pairs -> {out / 'map.txt'}")
    return 0


def _write_report(report, out: Path) -> None:
    (out / "report.tsv").write_text(analysis.report_to_tsv(report), encoding="utf-8")
    (out / "report.jsonl").write_text(analysis.report_to_records(report), encoding="utf-8")
    (out / "scatter.tsv").write_text(analysis.report_scatter_tsv(report), encoding="utf-8")
    maps_dir = out / "maps"
    maps_dir.mkdir(exist_ok=True)
    for anchor, fitted in report.local_maps.items():
        save_map(fitted, maps_dir / f"local_{_safe_name(anchor)}.txt")
    if report.global_map is not None:
        save_map(report.global_map, maps_dir / "global.txt")


def _cmd_experiment(args) -> int:
    normalize = not args.no_normalize
    src_space = load_embeddings(args.src_emb, limit=args.limit, normalize=normalize)
    tgt_space = load_embeddings(args.tgt_emb, limit=args.limit, normalize=normalize)
    lexicon = load_lexicon(args.lexicon)
    report = analysis.run_experiment(
        _comma_list(args.anchors),
        args.s,
        src_space,
        tgt_space,
        lexicon,
        _train_config(args),
        test_sizes=args.test_size,
        seed=args.seed,
        trainer="max_margin" if args.trainer == "maxmargin" else "least_squares",
        lam=args.lam,
        eval_k=args.k,
        min_train=args.min_train,
        split_method=args.split_method,
        jobs=args.jobs,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_report(report, out)
    _write_snapshot(args, out)
    print(analysis.report_to_tsv(report), end="")
    return 0


def _cmd_translate(args) -> int:
    if (args.map_path is None) == (args.atlas is None):
        raise ValueError("pass exactly one of --map or --atlas")
    normalize = not args.no_normalize
    src_space = load_embeddings(args.src_emb, limit=args.limit, normalize=normalize)
    tgt_space = load_embeddings(args.tgt_emb, limit=args.limit, normalize=normalize)
    if args.words:
        words = _comma_list(args.words)
    elif args.input:
        words = [w.strip() for w in Path(args.input).read_text(encoding="utf-8").splitlines() if w.strip()]
    else:
        raise ValueError("pass --words or --input")

    lines = ["source\tmap\trank\ttarget\tscore"]
    if args.map_path:
        fitted = load_map(args.map_path)
        for word in words:
            ranking = translate_topk(fitted, src_space.vector(word), tgt_space, args.k)
            for rank, (target, score) in enumerate(ranking, 1):
                lines.append(f"{word}\t{fitted.anchor}\t{rank}\t{target}\t{score:.6f}")
    else:
        atlas = load_atlas(args.atlas)
        for word in words:
            ranking, label = piecewise_translate(
                atlas, word, src_space, tgt_space, args.k, floor=args.floor
            )
            for rank, (target, score) in enumerate(ranking, 1):
                lines.append(f"{word}\t{label}\t{rank}\t{target}\t{score:.6f}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "translations.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_snapshot(args, out)
    print("\n".join(lines))
    return 0


def _cmd_synth(args) -> int:
    if args.kind == "linear":
        world = synth.generate_linear_world(
            args.n, args.d, noise_sigma=args.noise_sigma, seed=args.seed,
            n_clusters=args.clusters, cluster_std=args.cluster_std,
        )
    else:
        world = synth.generate_nonlinear_world(
            args.n, args.d, noise_sigma=args.noise_sigma, seed=args.seed,
            variation_strength=args.variation_strength,
            n_clusters=args.clusters, cluster_std=args.cluster_std,
        )
    out = Path(args.out)
    synth.export_world(world, out)
    _write_snapshot(args, out)
    print(f"wrote {args.kind} world (n={args.n}, d={args.d}) to {out}")
    return 0


def _cmd_diagnose(args) -> int:
    world = synth.load_world(args.world)
    anchors = _comma_list(args.anchors) if args.anchors else synth.default_anchor_words(world)
    report = synth.locality_diagnostic(
        world,
        anchors,
        args.s,
        "max_margin" if args.trainer == "maxmargin" else "least_squares",
        _train_config(args),
        test_size=args.test_size,
        seed=args.seed,
        eval_k=args.k,
        min_train=args.min_train,
        lam=args.lam,
        jobs=args.jobs,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_report(report, out)
    (out / "pairwise.tsv").write_text(synth.pairwise_to_tsv(report), encoding="utf-8")
    _write_snapshot(args, out)
    print(analysis.report_to_tsv(report), end="")
    return 0


_COMMANDS = {
    "neighborhood": _cmd_neighborhood,
    "train": _cmd_train,
    "experiment": _cmd_experiment,
    "translate": _cmd_translate,
    "synth": _cmd_synth,
    "diagnose": _cmd_diagnose,
}


def run(argv: list[str]) -> int:
    """Parse and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors (exit code 2)
        return int(exc.code or 0)
    try:
        if args.config:
            args = _apply_snapshot(args, argv)
        missing = [f for f in _REQUIRED[args.subcommand] if getattr(args, f) is None]
        if missing:
            flags = ", ".join("--" + f.replace("_", "-") for f in missing)
            print(f"error: usage: missing required arguments: {flags}", file=sys.stderr)
            return 2
        return _COMMANDS[args.subcommand](args)
    except FileNotFoundError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
    except (ValueError, KeyError) as exc:
        print(f"error: constraint: {exc}", file=sys.stderr)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: numeric: {exc}", file=sys.stderr)
    return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
