"""Command-line interface.

    ajive toy --out toy
    ajive scree --manifest toy/manifest.ini
    ajive diagnose --manifest toy/manifest.ini --grid "2,2 2,3 3,3 2,4"
    ajive analyze --manifest toy/manifest.ini --ranks 2,3 --seed 1 --verify
    ajive simulate --trials 500
    ajive baseline pls --manifest toy/manifest.ini --components 3

The output directory defaults to ``$AJIVE_OUT`` and then ``./ajive_out``.
Every command exits 0 only after all of its outputs are written.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .blocks import DatasetError, MultiBlockDataset, center_rows, load_dataset, load_manifest, write_manifest, write_matrix
from .bounds import DEFAULT_REPLICATES, BoundCutoffs
from .decompose import verify_outputs, write_decomposition
from .extract import scree, write_scree
from .pipeline import ajive, diagnose

logger = logging.getLogger("ajive")

OUT_ENV = "AJIVE_OUT"


class CliError(Exception):
    pass


def _parse_ranks(text: str) -> tuple[int, ...]:
    try:
        ranks = tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"ranks must be comma separated integers, got {text!r}")
    if not ranks or min(ranks) < 1:
        raise argparse.ArgumentTypeError(f"ranks must be positive, got {text!r}")
    return ranks


def _parse_grid(text: str) -> list[tuple[int, ...]]:
    # tuples separated by whitespace or ';'
    parts = text.replace(";", " ").split()
    if not parts:
        raise argparse.ArgumentTypeError("rank grid is empty")
    return [_parse_ranks(p) for p in parts]


def _parse_center(items) -> tuple[bool | None, dict]:
    """``--center yes`` applies to all blocks, ``--center X=no`` to one."""
    everyone, per_block = None, {}
    for item in items or []:
        name, _, flag = item.rpartition("=")
        value = flag.strip().lower()
        if value not in ("yes", "no"):
            raise CliError(f"--center expects yes/no, got {item!r}")
        if name:
            per_block[name] = value == "yes"
        else:
            everyone = value == "yes"
    return everyone, per_block


def _load(args) -> MultiBlockDataset:
    everyone, per_block = _parse_center(args.center)
    if args.manifest:
        if args.blocks:
            raise CliError("give either --manifest or block files, not both")
        if everyone is not None:
            raise CliError("with --manifest, set centering per block (--center NAME=yes)")
        return load_manifest(args.manifest, per_block)
    if not args.blocks:
        raise CliError("no input: give --manifest or at least two block files")
    names = args.names.split(",") if args.names else [Path(p).stem for p in args.blocks]
    if len(names) != len(args.blocks):
        raise CliError(f"{len(names)} names for {len(args.blocks)} block files")
    center = {n: per_block.get(n, bool(everyone)) for n in names}
    return load_dataset(args.blocks, names, center=center)


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "ajive_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cutoffs(args) -> BoundCutoffs:
    return BoundCutoffs(args.percentile_wedin, args.percentile_random)


def _check_ranks(dataset, ranks):
    if len(ranks) != len(dataset):
        raise CliError(f"{len(ranks)} ranks given for {len(dataset)} blocks ({', '.join(dataset.names)})")


def _tag(ranks) -> str:
    return "_".join(str(r) for r in ranks)


# --------------------------------------------------------------------------
# commands


def cmd_scree(args) -> int:
    dataset = _load(args)
    out = _out_dir(args)
    for block in dataset:
        path = out / f"scree_{block.name}.csv"
        write_scree(path, scree(block))
        print(path)
    return 0


def cmd_diagnose(args) -> int:
    dataset = _load(args)
    grid = args.grid or ([args.ranks] if args.ranks else None)
    if not grid:
        raise CliError("give --grid or --ranks")
    out = _out_dir(args)
    rows = ["ranks,joint_rank_candidate,verdicts,flags"]
    for ranks in grid:
        _check_ranks(dataset, ranks)
        diag = diagnose(dataset, ranks, args.replicates, args.seed, _cutoffs(args))
        path = out / f"diagnostics_{_tag(ranks)}.json"
        diag.write_json(path)
        verdicts = " ".join(v.value for v in diag.verdicts)
        rows.append(f"\"{','.join(map(str, ranks))}\",{diag.joint_rank_candidate},{verdicts},{' '.join(diag.flags)}")
        print(f"ranks {ranks}: joint candidates {diag.joint_rank_candidate} [{verdicts}]" + (f" flags: {', '.join(diag.flags)}" if diag.flags else ""))
    (out / "grid_summary.csv").write_text("\n".join(rows) + "\n")
    return 0


def cmd_analyze(args) -> int:
    dataset = _load(args)
    if not args.ranks:
        raise CliError("--ranks is required")
    _check_ranks(dataset, args.ranks)
    result = ajive(dataset, args.ranks, args.replicates, args.seed, _cutoffs(args), args.joint_rank)
    out = _out_dir(args)
    labels = {b.name: list(b.feature_labels) if b.feature_labels is not None else None for b in dataset}
    objects = list(dataset.object_labels) if dataset.object_labels is not None else None
    write_decomposition(result, out, objects, labels)
    s = result.summary()
    print(f"joint rank {s['joint_rank']} (candidates {s['candidate_joint_rank']}); individual ranks {s['individual_ranks']}")
    if args.verify:
        problems = verify_outputs(dataset, out)
        for p in problems:
            print(f"verify: {p}", file=sys.stderr)
        if problems:
            return 1
        print("verify: outputs reproduce the blocks and respect the joint space")
    return 0


def _toy_config(settings):
    from .synth import ToyConfig

    fields = {f.name: f.type for f in dataclasses.fields(ToyConfig)}
    kw = {}
    for item in settings or []:
        key, sep, value = item.partition("=")
        if not sep or key not in fields:
            raise CliError(f"--set expects KEY=VALUE with KEY in {', '.join(fields)}; got {item!r}")
        kw[key] = int(value) if fields[key] in (int, "int") else float(value)
    return ToyConfig(**kw)


def cmd_toy(args) -> int:
    from .synth import make_toy

    cfg = _toy_config(args.set)
    dataset, truth = make_toy(cfg, seed=args.seed)
    out = _out_dir(args)
    entries = {}
    for block in dataset:
        entries[block.name] = f"{block.name}.csv"
        write_matrix(out / entries[block.name], block.values)
    write_manifest(out / "manifest.ini", entries)
    tdir = out / "truth"
    for bt in truth.blocks:
        write_matrix(tdir / f"joint_{bt.name}.csv", bt.joint)
        write_matrix(tdir / f"individual_{bt.name}.csv", bt.individual)
        write_matrix(tdir / f"noise_{bt.name}.csv", bt.noise)
    write_matrix(tdir / "joint_scores.csv", truth.joint_space.basis.T)
    meta = {"seed": args.seed, "config": dataclasses.asdict(cfg), "ranks": {b.name: [b.joint_rank, b.individual_rank] for b in truth.blocks}}
    (tdir / "config.json").write_text(json.dumps(meta, indent=2))
    print(out / "manifest.ini")
    return 0


def cmd_simulate(args) -> int:
    from .synth.coverage import DEFAULT_RANK_SPECS, FULL_TRIALS, coverage_simulation

    trials = FULL_TRIALS if args.full else args.trials
    specs = dict(DEFAULT_RANK_SPECS)
    if args.x_ranks:
        specs["X"] = args.x_ranks
    if args.y_ranks:
        specs["Y"] = args.y_ranks
    table = coverage_simulation(
        trials,
        specs,
        args.percentiles,
        args.seed,
        args.block,
        args.replicates,
        _toy_config(args.set),
        args.workers,
    )
    out = _out_dir(args)
    csv_path, _ = table.write(out)
    for block in table.rank_specs:
        print(table.format(block))
    print(csv_path)
    return 0


def cmd_baseline(args) -> int:
    from .synth.baselines import baseline_concat_svd, baseline_pls

    dataset = _load(args)
    out = _out_dir(args)
    if args.method == "concat":
        res = baseline_concat_svd(dataset, args.rank)
        for name, approx in res.approximations.items():
            write_matrix(out / f"concat_{name}.csv", approx)
        write_matrix(out / "concat_scores.csv", res.svd.right.T)
    else:
        if any(np.abs(b.values.mean(axis=1)).max() > 0 for b in dataset) and not args.no_center:
            dataset = MultiBlockDataset(tuple(center_rows(b) for b in dataset))
        res = baseline_pls(dataset, args.components)
        for i, name in enumerate(res.names):
            write_matrix(out / f"pls_weights_{name}.csv", res.weights[i])
            write_matrix(out / f"pls_scores_{name}.csv", res.scores[i])
            write_matrix(out / f"pls_approx_{name}.csv", res.approximations[name])
        (out / "pls_covariances.json").write_text(json.dumps(res.covariances.tolist()))
    print(out)
    return 0


# --------------------------------------------------------------------------
# parser


def _data_args(p):
    p.add_argument("blocks", nargs="*", help="block files (features x objects), at least two")
    p.add_argument("--manifest", help="INI manifest with one section per block")
    p.add_argument("--names", help="comma separated block names (default: file stems)")
    p.add_argument("--center", action="append", metavar="[BLOCK=]yes|no", help="row-center blocks (repeatable)")


def _out_arg(p):
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./ajive_out)")


def _bound_args(p):
    p.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES, help="replicates per bound distribution")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--percentile-wedin", type=float, default=None, help="Wedin percentile, angle scale (default 95)")
    p.add_argument("--percentile-random", type=float, default=None, help="random-direction percentile, angle scale (default 5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ajive", description="Joint and individual variation of multi-block data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scree", help="singular values per block")
    _data_args(p)
    _out_arg(p)
    p.set_defaults(func=cmd_scree)

    p = sub.add_parser("diagnose", help="Step 1 and 2 diagnostics over a grid of initial ranks")
    _data_args(p)
    _bound_args(p)
    p.add_argument("--grid", type=_parse_grid, help='rank tuples, e.g. "2,2 2,3 3,3"')
    p.add_argument("--ranks", type=_parse_ranks)
    _out_arg(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("analyze", help="full decomposition")
    _data_args(p)
    _bound_args(p)
    p.add_argument("--ranks", type=_parse_ranks, help="initial signal ranks, e.g. 2,3")
    p.add_argument("--joint-rank", type=int, default=None, help="skip bound selection and keep this many candidates")
    p.add_argument("--verify", action="store_true", help="reload outputs and check additivity and orthogonality")
    _out_arg(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("toy", help="generate the two-block toy dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a ToyConfig field")
    _out_arg(p)
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("simulate", help="coverage of the resampled Wedin bound on the toy data")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--full", action="store_true", help="run 10000 trials")
    p.add_argument("--block", choices=["X", "Y"])
    p.add_argument("--x-ranks", type=_parse_ranks)
    p.add_argument("--y-ranks", type=_parse_ranks)
    p.add_argument("--percentiles", type=lambda s: [float(v) for v in s.split(",")], default=[50.0, 90.0, 95.0, 99.0])
    p.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a ToyConfig field")
    _out_arg(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("baseline", help="concatenated SVD or PLS for comparison")
    p.add_argument("method", choices=["concat", "pls"])
    _data_args(p)
    p.add_argument("--rank", type=int, default=2, help="concat: rank of the joint SVD")
    p.add_argument("--components", type=int, default=2, help="pls: number of direction pairs")
    p.add_argument("--no-center", action="store_true", help="pls: do not row-center before fitting")
    _out_arg(p)
    p.set_defaults(func=cmd_baseline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, DatasetError, ValueError, OSError) as exc:
        print(f"ajive {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
