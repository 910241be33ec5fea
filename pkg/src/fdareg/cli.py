"""Command-line entry point.

Commands: ``represent`` (basis projection + LOO report, optional curve
files), ``make-holes`` (semi-artificial missing-data benchmark),
``experiment`` (one spec file) and ``suite`` (a whole results table).
Every run writes a manifest sufficient to reproduce it; all randomness
derives from one ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import fdata, fpca, represent, suites, transforms
from .cv import derive_seed
from .errors import FdaregError
from .selection import ExperimentSpec, run_experiment


def _resolve_data(path: str) -> Path:
    """Resolve a data path, falling back to $FDAREG_DATA_DIR."""
    p = Path(path)
    if p.exists():
        return p
    env = os.environ.get("FDAREG_DATA_DIR")
    if env and (Path(env) / path).exists():
        return Path(env) / path
    raise FileNotFoundError(path)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def _load(args) -> fdata.Dataset:
    return fdata.load_dataset(_resolve_data(args.data), args.format)


def _split_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="dataset file")
    parser.add_argument(
        "--format", default="tecator-grid", choices=["tecator-grid", "generic-pairs"]
    )


def _write_manifest(outdir: Path, payload: dict) -> None:
    payload = dict(payload, toolkit_version=__version__)
    _atomic_write(outdir / "manifest.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _args_dict(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def cmd_make_holes(args) -> int:
    dataset = _load(args)
    holed = fdata.make_holes(dataset, args.drop_fraction, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fdata.save_generic_pairs(holed, out)
    print(f"wrote {len(holed)} holed functions to {out}")
    return 0


def cmd_represent(args) -> int:
    dataset = _load(args)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    if args.dimension == "loo":
        sel = represent.select_basis_size(
            dataset.functions, dataset.domain, args.basis, args.order
        )
        dimension = sel.dimension
        loo_lines = ["dimension,total_loo"]
        loo_lines += [f"{q},{sel.scores[q]:.12g}" for q in sorted(sel.scores)]
        loo_lines += [f"{q},skipped:{reason}" for q, reason in sorted(sel.skipped.items())]
        _atomic_write(outdir / "loo_report.csv", "\n".join(loo_lines) + "\n")
    else:
        dimension = int(args.dimension)
    basis = represent.make_basis(args.basis, dataset.domain, dimension, args.order)
    gram = basis.gram_factor(args.quad_points)

    reps = [represent.fit(f, basis, gram) for f in dataset.functions]
    header = ",".join(f"c{k}" for k in range(dimension))
    for name, mat in (
        ("alpha", np.array([r.alpha for r in reps])),
        ("beta", np.array([r.beta for r in reps])),
    ):
        rows = [f"id,{header}"]
        rows += [
            f"{f.id}," + ",".join(f"{v:.12g}" for v in row)
            for f, row in zip(dataset.functions, mat)
        ]
        _atomic_write(outdir / f"{name}.csv", "\n".join(rows) + "\n")

    # reconstructions at the sample abscissas, reloadable as a dataset
    recon = fdata.Dataset(
        [
            fdata.SampledFunction(f.x, r(f.x), id=f.id)
            for f, r in zip(dataset.functions, reps)
        ],
        dataset.targets,
        dataset.domain,
    )
    fdata.save_generic_pairs(recon, outdir / "reconstruction.pairs")

    summary = {
        "basis": args.basis,
        "order": args.order,
        "dimension": dimension,
        "n_functions": len(dataset),
        "mean_sse": float(np.mean([r.sse for r in reps])),
    }
    _write_manifest(outdir, {"command": "represent", "args": _args_dict(args), **summary})
    if args.emit_curves:
        _emit_curves(dataset, reps, outdir, args)
    print(
        f"represented {len(dataset)} functions on a {args.basis} basis "
        f"(order {args.order}, dimension {dimension}); outputs in {outdir}"
    )
    return 0


def _emit_curves(dataset, reps, outdir: Path, args) -> None:
    """Plot-ready (x, y) curve files: samples, fits, derivatives, variance."""
    a, b = dataset.domain
    grid = np.linspace(a, b, 400)
    n_show = min(args.curve_functions, len(dataset))

    def curve_file(name, columns, rows):
        lines = [",".join(columns)]
        lines += [",".join(f"{v:.10g}" for v in row) for row in rows]
        _atomic_write(outdir / name, "\n".join(lines) + "\n")

    for i in range(n_show):
        f, r = dataset.functions[i], reps[i]
        curve_file(
            f"curve_samples_{i}.csv", ["x", "y"], np.column_stack([f.x, f.y])
        )
        curve_file(
            f"curve_fit_{i}.csv", ["x", "y"], np.column_stack([grid, r(grid)])
        )
        try:
            centered = transforms.center_reduce(r)
            curve_file(
                f"curve_center_reduce_{i}.csv",
                ["x", "y"],
                np.column_stack([grid, centered(grid)]),
            )
        except FdaregError:
            pass
        for s in (1, 2):
            try:
                d = transforms.derive(r, s)
            except FdaregError:
                break
            curve_file(
                f"curve_deriv{s}_{i}.csv", ["x", "y"], np.column_stack([grid, d(grid)])
            )

    betas = np.array([r.beta for r in reps])
    model = fpca.fit_fpca(betas)
    ratio = model.explained_variance_ratio()
    curve_file(
        "curve_pca_variance.csv",
        ["component", "explained_variance_pct"],
        np.column_stack([np.arange(1, ratio.size + 1), 100.0 * ratio]),
    )
    means = np.array([transforms.functional_stats(r).mu for r in reps])
    first_scores = fpca.scores(model, betas, n_components=1)[:, 0]
    curve_file(
        "curve_pc1_vs_mean.csv",
        ["spectrum_mean", "pc1_score"],
        np.column_stack([means, first_scores]),
    )


def _report_lines(reports, title: str) -> str:
    width = max(len(r.name) for r in reports) + 2
    lines = [title, ""]
    lines.append(f"{'experiment':<{width}}{'test-rmse':>10}  selected")
    for r in reports:
        lines.append(f"{r.name:<{width}}{r.test_rmse:>10.4f}  {r.selected_as_text()}")
    return "\n".join(lines) + "\n"


def _results_csv(reports) -> str:
    lines = ["experiment,selected-params,test-rmse,wall-time"]
    for r in reports:
        sel = r.selected_as_text().replace(",", ";")
        lines.append(f"{r.name},{sel},{r.test_rmse:.6f},{r.wall_time:.3f}")
    return "\n".join(lines) + "\n"


def _run_rows(specs, train, test, outdir: Path, manifest: dict, title: str) -> int:
    reports = []
    for spec in specs:
        print(f"running {spec.name} ...", flush=True)
        t0 = time.perf_counter()
        report = run_experiment(spec, train, test)
        print(
            f"  {spec.name}: test RMSE {report.test_rmse:.4f} "
            f"({time.perf_counter() - t0:.1f}s; {report.selected_as_text()})",
            flush=True,
        )
        reports.append(report)
        row_payload = {
            "name": report.name,
            "model": report.model,
            "test_rmse": report.test_rmse,
            "cv_score": report.cv_score,
            "selected": report.selected,
            "info": report.info,
            "notes": list(report.notes),
            "seed": report.seed,
        }
        _atomic_write(
            outdir / f"row_{report.name}.json",
            json.dumps(row_payload, indent=2, sort_keys=True) + "\n",
        )
    _atomic_write(outdir / "report.txt", _report_lines(reports, title))
    _atomic_write(outdir / "results.csv", _results_csv(reports))
    manifest["rows"] = [spec.name for spec in specs]
    manifest["specs"] = [spec.to_dict() for spec in specs]
    _write_manifest(outdir, manifest)
    print((outdir / "report.txt").read_text(), end="")
    return 0


def _prepare_split(args, dataset, master_seed: int):
    if args.drop_fraction > 0:
        dataset = fdata.make_holes(
            dataset, args.drop_fraction, derive_seed(master_seed, "holes")
        )
    shuffle = args.split == "random"
    return fdata.split(
        dataset, args.test_size, seed=derive_seed(master_seed, "split"), shuffle=shuffle
    )


def cmd_experiment(args) -> int:
    raw = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    spec = ExperimentSpec.from_dict(raw)
    if args.seed is not None:
        spec = ExperimentSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    dataset = _load(args)
    train, test = _prepare_split(args, dataset, spec.seed)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": "experiment",
        "args": _args_dict(args),
        "split": args.split,
        "n_train": len(train),
        "n_test": len(test),
    }
    return _run_rows([spec], train, test, outdir, manifest, f"experiment: {spec.name}")


def cmd_suite(args) -> int:
    builder = suites.SUITE_BUILDERS[args.table]
    if args.table in suites.HOLED_TABLES and args.drop_fraction == 0.0:
        args.drop_fraction = 0.1
    specs = builder(seed=args.seed)
    dataset = _load(args)
    train, test = _prepare_split(args, dataset, args.seed)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": "suite",
        "table": args.table,
        "args": _args_dict(args),
        "split": args.split,
        "n_train": len(train),
        "n_test": len(test),
    }
    title = (
        f"suite {args.table}  seed={args.seed}  split={args.split}  "
        f"drop-fraction={args.drop_fraction}  train={len(train)}  test={len(test)}"
    )
    return _run_rows(specs, train, test, outdir, manifest, title)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdareg",
        description="Functional data regression toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("represent", help="project functions onto a smooth basis")
    _split_args(p)
    p.add_argument("--basis", default="bspline", choices=["bspline", "fourier"])
    p.add_argument("--order", type=int, default=4, help="spline order")
    p.add_argument(
        "--dimension", default="loo",
        help="basis size, or 'loo' to select it by leave-one-out",
    )
    p.add_argument("--quad-points", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--emit-curves", action="store_true", help="write plot-ready curve files")
    p.add_argument("--curve-functions", type=int, default=5)
    p.set_defaults(func=cmd_represent)

    p = sub.add_parser("make-holes", help="punch random holes into every function")
    _split_args(p)
    p.add_argument("--drop-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output file (generic-pairs)")
    p.set_defaults(func=cmd_make_holes)

    for name, fn, extra in (
        ("experiment", cmd_experiment, True),
        ("suite", cmd_suite, False),
    ):
        p = sub.add_parser(
            name,
            help="run one experiment spec" if extra else "run a whole results table",
        )
        _split_args(p)
        if extra:
            p.add_argument("--spec", required=True, help="experiment spec (JSON)")
            p.add_argument("--seed", type=int, default=None, help="override spec seed")
        else:
            p.add_argument("--table", required=True, choices=sorted(suites.SUITE_BUILDERS))
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--test-size", type=int, default=43)
        p.add_argument("--split", default="fixed", choices=["fixed", "random"])
        p.add_argument(
            "--drop-fraction", type=float, default=0.0,
            help="hole fraction applied before splitting (tables 3-5 default to 0.1)",
        )
        p.add_argument("--out", required=True, help="output directory")
        p.set_defaults(func=fn)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FdaregError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
