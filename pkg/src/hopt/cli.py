"""Command-line front end: ``hopt {gen-data,hopt,compare,sweep,report}``.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import warnings
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .bench import generate_tbpt_dataset, synthetic_dataset
from .bench.synthetic import FAMILIES
from .bench.truss import TrussError, TrussProblem
from .data import Dataset, DatasetFormatError, read_dataset, write_dataset
from .evaluation import (
    EvalRecord,
    cross_validate,
    record_header,
    record_row,
    score_model,
    timed_single_fit,
)
from .learners import FitFailure
from .pareto import select_from_front
from .presets import LEARNERS, initial_point, space_for
from .smbo import HoptResult, SmboConfig, TraceRow, run_hopt
from .space import CATEGORICAL, INTEGER, DesignSpace, HpPoint, SpaceError
from .svg import line_plot, scatter_plot

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4
PROBLEMS = ("tbpt", *FAMILIES)
NEW_DATA_SIZE, NEW_DATA_REFERENCE = 180, 1000
TEST_SEED_OFFSET = 1_000_003
NOT_REPLAYED = ("command", "out", "config", "threads")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# ---------------------------------------------------------------- parsing


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="master random seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON file of argument defaults (a stored manifest.json works)")
    p.add_argument("--threads", type=int, default=1, help="recorded only; computation is single-threaded")
    return p


def _data_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dataset source")
    g.add_argument("--data", help="dataset CSV (with optional .meta.json sidecar)")
    g.add_argument("--problem", choices=PROBLEMS, help="generate the dataset instead of reading it")
    g.add_argument("--n", type=int, default=None, help="rows to generate")
    g.add_argument("--data-seed", type=int, default=0, help="seed of the generated dataset")
    g.add_argument("--noise-sd", type=float, default=0.0, help="synthetic response noise")
    g.add_argument("--truss-config", help="JSON truss geometry overriding the ten-bar defaults")


def _smbo_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--learner", choices=LEARNERS)
    p.add_argument("--space", help="JSON design space replacing the learner preset")
    p.add_argument("--n-initial", type=int, default=30)
    p.add_argument("--n-total", type=int, default=100)
    p.add_argument("--r-p", type=float, default=0.25)
    p.add_argument("--n-ii", type=int, default=10)
    p.add_argument("--n-re", type=int, default=5)
    p.add_argument("--candidates", type=int, default=200)
    p.add_argument("--phi", type=float, default=None, help="LCB weight; default 1, or 2 with categoricals")
    p.add_argument("--surrogate-trees", type=int, default=200)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--select", choices=("random", "knee"), default="random")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="hopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    subs: dict[str, argparse.ArgumentParser] = {}

    p = sub.add_parser("gen-data", parents=[common], help="generate a benchmark dataset")
    p.add_argument("--problem", choices=PROBLEMS, default="tbpt")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--truss-config")
    subs["gen-data"] = p

    p = sub.add_parser("hopt", parents=[common], help="run one HOpt study")
    _data_args(p)
    _smbo_args(p)
    subs["hopt"] = p

    p = sub.add_parser("compare", parents=[common], help="initial-value vs HOpt-selected comparison")
    _data_args(p)
    _smbo_args(p)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--test-n", type=int, default=None, help="unseen test-set size (default 180 per 1000 rows)")
    subs["compare"] = p

    p = sub.add_parser("sweep", parents=[common], help="grid sweep of one or two hyperparameters")
    _data_args(p)
    p.add_argument("--learner", choices=LEARNERS)
    p.add_argument("--param", action="append", default=[], help="NAME=LO:HI:COUNT or NAME=V1,V2,...")
    p.add_argument("--fixed", action="append", default=[], help="NAME=VALUE held constant")
    p.add_argument("--log", action="store_true", help="geometric spacing for LO:HI:COUNT grids")
    p.add_argument("--max-grid", type=int, default=10_000)
    p.add_argument("--folds", type=int, default=5)
    subs["sweep"] = p

    p = sub.add_parser("report", parents=[common], help="plots and consolidated CSVs from run directories")
    p.add_argument("dirs", nargs="+")
    subs["report"] = p
    return parser, subs


def _load_config(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return dict(cfg.get("args", cfg))


def parse_args(argv: Sequence[str] | None) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = _load_config(args.config)
        known = set(vars(args)) - set(NOT_REPLAYED)
        unknown = sorted(set(cfg) - known - set(NOT_REPLAYED))
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {unknown}")
        subs[args.command].set_defaults(**{k: v for k, v in cfg.items() if k in known})
        args = parser.parse_args(argv)
    return args


def replay_args(args: argparse.Namespace) -> dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NOT_REPLAYED}


# ---------------------------------------------------------------- run directory


class RunDir:
    """Output directory guarded by a lock file for the duration of a command."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self.outputs: list[str] = []

    def __enter__(self) -> RunDir:
        self.path.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path / ".lock", os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise RuntimeError(f"{self.path} is locked by another command (remove .lock if stale)") from None
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        return self

    def __exit__(self, *exc) -> None:
        (self.path / ".lock").unlink(missing_ok=True)

    def file(self, name: str) -> Path:
        if name not in self.outputs:
            self.outputs.append(name)
        p = self.path / name
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def write_csv(self, name: str, header: Sequence[str], rows) -> None:
        with open(self.file(name), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    def write_text(self, name: str, text: str) -> None:
        with open(self.file(name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)

    def write_json(self, name: str, obj: Any) -> None:
        self.write_text(name, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")

    def manifest(self, args: argparse.Namespace, **extra: Any) -> None:
        digests = {name: _sha256(self.path / name) for name in sorted(self.outputs)}
        body = {
            "tool": "hopt",
            "version": __version__,
            "command": args.command,
            "args": replay_args(args),
            "threads": args.threads,
            "outputs": digests,
            **extra,
        }
        with open(self.path / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(body, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")


def _json_default(o: Any) -> Any:
    if isinstance(o, HpPoint):
        return dict(o)
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _num(v: float) -> str:
    return format(float(v), ".17g")


# ---------------------------------------------------------------- datasets


def _truss(path: str | None) -> TrussProblem:
    if path is None:
        return TrussProblem.ten_bar()
    try:
        return TrussProblem.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read truss config {path}: {exc.strerror}") from None
    except (json.JSONDecodeError, TrussError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid truss config {path}: {exc}") from None


def generate(problem: str, n: int, seed: int, noise_sd: float = 0.0, truss: TrussProblem | None = None) -> Dataset:
    if n is None or n < 2:
        raise UsageError("--n must be >= 2")
    if problem == "tbpt":
        truss = truss or TrussProblem.ten_bar()
        ds = generate_tbpt_dataset(n, seed, truss)
        return Dataset(ds.features, ds.responses, ds.feature_names, ds.response_name,
                       ds.feature_normalizer, ds.response_normalizer, {**ds.meta, "truss": truss.to_dict()})
    if noise_sd < 0:
        raise UsageError("--noise-sd must be >= 0")
    return synthetic_dataset(problem, n, noise_sd, seed)


def load_data(args: argparse.Namespace) -> Dataset:
    if args.data and args.problem:
        raise UsageError("give either --data or --problem, not both")
    if args.data:
        try:
            return read_dataset(args.data)
        except DatasetFormatError as exc:
            raise DataError(f"{args.data}: {exc}") from None
    if args.problem:
        return generate(args.problem, args.n, args.data_seed, args.noise_sd, _truss(args.truss_config))
    raise UsageError("a dataset source is required (--data or --problem)")


def dataset_summary(ds: Dataset) -> dict[str, Any]:
    return {"n": ds.n, "d": ds.d, "sha256": ds.digest(), "generator": ds.meta.get("generator")}


def unseen_test_set(train: Dataset, n_test: int) -> Dataset | None:
    """Fresh draw from the training set's generator, scaled by the training normalizers."""
    meta = train.meta
    gen = meta.get("generator")
    if gen is None or train.feature_normalizer is None or train.response_normalizer is None:
        return None
    seed = int(meta["seed"]) + TEST_SEED_OFFSET
    if gen == "tbpt":
        truss = TrussProblem.from_dict(meta["truss"]) if "truss" in meta else None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # test sets may be smaller than the training floor
            fresh = generate_tbpt_dataset(n_test, seed, truss)
    elif gen == "synthetic":
        fresh = synthetic_dataset(meta["kind"], n_test, float(meta.get("noise_sd", 0.0)), seed)
    else:
        return None
    X = fresh.feature_normalizer.inverse(fresh.features)
    y = fresh.response_normalizer.inverse(fresh.responses[:, None])
    return Dataset(
        train.feature_normalizer.transform(X), train.response_normalizer.transform(y).ravel(),
        train.feature_names, train.response_name, train.feature_normalizer,
        train.response_normalizer, {"generator": gen, "seed": seed, "n": n_test}, check_range=False,
    )


def cv_seed(ds: Dataset) -> int:
    """Fold-partition seed: the dataset's own seed, so every arm sees the same splits."""
    return int(ds.meta.get("seed", 0))


def default_test_size(n: int) -> int:
    return max(10, int(round(NEW_DATA_SIZE * n / NEW_DATA_REFERENCE)))


# ---------------------------------------------------------------- hopt


def _space(args: argparse.Namespace, ds: Dataset) -> DesignSpace:
    if args.learner is None:
        raise UsageError("--learner is required")
    if args.space:
        try:
            return DesignSpace.load(args.space)
        except OSError as exc:
            raise UsageError(f"cannot read space {args.space}: {exc.strerror}") from None
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise UsageError(f"invalid space file {args.space}: {exc}") from None
    return space_for(args.learner, ds.d)


def _smbo_config(args: argparse.Namespace, seed: int) -> SmboConfig:
    try:
        return SmboConfig(
            n_initial=args.n_initial, n_total=args.n_total, r_p=args.r_p, n_ii=args.n_ii,
            n_re=args.n_re, candidates_per_iter=args.candidates, phi=args.phi, seed=seed,
            folds=args.folds, surrogate_trees=args.surrogate_trees,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_folds(args: argparse.Namespace, ds: Dataset) -> None:
    if args.folds < 2 or args.folds > ds.n:
        raise UsageError(f"--folds must lie in [2, {ds.n}]")


def run_study(
    rd: RunDir, prefix: str, space: DesignSpace, ds: Dataset, learner: str, cfg: SmboConfig
) -> HoptResult:
    """Run HOpt, streaming archive and trace rows to disk after every evaluation."""
    header = ["index", "origin", *record_header(space, cfg.folds, include_time=False)]
    trace_header = ["iteration", "origin", "best_rmse", "best_mxae", "hypervolume"]
    with open(rd.file(prefix + "archive.csv"), "w", encoding="utf-8", newline="") as fa, \
            open(rd.file(prefix + "trace.csv"), "w", encoding="utf-8", newline="") as ft:
        wa = csv.writer(fa, lineterminator="\n")
        wt = csv.writer(ft, lineterminator="\n")
        wa.writerow(header)
        wt.writerow(trace_header)

        def on_record(rec: EvalRecord, row: TraceRow) -> None:
            wa.writerow([row.iteration, row.origin, *record_row(rec, space, include_time=False)])
            wt.writerow([row.iteration, row.origin, _num(row.best_rmse), _num(row.best_mxae), _num(row.hypervolume)])
            fa.flush()
            ft.flush()

        res = run_hopt(space, ds, learner, cfg, cv_seed=cv_seed(ds), on_record=on_record)
    arch = res.archive
    rd.write_csv(
        prefix + "front.csv", header,
        ([i + 1, arch.origins[i], *record_row(arch.records[i], space, include_time=False)] for i in arch.front),
    )
    rd.write_csv(
        prefix + "timing.csv", ["index", "cv_fit_time_s"],
        ([i + 1, format(r.train_time_s, ".3f")] for i, r in enumerate(arch.records)),
    )
    return res


def _selected(res: HoptResult, strategy: str, seed: int) -> tuple[int, EvalRecord]:
    front = res.archive.front
    k = select_from_front(res.archive.front_records(), strategy, seed)
    return front[k], res.archive.records[front[k]]


def _losses(rec: EvalRecord) -> dict[str, float]:
    return {"mean_rmse": rec.mean_rmse, "sd_rmse": rec.sd_rmse, "mean_mxae": rec.mean_mxae, "sd_mxae": rec.sd_mxae}


def cmd_hopt(args: argparse.Namespace) -> int:
    ds = load_data(args)
    space = _space(args, ds)
    cfg = _smbo_config(args, args.seed)
    _check_folds(args, ds)
    with RunDir(args.out) as rd:
        res = run_study(rd, "", space, ds, args.learner, cfg)
        idx, rec = _selected(res, args.select, args.seed)
        chosen = {"strategy": args.select, "archive_index": idx + 1, "point": dict(rec.point), **_losses(rec)}
        rd.write_json("selected.json", chosen)
        rd.manifest(args, dataset=dataset_summary(ds), space=space.to_dict(), smbo=cfg.to_dict(),
                    cv_seed=cv_seed(ds))
    print(f"evaluated {len(res.archive)} points; front has {len(res.archive.front)} members")
    print(f"selected ({args.select}): {json.dumps(dict(rec.point), sort_keys=True)}")
    print(f"  mean RMSE {rec.mean_rmse:.6f} (sd {rec.sd_rmse:.6f}), mean MXAE {rec.mean_mxae:.6f} (sd {rec.sd_mxae:.6f})")
    return EXIT_OK


# ---------------------------------------------------------------- compare


MEASURES = ("mean_rmse", "sd_rmse", "mean_mxae", "sd_mxae", "newdata_rmse", "newdata_mxae")


def reduction_pct(before: float, after: float) -> float:
    """Percentage change; negative means the measure decreased."""
    if not (np.isfinite(before) and np.isfinite(after)) or before == 0:
        return float("nan")
    return 100.0 * (after - before) / before


def _single_fit(ds: Dataset, test: Dataset | None, point: HpPoint, learner: str, seed: int):
    try:
        model, secs = timed_single_fit(ds, point, learner, seed)
    except FitFailure:
        return float("nan"), float("nan"), float("nan")
    if test is None:
        return float("nan"), float("nan"), secs
    r, m = score_model(model, test)
    return r, m, secs


def cmd_compare(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    ds = load_data(args)
    space = _space(args, ds)
    _check_folds(args, ds)
    _smbo_config(args, args.seed)
    n_test = args.test_n if args.test_n is not None else default_test_size(ds.n)
    if n_test < 2:
        raise UsageError("--test-n must be >= 2")
    test = unseen_test_set(ds, n_test)
    before_point = initial_point(args.learner)
    fold_rows, summary_rows, red_rows, time_rows = [], [], [], []
    per_trial: list[dict[str, dict[str, float]]] = []
    with RunDir(args.out) as rd:
        for t in range(args.trials):
            seed = args.seed + t
            cfg = _smbo_config(args, seed)
            res = run_study(rd, f"trials/{t + 1}/", space, ds, args.learner, cfg)
            _, after = _selected(res, args.select, seed)
            before = cross_validate(ds, before_point, args.learner, args.folds, cv_seed(ds))
            arms: dict[str, dict[str, float]] = {}
            for arm, rec in (("before", before), ("after", after)):
                for k, (r, m) in enumerate(zip(rec.fold_rmse, rec.fold_mxae)):
                    fold_rows.append([t + 1, seed, arm, k + 1, _num(r), _num(m)])
                nr, nm, secs = _single_fit(ds, test, rec.point, args.learner, seed)
                vals = {**_losses(rec), "newdata_rmse": nr, "newdata_mxae": nm}
                arms[arm] = vals
                summary_rows.append([t + 1, seed, arm, *(_num(vals[k]) for k in MEASURES),
                                     ";".join(map(str, rec.failed_folds)), json.dumps(dict(rec.point), sort_keys=True)])
                time_rows.append([t + 1, seed, arm, format(secs, ".3f")])
            per_trial.append(arms)
            for k in MEASURES:
                b, a = arms["before"][k], arms["after"][k]
                red_rows.append([t + 1, k, _num(b), _num(a), _num(reduction_pct(b, a))])
        for k in MEASURES:
            b = float(np.mean([p["before"][k] for p in per_trial]))
            a = float(np.mean([p["after"][k] for p in per_trial]))
            red_rows.append(["all", k, _num(b), _num(a), _num(reduction_pct(b, a))])
        rd.write_csv("folds.csv", ["trial", "seed", "arm", "fold", "rmse", "mxae"], fold_rows)
        rd.write_csv("summary.csv", ["trial", "seed", "arm", *MEASURES, "failed_folds", "point"], summary_rows)
        rd.write_csv("reduction.csv", ["trial", "measure", "before", "after", "reduction_pct"], red_rows)
        rd.write_csv("timing.csv", ["trial", "seed", "arm", "single_fit_time_s"], time_rows)
        rd.manifest(
            args, dataset=dataset_summary(ds), space=space.to_dict(),
            new_data={"n": n_test, "available": test is not None},
        )
    print(f"{args.trials} trial(s); reduction_pct < 0 means the measure decreased after HOpt")
    for row in red_rows[-len(MEASURES):]:
        print(f"  {row[1]:>13}: before {float(row[2]):.6f} after {float(row[3]):.6f} change {float(row[4]):+.2f}%")
    if test is None:
        print("  (no generator metadata: unseen-data arm skipped)")
    return EXIT_OK


# ---------------------------------------------------------------- sweep


def _parse_value(space: DesignSpace, name: str, text: str) -> Any:
    spec = space[name]
    if spec.kind == CATEGORICAL:
        return text
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"{name}: not a number: {text!r}") from None
    return int(round(v)) if spec.kind == INTEGER else v


def parse_grid(space: DesignSpace, text: str, log: bool) -> tuple[str, list[Any]]:
    name, sep, spec = text.partition("=")
    name = name.strip()
    if not sep or name not in space:
        raise UsageError(f"bad --param {text!r}; expected NAME=LO:HI:COUNT or NAME=V1,V2 with NAME in {space.names}")
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad grid {spec!r}")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise UsageError(f"bad grid {spec!r}") from None
        if count < 1:
            raise UsageError("grid count must be >= 1")
        if log:
            if lo <= 0 or hi <= 0:
                raise UsageError("--log grids need positive bounds")
            raw = np.geomspace(lo, hi, count)
        else:
            raw = np.linspace(lo, hi, count)
        values = [_parse_value(space, name, repr(float(v))) for v in raw]
    else:
        values = [_parse_value(space, name, v.strip()) for v in spec.split(",") if v.strip()]
    if not values:
        raise UsageError(f"empty grid for {name}")
    for v in values:
        if not space[name].contains(v):
            raise UsageError(f"{name}={v!r} lies outside its range")
    return name, values


def sweep_points(space: DesignSpace, learner: str, grids, fixed: dict[str, Any]) -> list[HpPoint]:
    base = {**dict(initial_point(learner)), **fixed}
    names = [g[0] for g in grids]
    combos = np.array(np.meshgrid(*[np.arange(len(g[1])) for g in grids], indexing="ij")).reshape(len(grids), -1).T
    out = []
    for combo in combos:
        vals = dict(base)
        for (name, values), k in zip(grids, combo):
            vals[name] = values[k]
        active = {}
        for p in space.params:
            if p.name in vals and space.is_active(p, vals):
                active[p.name] = vals[p.name]
        for name in names:
            if name not in active:
                raise UsageError(f"{name} is inactive under the fixed values")
        out.append(HpPoint(active))
    return out


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.learner is None:
        raise UsageError("--learner is required")
    if not 1 <= len(args.param) <= 2:
        raise UsageError("sweep one or two parameters (--param)")
    ds = load_data(args)
    _check_folds(args, ds)
    space = space_for(args.learner, ds.d)
    grids = [parse_grid(space, p, args.log) for p in args.param]
    if len({g[0] for g in grids}) != len(grids):
        raise UsageError("swept parameters must differ")
    size = int(np.prod([len(g[1]) for g in grids]))
    if size > args.max_grid:
        raise UsageError(f"grid of {size} points exceeds the cap of {args.max_grid}")
    fixed = {}
    for f in args.fixed:
        name, sep, value = f.partition("=")
        if not sep or name not in space:
            raise UsageError(f"bad --fixed {f!r}")
        fixed[name] = _parse_value(space, name, value)
    points = sweep_points(space, args.learner, grids, fixed)
    names = [g[0] for g in grids]
    rows = []
    for pt in points:
        rec = cross_validate(ds, pt, args.learner, args.folds, cv_seed(ds))
        rows.append([*(pt[n] if isinstance(pt[n], str) else _num(pt[n]) for n in names),
                     _num(rec.mean_rmse), _num(rec.sd_rmse), _num(rec.mean_mxae), _num(rec.sd_mxae),
                     ";".join(map(str, rec.failed_folds))])
    with RunDir(args.out) as rd:
        rd.write_csv("sweep.csv", [*names, "mean_rmse", "sd_rmse", "mean_mxae", "sd_mxae", "failed_folds"], rows)
        rd.manifest(args, dataset=dataset_summary(ds), swept=names, log_scale=bool(args.log),
                    base_point=dict(points[0]))
    print(f"swept {' x '.join(names)}: {len(rows)} grid points")
    return EXIT_OK


# ---------------------------------------------------------------- gen-data


def cmd_gen_data(args: argparse.Namespace) -> int:
    if args.n is None or args.n < 2:
        raise UsageError("--n must be >= 2")
    ds = generate(args.problem, args.n, args.seed, args.noise_sd, _truss(args.truss_config))
    with RunDir(args.out) as rd:
        path = rd.file("data.csv")
        write_dataset(ds, path)
        rd.file("data.meta.json")
        rd.manifest(args, generator=args.problem, rows=ds.n, dataset=dataset_summary(ds))
    print(f"wrote {ds.n} rows x {ds.d} features to {path}")
    return EXIT_OK


# ---------------------------------------------------------------- report


def _read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _runs_in(d: Path) -> list[tuple[str, Path]]:
    try:
        man = json.loads((d / "manifest.json").read_text(encoding="utf-8"))
    except OSError:
        raise DataError(f"{d}: missing manifest.json") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{d}: corrupt manifest.json ({exc.msg})") from None
    cmd = man.get("command") if isinstance(man, dict) else None
    if cmd == "hopt":
        return [(d.name, d)]
    if cmd == "compare":
        trials = int(man.get("args", {}).get("trials", 0))
        return [(f"{d.name}-trial{t}", d / "trials" / str(t)) for t in range(1, trials + 1)]
    raise DataError(f"{d}: manifest command {cmd!r} has no convergence trace")


def cmd_report(args: argparse.Namespace) -> int:
    traces, fronts, failures = [], [], 0
    with RunDir(args.out) as rd:
        used: set[str] = set()
        for raw in args.dirs:
            try:
                runs = _runs_in(Path(raw))
                for label, path in runs:
                    trace = _read_csv(path / "trace.csv")
                    archive = _read_csv(path / "archive.csv")
                    front = _read_csv(path / "front.csv")
                    base, k = label, 2
                    while label in used:
                        label = f"{base}-{k}"
                        k += 1
                    used.add(label)
                    it = [float(r["iteration"]) for r in trace]
                    rd.write_text(f"{label}_trace.svg", line_plot(
                        {"best mean RMSE": (it, [float(r["best_rmse"]) for r in trace]),
                         "best mean MXAE": (it, [float(r["best_mxae"]) for r in trace])},
                        f"Convergence: {label}", "evaluation", "best-so-far loss"))
                    rd.write_text(f"{label}_front.svg", scatter_plot(
                        {"archive": ([float(r["mean_rmse"]) for r in archive], [float(r["mean_mxae"]) for r in archive]),
                         "front": ([float(r["mean_rmse"]) for r in front], [float(r["mean_mxae"]) for r in front])},
                        f"Pareto front: {label}", "mean RMSE", "mean MXAE"))
                    traces += [[label, r["iteration"], r["origin"], r["best_rmse"], r["best_mxae"], r["hypervolume"]]
                               for r in trace]
                    fronts += [[label, r["index"], r["mean_rmse"], r["mean_mxae"]] for r in front]
            except (DataError, OSError, KeyError, ValueError) as exc:
                failures += 1
                print(f"error: {raw}: {exc}", file=sys.stderr)
        rd.write_csv("traces.csv", ["run", "iteration", "origin", "best_rmse", "best_mxae", "hypervolume"], traces)
        rd.write_csv("fronts.csv", ["run", "index", "mean_rmse", "mean_mxae"], fronts)
        rd.manifest(args, failed_dirs=failures)
    print(f"report: {len(args.dirs) - failures} of {len(args.dirs)} directories rendered")
    return EXIT_DATA if failures else EXIT_OK


# ---------------------------------------------------------------- entry point


COMMANDS = {
    "gen-data": cmd_gen_data,
    "hopt": cmd_hopt,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    except (UsageError, SpaceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DatasetFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the runtime exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
