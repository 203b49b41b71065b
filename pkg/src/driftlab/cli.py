"""Config-driven experiment runner and the ``driftlab`` command-line verbs.

Verbs: ``run`` (execute an experiment config), ``audit`` (re-check the
three constraints on a saved split manifest), ``tune`` (training-ratio
grid search only), ``generate`` (synthetic dataset to CSV/JSONL),
``plotdata`` (reshape run artifacts into tidy plotting CSVs).

Exit codes: 0 ok, 2 config error, 3 constraint violation, 4 runtime
failure.

Scenarios mirror the classic bias table: ``realistic`` (constraint-clean
time split), ``kfold`` (time-blind stratified k-fold), ``past_testing``
(train on the latest window, test on the earliest — detecting the past),
``disjoint_class_windows`` (classes drawn from non-overlapping periods),
and ``bias_grid`` (all four rows crossed with training/testing ratio
combinations (0.1, 0.1), (0.9, 0.1), (0.1, 0.9), (0.9, 0.9)).

Every byte written is a pure function of (config, seeds): tasks fan out
over a process pool but results are merged and written in sorted order,
so worker count cannot change any output file.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

import numpy as np

from .classifiers import Classifier, KNNClassifier, LinearSGDClassifier
from .dataset import (
    LabeledDataset,
    Period,
    add_period,
    concat,
    load_dataset,
    write_csv,
    write_jsonl,
)
from .delay import (
    ConstraintViolationError,
    DelayPolicy,
    DelayRunResult,
    run_policy,
    write_delay_slots_csv,
    write_delay_summary_csv,
)
from .metrics import (
    Confusion,
    aut,
    confusion_counts,
    cumulative_estimates,
    kfold_eval,
    point_estimates,
    prf1,
    slot_series,
    write_curves_csv,
)
from .rng import derive_rng
from .splits import (
    RatioSpec,
    SplitSpec,
    enforce_ratio,
    run_all_checks,
    split_from_manifest,
    split_to_manifest,
    time_aware_split,
)
from .synthgen import DriftSpec, generate
from .tuning import TuningConfig, tune_phi, write_grid_csv

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "ConstraintViolation",
    "parse_config",
    "run_experiment",
    "emit_plot_data",
    "main",
]

SCENARIOS = ("realistic", "kfold", "past_testing", "disjoint_class_windows", "bias_grid")
BIAS_GRID_ROWS = ("kfold", "past_testing", "disjoint_class_windows", "realistic")
BIAS_GRID_CELLS = ((0.1, 0.1), (0.9, 0.1), (0.1, 0.9), (0.9, 0.9))

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONSTRAINT = 3
EXIT_RUNTIME = 4


class ConfigError(ValueError):
    """Experiment configuration violates the documented schema."""


class ConstraintViolation(RuntimeError):
    """A scenario that promises realistic splits failed a constraint check."""


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str | None
    dataset_format: str | None
    synthetic: DriftSpec | None
    split: SplitSpec
    ratios: RatioSpec
    classifier: Classifier
    classifier_echo: dict
    scenario: str
    tuning: TuningConfig | None
    delay_policies: tuple[DelayPolicy, ...]
    seeds: tuple[int, ...]
    output_dir: str
    kfold_k: int = 10
    workers: int = 1


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def parse_config(blob: dict) -> ExperimentConfig:
    """Validate and materialize a config dict (see README for the schema)."""
    _require(isinstance(blob, dict), "config root must be an object")
    unknown = set(blob) - {
        "dataset",
        "split",
        "ratios",
        "classifier",
        "scenario",
        "tuning",
        "delay",
        "seeds",
        "output_dir",
        "kfold_k",
        "workers",
    }
    _require(not unknown, f"unknown config keys: {sorted(unknown)}")

    ds = blob.get("dataset")
    _require(isinstance(ds, dict), "config needs a 'dataset' object")
    has_path, has_synth = "path" in ds, "synthetic" in ds
    _require(has_path != has_synth, "dataset needs exactly one of 'path' or 'synthetic'")
    synthetic = None
    if has_synth:
        try:
            synth = dict(ds["synthetic"])
            if "start" in synth:
                synth["start"] = date.fromisoformat(synth["start"])
            synthetic = DriftSpec(**synth)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad dataset.synthetic: {exc}") from None

    sp = blob.get("split")
    _require(isinstance(sp, dict), "config needs a 'split' object")
    try:
        split = SplitSpec(
            train_window=Period.parse(sp["train_window"]),
            test_window=Period.parse(sp["test_window"]),
            slot_width=Period.parse(sp["slot_width"]),
            origin=date.fromisoformat(sp["origin"]),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad split: {exc}") from None

    try:
        ratios = RatioSpec(**blob.get("ratios", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad ratios: {exc}") from None

    clf_blob = blob.get("classifier", {"kind": "linear_sgd"})
    _require(isinstance(clf_blob, dict) and "kind" in clf_blob, "classifier needs a 'kind'")
    kind = clf_blob["kind"]
    params = {k: v for k, v in clf_blob.items() if k != "kind"}
    try:
        if kind == "linear_sgd":
            classifier: Classifier = LinearSGDClassifier(**params)
        elif kind == "knn":
            classifier = KNNClassifier(**params)
        else:
            raise ConfigError(f"unknown classifier kind {kind!r}")
    except TypeError as exc:
        raise ConfigError(f"bad classifier params: {exc}") from None

    scenario = blob.get("scenario", "realistic")
    _require(scenario in SCENARIOS, f"scenario must be one of {SCENARIOS}")

    tuning = None
    if "tuning" in blob:
        try:
            tuning = TuningConfig(**blob["tuning"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad tuning: {exc}") from None

    policies: list[DelayPolicy] = []
    if "delay" in blob:
        d = dict(blob["delay"])
        budgets = d.pop("al_budget", None)
        try:
            if isinstance(budgets, list):
                for b in budgets:
                    policies.append(DelayPolicy(al_budget=b, **d))
            elif budgets is not None:
                policies.append(DelayPolicy(al_budget=budgets, **d))
            else:
                policies.append(DelayPolicy(**d))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad delay: {exc}") from None
    _require(
        not (scenario == "bias_grid" and policies),
        "bias_grid does not combine with a delay policy",
    )

    seeds = blob.get("seeds", [0])
    _require(
        isinstance(seeds, list) and seeds and all(isinstance(s, int) for s in seeds),
        "seeds must be a non-empty list of integers",
    )
    _require(len(set(seeds)) == len(seeds), "seeds must be unique")

    out = blob.get("output_dir")
    _require(isinstance(out, str) and out, "config needs an 'output_dir' string")

    kfold_k = blob.get("kfold_k", 10)
    _require(isinstance(kfold_k, int) and kfold_k >= 2, "kfold_k must be an int >= 2")
    workers = blob.get("workers", 1)
    _require(isinstance(workers, int) and workers >= 1, "workers must be an int >= 1")

    return ExperimentConfig(
        dataset_path=ds.get("path"),
        dataset_format=ds.get("format"),
        synthetic=synthetic,
        split=split,
        ratios=ratios,
        classifier=classifier,
        classifier_echo=dict(clf_blob),
        scenario=scenario,
        tuning=tuning,
        delay_policies=tuple(policies),
        seeds=tuple(seeds),
        output_dir=out,
        kfold_k=kfold_k,
        workers=workers,
    )


# ---------------------------------------------------------------------------
# Shared dataset / evaluation plumbing
# ---------------------------------------------------------------------------


def _dataset_for_seed(cfg: ExperimentConfig, seed: int) -> LabeledDataset:
    if cfg.synthetic is not None:
        return generate(cfg.synthetic, seed=int(derive_rng(seed, "dataset").integers(2**31)))
    try:
        return load_dataset(cfg.dataset_path, cfg.dataset_format)
    except FileNotFoundError:
        raise ConfigError(f"dataset file not found: {cfg.dataset_path}") from None


def _fit_seed(seed: int, *labels) -> int:
    return int(derive_rng(seed, *labels).integers(2**31))


def _pooled_f1(model, slots) -> float:
    total = Confusion()
    for s in slots:
        total = total + confusion_counts(model, s)
    return prf1(total)[2]


def _past_testing_parts(d, spec: SplitSpec, ratios: RatioSpec, seed: int):
    """Mirrored realistic split: train on the final W, test on the first S."""
    train_start = add_period(spec.origin, spec.test_window)
    train_end = add_period(train_start, spec.train_window)
    train = enforce_ratio(
        d.between(train_start, train_end),
        ratios.phi,
        "random",
        seed=_fit_seed(seed, "past", "train"),
    )
    slots, starts = [], []
    for k in range(spec.n_test_slots):
        lo = add_period(spec.origin, spec.slot_width, k)
        hi = add_period(spec.origin, spec.slot_width, k + 1)
        slots.append(
            enforce_ratio(
                d.between(lo, hi), ratios.delta, "random", seed=_fit_seed(seed, "past", "slot", k)
            )
        )
        starts.append(lo)
    return train, slots, starts


def _disjoint_parts(d, spec: SplitSpec, ratios: RatioSpec, seed: int):
    """Classes drawn from non-overlapping halves of each period."""

    def classed_window(start, end, cut):
        early = d.between(start, cut)
        late = d.between(cut, end)
        pos_idx = [i for i, y in enumerate(early.labels) if y == 1]
        neg_idx = [i for i, y in enumerate(late.labels) if y == 0]
        if not pos_idx or not neg_idx:
            raise ConstraintViolation("disjoint windows left a period single-class")
        return concat([early.subset(pos_idx), late.subset(neg_idx)])

    t0 = spec.test_origin
    mid_train = add_period(spec.origin, spec.slot_width, _half_slots(spec.train_window, spec))
    mid_test = add_period(t0, spec.slot_width, _half_slots(spec.test_window, spec))
    train = enforce_ratio(
        classed_window(spec.origin, t0, mid_train),
        ratios.phi,
        "random",
        seed=_fit_seed(seed, "disjoint", "train"),
    )
    test = enforce_ratio(
        classed_window(t0, spec.test_end, mid_test),
        ratios.delta,
        "random",
        seed=_fit_seed(seed, "disjoint", "test"),
    )
    return train, test


def _half_slots(window: Period, spec: SplitSpec) -> int:
    return max(1, window.slots_of(spec.slot_width) // 2)


# ---------------------------------------------------------------------------
# Per-seed task bodies (top-level functions so a process pool can run them)
# ---------------------------------------------------------------------------


def _task_realistic(cfg: ExperimentConfig, seed: int) -> dict:
    d = _dataset_for_seed(cfg, seed)
    ratios = cfg.ratios
    tuning_result = None
    if cfg.tuning is not None:
        train_raw = d.between(cfg.split.origin, cfg.split.test_origin)
        tuning_result = tune_phi(train_raw, cfg.classifier, cfg.tuning, cfg.split, seed)
        ratios = replace(ratios, phi=tuning_result.phi_star)
    split = time_aware_split(d, cfg.split, ratios, seed)
    verdicts = run_all_checks(split)
    failed = sorted(k for k, v in verdicts.items() if not v.passed)
    if failed:
        raise ConstraintViolation(f"seed {seed}: realistic split violates {failed}")

    baseline = run_policy(split, cfg.classifier, DelayPolicy("none"), cfg.tuning, seed)
    delay_runs = [
        run_policy(split, cfg.classifier, policy, cfg.tuning, seed)
        for policy in cfg.delay_policies
    ]
    return {
        "split_manifest": split_to_manifest(split),
        "audit": {k: v.as_dict() for k, v in verdicts.items()},
        "baseline": baseline,
        "delay_runs": delay_runs,
        "tuning": tuning_result,
        "phi_used": ratios.phi,
    }


def _task_kfold(cfg: ExperimentConfig, seed: int) -> dict:
    d = _dataset_for_seed(cfg, seed)
    res = kfold_eval(d, cfg.classifier, cfg.kfold_k, seed)
    return {"mean_f1": res.mean_f1, "std_f1": res.std_f1, "fold_f1": list(res.fold_f1)}


def _task_past_testing(cfg: ExperimentConfig, seed: int) -> dict:
    d = _dataset_for_seed(cfg, seed)
    train, slots, starts = _past_testing_parts(d, cfg.split, cfg.ratios, seed)
    model = cfg.classifier.fit(train, _fit_seed(seed, "past", "fit"))
    series = slot_series(model, slots, starts)
    f1_curve = point_estimates(series, "f1")
    return {"pooled_f1": _pooled_f1(model, slots), "aut_f1": aut(f1_curve), "series": series}


def _task_disjoint(cfg: ExperimentConfig, seed: int) -> dict:
    d = _dataset_for_seed(cfg, seed)
    train, test = _disjoint_parts(d, cfg.split, cfg.ratios, seed)
    model = cfg.classifier.fit(train, _fit_seed(seed, "disjoint", "fit"))
    return {"pooled_f1": _pooled_f1(model, [test])}


def _task_bias_cell(cfg: ExperimentConfig, seed: int, row: str, phi: float, delta: float) -> dict:
    d = _dataset_for_seed(cfg, seed)
    ratios = replace(cfg.ratios, phi=phi, delta=delta)
    if row == "kfold":
        f1 = _kfold_cell_f1(d, cfg, phi, delta, seed)
    elif row == "past_testing":
        train, slots, _ = _past_testing_parts(d, cfg.split, ratios, seed)
        model = cfg.classifier.fit(train, _fit_seed(seed, "past", "fit"))
        f1 = _pooled_f1(model, slots)
    elif row == "disjoint_class_windows":
        train, test = _disjoint_parts(d, cfg.split, ratios, seed)
        model = cfg.classifier.fit(train, _fit_seed(seed, "disjoint", "fit"))
        f1 = _pooled_f1(model, [test])
    else:
        split = time_aware_split(d, cfg.split, ratios, seed)
        model = cfg.classifier.fit(split.train, _fit_seed(seed, "realistic", "fit"))
        f1 = _pooled_f1(model, split.test_slots)
    return {"f1": f1}


def _kfold_cell_f1(d, cfg: ExperimentConfig, phi: float, delta: float, seed: int) -> float:
    """Stratified k-fold with per-fold ratio enforcement on both sides."""
    k = cfg.kfold_k
    pos = np.flatnonzero(d.labels == 1)
    neg = np.flatnonzero(d.labels == 0)
    if len(pos) < k or len(neg) < k:
        raise ConfigError(f"cannot stratify {len(pos)}/{len(neg)} samples into {k} folds")
    rng = derive_rng(seed, "bias_kfold")
    pos = pos[rng.permutation(len(pos))]
    neg = neg[rng.permutation(len(neg))]
    scores = []
    for i in range(k):
        test_idx = np.concatenate([pos[i::k], neg[i::k]])
        mask = np.ones(len(d), dtype=bool)
        mask[test_idx] = False
        train = enforce_ratio(
            d.subset(np.flatnonzero(mask)), phi, "random", seed=_fit_seed(seed, "bk", "tr", i)
        )
        test = enforce_ratio(
            d.subset(np.sort(test_idx)), delta, "random", seed=_fit_seed(seed, "bk", "ts", i)
        )
        model = cfg.classifier.fit(train, _fit_seed(seed, "bk", "fit", i))
        scores.append(prf1(confusion_counts(model, test))[2])
    return float(np.mean(scores))


_TASK_BODIES = {
    "realistic": _task_realistic,
    "kfold": _task_kfold,
    "past_testing": _task_past_testing,
    "disjoint_class_windows": _task_disjoint,
}


def _execute_task(payload):
    cfg, task = payload
    if task[0] == "bias_cell":
        _, seed, row, phi, delta = task
        return task, _task_bias_cell(cfg, seed, row, phi, delta)
    kind, seed = task
    return task, _TASK_BODIES[kind](cfg, seed)


# ---------------------------------------------------------------------------
# Artifact writing (single-threaded, sorted, reproducible)
# ---------------------------------------------------------------------------


def _write_rows(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x: float) -> str:
    return repr(float(x))


def _policy_tag(policy: DelayPolicy) -> str:
    return policy.label.replace(":", "_")


def _write_realistic_artifacts(cfg: ExperimentConfig, out: Path, results: dict) -> None:
    agg: dict[tuple[str, str], list[float]] = {}
    for seed in cfg.seeds:
        res = results[("realistic", seed)]
        baseline: DelayRunResult = res["baseline"]
        curves = []
        for metric in ("f1", "precision", "recall"):
            curves.append(baseline.curves[metric])
            curves.append(cumulative_estimates(baseline.series, metric))
        write_curves_csv(str(out / f"decay_seed{seed}.csv"), baseline.series, curves)
        for curve in curves:
            agg.setdefault((curve.metric, curve.mode), []).append(aut(curve))
        with open(out / f"audit_seed{seed}.json", "w", encoding="utf-8") as fh:
            json.dump(res["audit"], fh, sort_keys=True, indent=2)
        with open(out / f"split_manifest_seed{seed}.json", "w", encoding="utf-8") as fh:
            json.dump(res["split_manifest"], fh, sort_keys=True)
        if res["tuning"] is not None:
            write_grid_csv(str(out / f"tuning_seed{seed}.csv"), res["tuning"])
            with open(out / f"tuning_seed{seed}.json", "w", encoding="utf-8") as fh:
                fh.write(res["tuning"].to_json())
        if res["delay_runs"]:
            phi_mode = "phi_star" if cfg.tuning is not None else "sigma_hat"
            pairs = [(phi_mode, r) for r in [baseline] + res["delay_runs"]]
            write_delay_summary_csv(str(out / f"delay_summary_seed{seed}.csv"), pairs)
            for run in res["delay_runs"]:
                write_delay_slots_csv(
                    str(out / f"delay_{_policy_tag(run.policy)}_slots_seed{seed}.csv"), run
                )
    rows = [
        [metric, mode, _fmt(np.mean(vals)), _fmt(np.std(vals)), len(vals)]
        for (metric, mode), vals in sorted(agg.items())
    ]
    _write_rows(out / "aggregate.csv", ["metric", "mode", "aut_mean", "aut_std", "n_seeds"], rows)


def _write_scalar_scenario(out: Path, name: str, per_seed: dict[int, dict], key: str) -> None:
    rows = [[seed, _fmt(vals[key])] for seed, vals in sorted(per_seed.items())]
    _write_rows(out / f"{name}.csv", ["seed", key], rows)
    values = [vals[key] for _, vals in sorted(per_seed.items())]
    _write_rows(
        out / "aggregate.csv",
        ["scenario", "metric", "mean", "std", "n_seeds"],
        [[name, key, _fmt(np.mean(values)), _fmt(np.std(values)), len(values)]],
    )


def run_experiment(cfg: ExperimentConfig) -> int:
    """Execute the configured scenario for every seed and write artifacts.

    Returns 0 on success; raises ConfigError / ConstraintViolation /
    other exceptions for the CLI to map onto exit codes.
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    if cfg.scenario == "bias_grid":
        tasks = [
            ("bias_cell", seed, row, phi, delta)
            for row in BIAS_GRID_ROWS
            for (phi, delta) in BIAS_GRID_CELLS
            for seed in cfg.seeds
        ]
    else:
        tasks = [(cfg.scenario, seed) for seed in cfg.seeds]

    payloads = [(cfg, t) for t in tasks]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            gathered = dict(pool.map(_execute_task, payloads))
    else:
        gathered = dict(map(_execute_task, payloads))

    with open(out / "config_echo.json", "w", encoding="utf-8") as fh:
        json.dump(_config_echo(cfg), fh, sort_keys=True, indent=2)

    if cfg.scenario == "realistic":
        _write_realistic_artifacts(cfg, out, gathered)
    elif cfg.scenario == "kfold":
        per_seed = {seed: gathered[("kfold", seed)] for seed in cfg.seeds}
        _write_scalar_scenario(out, "kfold", per_seed, "mean_f1")
    elif cfg.scenario == "past_testing":
        per_seed = {seed: gathered[("past_testing", seed)] for seed in cfg.seeds}
        _write_scalar_scenario(out, "past_testing", per_seed, "pooled_f1")
    elif cfg.scenario == "disjoint_class_windows":
        per_seed = {seed: gathered[("disjoint_class_windows", seed)] for seed in cfg.seeds}
        _write_scalar_scenario(out, "disjoint_class_windows", per_seed, "pooled_f1")
    else:
        rows = []
        summary: dict[tuple[str, float, float], list[float]] = {}
        for task in sorted(gathered, key=lambda t: (t[2], t[3], t[4], t[1])):
            _, seed, row, phi, delta = task
            f1 = gathered[task]["f1"]
            rows.append([row, _fmt(phi), _fmt(delta), seed, _fmt(f1)])
            summary.setdefault((row, phi, delta), []).append(f1)
        _write_rows(out / "bias_grid.csv", ["scenario", "phi", "delta", "seed", "f1"], rows)
        srows = [
            [row, _fmt(phi), _fmt(delta), _fmt(np.mean(v)), _fmt(np.std(v)), len(v)]
            for (row, phi, delta), v in sorted(summary.items())
        ]
        _write_rows(
            out / "bias_grid_summary.csv",
            ["scenario", "phi", "delta", "mean_f1", "std_f1", "n_seeds"],
            srows,
        )
    return EXIT_OK


def _config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "dataset": (
            {"path": cfg.dataset_path, "format": cfg.dataset_format}
            if cfg.synthetic is None
            else {"synthetic": {**{k: str(v) if isinstance(v, date) else v for k, v in vars(cfg.synthetic).items()}}}
        ),
        "split": {
            "origin": cfg.split.origin.isoformat(),
            "train_window": str(cfg.split.train_window),
            "test_window": str(cfg.split.test_window),
            "slot_width": str(cfg.split.slot_width),
        },
        "ratios": vars(cfg.ratios),
        "classifier": cfg.classifier_echo,
        "scenario": cfg.scenario,
        "tuning": None if cfg.tuning is None else vars(cfg.tuning),
        "delay": [p.label for p in cfg.delay_policies],
        "seeds": list(cfg.seeds),
        "kfold_k": cfg.kfold_k,
    }


# ---------------------------------------------------------------------------
# plotdata: tidy CSVs (slot, metric, value, series) from run artifacts
# ---------------------------------------------------------------------------


def emit_plot_data(run_dir: str, out_dir: str | None = None) -> list[str]:
    src = Path(run_dir)
    if not src.is_dir():
        raise FileNotFoundError(f"run directory {run_dir} does not exist")
    dst = Path(out_dir) if out_dir else src
    dst.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    decay_files = sorted(src.glob("decay_seed*.csv"))
    if decay_files:
        rows = []
        for f in decay_files:
            seed = f.stem.replace("decay_seed", "")
            with open(f, newline="", encoding="utf-8") as fh:
                for rec in csv.DictReader(fh):
                    if rec["slot"].startswith("AUT"):
                        continue
                    series = f"seed{seed}/{rec['metric']}/{rec['mode']}"
                    rows.append([rec["slot"], rec["metric"], rec["value"], series])
        path = dst / "plot_decay_curves.csv"
        _write_rows(path, ["slot", "metric", "value", "series"], rows)
        written.append(str(path))

    tuning_files = sorted(src.glob("tuning_seed*.csv"))
    if tuning_files:
        rows = []
        for f in tuning_files:
            seed = f.stem.replace("tuning_seed", "")
            with open(f, newline="", encoding="utf-8") as fh:
                for rec in csv.DictReader(fh):
                    rows.append([rec["phi"], rec["aut"], rec["error"], f"seed{seed}"])
        path = dst / "plot_tuning_grid.csv"
        _write_rows(path, ["phi", "aut", "error", "series"], rows)
        written.append(str(path))

    slot_files = sorted(src.glob("delay_*_slots_seed*.csv"))
    if slot_files:
        rows = []
        for f in slot_files:
            series = f.stem.replace("delay_", "").replace("_slots_seed", "/seed")
            with open(f, newline="", encoding="utf-8") as fh:
                for rec in csv.DictReader(fh):
                    rows.append([rec["slot"], "f1", rec["f1"], series])
        path = dst / "plot_delay_curves.csv"
        _write_rows(path, ["slot", "metric", "value", "series"], rows)
        written.append(str(path))

    if not written:
        raise FileNotFoundError(f"no recognized run artifacts under {run_dir}")
    return written


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _load_config_file(path: str, overrides: argparse.Namespace) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            blob = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if getattr(overrides, "seed", None):
        try:
            blob["seeds"] = [int(s) for s in overrides.seed.split(",")]
        except ValueError:
            raise ConfigError(f"bad --seed list: {overrides.seed!r}") from None
    if getattr(overrides, "out", None):
        blob["output_dir"] = overrides.out
    if getattr(overrides, "scenario", None):
        blob["scenario"] = overrides.scenario
    if getattr(overrides, "workers", None):
        blob["workers"] = overrides.workers
    return parse_config(blob)


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_config_file(args.config, args)
    return run_experiment(cfg)


def _cmd_audit(args: argparse.Namespace) -> int:
    try:
        with open(args.manifest, encoding="utf-8") as fh:
            split = split_from_manifest(json.load(fh))
    except FileNotFoundError:
        raise ConfigError(f"manifest not found: {args.manifest}") from None
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"bad manifest: {exc}") from None
    verdicts = run_all_checks(split)
    report = {k: v.as_dict() for k, v in verdicts.items()}
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if not all(v.passed for v in verdicts.values()):
        failed = sorted(k for k, v in verdicts.items() if not v.passed)
        print(f"constraint violation: {failed}", file=sys.stderr)
        return EXIT_CONSTRAINT
    return EXIT_OK


def _cmd_tune(args: argparse.Namespace) -> int:
    cfg = _load_config_file(args.config, args)
    if cfg.tuning is None:
        raise ConfigError("tune verb needs a 'tuning' section in the config")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for seed in cfg.seeds:
        d = _dataset_for_seed(cfg, seed)
        train_raw = d.between(cfg.split.origin, cfg.split.test_origin)
        result = tune_phi(train_raw, cfg.classifier, cfg.tuning, cfg.split, seed)
        write_grid_csv(str(out / f"tuning_seed{seed}.csv"), result)
        with open(out / f"tuning_seed{seed}.json", "w", encoding="utf-8") as fh:
            fh.write(result.to_json())
        print(f"seed {seed}: phi_star={result.phi_star} aut={result.best_aut:.4f}")
    return EXIT_OK


def _cmd_generate(args: argparse.Namespace) -> int:
    try:
        spec = DriftSpec(
            months=args.months,
            samples_per_month=args.samples_per_month,
            dim=args.dim,
            positive_ratio=args.positive_ratio,
            ratio_jitter=args.ratio_jitter,
            drift_velocity=args.drift_velocity,
            spread=args.spread,
            family_churn=args.family_churn,
            start=date.fromisoformat(args.start),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    d = generate(spec, seed=args.seed)
    if args.out.endswith((".jsonl", ".ndjson")):
        write_jsonl(d, args.out)
    else:
        write_csv(d, args.out)
    print(f"wrote {len(d)} samples to {args.out}")
    return EXIT_OK


def _cmd_plotdata(args: argparse.Namespace) -> int:
    written = emit_plot_data(args.run_dir, args.out)
    for path in written:
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftlab",
        description="Time-aware, ratio-aware evaluation of binary classifiers under drift.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", help="comma-separated seed list override")
    p_run.add_argument("--out", help="output directory override")
    p_run.add_argument("--scenario", choices=SCENARIOS)
    p_run.add_argument("--workers", type=int)
    p_run.set_defaults(func=_cmd_run)

    p_audit = sub.add_parser("audit", help="run C1/C2/C3 checks on a split manifest")
    p_audit.add_argument("--manifest", required=True)
    p_audit.add_argument("--out", help="write the JSON report here instead of stdout")
    p_audit.set_defaults(func=_cmd_audit)

    p_tune = sub.add_parser("tune", help="training-ratio grid search only")
    p_tune.add_argument("--config", required=True)
    p_tune.add_argument("--seed", help="comma-separated seed list override")
    p_tune.add_argument("--out", help="output directory override")
    p_tune.set_defaults(func=_cmd_tune)

    p_gen = sub.add_parser("generate", help="emit a synthetic drifting dataset")
    p_gen.add_argument("--months", type=int, required=True)
    p_gen.add_argument("--samples-per-month", type=int, required=True)
    p_gen.add_argument("--dim", type=int, default=2)
    p_gen.add_argument("--positive-ratio", type=float, default=0.10)
    p_gen.add_argument("--ratio-jitter", type=float, default=0.02)
    p_gen.add_argument("--drift-velocity", type=float, default=0.0)
    p_gen.add_argument("--spread", type=float, default=1.0)
    p_gen.add_argument("--family-churn", type=float, default=0.0)
    p_gen.add_argument("--start", default="2014-01-01")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_generate)

    p_plot = sub.add_parser("plotdata", help="tidy plotting CSVs from run artifacts")
    p_plot.add_argument("--run-dir", required=True)
    p_plot.add_argument("--out")
    p_plot.set_defaults(func=_cmd_plotdata)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConstraintViolation, ConstraintViolationError) as exc:
        print(f"constraint violation: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
