"""Command-line surface: synth, train, attribute, evaluate, render, report.

Every command takes --config (a JSON file, or the literal "demo" for the
bundled demo configuration) plus flags that override config values. Exit
codes: 0 success, 1 usage error, 2 data/validation error. Commands talk to
each other through files only; rerunning a command with the same config and
seed writes byte-identical outputs.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import dataset_io, engine, evaluation, models, pipeline, render, report, synth, weights_io
from .attribution import (
    METHOD_KINDS,
    MethodSpec,
    attribute_batch,
    random_baseline_map,
)
from .errors import ConfigError, EegattrError
from .training import TrainConfig, train

ALL_METHODS = list(METHOD_KINDS)
EVAL_METHODS = ALL_METHODS + ["random"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.print_help()
            return 1
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except EegattrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> _Parser:
    parser = _Parser(prog="eegattr", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help='JSON config file, or "demo" for the bundled one')

    p = sub.add_parser("synth", parents=[], help="generate a synthetic dataset file")
    common(p)
    p.add_argument("--out", help="output dataset path")
    p.add_argument("--seed", type=int, help="generation seed (required)")
    p.add_argument("--channels", type=int)
    p.add_argument("--times", type=int)
    p.add_argument("--rate", type=float)
    p.add_argument("--subjects", type=int)
    p.add_argument("--samples-per-class", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model and save its weights")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--out", help="output weights path")
    p.add_argument("--model", help="eegnet or interpretable_cnn")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--class-weights", help="comma-separated per-class weights")
    p.add_argument("--seed", type=int)
    p.add_argument("--holdout-subject", help="leave this subject out of training")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("attribute", help="write contribution maps for chosen methods")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--weights")
    p.add_argument("--methods", help='comma list, "all", may include "random"')
    p.add_argument("--samples", help='"all", a slice "0:50", or a comma list of indices')
    p.add_argument("--subject", help="restrict to one subject id before --samples applies")
    p.add_argument("--out-dir")
    p.add_argument("--seed", type=int, help="seed for the random baseline maps")
    p.add_argument("--steps", type=int, help="integrated_gradients path steps")
    p.add_argument("--epsilon", type=float, help="epsilon_lrp stabilizer")
    p.add_argument("--near-zero-delta", type=float, help="deeplift_rescale fallback threshold")
    p.set_defaults(func=cmd_attribute)

    p = sub.add_parser("evaluate", help="sensitivity/deletion metrics and a summary table")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--weights")
    p.add_argument("--methods", help='comma list or "all"; the random baseline is always added')
    p.add_argument("--samples")
    p.add_argument("--subject", help="restrict to one subject id before --samples applies")
    p.add_argument("--fractions", help="comma list of patch fractions")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="metric seed (required)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="per-sample records (JSON lines)")
    p.add_argument("--summary", help="summary table (text)")
    p.add_argument("--summary-json", help="summary (JSON)")
    p.add_argument("--steps", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--near-zero-delta", type=float)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("render", help="write SVG sample views and topomaps")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--weights")
    p.add_argument("--maps", help="contribution-map file from `attribute`")
    p.add_argument("--layout", help="electrode layout file (default: bundled 10-20)")
    p.add_argument("--out-dir")
    p.add_argument("--sample-threshold", type=float)
    p.add_argument("--channel-threshold", type=float)
    p.add_argument("--window", type=int)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", help="write per-sample text evaluation reports")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--weights")
    p.add_argument("--maps")
    p.add_argument("--out-dir")
    p.add_argument("--fractions")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sample-threshold", type=float)
    p.add_argument("--channel-threshold", type=float)
    p.add_argument("--window", type=int)
    p.set_defaults(func=cmd_report)
    return parser


# ---------------------------------------------------------------------------
# config plumbing

def load_config(source: str | None) -> dict:
    if source is None:
        return {}
    if source == "demo":
        ref = importlib.resources.files("eegattr") / "configs" / "demo.json"
        return json.loads(ref.read_text(encoding="utf-8"))
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config file {path}: top level must be an object")
    return cfg


def _get(cfg, section, key, flag=None, default=None, required=False):
    if flag is not None:
        return flag
    value = cfg.get(section, {}).get(key) if section else cfg.get(key)
    if value is not None:
        return value
    if required:
        where = f"{section}.{key}" if section else key
        raise _UsageError(f"missing required value {where!r} (flag or config)")
    return default


def _parse_methods(text, allowed) -> list[str]:
    if text is None or text == "all":
        return list(ALL_METHODS)
    names = []
    for raw in text.split(","):
        name = raw.strip()
        if name == "all":
            for m in ALL_METHODS:
                if m not in names:
                    names.append(m)
            continue
        if name not in allowed:
            raise _UsageError(
                f"unknown method {name!r}; choose from {', '.join(allowed)}"
            )
        if name not in names:
            names.append(name)
    if not names:
        raise _UsageError("no methods selected")
    return names


def _parse_samples(text, count) -> list[int]:
    if text is None or text == "all":
        return list(range(count))
    if ":" in text:
        lo_s, _, hi_s = text.partition(":")
        try:
            lo = int(lo_s) if lo_s else 0
            hi = int(hi_s) if hi_s else count
        except ValueError:
            raise _UsageError(f"bad sample slice {text!r}") from None
        lo, hi = max(lo, 0), min(hi, count)
        if lo >= hi:
            raise _UsageError(f"sample slice {text!r} selects nothing")
        return list(range(lo, hi))
    try:
        idx = [int(v) for v in text.split(",")]
    except ValueError:
        raise _UsageError(f"bad sample list {text!r}") from None
    for i in idx:
        if not 0 <= i < count:
            raise _UsageError(f"sample index {i} out of range (dataset has {count})")
    return idx


def _parse_fractions(text):
    if text is None:
        return None
    try:
        fractions = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise _UsageError(f"bad fractions list {text!r}") from None
    return fractions


def _load_dataset(cfg, flag):
    path = _get(cfg, "paths", "dataset", flag, required=True)
    if not Path(path).exists():
        raise ConfigError(f"dataset file {path} does not exist")
    return dataset_io.load_dataset(path)


def _load_weights(cfg, flag):
    path = _get(cfg, "paths", "weights", flag, required=True)
    if not Path(path).exists():
        raise ConfigError(f"weights file {path} does not exist")
    return weights_io.load_weights(path)


def _method_spec(kind, cfg, args) -> MethodSpec:
    return MethodSpec(
        kind,
        steps=int(_get(cfg, "method", "steps", getattr(args, "steps", None), 100)),
        epsilon=float(_get(cfg, "method", "epsilon", getattr(args, "epsilon", None), 1e-4)),
        near_zero_delta=float(_get(cfg, "method", "near_zero_delta",
                                   getattr(args, "near_zero_delta", None), 1e-6)),
    )


def _parse_class_specs(cfg_classes) -> list[synth.ClassSpec]:
    out = []
    for i, cls in enumerate(cfg_classes):
        if "name" not in cls:
            raise ConfigError(f"dataset.classes[{i}]: missing 'name'")
        feats = []
        for j, feat in enumerate(cls.get("features", [])):
            if "kind" not in feat:
                raise ConfigError(f"dataset.classes[{i}].features[{j}]: missing 'kind'")
            feats.append(synth.FeatureSpec(
                kind=feat["kind"],
                amplitude=float(feat.get("amplitude", 1.0)),
                channels=tuple(feat.get("channels", ())),
                freq=float(feat.get("freq", 10.0)),
                band=tuple(feat.get("band", (30.0, 50.0))),
                duration=float(feat.get("duration", 0.75)),
                latency=feat.get("latency"),
            ))
        out.append(synth.ClassSpec(cls["name"], tuple(feats)))
    return out


# ---------------------------------------------------------------------------
# commands

def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    seed = _get(cfg, "dataset", "seed", args.seed, required=True)
    n = int(_get(cfg, "dataset", "channels", args.channels, 8))
    t = int(_get(cfg, "dataset", "times", args.times, 384))
    rate = float(_get(cfg, "dataset", "rate", args.rate, 128.0))
    subjects = int(_get(cfg, "dataset", "subjects", args.subjects, 6))
    spc = int(_get(cfg, "dataset", "samples_per_class", args.samples_per_class, 50))
    out = _get(cfg, "paths", "dataset", args.out, required=True)
    cfg_classes = cfg.get("dataset", {}).get("classes")
    classes = _parse_class_specs(cfg_classes) if cfg_classes else list(synth.demo_classes(n))
    background = float(_get(cfg, "dataset", "background_amplitude", None, 1.0))
    ds = synth.generate_dataset(n, t, rate, classes, spc, subjects, int(seed),
                                background_amplitude=background)
    dataset_io.save_dataset(ds, out)
    print(f"wrote {out}: {len(ds)} samples, {n} channels x {t} points, "
          f"classes {list(ds.class_names)}")
    return 0


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    ds = _load_dataset(cfg, args.dataset)
    model = _get(cfg, None, "model", args.model, required=True)
    if model not in models.BUILDERS:
        raise _UsageError(f"unknown model {model!r}; choose from {sorted(models.BUILDERS)}")
    out = _get(cfg, "paths", "weights", args.out, required=True)
    weights_text = _get(cfg, "train", "class_weights", args.class_weights)
    if isinstance(weights_text, str):
        class_weights = tuple(float(v) for v in weights_text.split(","))
    elif weights_text is not None:
        class_weights = tuple(float(v) for v in weights_text)
    else:
        class_weights = None
    tconf = TrainConfig(
        epochs=int(_get(cfg, "train", "epochs", args.epochs, 10)),
        batch_size=int(_get(cfg, "train", "batch_size", args.batch_size, 50)),
        learning_rate=float(_get(cfg, "train", "learning_rate", args.learning_rate, 1e-3)),
        beta1=float(_get(cfg, "train", "beta1", None, 0.9)),
        beta2=float(_get(cfg, "train", "beta2", None, 0.999)),
        class_weights=class_weights,
        seed=int(_get(cfg, "train", "seed", args.seed, 0)),
    )
    holdout = _get(cfg, "train", "holdout_subject", args.holdout_subject)
    if holdout is not None:
        train_set, test_set = synth.split_leave_one_subject_out(ds, holdout)
    else:
        train_set, test_set = ds, None
    k = len(ds.class_names)
    net = models.BUILDERS[model](ds.n_channels, ds.n_times, k, seed=tconf.seed)
    net, history = train(net, train_set, tconf)
    weights_io.save_weights(net, out)
    hist_path = str(out) + ".history.json"
    Path(hist_path).write_text(json.dumps(history, indent=1) + "\n", encoding="utf-8")
    if history:
        last = history[-1]
        print(f"trained {model} for {tconf.epochs} epochs: "
              f"loss {last['loss']:.4f}, train accuracy {last['accuracy']:.3f}")
    if test_set is not None and len(test_set):
        stats = models.compute_batch_stats(net, test_set.data)
        logits, _ = engine.logits_batch(net, test_set.data, stats)
        acc = float((logits.argmax(axis=1) == test_set.labels).mean())
        print(f"held-out subject {holdout}: accuracy {acc:.3f} over {len(test_set)} samples")
    print(f"wrote {out}")
    return 0


def _select(ds, args_samples, subject=None):
    if subject is not None:
        rows = [i for i in range(len(ds)) if ds.subjects[i] == subject]
        if not rows:
            raise ConfigError(
                f"subject {subject!r} not in dataset (has {list(ds.subject_list())})"
            )
        ds = ds.subset(rows)
    idx = _parse_samples(args_samples, len(ds))
    return ds.subset(idx)


def cmd_attribute(args) -> int:
    cfg = load_config(args.config)
    ds = _load_dataset(cfg, args.dataset)
    net = _load_weights(cfg, args.weights)
    _check_net_vs_dataset(net, ds)
    methods = _parse_methods(
        args.methods if args.methods is not None
        else (",".join(cfg.get("methods", [])) or None),
        EVAL_METHODS,
    )
    out_dir = Path(_get(cfg, "paths", "output_dir", args.out_dir, required=True))
    out_dir.mkdir(parents=True, exist_ok=True)
    sel = _select(ds, args.samples, args.subject)
    stats = models.compute_batch_stats(net, sel.data)
    seed = _get(cfg, "metrics", "seed", args.seed)
    for name in methods:
        if name == "random":
            if seed is None:
                raise _UsageError("the random baseline needs --seed")
            values = np.stack([
                random_baseline_map(ds.n_channels, ds.n_times, _derive(seed, sid, 7)).values
                for sid in sel.sample_ids
            ])
            logits, _ = engine.logits_batch(net, sel.data, stats)
            targets = logits.argmax(axis=1)
        else:
            values, targets = attribute_batch(net, sel.data, stats,
                                              _method_spec(name, cfg, args))
        maps = dataset_io.MapsFile(values.astype(np.float32), name,
                                   np.asarray(targets), sel.sample_ids,
                                   sel.channel_names)
        path = out_dir / f"maps_{name}.eegmap"
        dataset_io.save_contribution_maps(maps, path)
        print(f"wrote {path}")
    return 0


def _check_net_vs_dataset(net, ds):
    if (net.n_channels, net.n_times) != (ds.n_channels, ds.n_times):
        raise ConfigError(
            f"weights expect {net.n_channels}x{net.n_times} input but dataset "
            f"is {ds.n_channels}x{ds.n_times}"
        )


def _derive(seed, *parts) -> int:
    return int(np.random.SeedSequence([int(seed), *[int(p) for p in parts]]).generate_state(1)[0])


_WORKER = {}


def _init_eval_worker(net, stats, payload_common):
    _WORKER["net"] = net
    _WORKER["stats"] = stats
    _WORKER["common"] = payload_common


def _eval_one(task):
    sample, maps, sample_id, subject, seed = task
    common = _WORKER["common"]
    results = evaluation.evaluate_sample(
        _WORKER["net"], _WORKER["stats"], sample, maps,
        fractions=common["fractions"], trials=common["trials"], seed=seed,
        sample_id=sample_id, subject=subject,
        deletion_methods=common["deletion_methods"],
    )
    return [r.to_json_line() for r in results]


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    ds = _load_dataset(cfg, args.dataset)
    net = _load_weights(cfg, args.weights)
    _check_net_vs_dataset(net, ds)
    methods = _parse_methods(
        args.methods if args.methods is not None
        else (",".join(cfg.get("methods", [])) or None),
        EVAL_METHODS,
    )
    if "random" not in methods:
        methods = methods + ["random"]
    seed = int(_get(cfg, "metrics", "seed", args.seed, required=True))
    trials = int(_get(cfg, "metrics", "trials", args.trials, 100))
    fractions = _parse_fractions(args.fractions) or tuple(
        cfg.get("metrics", {}).get("fractions", evaluation.DEFAULT_FRACTIONS)
    )
    out = _get(cfg, "paths", "records", args.out, required=True)
    summary_path = _get(cfg, "paths", "summary", args.summary)
    summary_json = _get(cfg, "paths", "summary_json", args.summary_json)
    jobs = max(int(args.jobs or 1), 1)

    sel = _select(ds, args.samples, args.subject)
    stats = models.compute_batch_stats(net, sel.data)
    maps_by_method = {}
    for name in methods:
        if name == "random":
            maps_by_method[name] = np.stack([
                random_baseline_map(ds.n_channels, ds.n_times, _derive(seed, sid, 7)).values
                for sid in sel.sample_ids
            ])
        else:
            values, _ = attribute_batch(net, sel.data, stats, _method_spec(name, cfg, args))
            maps_by_method[name] = values

    tasks = []
    for i in range(len(sel)):
        sid = int(sel.sample_ids[i])
        maps = {name: maps_by_method[name][i] for name in methods}
        tasks.append((sel.data[i], maps, sid, sel.subjects[i], _derive(seed, sid)))
    common = {"fractions": fractions, "trials": trials, "deletion_methods": None}

    if jobs == 1:
        _init_eval_worker(net, stats, common)
        lines_nested = [_eval_one(t) for t in tasks]
    else:
        ctx = get_context("spawn")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx,
                                 initializer=_init_eval_worker,
                                 initargs=(net, stats, common)) as pool:
            lines_nested = list(pool.map(_eval_one, tasks, chunksize=4))

    lines = [line for chunk in lines_nested for line in chunk]
    Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(lines)} records)")

    results = [evaluation.SampleResult.from_json_line(line) for line in lines]
    summary = evaluation.aggregate(results)
    text = format_summary(summary)
    if summary_path:
        Path(summary_path).write_text(text, encoding="utf-8")
        print(f"wrote {summary_path}")
    else:
        print(text, end="")
    if summary_json:
        payload = {name: asdict(ms) for name, ms in summary.methods.items()}
        Path(summary_json).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
        print(f"wrote {summary_json}")
    return 0


def format_summary(summary: evaluation.EvalSummary) -> str:
    cols = ("method", "n_r", "r_min", "r_q1", "r_med", "r_q3", "r_max", "r_mean",
            "ch_r_med", "aupc_mean", "ch_aupc_mean", "undef")
    rows = [cols]
    for name, ms in summary.methods.items():
        d = ms.sensitivity_r

        def fmt(v):
            return "n/a" if v is None else f"{v:.4f}"

        rows.append((
            name,
            str(d.count if d else 0),
            fmt(d.minimum if d else None), fmt(d.q1 if d else None),
            fmt(d.median if d else None), fmt(d.q3 if d else None),
            fmt(d.maximum if d else None), fmt(d.mean if d else None),
            fmt(ms.channel_r.median if ms.channel_r else None),
            fmt(ms.aupc.mean if ms.aupc else None),
            fmt(ms.channel_aupc.mean if ms.channel_aupc else None),
            str(ms.undefined_r),
        ))
    widths = [max(len(r[i]) for r in rows) for i in range(len(cols))]
    out_lines = []
    for r in rows:
        out_lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return "\n".join(out_lines) + "\n"


def _pipeline_config(cfg, args) -> pipeline.PipelineConfig:
    return pipeline.PipelineConfig(
        sample_threshold=float(_get(cfg, "pipeline", "sample_threshold",
                                    getattr(args, "sample_threshold", None), 2.0)),
        channel_threshold=float(_get(cfg, "pipeline", "channel_threshold",
                                     getattr(args, "channel_threshold", None), 1.0)),
        smoothing_window=int(_get(cfg, "pipeline", "smoothing_window",
                                  getattr(args, "window", None), 5)),
    )


def _maps_and_samples(cfg, args, ds):
    maps_path = _get(cfg, "paths", "maps", args.maps, required=True)
    if not Path(maps_path).exists():
        raise ConfigError(f"maps file {maps_path} does not exist")
    maps = dataset_io.load_contribution_maps(maps_path)
    id_to_row = {int(sid): i for i, sid in enumerate(ds.sample_ids)}
    rows = []
    for sid in maps.sample_ids:
        if int(sid) not in id_to_row:
            raise ConfigError(f"maps file references sample id {int(sid)} missing from dataset")
        rows.append(id_to_row[int(sid)])
    return maps, ds.subset(rows)


def cmd_render(args) -> int:
    cfg = load_config(args.config)
    ds = _load_dataset(cfg, args.dataset)
    net = _load_weights(cfg, args.weights)
    _check_net_vs_dataset(net, ds)
    maps, sel = _maps_and_samples(cfg, args, ds)
    out_dir = Path(_get(cfg, "paths", "output_dir", args.out_dir, required=True))
    out_dir.mkdir(parents=True, exist_ok=True)
    pconf = _pipeline_config(cfg, args)
    layout_path = _get(cfg, "paths", "layout", args.layout)
    layout = dataset_io.load_layout(layout_path) if layout_path else dataset_io.default_layout()
    layout = layout.subset(sel.channel_names)
    stats = models.compute_batch_stats(net, sel.data)
    for i in range(len(sel)):
        sample = sel.sample(i)
        values = maps.values[i]
        processed = pipeline.process(values, values.mean(axis=1), pconf)
        _, probs = models.predict(net, sample.data, stats)
        header = (f"subject {sample.subject} sample {sample.sample_id:04d} "
                  f"label {ds.class_names[sample.label]} "
                  f"p=[{', '.join(f'{p:.4f}' for p in probs)}]")
        svg = render.render_sample_view(sample.data, processed, sel.channel_names, header)
        base = out_dir / f"{sample.sample_id:04d}_{maps.method}"
        Path(f"{base}.svg").write_text(svg, encoding="utf-8")
        topo = render.render_topomap(np.clip(processed.channel_map, -1.0, 1.0),
                                     layout, header=header)
        Path(f"{base}_topo.svg").write_text(topo, encoding="utf-8")
    print(f"wrote {2 * len(sel)} SVG files to {out_dir}")
    return 0


def cmd_report(args) -> int:
    cfg = load_config(args.config)
    ds = _load_dataset(cfg, args.dataset)
    net = _load_weights(cfg, args.weights)
    _check_net_vs_dataset(net, ds)
    maps, sel = _maps_and_samples(cfg, args, ds)
    out_dir = Path(_get(cfg, "paths", "output_dir", args.out_dir, required=True))
    out_dir.mkdir(parents=True, exist_ok=True)
    pconf = _pipeline_config(cfg, args)
    seed = int(_get(cfg, "metrics", "seed", args.seed, 0))
    trials = int(_get(cfg, "metrics", "trials", args.trials, 100))
    fractions = _parse_fractions(args.fractions) or tuple(
        cfg.get("metrics", {}).get("fractions", evaluation.DEFAULT_FRACTIONS)
    )
    stats = models.compute_batch_stats(net, sel.data)
    for i in range(len(sel)):
        sample = sel.sample(i)
        values = maps.values[i]
        channel_values = values.mean(axis=1)
        sens = evaluation.patch_sensitivity(
            net, sample.data, stats, values, fractions, trials,
            seed=_derive(seed, sample.sample_id),
        )
        ch_r = (evaluation.channel_sensitivity(net, sample.data, stats, channel_values)
                if sel.n_channels >= 2 else None)
        processed = pipeline.process(values, channel_values, pconf)
        rep = report.generate_report(
            net, stats, sample.data, maps.method, processed, sens, ch_r, pconf,
            subject=sample.subject, sample_id=sample.sample_id,
            true_label=ds.class_names[sample.label],
            channel_names=sel.channel_names, class_names=ds.class_names,
        )
        path = out_dir / f"{sample.sample_id:04d}_{maps.method}.txt"
        path.write_text(rep.to_text(), encoding="utf-8")
    print(f"wrote {len(sel)} reports to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
