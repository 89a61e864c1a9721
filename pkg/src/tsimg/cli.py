"""Subcommand front-end binding the library into the experiment recipes.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Diagnostics go to
stderr; stdout carries machine-readable summaries only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import dataio, evaluation, imaging, models, pipeline, series, training
from .errors import TsimgError
from .models import ModelConfig, init_params
from .training import TrainConfig, train

TASK_FLAGS = {"classify": "classify",
              "forecast-linear": "forecast_linear",
              "forecast-reconstruct": "forecast_reconstruct"}
PERTURB_FLAGS = {"sf-all": "sf_all", "sf-half": "sf_half",
                 "ex-half": "ex_half", "masking": "masking"}


def _default_seed() -> int:
    return int(os.environ.get("TSIMG_SEED", "0"))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsimg",
                                description="time-series imaging experiment toolkit")
    p.add_argument("--config", help="key = value config file; flags override it")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("render", help="image one series with one method")
    r.add_argument("--input", required=True)
    r.add_argument("--method", required=True, choices=imaging.IMAGING_METHODS)
    r.add_argument("--variate", type=int, default=0)
    r.add_argument("--out", required=True)
    r.add_argument("--window", type=int, help="use only the first N steps")
    r.add_argument("--L", type=int)
    r.add_argument("--window-len", type=int)
    r.add_argument("--hop", type=int)
    r.add_argument("--n-filters", type=int, default=32)
    r.add_argument("--num-scales", type=int, default=32)
    r.add_argument("--embed-dim", type=int, default=1)
    r.add_argument("--delay", type=int, default=1)
    r.add_argument("--height", type=int, default=64)
    r.add_argument("--width", type=int, default=64)

    t = sub.add_parser("train", help="train one model")
    t.add_argument("--task", required=True, choices=sorted(TASK_FLAGS))
    t.add_argument("--arch", required=True, choices=models.ARCHS)
    t.add_argument("--imaging", required=True, choices=imaging.IMAGING_METHODS)
    t.add_argument("--input", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--d", type=int, default=1, help="variates per labeled sample")
    t.add_argument("--lookback", type=int, default=96)
    t.add_argument("--horizon", type=int, default=24)
    t.add_argument("--seg-len", type=int, help="UVH segment length (default: FFT)")
    t.add_argument("--image-size", type=int, default=64)
    t.add_argument("--patch-size", type=int, default=8)
    t.add_argument("--embed-dim", type=int, default=64)
    t.add_argument("--heads", type=int, default=4)
    t.add_argument("--lr", type=float, default=1e-4)
    t.add_argument("--batch-size", type=int, default=32)
    t.add_argument("--epochs", type=int)
    t.add_argument("--patience", type=int)
    t.add_argument("--seed", type=int, default=None)

    e = sub.add_parser("eval", help="evaluate a trained run on the test split")
    e.add_argument("--run", required=True, help="output directory of `tsimg train`")
    e.add_argument("--input", required=True)
    e.add_argument("--split", default="test", choices=["test", "val"])
    e.add_argument("--perturb", choices=sorted(PERTURB_FLAGS))
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--out")

    s = sub.add_parser("sweep", help="segment-length or look-back sweep")
    s.add_argument("--kind", required=True, choices=["segment", "lookback"])
    s.add_argument("--input", help="ETT-style CSV (default: synthetic periodic)")
    s.add_argument("--variate", type=int, default=0)
    s.add_argument("--synthetic-period", type=int, default=24)
    s.add_argument("--synthetic-length", type=int, default=4000)
    s.add_argument("--waveform", default="composite")
    s.add_argument("--noise", type=float, default=0.05)
    s.add_argument("--lookback", type=int, default=96)
    s.add_argument("--horizon", type=int, default=24)
    s.add_argument("--stride", type=int, default=8)
    s.add_argument("--L", type=int, default=24)
    s.add_argument("--k", type=int, default=6)
    s.add_argument("--i-values", default="1,2,3,4,5,6,7,8,9,10,11,12")
    s.add_argument("--lengths", default="48,96,192,336,720,1152,1728,2304")
    s.add_argument("--arch", default="minimae", choices=models.ARCHS)
    s.add_argument("--image-size", type=int, default=32)
    s.add_argument("--patch-size", type=int, default=8)
    s.add_argument("--embed-dim", type=int, default=32)
    s.add_argument("--heads", type=int, default=4)
    s.add_argument("--lr", type=float, default=1e-3)
    s.add_argument("--batch-size", type=int, default=32)
    s.add_argument("--epochs", type=int, default=5)
    s.add_argument("--patience", type=int, default=5)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out", required=True)

    l = sub.add_parser("lemma", help="verify the segment-reoccurrence closed form")
    l.add_argument("--k", type=int, required=True)
    l.add_argument("--i-max", type=int, required=True)
    l.add_argument("--out")

    return p


def _apply_config_file(args: argparse.Namespace, argv: list[str]) -> None:
    """Line-oriented `key = value` overrides; explicit flags win."""
    if not args.config:
        return
    text = Path(args.config).read_text()
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise TsimgError(f"{args.config}: line {line_no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        dest = key.replace("-", "_")
        if f"--{key}" in argv or not hasattr(args, dest):
            continue
        current = getattr(args, dest)
        if isinstance(current, bool):
            value = value.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            value = int(value)
        elif isinstance(current, float):
            value = float(value)
        elif current is None:
            # unset optionals: guess the narrowest numeric type
            for cast in (int, float):
                try:
                    value = cast(value)
                    break
                except ValueError:
                    continue
        setattr(args, dest, value)


def _resolved_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "config"}
    cfg["version"] = __version__
    return cfg


def _write_run_metadata(out_dir: Path, args: argparse.Namespace) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"{k.replace('_', '-')} = {v}" for k, v in _resolved_config(args).items()]
    (out_dir / "resolved_config.txt").write_text("\n".join(lines) + "\n")


def _seed_of(args) -> int:
    return args.seed if getattr(args, "seed", None) is not None else _default_seed()


# --- subcommand bodies --------------------------------------------------

def cmd_render(args) -> int:
    mts = dataio.load_ett_csv(args.input)
    if not 0 <= args.variate < mts.d:
        raise TsimgError(f"variate {args.variate} outside [0, {mts.d})")
    if args.method == "mvh":
        window = mts.values[:, :args.window] if args.window else mts.values
    else:
        row = mts.values[args.variate]
        window = row[:args.window] if args.window else row
    img = pipeline.image_for_method(
        args.method, window, L=args.L, window_len=args.window_len, hop=args.hop,
        n_filters=args.n_filters, num_scales=args.num_scales,
        embed_dim=args.embed_dim, delay=args.delay,
        height=args.height, width=args.width)
    dataio.write_pgm(img, args.out)
    sidecar = Path(args.out).with_suffix(".csv")
    np.savetxt(sidecar, img.pixels, delimiter=",")
    print(f"render method={args.method} height={img.height} width={img.width} "
          f"out={args.out}")
    return 0


def _load_forecast_windows(args, task_name: str):
    """Standardized per-variate train/val/test windows from an ETT CSV."""
    mts = dataio.load_ett_csv(args.input)
    tr, va, te, stats = series.standardize_by_train(
        *series.chronological_split(mts))
    def windows(split):
        try:
            return series.slide_windows(split, args.lookback, args.horizon)
        except TsimgError:
            return []
    return (windows(tr), windows(va), windows(te)), mts.d


def cmd_train(args) -> int:
    task = TASK_FLAGS[args.task]
    models.validate_routing(task, args.imaging)
    seed = _seed_of(args)
    out_dir = Path(args.out)
    args.seed = seed
    _write_run_metadata(out_dir, args)
    epochs = args.epochs if args.epochs else (30 if task == "classify" else 20)
    patience = args.patience if args.patience else (8 if task == "classify" else 3)
    tc = TrainConfig(learning_rate=args.lr, batch_size=args.batch_size,
                     max_epochs=epochs, patience=patience, seed=seed)

    if task == "classify":
        raw = dataio.load_labeled_windows_csv(args.input, d=args.d)
        n_classes = max(w.class_label for w in raw) + 1
        cfg = ModelConfig(arch=args.arch, task=task, image_size=args.image_size,
                          patch_size=args.patch_size, embed_dim=args.embed_dim,
                          num_heads=args.heads, num_classes=n_classes,
                          num_variates=1 if args.imaging == "mvh" else args.d)
        samples = [pipeline.build_classify_sample(w, args.imaging, cfg, L=args.seg_len)
                   for w in raw]
        rng = np.random.default_rng(seed)
        order = rng.permutation(len(samples))
        n_train = max(1, int(0.7 * len(samples)))
        n_val = max(1, int(0.1 * len(samples)))
        train_s = [samples[i] for i in order[:n_train]]
        val_s = [samples[i] for i in order[n_train:n_train + n_val]]
    else:
        (tr_w, va_w, te_w), d = _load_forecast_windows(args, task)
        if not tr_w or not va_w:
            raise TsimgError("input series too short for the requested windows")
        horizon = args.horizon * (d if args.imaging == "mvh" else 1)
        cfg = ModelConfig(arch=args.arch, task=task, image_size=args.image_size,
                          patch_size=args.patch_size, embed_dim=args.embed_dim,
                          num_heads=args.heads,
                          horizon=args.horizon if task == "forecast_reconstruct" else horizon)
        train_s, val_s = [], []
        for source, dest in ((tr_w, train_s), (va_w, val_s)):
            for w in source:
                dest.extend(_forecast_samples(w, args, cfg, task))
    params = init_params(cfg, seed=seed)
    params, history = train(cfg, params, train_s, val_s, tc)
    dataio.save_checkpoint(params, str(out_dir / "checkpoint.bin"))
    meta = {"model": {"arch": cfg.arch, "task": cfg.task,
                      "image_size": cfg.image_size, "patch_size": cfg.patch_size,
                      "embed_dim": cfg.embed_dim, "num_heads": cfg.num_heads,
                      "horizon": cfg.horizon, "num_classes": cfg.num_classes,
                      "num_variates": cfg.num_variates},
            "imaging": args.imaging, "seg_len": args.seg_len,
            "lookback": args.lookback, "horizon": args.horizon,
            "d": args.d, "seed": seed}
    (out_dir / "config.json").write_text(json.dumps(meta, indent=2) + "\n")
    dataio.write_history_csv(str(out_dir / "history.csv"), history)
    print(f"train task={task} arch={args.arch} imaging={args.imaging} "
          f"epochs={len(history)} best={history[-1].val_metric!r} out={out_dir}")
    return 0


def _forecast_samples(w, args, cfg: ModelConfig, task: str):
    if args.imaging == "mvh":
        if task == "forecast_reconstruct":
            return [pipeline.build_reconstruct_sample_mvh(w.lookback, w.target, cfg)]
        return [models.ForecastSample(
            patches=pipeline.patchify(
                pipeline.align_image(imaging.mvh(series.MultivariateSeries(w.lookback)), cfg),
                cfg.patch_size).patches,
            target=w.target.reshape(-1))]
    out = []
    for v in range(w.lookback.shape[0]):
        lb, tg = w.lookback[v], w.target[v]
        if task == "forecast_reconstruct":
            seg = args.seg_len or imaging.detect_period(lb).chosen_L
            out.append(pipeline.build_reconstruct_sample(lb, tg, seg, cfg))
        else:
            out.append(pipeline.build_linear_sample(lb, tg, args.imaging, cfg,
                                                    L=args.seg_len))
    return out


def cmd_eval(args) -> int:
    run_dir = Path(args.run)
    meta = json.loads((run_dir / "config.json").read_text())
    params = dataio.load_checkpoint(str(run_dir / "checkpoint.bin"))
    m = meta["model"]
    cfg = ModelConfig(arch=m["arch"], task=m["task"], image_size=m["image_size"],
                      patch_size=m["patch_size"], embed_dim=m["embed_dim"],
                      num_heads=m["num_heads"], horizon=m["horizon"],
                      num_classes=m["num_classes"], num_variates=m["num_variates"])
    seed = _seed_of(args)
    mode = (evaluation.PerturbMode(PERTURB_FLAGS[args.perturb], seed=seed)
            if args.perturb else None)

    def maybe_perturb(block: np.ndarray) -> np.ndarray:
        if mode is None:
            return block
        return evaluation.perturb(series.MultivariateSeries(block), mode).values

    rows = []
    if cfg.task == "classify":
        raw = dataio.load_labeled_windows_csv(args.input, d=meta["d"])
        preds, labels = [], []
        for w in raw:
            sample = pipeline.build_classify_sample(
                series.WindowSample(lookback=maybe_perturb(w.lookback),
                                    class_label=w.class_label),
                meta["imaging"], cfg, L=meta["seg_len"])
            preds.append(models.predict_class(sample.patch_seqs, params, cfg))
            labels.append(w.class_label)
        acc = evaluation.metric_accuracy(preds, labels)
        rows.append({"experiment_id": "eval", "accuracy": repr(acc)})
        print(f"eval accuracy={acc!r} perturb={args.perturb}")
    else:
        ns = argparse.Namespace(input=args.input, lookback=meta["lookback"],
                                horizon=meta["horizon"])
        (tr_w, va_w, te_w), d = _load_forecast_windows(ns, cfg.task)
        wins = te_w if args.split == "test" else va_w
        if not wins:
            raise TsimgError("no evaluation windows for this split")
        preds, truths = [], []
        for w in wins:
            lb = maybe_perturb(w.lookback)
            if meta["imaging"] == "mvh":
                if cfg.task == "forecast_reconstruct":
                    pred = pipeline.predict_forecast_mvh(lb, meta["horizon"], params, cfg)
                else:
                    seq = pipeline.patchify(
                        pipeline.align_image(imaging.mvh(series.MultivariateSeries(lb)), cfg),
                        cfg.patch_size)
                    pred = models.predict_linear(seq.patches, params, cfg).reshape(
                        d, meta["horizon"])
                preds.append(pred)
                truths.append(w.target)
            else:
                for v in range(lb.shape[0]):
                    if cfg.task == "forecast_reconstruct":
                        seg = meta["seg_len"] or imaging.detect_period(lb[v]).chosen_L
                        preds.append(pipeline.predict_forecast(
                            lb[v], seg, meta["horizon"], params, cfg))
                    else:
                        preds.append(models.predict_linear(
                            pipeline.build_linear_sample(
                                lb[v], w.target[v], meta["imaging"], cfg,
                                L=meta["seg_len"]).patches, params, cfg))
                    truths.append(w.target[v])
        pred = np.stack(preds)
        truth = np.stack(truths)
        mse = evaluation.metric_mse(pred, truth)
        mae = evaluation.metric_mae(pred, truth)
        rows.append({"experiment_id": "eval", "mse": repr(mse), "mae": repr(mae)})
        print(f"eval mse={mse!r} mae={mae!r} perturb={args.perturb}")
    if args.out:
        dataio.write_result_rows(args.out, rows)
    return 0


def cmd_sweep(args) -> int:
    seed = _seed_of(args)
    args.seed = seed
    out_dir = Path(args.out)
    _write_run_metadata(out_dir, args)
    if args.input:
        mts = dataio.load_ett_csv(args.input)
        x = mts.values[args.variate]
    else:
        x = series.gen_periodic(args.synthetic_period, args.synthetic_length,
                                args.waveform, seed=seed, noise_std=args.noise)
    task = evaluation.ForecastTask(series=x, lookback=args.lookback,
                                   horizon=args.horizon, stride=args.stride)
    mc = ModelConfig(arch=args.arch, task="forecast_reconstruct",
                     image_size=args.image_size, patch_size=args.patch_size,
                     embed_dim=args.embed_dim, num_heads=args.heads,
                     horizon=args.horizon)
    tc = TrainConfig(learning_rate=args.lr, batch_size=args.batch_size,
                     max_epochs=args.epochs, patience=args.patience, seed=seed)
    if args.kind == "segment":
        i_values = [int(v) for v in args.i_values.split(",")]
        res = evaluation.segment_sweep(task, mc, tc, args.L, args.k, i_values)
        # timing goes to stderr: the results CSV must be byte-identical
        # across same-seed runs
        rows = [{"experiment_id": "segment_sweep", "axis_value": a,
                 "mse": repr(m), "mae": repr(ma), "n_value": n}
                for a, m, ma, n in zip(res.axis, res.mse, res.mae,
                                       res.n_values)]
    else:
        lengths = [int(v) for v in args.lengths.split(",")]
        res = evaluation.lookback_sweep(task, mc, tc, lengths, seg_len=args.L)
        rows = [{"experiment_id": "lookback_sweep", "axis_value": a,
                 "mse": repr(m), "mae": repr(ma)}
                for a, m, ma in zip(res.axis, res.mse, res.mae)]
        for H, reason in res.skipped:
            print(f"skip lookback={H}: {reason}", file=sys.stderr)
    dataio.write_result_rows(str(out_dir / "sweep.csv"), rows)
    print(f"cell seconds: {' '.join(f'{s:.3f}' for s in res.seconds)}",
          file=sys.stderr)
    print(f"sweep kind={args.kind} cells={len(rows)} out={out_dir / 'sweep.csv'}")
    return 0


def cmd_lemma(args) -> int:
    if args.k < 1 or args.i_max < 1:
        raise TsimgError("k and i-max must be >= 1")
    L = args.k * 4
    rows = []
    for i in range(1, args.i_max + 1):
        closed = evaluation.reoccurrence_n(i, args.k)
        brute = evaluation.reoccurrence_brute_force(i, args.k, L)
        rows.append({"experiment_id": "lemma", "axis_value": i,
                     "n_value": closed, "accuracy": int(closed == brute)})
        print(f"i={i} k={args.k} n_closed={closed} n_brute={brute} "
              f"match={closed == brute}")
    if args.out:
        dataio.write_result_rows(args.out, rows)
    if any(r["accuracy"] != 1 for r in rows):
        raise TsimgError("closed form disagrees with simulation")
    return 0


COMMANDS = {"render": cmd_render, "train": cmd_train, "eval": cmd_eval,
            "sweep": cmd_sweep, "lemma": cmd_lemma}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    try:
        _apply_config_file(args, argv)
        return COMMANDS[args.command](args)
    except TsimgError as e:
        from .errors import RoutingError
        print(f"error: {e}", file=sys.stderr)
        return 2 if isinstance(e, RoutingError) else 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
