"""Command-line entry point tying the pipeline together.

Subcommands: ingest, label, train, gradcheck, generate, serve, stats,
roundtrip. Usage errors exit 2 (argparse); domain errors print the error
class name and exit 1.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime
from pathlib import Path

import numpy as np

from . import classifier as clf_mod
from . import dataset as ds_mod
from . import gaf, sampler, stats
from .ohlc import PatternLabel, RuleParams
from .synthetic import build_window


def _say(args, *parts) -> None:
    if not args.quiet:
        print(*parts)


def _cmd_ingest(args) -> int:
    start = datetime.fromisoformat(args.start) if args.start else None
    end = datetime.fromisoformat(args.end) if args.end else None
    rows = ds_mod.ingest_csv(args.csv, start=start, end=end)
    windows = ds_mod.slide_windows(rows, T=args.window, stride=args.stride)
    records = [
        ds_mod.LabeledWindow(w, PatternLabel.NONE, "real", {"offset": i * args.stride})
        for i, w in enumerate(windows)
    ]
    ds_mod.save_dataset(args.out, records, T=args.window)
    _say(args, f"ingested {len(rows)} rows -> {len(windows)} windows -> {args.out}")
    return 0


def _cmd_label(args) -> int:
    records, T, _ = ds_mod.load_dataset(args.input)
    windows = [r.window for r in records]
    labeled, counts = ds_mod.label_and_balance(
        windows, RuleParams(), per_class=args.per_class, allow_fewer=args.allow_fewer
    )
    ds_mod.save_dataset(args.out, labeled, T=T)
    _say(args, f"kept {len(labeled)} labeled windows -> {args.out}")
    for label, found in counts.items():
        _say(args, f"  {label.name}: {found}")
    return 0


def _load_training_data(path):
    records, _, _ = ds_mod.load_dataset(path)
    return [(gaf.encode_window(r.window), r.label) for r in records
            if r.label is not PatternLabel.NONE]


def _cmd_train(args) -> int:
    data = _load_training_data(args.input)
    cfg = clf_mod.TrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        l2=args.l2,
    )
    model, history = clf_mod.train(data, cfg)
    clf_mod.save_model(model, args.out)
    acc = clf_mod.accuracy(model, data)
    if args.history_csv:
        lines = ["epoch,loss"] + [f"{i + 1},{loss}" for i, loss in enumerate(history)]
        Path(args.history_csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _say(args, f"trained {cfg.epochs} epochs, final loss {history[-1]:.4f}, "
               f"training accuracy {acc:.4f} -> {args.out}")
    return 0


def _cmd_gradcheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for trial in range(args.trials):
        model = clf_mod.init_model(T=args.window, seed=int(rng.integers(0, 2**31)))
        label = PatternLabel(int(rng.integers(1, 9)))
        window = build_window(label, T=args.window, rng=rng)
        err = clf_mod.grad_check(model, (gaf.encode_window(window), label), eps=args.eps)
        worst = max(worst, err)
        _say(args, f"trial {trial + 1}: max relative error {err:.3e}")
    print(f"gradcheck worst relative error: {worst:.3e}")
    return 0 if worst < 1e-4 else 1


def _make_classifier(args):
    if args.classifier == "rule":
        return clf_mod.RuleClassifier()
    if not args.model:
        raise clf_mod.ClassifierError("--classifier model requires --model PATH")
    return clf_mod.CnnClassifier(clf_mod.load_model(args.model))


def _cmd_generate(args) -> int:
    records, T, _ = ds_mod.load_dataset(args.input)
    seeds = [(r.window, r.label) for r in records if r.label is not PatternLabel.NONE]
    cfg = sampler.SamplerConfig(episodes=args.episodes, seed=args.seed)
    clf = _make_classifier(args)
    exhausted = None
    try:
        samples, report = sampler.generate_dataset(
            seeds, clf, cfg, target=args.target, episode_budget=args.budget
        )
    except sampler.BudgetExhausted as exc:
        # still write the partial set; the diagnostic and exit code tell the story
        samples, report, exhausted = exc.samples, exc.report, exc
    out_records = [
        ds_mod.LabeledWindow(
            s.window, s.label, "generated",
            {"seed_index": s.source_index, "episode": s.episode},
        )
        for s in samples
    ]
    meta = {
        "generator": "local-search-perturbation",
        "classifier": args.classifier,
        "scale_low": cfg.scale_low,
        "scale_high": cfg.scale_high,
        "reset_period": cfg.reset_period,
        "episodes": cfg.episodes,
        "seed": cfg.seed,
    }
    ds_mod.save_dataset(args.out, out_records, T=T, meta=meta)
    used = [s for s in report.per_seed if s.episodes]
    rate = sum(s.accepted for s in used) / max(1, sum(s.episodes for s in used))
    _say(args, f"generated {len(samples)} samples in {report.episodes_total} episodes "
               f"(acceptance {rate:.2f}) -> {args.out}")
    if exhausted is not None:
        rejected = sum(1 for s in report.per_seed if s.error)
        print(f"error: BudgetExhausted: {exhausted} "
              f"({rejected} seeds rejected); partial set written to {args.out}",
              file=sys.stderr)
        return 1
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    real_records, _, _ = ds_mod.load_dataset(args.real)
    generated = {}
    for entry in args.generated:
        name, _, path = entry.partition("=")
        if not path:
            raise ds_mod.DatasetError(f"--generated expects name=path, got {entry!r}")
        records, _, _ = ds_mod.load_dataset(path)
        generated[name] = [r.window for r in records]
    app = create_app(
        [r.window for r in real_records],
        generated,
        log_path=args.log,
        seed=args.seed,
        static_dir=args.static,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_stats(args) -> int:
    sessions, responses = stats.parse_response_log(args.responses)
    report = stats.filter_sessions(sessions, responses)
    _say(args, f"sessions kept {len(report.sessions)}, "
               f"dropped incomplete {report.dropped_incomplete}, "
               f"dropped fast {report.dropped_fast}")
    models = sorted({r.source_model for r in report.responses})
    ratios = {}
    for model in models:
        per_session, pooled = stats.correct_ratio_per_capita(report.responses, model)
        ratios[model] = per_session
        print(f"{model}: {pooled.correct}/{pooled.total} correct "
              f"({100.0 * pooled.ratio:.2f}%)")
    scores = []
    by_session: dict[str, list[bool]] = {}
    for r in report.responses:
        by_session.setdefault(r.session_id, []).append(r.chose_real)
    for hits in by_session.values():
        scores.append(sum(hits) / len(hits))
    counts, mean = stats.score_histogram(scores, bins=args.bins)
    if args.histogram_csv:
        stats.write_histogram_csv(args.histogram_csv, counts, mean)
        _say(args, f"histogram -> {args.histogram_csv}")
    if mean is not None:
        print(f"mean score: {100.0 * mean:.2f}%")
    if len(models) == 2:
        a, b = models
        common = sorted(set(ratios[a]) & set(ratios[b]))
        if len(common) >= 2:
            result = stats.paired_t_test(
                [ratios[a][sid] for sid in common],
                [ratios[b][sid] for sid in common],
            )
            print(f"paired t-test ({a} - {b}): {stats.format_t_test(result)}")
    return 0


def _cmd_roundtrip(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst_rt = 0.0
    worst_dual = 0.0
    for _ in range(args.trials):
        values = rng.uniform(0.5, 2.0, size=args.window)
        n = gaf.normalize(values)
        m = gaf.gaf_encode(n)
        back = gaf.gaf_decode(m)
        worst_rt = max(worst_rt, float(np.max(np.abs(back - n.values))))
        angles = np.arccos(n.values)
        dual = np.cos(angles[:, None] + angles[None, :])
        worst_dual = max(worst_dual, float(np.max(np.abs(dual - m))))
    print(f"roundtrip max abs error: {worst_rt:.3e}")
    print(f"dual-form max abs error: {worst_dual:.3e}")
    ok = worst_rt < 1e-9 and worst_dual < 1e-12
    print("self-test", "passed" if ok else "FAILED")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="candleaug")
    parser.add_argument("--seed", type=int, default=0, help="global RNG seed")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate an OHLC CSV and slice it into windows")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--start", help="ISO-8601 inclusive lower bound")
    p.add_argument("--end", help="ISO-8601 exclusive upper bound")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("label", help="rule-label windows and balance classes")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--per-class", type=int, default=1500)
    p.add_argument("--allow-fewer", action="store_true")
    p.set_defaults(func=_cmd_label)

    p = sub.add_parser("train", help="train the convolutional classifier")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--history-csv", help="write per-epoch loss history as CSV")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("gradcheck", help="compare analytic and numeric gradients")
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--window", type=int, default=10)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("generate", help="generate label-preserving synthetic windows")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--target", type=int, default=4000)
    p.add_argument("--episodes", type=int, default=30)
    p.add_argument("--budget", type=int, help="global episode budget")
    p.add_argument("--classifier", choices=["rule", "model"], default="rule")
    p.add_argument("--model", help="model file for --classifier model")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("serve", help="run the questionnaire HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--real", required=True, help="dataset file of real windows")
    p.add_argument("--generated", action="append", default=[], required=True,
                   metavar="NAME=PATH", help="register a generated corpus (repeatable)")
    p.add_argument("--log", required=True, help="append-only response log path")
    p.add_argument("--static", help="directory of web UI assets to serve at /")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("stats", help="filter a response log and report statistics")
    p.add_argument("--responses", required=True)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--histogram-csv")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("roundtrip", help="encoding self-test")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--window", type=int, default=10)
    p.set_defaults(func=_cmd_roundtrip)

    return parser


DOMAIN_ERRORS = (
    ds_mod.DatasetError,
    clf_mod.ClassifierError,
    sampler.SamplerError,
    sampler.BudgetExhausted,
    stats.StatsError,
    gaf.GafError,
    ValueError,
    OSError,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DOMAIN_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
