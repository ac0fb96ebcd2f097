"""Command-line entry point: ``sarcctx {stats,train,evaluate,predict}``.

Exit codes: 0 success, 2 configuration error, 3 data error (unreadable,
malformed or invalid corpus / checkpoint), 4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from sarcctx.config import ExperimentConfig
from sarcctx.corpus import Source, compute_stats, format_stats_table, load_corpus, mismatch_ratio, stats_rows
from sarcctx.errors import ConfigError, DomainError, ParseError, SarcctxError, ValidationError
from sarcctx.input_builder import InputMode

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4

logger = logging.getLogger("sarcctx")


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("experiment flags (override --config)")
    g.add_argument("--config", help="INI experiment config")
    g.add_argument("--seed", type=int)
    g.add_argument("--mode", choices=[m.value for m in InputMode])
    g.add_argument("--encoder", help="tiny-test or a Hugging Face model id such as roberta-large")
    g.add_argument("--source", choices=[s.value for s in Source])
    g.add_argument("--output-dir")
    g.add_argument("--max-seq-len-response", type=int)
    g.add_argument("--max-seq-len-context", type=int)
    g.add_argument("--context-turns", type=int)
    g.add_argument("--lr", type=float, dest="learning_rate")
    g.add_argument("--epochs", type=int)
    g.add_argument("--batch-size", type=int)
    g.add_argument("--split-ratio", type=float)
    g.add_argument("--normalize", action="store_true", default=None, help="minimal tweet normalisation")
    g.add_argument("--dump-inputs", type=int, metavar="N", help="write decoded inputs for the first N records")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="sarcctx", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[common], help="corpus statistics (average contexts per record)")
    p.add_argument("corpora", nargs="+", help="one or more corpus files")
    p.add_argument("--splits", nargs="+", help="split name per corpus (default: train test for two files)")
    p.add_argument("--json", dest="json_out", help="also write machine-readable rows to this file")

    p = sub.add_parser("train", parents=[common], help="fine-tune on a labeled corpus")
    p.add_argument("corpus", nargs="?", help="labeled corpus (overrides config)")

    p = sub.add_parser("evaluate", parents=[common], help="score checkpoints or a prediction file on gold")
    p.add_argument("checkpoints", nargs="*", help="checkpoint directories (one row each)")
    p.add_argument("--corpus", required=True, help="labeled corpus")
    p.add_argument("--predictions", help="score this prediction file instead of running a checkpoint")
    p.add_argument("--averaging", choices=["macro", "class1"], default="macro")

    p = sub.add_parser("predict", parents=[common], help="write id,LABEL predictions")
    p.add_argument("checkpoint")
    p.add_argument("--corpus", required=True, help="corpus to label (labels, if any, are ignored)")
    p.add_argument("--output", help="prediction file (default: <output-dir>/predictions.txt)")
    return parser


def _config_from(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    overrides = {
        k: getattr(args, k, None)
        for k in (
            "seed", "mode", "encoder", "source", "output_dir", "max_seq_len_response",
            "max_seq_len_context", "context_turns", "learning_rate", "epochs", "batch_size",
            "split_ratio", "normalize", "dump_inputs",
        )
    }
    overrides["corpus"] = getattr(args, "corpus", None) if args.command == "train" else None
    return cfg.override(**overrides)


def cmd_stats(args, cfg: ExperimentConfig) -> int:
    paths = args.corpora
    splits = args.splits or (["train", "test"] if len(paths) == 2 else ["unsplit"] * len(paths))
    if len(splits) != len(paths):
        raise ConfigError(f"{len(splits)} split names for {len(paths)} corpora")
    if len(set(splits)) != len(splits):
        raise ConfigError(f"split names must be distinct, got {splits}")
    entries = {}
    for path, split in zip(paths, splits):
        corpus = load_corpus(path, cfg.source, normalize=cfg.normalize)
        st = compute_stats(corpus)
        entries[(split, cfg.source.value)] = st
        balance = ", ".join(f"{k.value}={v}" for k, v in sorted(st.label_counts.items())) or "unlabeled"
        print(f"{split}: {path}: records={st.record_count} avg_contexts={st.avg_contexts_per_record:.3f} [{balance}]")
    print(format_stats_table(entries))
    rows = stats_rows(entries)
    if len(entries) == 2:
        (sa, a), (sb, b) = entries.items()
        if a.avg_contexts_per_record > 0 and b.avg_contexts_per_record > 0:
            ratio = mismatch_ratio(a, b)
            larger = sa[0] if a.avg_contexts_per_record >= b.avg_contexts_per_record else sb[0]
            print(f"mismatch ratio: {ratio:.3f} ({larger} has more contexts per record)")
            rows.append({"mismatch_ratio": ratio, "larger_split": larger})
        else:
            print("mismatch ratio: undefined (a corpus has no context turns)")
    if args.json_out:
        Path(args.json_out).write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))
    return EXIT_OK


def cmd_train(args, cfg: ExperimentConfig) -> int:
    from sarcctx.pipeline import train_from_config

    def show(rec):
        val = "" if rec.val_loss is None else f" val_loss={rec.val_loss:.4f} val_f1={rec.val_f1:.3f}"
        print(f"epoch {rec.epoch}: train_loss={rec.train_loss:.4f}{val}", flush=True)

    _, out = train_from_config(cfg, on_epoch=show)
    print(f"checkpoint written to {out}")
    return EXIT_OK


def cmd_evaluate(args, cfg: ExperimentConfig) -> int:
    from sarcctx.metrics import (
        RunResult,
        read_predictions,
        report_from_confusion,
        results_table,
        score_predictions,
        write_metrics,
    )
    from sarcctx.pipeline import evaluate_checkpoints

    if args.predictions:
        gold = load_corpus(args.corpus, cfg.source, normalize=cfg.normalize)
        cm = score_predictions(read_predictions(args.predictions), gold)
        results = [RunResult(cfg.mode, report_from_confusion(cm), gold.source, cm)]
    elif args.checkpoints:
        results = evaluate_checkpoints(args.checkpoints, args.corpus, args.source)
    else:
        raise ConfigError("give checkpoint directories or --predictions")
    table = results_table(results, averaging=args.averaging)
    print(table.render(), end="")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_metrics(results, out / "metrics.jsonl")
    (out / "results.txt").write_text(table.render())
    (out / "results.csv").write_text(table.to_csv())
    return EXIT_OK


def cmd_predict(args, cfg: ExperimentConfig) -> int:
    from sarcctx.pipeline import predict_to_file

    out = Path(args.output) if args.output else Path(cfg.output_dir) / "predictions.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    n = predict_to_file(args.checkpoint, args.corpus, out, args.source)
    print(f"{n} predictions written to {out}")
    return EXIT_OK


COMMANDS = {"stats": cmd_stats, "train": cmd_train, "evaluate": cmd_evaluate, "predict": cmd_predict}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config_from(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, ValidationError, DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SarcctxError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
