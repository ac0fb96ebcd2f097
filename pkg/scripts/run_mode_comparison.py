"""Train one model per input mode on the same corpus and print the comparison table.

Defaults run the tiny test encoder on a synthetic corpus in a few seconds. Pass
``--corpus``/``--eval-corpus`` and ``--encoder roberta-large`` for a real run.
"""

import argparse
from pathlib import Path

from sarcctx.config import ExperimentConfig
from sarcctx.corpus import Source, write_corpus
from sarcctx.hyperparams import Hyperparams
from sarcctx.input_builder import InputMode
from sarcctx.metrics import results_table, write_metrics
from sarcctx.pipeline import evaluate_checkpoints, train_from_config
from sarcctx.synthetic import separable_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--corpus")
    ap.add_argument("--eval-corpus")
    ap.add_argument("--source", choices=[s.value for s in Source], default="twitter")
    ap.add_argument("--encoder", default="tiny-test")
    ap.add_argument("--output-dir", default="runs/mode_comparison")
    ap.add_argument("--epochs", type=int, default=5)
    ap.add_argument("--lr", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--averaging", choices=["macro", "class1"], default="macro")
    args = ap.parse_args()

    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    source = Source(args.source)
    if args.corpus is None:
        args.corpus = str(out / "train.jsonl")
        write_corpus(separable_corpus(200, seed=1, source=source), args.corpus)
    if args.eval_corpus is None:
        args.eval_corpus = str(out / "eval.jsonl")
        write_corpus(separable_corpus(100, seed=2, source=source), args.eval_corpus)

    hp = Hyperparams(learning_rate=args.lr, epochs=args.epochs, seed=args.seed)
    checkpoints = []
    for mode in InputMode:
        cfg = ExperimentConfig(corpus=args.corpus, source=source, mode=mode, encoder=args.encoder,
                               output_dir=str(out / mode.value), hyperparams=hp)
        _, ckpt = train_from_config(cfg, on_epoch=lambda r, m=mode: print(
            f"[{m.value}] epoch {r.epoch}: train_loss={r.train_loss:.4f}"))
        checkpoints.append(ckpt)

    results = evaluate_checkpoints(checkpoints, args.eval_corpus)
    write_metrics(results, out / "metrics.jsonl")
    table = results_table(results, averaging=args.averaging)
    (out / "results.csv").write_text(table.to_csv(), encoding="utf-8")
    print(table.render())


if __name__ == "__main__":
    main()
