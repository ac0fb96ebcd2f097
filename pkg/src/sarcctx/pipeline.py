"""End-to-end steps shared by the CLI and the experiment scripts."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, Sequence

from sarcctx.config import ExperimentConfig
from sarcctx.corpus import Corpus, Source, decode_label, encode_label, load_corpus, train_val_split
from sarcctx.encoder import (
    TINY_TEST_ID,
    EpochRecord,
    TrainedModel,
    fine_tune,
    load_checkpoint,
    predict,
    save_checkpoint,
)
from sarcctx.errors import ValidationError, VocabularyMismatchError
from sarcctx.input_builder import InputMode, build_dataset, dump_inputs
from sarcctx.metrics import RunResult, confusion, report_from_confusion, write_metrics, write_predictions
from sarcctx.tokenizers import HFTokenizer, TokenizerHandle, WordTokenizer, tokenizer_from_descriptor

logger = logging.getLogger(__name__)


def tokenizer_for(encoder_id: str) -> TokenizerHandle:
    if encoder_id == TINY_TEST_ID:
        return WordTokenizer()
    return HFTokenizer(encoder_id)


def train_from_config(
    cfg: ExperimentConfig,
    on_epoch: Callable[[EpochRecord], None] | None = None,
) -> tuple[TrainedModel, Path]:
    """Split, encode, fine-tune and write a checkpoint to ``cfg.output_dir``."""
    cfg.validate()
    hp = cfg.hyperparams
    corpus = load_corpus(cfg.corpus, cfg.source, normalize=cfg.normalize)
    train, val = train_val_split(corpus, hp.split_ratio, hp.seed)
    if len(train) == 0:
        raise ValidationError(f"split ratio {hp.split_ratio} leaves no training records out of {len(corpus)}")
    tokenizer = tokenizer_for(cfg.encoder)
    train_ds = build_dataset(train, cfg.mode, tokenizer, hp, cfg.context_turns)
    val_ds = build_dataset(val, cfg.mode, tokenizer, hp, cfg.context_turns)

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.dump_inputs:
        (out / "inputs_dump.tsv").write_text(
            dump_inputs(train.records, train_ds, tokenizer, cfg.dump_inputs), encoding="utf-8"
        )

    model = fine_tune(cfg.encoder, train_ds, val_ds, hp, on_epoch=on_epoch)
    if model.spec.vocabulary_size != tokenizer.vocabulary_size:
        raise VocabularyMismatchError(
            f"tokenizer vocabulary {tokenizer.vocabulary_size} != encoder vocabulary {model.spec.vocabulary_size}"
        )
    settings = {
        "mode": cfg.mode.value,
        "context_turns": cfg.context_turns,
        "normalize": cfg.normalize,
        "source": cfg.source.value,
        "tokenizer": tokenizer.descriptor(),
    }
    save_checkpoint(model, out, settings)
    (out / "config.ini").write_text(cfg.to_ini(), encoding="utf-8")
    if len(val):
        write_metrics([score(model, val, settings, tokenizer)], out / "validation_metrics.jsonl")
    return model, out


def _restore(checkpoint: str | Path) -> tuple[TrainedModel, dict, TokenizerHandle]:
    model, settings = load_checkpoint(checkpoint)
    tokenizer = tokenizer_from_descriptor(settings["tokenizer"])
    if tokenizer.vocabulary_size != model.spec.vocabulary_size:
        raise VocabularyMismatchError(
            f"{checkpoint}: tokenizer vocabulary {tokenizer.vocabulary_size} != encoder {model.spec.vocabulary_size}"
        )
    return model, settings, tokenizer


def predict_corpus(
    model: TrainedModel, corpus: Corpus, settings: dict, tokenizer: TokenizerHandle
) -> list[tuple[float, int]]:
    ds = build_dataset(corpus, settings["mode"], tokenizer, model.hyperparams, settings["context_turns"])
    return predict(model, ds)


def score(model: TrainedModel, corpus: Corpus, settings: dict, tokenizer: TokenizerHandle) -> RunResult:
    if not corpus.is_labeled:
        raise ValidationError("evaluation corpus has unlabeled records")
    outputs = predict_corpus(model, corpus, settings, tokenizer)
    cm = confusion([lab for _, lab in outputs], [encode_label(r.label) for r in corpus.records])
    return RunResult(InputMode(settings["mode"]), report_from_confusion(cm), corpus.source, cm)


def load_eval_corpus(path: str | Path, settings: dict, source: Source | str | None = None) -> Corpus:
    return load_corpus(path, source or settings["source"], normalize=settings.get("normalize", False))


def evaluate_checkpoints(
    checkpoints: Sequence[str | Path], corpus_path: str | Path, source: Source | str | None = None
) -> list[RunResult]:
    results = []
    for ckpt in checkpoints:
        model, settings, tokenizer = _restore(ckpt)
        corpus = load_eval_corpus(corpus_path, settings, source)
        results.append(score(model, corpus, settings, tokenizer))
    return results


def predict_to_file(
    checkpoint: str | Path, corpus_path: str | Path, out_path: str | Path, source: Source | str | None = None
) -> int:
    model, settings, tokenizer = _restore(checkpoint)
    corpus = load_eval_corpus(corpus_path, settings, source)
    outputs = predict_corpus(model, corpus, settings, tokenizer)
    write_predictions([r.id for r in corpus.records], [decode_label(lab) for _, lab in outputs], out_path)
    return len(outputs)
