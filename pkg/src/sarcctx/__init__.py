"""Context-aware sarcasm classification: corpus tooling, input construction,
encoder fine-tuning and evaluation."""

from sarcctx.corpus import (
    Corpus,
    CorpusStats,
    DialogueRecord,
    Label,
    Source,
    SplitTag,
    compute_stats,
    decode_label,
    encode_label,
    load_corpus,
    mismatch_ratio,
    train_val_split,
    write_corpus,
)
from sarcctx.hyperparams import Hyperparams
from sarcctx.input_builder import EncodedInput, InputMode, build_dataset, build_input, select_context, truncate_to_budget
from sarcctx.metrics import ConfusionMatrix, MetricsReport, RunResult, confusion, relative_improvement, report_from_confusion, results_table

__version__ = "0.1.0"
