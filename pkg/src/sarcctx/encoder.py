"""Pretrained-encoder classifier: weight providers, two-class head, training and prediction.

The backbone maps ``(token_ids, attention_mask)`` to hidden states; the
first-position state feeds a dropout + affine head producing two logits.
Backbones come from a ``WeightProvider``: the default one builds the
``tiny-test`` encoder locally and defers everything else to Hugging Face.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

import numpy as np
import torch
from torch import nn
import torch.nn.functional as F

from sarcctx.errors import (
    BudgetExceededError,
    EmptyTrainingSetError,
    UnlabeledRecordError,
    ValidationError,
    VocabularyMismatchError,
)
from sarcctx.hyperparams import Hyperparams
from sarcctx.input_builder import EncodedInput
from sarcctx.prng import SplitMix64

logger = logging.getLogger(__name__)

TINY_TEST_ID = "tiny-test"
CHECKPOINT_FORMAT = "sarcctx-checkpoint"
CHECKPOINT_VERSION = 1

EncodedDataset = Sequence[tuple[EncodedInput, "int | None"]]


@dataclass(frozen=True)
class EncoderSpec:
    encoder_id: str
    parameter_count: int
    vocabulary_size: int
    hidden_width: int

    def to_dict(self) -> dict:
        return asdict(self)


# Published identity of the production encoder; a loaded model reports its own count.
ROBERTA_LARGE = EncoderSpec("roberta-large", 355_000_000, 50_265, 1024)


@dataclass(frozen=True)
class TinyConfig:
    vocabulary_size: int = 1000
    hidden_width: int = 32
    layers: int = 2
    heads: int = 2
    ff_width: int = 64
    max_positions: int = 512
    # Encoder-internal dropout off: at this size it stalls the overfit smoke test.
    dropout: float = 0.0
    pad_id: int = 1


class TinyEncoder(nn.Module):
    """Two-layer bidirectional transformer standing in for the production encoder in tests."""

    def __init__(self, cfg: TinyConfig = TinyConfig()):
        super().__init__()
        self.cfg = cfg
        self.tokens = nn.Embedding(cfg.vocabulary_size, cfg.hidden_width, padding_idx=cfg.pad_id)
        self.positions = nn.Embedding(cfg.max_positions, cfg.hidden_width)
        self.norm = nn.LayerNorm(cfg.hidden_width)
        self.drop = nn.Dropout(cfg.dropout)
        layer = nn.TransformerEncoderLayer(
            cfg.hidden_width,
            cfg.heads,
            cfg.ff_width,
            dropout=cfg.dropout,
            activation="gelu",
            batch_first=True,
        )
        self.layers = nn.TransformerEncoder(layer, cfg.layers, enable_nested_tensor=False)

    def forward(self, token_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        pos = torch.arange(token_ids.shape[1], device=token_ids.device)
        x = self.drop(self.norm(self.tokens(token_ids) + self.positions(pos)[None]))
        return self.layers(x, src_key_padding_mask=attention_mask == 0)


class HFBackbone(nn.Module):
    def __init__(self, model: nn.Module):
        super().__init__()
        self.model = model

    def forward(self, token_ids, attention_mask):
        return self.model(input_ids=token_ids, attention_mask=attention_mask).last_hidden_state


class WeightProvider(Protocol):
    def load(self, encoder_id: str, pretrained: bool = True) -> tuple[nn.Module, EncoderSpec]:
        """Return a backbone and its spec; ``pretrained=False`` gives architecture only."""
        ...


class DefaultWeightProvider:
    """``tiny-test`` is built locally; any other id is fetched through ``transformers``."""

    def load(self, encoder_id: str, pretrained: bool = True) -> tuple[nn.Module, EncoderSpec]:
        if encoder_id == TINY_TEST_ID:
            backbone = TinyEncoder()
            cfg = backbone.cfg
            return backbone, EncoderSpec(
                TINY_TEST_ID, _count(backbone) + 2 * cfg.hidden_width + 2, cfg.vocabulary_size, cfg.hidden_width
            )
        from transformers import AutoConfig, AutoModel

        if pretrained:
            model = AutoModel.from_pretrained(encoder_id, add_pooling_layer=False)
        else:
            model = AutoModel.from_config(AutoConfig.from_pretrained(encoder_id), add_pooling_layer=False)
        hidden = model.config.hidden_size
        spec = EncoderSpec(encoder_id, _count(model) + 2 * hidden + 2, model.config.vocab_size, hidden)
        return HFBackbone(model), spec


def _count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


# --- classification head -------------------------------------------------


@dataclass
class HeadParams:
    weight: np.ndarray  # (2, hidden_width)
    bias: np.ndarray  # (2,)

    @classmethod
    def zeros(cls, hidden_width: int) -> "HeadParams":
        return cls(np.zeros((2, hidden_width)), np.zeros(2))


def classification_head_forward(pooled, head: HeadParams) -> np.ndarray:
    """Logits for one pooled vector (or a batch of them), dropout disabled."""
    pooled = np.asarray(pooled, dtype=np.float64)
    if pooled.shape[-1] != head.weight.shape[1]:
        raise ValidationError(f"pooled width {pooled.shape[-1]} != head width {head.weight.shape[1]}")
    logits = pooled @ head.weight.T + head.bias
    if not np.all(np.isfinite(logits)):
        raise ValidationError("non-finite logits")
    return logits


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def head_loss_and_grad(pooled: np.ndarray, labels: np.ndarray, head: HeadParams) -> tuple[float, HeadParams]:
    """Mean cross-entropy over the batch and its exact gradient w.r.t. the head.

    With ``P = softmax(XW^T + b)`` and one-hot ``Y``:
    ``dL/dW = (P - Y)^T X / n`` and ``dL/db = sum(P - Y) / n``.
    """
    pooled = np.asarray(pooled, dtype=np.float64)
    labels = np.asarray(labels)
    n = len(labels)
    logits = classification_head_forward(pooled, head)
    z = logits - logits.max(axis=1, keepdims=True)
    log_p = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = -log_p[np.arange(n), labels].mean()
    delta = np.exp(log_p)
    delta[np.arange(n), labels] -= 1.0
    delta /= n
    return float(loss), HeadParams(delta.T @ pooled, delta.sum(axis=0))


class ClassificationHead(nn.Module):
    def __init__(self, hidden_width: int, dropout: float = 0.1):
        super().__init__()
        self.dropout = nn.Dropout(dropout)
        self.out = nn.Linear(hidden_width, 2)

    def forward(self, pooled):
        return self.out(self.dropout(pooled))

    def params(self) -> HeadParams:
        return HeadParams(
            self.out.weight.detach().double().cpu().numpy().copy(),
            self.out.bias.detach().double().cpu().numpy().copy(),
        )

    def load_params(self, head: HeadParams) -> None:
        with torch.no_grad():
            self.out.weight.copy_(torch.as_tensor(head.weight))
            self.out.bias.copy_(torch.as_tensor(head.bias))


class SequenceClassifier(nn.Module):
    def __init__(self, backbone: nn.Module, hidden_width: int, dropout: float = 0.1):
        super().__init__()
        self.backbone = backbone
        self.head = ClassificationHead(hidden_width, dropout)

    def pooled(self, token_ids, attention_mask):
        return self.backbone(token_ids, attention_mask)[:, 0]

    def forward(self, token_ids, attention_mask):
        return self.head(self.pooled(token_ids, attention_mask))


# --- training ------------------------------------------------------------


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float | None
    val_f1: float | None


@dataclass
class TrainedModel:
    spec: EncoderSpec
    network: SequenceClassifier
    hyperparams: Hyperparams
    training_history: list[EpochRecord] = field(default_factory=list)

    @property
    def head(self) -> HeadParams:
        return self.network.head.params()


def _check_dataset(data: EncodedDataset, spec: EncoderSpec, *, require_labels: bool, name: str) -> None:
    for i, (enc, label) in enumerate(data):
        if require_labels and label is None:
            raise UnlabeledRecordError(f"{name} entry {i} has no label")
        if len(enc.token_ids) > enc.budget:
            raise BudgetExceededError(f"{name} entry {i}: {len(enc.token_ids)} tokens exceed budget {enc.budget}")
        if enc.token_ids and max(enc.token_ids) >= spec.vocabulary_size:
            raise VocabularyMismatchError(
                f"{name} entry {i}: token id {max(enc.token_ids)} outside vocabulary of {spec.encoder_id} "
                f"({spec.vocabulary_size})"
            )


def _batches(data: EncodedDataset, order: Sequence[int], batch_size: int):
    for start in range(0, len(order), batch_size):
        idx = order[start : start + batch_size]
        width = max(data[i][0].real_length for i in idx)
        ids = torch.tensor([data[i][0].token_ids[:width] for i in idx], dtype=torch.long)
        mask = torch.tensor([data[i][0].attention_mask[:width] for i in idx], dtype=torch.long)
        labels = [data[i][1] for i in idx]
        yield ids, mask, labels


def _evaluate(network: SequenceClassifier, data: EncodedDataset, batch_size: int) -> tuple[np.ndarray, float | None]:
    """Class probabilities (float64) and the mean cross-entropy when labels are present."""
    network.eval()
    logits = []
    with torch.no_grad():
        for ids, mask, _ in _batches(data, range(len(data)), batch_size):
            logits.append(network(ids, mask).double().numpy())
    if not logits:
        return np.zeros((0, 2)), None
    logits = np.concatenate(logits)
    probs = softmax(logits)
    labels = [lab for _, lab in data]
    loss = None
    if all(lab is not None for lab in labels):
        loss = float(-np.log(np.clip(probs[np.arange(len(labels)), labels], 1e-300, None)).mean())
    return probs, loss


def fine_tune(
    spec: EncoderSpec | str,
    train: EncodedDataset,
    val: EncodedDataset,
    hp: Hyperparams,
    provider: WeightProvider | None = None,
    on_epoch: Callable[[EpochRecord], None] | None = None,
) -> TrainedModel:
    """Fine-tune backbone and head for exactly ``hp.epochs`` epochs with AdamW at a constant rate.

    Initialisation, dropout and batch order are all seeded from ``hp.seed``;
    batch order uses SplitMix64 so it does not depend on torch's RNG.
    """
    from sarcctx.metrics import confusion, report_from_confusion

    provider = provider or DefaultWeightProvider()
    encoder_id = spec if isinstance(spec, str) else spec.encoder_id
    if len(train) == 0:
        raise EmptyTrainingSetError("training set is empty")

    torch.manual_seed(hp.seed)
    backbone, loaded_spec = provider.load(encoder_id)
    if not isinstance(spec, str) and spec.vocabulary_size != loaded_spec.vocabulary_size:
        raise VocabularyMismatchError(
            f"spec vocabulary {spec.vocabulary_size} != loaded {loaded_spec.vocabulary_size}"
        )
    spec = loaded_spec
    _check_dataset(train, spec, require_labels=True, name="train")
    _check_dataset(val, spec, require_labels=True, name="validation")

    network = SequenceClassifier(backbone, spec.hidden_width)
    optimizer = torch.optim.AdamW(network.parameters(), lr=hp.learning_rate, weight_decay=0.01)
    rng = SplitMix64(hp.seed)
    history: list[EpochRecord] = []
    for epoch in range(1, hp.epochs + 1):
        network.train()
        order = list(range(len(train)))
        rng.shuffle(order)
        total, seen = 0.0, 0
        for ids, mask, labels in _batches(train, order, hp.batch_size):
            optimizer.zero_grad()
            loss = F.cross_entropy(network(ids, mask), torch.tensor(labels))
            loss.backward()
            optimizer.step()
            total += loss.item() * len(labels)
            seen += len(labels)
        val_loss = val_f1 = None
        if len(val):
            probs, val_loss = _evaluate(network, val, hp.batch_size)
            preds = [int(p >= 0.5) for p in probs[:, 1]]
            val_f1 = report_from_confusion(confusion(preds, [lab for _, lab in val])).macro_f1
        rec = EpochRecord(epoch, total / seen, val_loss, val_f1)
        history.append(rec)
        logger.info("epoch %d train_loss=%.4f val_loss=%s val_f1=%s", epoch, rec.train_loss, val_loss, val_f1)
        if on_epoch:
            on_epoch(rec)
    network.eval()
    return TrainedModel(spec, network, hp, history)


def predict(
    model: TrainedModel,
    inputs: EncodedDataset | Sequence[EncodedInput],
    batch_size: int | None = None,
) -> list[tuple[float, int]]:
    """``(P(class 1), predicted class)`` per input; class 1 iff the probability is at least 0.5."""
    data = [x if isinstance(x, tuple) else (x, None) for x in inputs]
    if not data:
        return []
    _check_dataset(data, model.spec, require_labels=False, name="input")
    probs, _ = _evaluate(model.network, data, batch_size or model.hyperparams.batch_size)
    return [(float(p), int(p >= 0.5)) for p in probs[:, 1]]


# --- checkpoints -----------------------------------------------------------
#
# <dir>/checkpoint.json  format tag, version, spec, hyperparams, input settings
# <dir>/head.json        {"weight": [[...], [...]], "bias": [b0, b1]}
# <dir>/history.jsonl    one EpochRecord per line
# <dir>/backbone.pt      torch state_dict of the fine-tuned backbone


def save_checkpoint(model: TrainedModel, directory: str | Path, input_settings: dict) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "spec": model.spec.to_dict(),
        "hyperparams": model.hyperparams.to_dict(),
        "input": input_settings,
    }
    (d / "checkpoint.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    head = model.head
    (d / "head.json").write_text(json.dumps({"weight": head.weight.tolist(), "bias": head.bias.tolist()}) + "\n")
    with open(d / "history.jsonl", "w") as fh:
        for rec in model.training_history:
            fh.write(json.dumps(asdict(rec), sort_keys=True) + "\n")
    torch.save(model.network.backbone.state_dict(), d / "backbone.pt")
    return d


def load_checkpoint(directory: str | Path, provider: WeightProvider | None = None) -> tuple[TrainedModel, dict]:
    """Rebuild a TrainedModel; returns it with the stored input settings."""
    d = Path(directory)
    try:
        meta = json.loads((d / "checkpoint.json").read_text())
    except FileNotFoundError:
        raise ValidationError(f"{d} is not a checkpoint (missing checkpoint.json)") from None
    if meta.get("format") != CHECKPOINT_FORMAT:
        raise ValidationError(f"{d}: unrecognised checkpoint format {meta.get('format')!r}")
    if meta.get("version") != CHECKPOINT_VERSION:
        raise ValidationError(f"{d}: unsupported checkpoint version {meta.get('version')!r}")
    for name in ("head.json", "history.jsonl", "backbone.pt"):
        if not (d / name).exists():
            raise ValidationError(f"{d}: incomplete checkpoint, missing {name}")
    spec = EncoderSpec(**meta["spec"])
    hp = Hyperparams.from_dict(meta["hyperparams"])
    provider = provider or DefaultWeightProvider()
    backbone, _ = provider.load(spec.encoder_id, pretrained=False)
    backbone.load_state_dict(torch.load(d / "backbone.pt", weights_only=True))
    network = SequenceClassifier(backbone, spec.hidden_width)
    head = json.loads((d / "head.json").read_text())
    network.head.load_params(HeadParams(np.array(head["weight"]), np.array(head["bias"])))
    network.eval()
    history = [
        EpochRecord(**json.loads(line)) for line in (d / "history.jsonl").read_text().splitlines() if line.strip()
    ]
    if len(history) != hp.epochs:
        logger.warning("checkpoint history has %d epochs, hyperparams say %d", len(history), hp.epochs)
    return TrainedModel(spec, network, hp, history), meta["input"]
