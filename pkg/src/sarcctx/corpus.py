"""Conversation-thread corpora: records, JSONL ingestion, statistics, splits.

A corpus file holds one JSON object per line::

    {"label": "SARCASM", "response": "...", "context": ["oldest", ..., "newest"]}

``label`` may be missing (prediction corpora) and ``id`` is optional; when it
is absent the id is synthesised as ``"<source>-<line number>"``.
"""

from __future__ import annotations

import enum
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from sarcctx.errors import DomainError, ParseError, ValidationError
from sarcctx.prng import SplitMix64


class Source(str, enum.Enum):
    TWITTER = "twitter"
    REDDIT = "reddit"


class SplitTag(str, enum.Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"
    UNSPLIT = "unsplit"


class Label(str, enum.Enum):
    SARCASM = "SARCASM"
    NOT_SARCASM = "NOT_SARCASM"


_LABEL_TO_INT = {Label.NOT_SARCASM: 0, Label.SARCASM: 1}
_INT_TO_LABEL = {v: k for k, v in _LABEL_TO_INT.items()}


def encode_label(label: Label | str) -> int:
    """Map a label to its class index; the sarcastic class is the positive class 1."""
    try:
        return _LABEL_TO_INT[Label(label)]
    except ValueError:
        raise DomainError(f"unknown label {label!r}") from None


def decode_label(value: int) -> Label:
    if isinstance(value, bool) or value not in _INT_TO_LABEL:
        raise DomainError(f"class index must be 0 or 1, got {value!r}")
    return _INT_TO_LABEL[value]


@dataclass(frozen=True)
class DialogueRecord:
    id: str
    source: Source
    context: tuple[str, ...]
    response: str
    label: Label | None = None

    def __post_init__(self):
        object.__setattr__(self, "source", Source(self.source))
        object.__setattr__(self, "context", tuple(self.context))
        if self.label is not None:
            object.__setattr__(self, "label", Label(self.label))
        if not self.response.strip():
            raise ValidationError(f"record {self.id!r}: empty response")
        for i, turn in enumerate(self.context):
            if not isinstance(turn, str) or not turn.strip():
                raise ValidationError(f"record {self.id!r}: context turn {i} is empty")


@dataclass(frozen=True)
class Corpus:
    records: tuple[DialogueRecord, ...]
    source: Source
    split_tag: SplitTag = SplitTag.UNSPLIT

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "source", Source(self.source))
        object.__setattr__(self, "split_tag", SplitTag(self.split_tag))
        seen: set[str] = set()
        for rec in self.records:
            if rec.id in seen:
                raise ValidationError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)
            if rec.source is not self.source:
                raise ValidationError(
                    f"record {rec.id!r} has source {rec.source.value}, corpus is {self.source.value}"
                )

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def is_labeled(self) -> bool:
        return all(r.label is not None for r in self.records)


@dataclass(frozen=True)
class CorpusStats:
    record_count: int
    avg_contexts_per_record: float
    label_counts: Mapping[Label, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "avg_contexts_per_record": self.avg_contexts_per_record,
            "label_counts": {k.value: v for k, v in sorted(self.label_counts.items())},
        }


_URL_RE = re.compile(r"https?://\S+|www\.\S+")
_WS_RE = re.compile(r"\s+")


def normalize_tweet(text: str) -> str:
    """Minimal tweet cleanup: URLs become ``<URL>`` and whitespace runs collapse."""
    return _WS_RE.sub(" ", _URL_RE.sub("<URL>", text)).strip()


def _parse_line(obj, line_number: int, source: Source, normalize: bool) -> DialogueRecord:
    if not isinstance(obj, dict):
        raise ParseError("record must be a JSON object", line_number)
    for key in ("response", "context"):
        if key not in obj:
            raise ParseError(f"missing field {key!r}", line_number)
    response, context = obj["response"], obj["context"]
    if not isinstance(response, str):
        raise ParseError("field 'response' must be a string", line_number)
    if not isinstance(context, list) or not all(isinstance(t, str) for t in context):
        raise ParseError("field 'context' must be an array of strings", line_number)
    rec_id = obj.get("id")
    if rec_id is None:
        rec_id = f"{source.value}-{line_number}"
    elif not isinstance(rec_id, str):
        raise ParseError("field 'id' must be a string", line_number)
    label = obj.get("label")
    if label is not None:
        try:
            label = Label(label)
        except ValueError:
            raise ValidationError(f"line {line_number}: record {rec_id!r}: unknown label {label!r}") from None
    if normalize:
        response = normalize_tweet(response)
        context = [normalize_tweet(t) for t in context]
    try:
        return DialogueRecord(rec_id, source, tuple(context), response, label)
    except ValidationError as exc:
        raise ValidationError(f"line {line_number}: {exc}") from None


def load_corpus(
    path: str | Path,
    source: Source | str,
    split_tag: SplitTag | str = SplitTag.UNSPLIT,
    normalize: bool = False,
) -> Corpus:
    """Read a line-delimited record file; blank lines are skipped but still counted."""
    source = Source(source)
    records = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", line_number) from None
            rec = _parse_line(obj, line_number, source, normalize)
            if rec.id in seen:
                raise ValidationError(
                    f"line {line_number}: duplicate record id {rec.id!r} (first on line {seen[rec.id]})"
                )
            seen[rec.id] = line_number
            records.append(rec)
    return Corpus(tuple(records), source, split_tag)


def record_to_json(rec: DialogueRecord) -> dict:
    obj: dict = {"id": rec.id}
    if rec.label is not None:
        obj["label"] = rec.label.value
    obj["response"] = rec.response
    obj["context"] = list(rec.context)
    return obj


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in corpus.records:
            fh.write(json.dumps(record_to_json(rec), ensure_ascii=False) + "\n")


def compute_stats(corpus: Corpus | Iterable[DialogueRecord]) -> CorpusStats:
    records = corpus.records if isinstance(corpus, Corpus) else tuple(corpus)
    n = len(records)
    if n == 0:
        return CorpusStats(0, 0.0, {})
    total = math.fsum(len(r.context) for r in records)
    labels = Counter(r.label for r in records if r.label is not None)
    return CorpusStats(n, total / n, dict(labels))


def mismatch_ratio(stats_a: CorpusStats | float, stats_b: CorpusStats | float) -> float:
    """Larger-to-smaller ratio of average context depth between two corpora."""
    a = stats_a.avg_contexts_per_record if isinstance(stats_a, CorpusStats) else float(stats_a)
    b = stats_b.avg_contexts_per_record if isinstance(stats_b, CorpusStats) else float(stats_b)
    if not (a > 0 and b > 0):
        raise DomainError(f"average context counts must be positive, got {a} and {b}")
    return max(a, b) / min(a, b)


def train_val_split(corpus: Corpus, ratio: float, seed: int) -> tuple[Corpus, Corpus]:
    """Shuffle with SplitMix64(seed) and cut at ``floor(ratio * n)``.

    Both halves keep the shuffled order, so the partition (and order) depends
    only on (corpus, ratio, seed).
    """
    if not 0.0 < ratio < 1.0:
        raise DomainError(f"split ratio must lie in (0, 1), got {ratio}")
    if len(corpus) == 0:
        raise ValidationError("cannot split an empty corpus")
    unlabeled = [r.id for r in corpus.records if r.label is None]
    if unlabeled:
        raise ValidationError(f"unlabeled records cannot be split for training: {unlabeled[:5]}")
    order = list(range(len(corpus)))
    SplitMix64(seed).shuffle(order)
    cut = math.floor(ratio * len(corpus))
    train = tuple(corpus.records[i] for i in order[:cut])
    val = tuple(corpus.records[i] for i in order[cut:])
    return Corpus(train, corpus.source, SplitTag.TRAIN), Corpus(val, corpus.source, SplitTag.VALIDATION)


def stats_rows(entries: Mapping[tuple[str, str], CorpusStats]) -> list[dict]:
    """Machine-readable form: one dict per (split, source) cell."""
    rows = []
    for (split, source), st in entries.items():
        rows.append({"split": str(split), "source": str(source), **st.to_dict()})
    return rows


def format_stats_table(entries: Mapping[tuple[str, str], CorpusStats], digits: int = 3) -> str:
    """Average contexts per record laid out with splits as rows and corpora as columns."""
    splits = list(dict.fromkeys(str(s) for s, _ in entries))
    sources = list(dict.fromkeys(str(c) for _, c in entries))
    lookup = {(str(s), str(c)): st for (s, c), st in entries.items()}
    header = ["Split/Dataset"] + [s.capitalize() for s in sources]
    body = []
    for split in splits:
        row = [split.capitalize()]
        for src in sources:
            st = lookup.get((split, src))
            row.append("-" if st is None else f"{st.avg_contexts_per_record:.{digits}f}")
        body.append(row)
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]

    def fmt(row):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        return "| " + " | ".join(cells) + " |"

    rule = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    return "\n".join([rule, fmt(header), rule, *map(fmt, body), rule])
