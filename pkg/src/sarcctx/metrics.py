"""Binary classification metrics, relative improvements and results tables.

Class 1 (SARCASM) is the positive class. Every ratio with a zero
denominator is defined as 0.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Sequence

from sarcctx.corpus import Corpus, Label, Source, encode_label
from sarcctx.errors import DomainError, ParseError, ValidationError
from sarcctx.input_builder import InputMode

METRIC_FIELDS = (
    "precision_1",
    "recall_1",
    "f1_1",
    "precision_0",
    "recall_0",
    "f1_0",
    "macro_precision",
    "macro_recall",
    "macro_f1",
)
TABLE_COLUMNS = ("Input", "F1-score", "Precision", "Recall")
MODE_ORDER = (InputMode.RESPONSE_ONLY, InputMode.CONTEXT_RESPONSE, InputMode.CONTEXT_RESPONSE_SEPARATED)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    precision_1: float
    recall_1: float
    f1_1: float
    precision_0: float
    recall_0: float
    f1_0: float
    macro_precision: float
    macro_recall: float
    macro_f1: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RunResult:
    mode: InputMode
    report: MetricsReport
    source: Source
    counts: ConfusionMatrix | None = None


def confusion(predictions: Sequence[int], gold: Sequence[int]) -> ConfusionMatrix:
    predictions, gold = list(predictions), list(gold)
    if len(predictions) != len(gold):
        raise ValidationError(f"{len(predictions)} predictions for {len(gold)} gold labels")
    if not predictions:
        raise ValidationError("nothing to score")
    tp = fp = fn = tn = 0
    for i, (p, g) in enumerate(zip(predictions, gold)):
        if p not in (0, 1) or g not in (0, 1):
            raise ValidationError(f"position {i}: labels must be 0 or 1, got ({p!r}, {g!r})")
        if p == 1:
            if g == 1:
                tp += 1
            else:
                fp += 1
        elif g == 1:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def report_from_confusion(cm: ConfusionMatrix) -> MetricsReport:
    if cm.total < 1:
        raise ValidationError("empty confusion matrix")
    p1, r1 = _ratio(cm.tp, cm.tp + cm.fp), _ratio(cm.tp, cm.tp + cm.fn)
    p0, r0 = _ratio(cm.tn, cm.tn + cm.fn), _ratio(cm.tn, cm.tn + cm.fp)
    f1_1, f1_0 = _f1(p1, r1), _f1(p0, r0)
    return MetricsReport(
        p1, r1, f1_1, p0, r0, f1_0,
        (p1 + p0) / 2, (r1 + r0) / 2, (f1_1 + f1_0) / 2,
    )


def relative_improvement(baseline: float, improved: float) -> float:
    """Percentage change from ``baseline`` to ``improved`` (negative for a drop)."""
    if not baseline > 0:
        raise DomainError(f"baseline must be positive, got {baseline}")
    return 100.0 * (improved - baseline) / baseline


def round_half_up(x: float, digits: int = 3) -> str:
    """Fixed-point string rounded half away from zero on the shortest decimal repr of ``x``."""
    q = Decimal(1).scaleb(-digits)
    return str(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class ResultsTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    title: str = ""

    def render(self) -> str:
        widths = [max(len(r[i]) for r in (self.columns, *self.rows)) for i in range(len(self.columns))]

        def fmt(row):
            cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
            return "| " + " | ".join(cells) + " |"

        rule = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
        lines = [self.title] if self.title else []
        lines += [rule, fmt(self.columns), rule, *map(fmt, self.rows), rule]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        import io

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        return buf.getvalue()


def results_table(results: Iterable[RunResult], averaging: str = "macro", title: str = "") -> ResultsTable:
    """Rows in the fixed mode order, values at 3 decimals.

    ``averaging="macro"`` shows macro P/R/F1, ``"class1"`` the sarcastic-class values.
    """
    if averaging not in ("macro", "class1"):
        raise ValueError(f"averaging must be 'macro' or 'class1', got {averaging!r}")
    rank = {m: i for i, m in enumerate(MODE_ORDER)}
    rows = []
    for res in sorted(results, key=lambda r: (r.source.value, rank[r.mode])):
        rep = res.report
        if averaging == "macro":
            vals = (rep.macro_f1, rep.macro_precision, rep.macro_recall)
        else:
            vals = (rep.f1_1, rep.precision_1, rep.recall_1)
        rows.append((res.mode.display_name, *(round_half_up(v) for v in vals)))
    return ResultsTable(TABLE_COLUMNS, tuple(rows), title)


def metrics_record(res: RunResult) -> dict:
    rec = {"source": res.source.value, "mode": res.mode.value, **res.report.to_dict()}
    if res.counts is not None:
        rec.update(asdict(res.counts))
    return rec


def write_metrics(results: Iterable[RunResult], path: str | Path) -> None:
    """Line-delimited metrics: one JSON object per (source, mode) with nine metrics and counts."""
    with open(path, "w", encoding="utf-8") as fh:
        for res in results:
            fh.write(json.dumps(metrics_record(res), sort_keys=True) + "\n")


def read_metrics(path: str | Path) -> list[RunResult]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        counts = ConfusionMatrix(d["tp"], d["fp"], d["fn"], d["tn"]) if "tp" in d else None
        out.append(
            RunResult(InputMode(d["mode"]), MetricsReport(**{k: d[k] for k in METRIC_FIELDS}), Source(d["source"]), counts)
        )
    return out


# --- prediction files ------------------------------------------------------
# One "id,LABEL" row per record, no header, in corpus order.


def write_predictions(ids: Sequence[str], labels: Sequence[Label], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for rec_id, label in zip(ids, labels, strict=True):
            writer.writerow([rec_id, Label(label).value])


def read_predictions(path: str | Path) -> list[tuple[str, Label]]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for n, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"expected 'id,LABEL', got {row!r}", n)
            try:
                out.append((row[0], Label(row[1])))
            except ValueError:
                raise ParseError(f"unknown label {row[1]!r}", n) from None
    return out


def score_predictions(predictions: Sequence[tuple[str, Label]], gold: Corpus) -> ConfusionMatrix:
    """Join predictions to gold records by id and count outcomes."""
    by_id = {rec_id: label for rec_id, label in predictions}
    if len(by_id) != len(predictions):
        raise ValidationError("duplicate ids in prediction file")
    missing = [r.id for r in gold.records if r.id not in by_id]
    if missing:
        raise ValidationError(f"{len(missing)} gold records without predictions, e.g. {missing[:3]}")
    extra = set(by_id) - {r.id for r in gold.records}
    if extra:
        raise ValidationError(f"{len(extra)} predictions for unknown ids, e.g. {sorted(extra)[:3]}")
    if not gold.is_labeled:
        raise ValidationError("gold corpus has unlabeled records")
    preds = [encode_label(by_id[r.id]) for r in gold.records]
    return confusion(preds, [encode_label(r.label) for r in gold.records])
