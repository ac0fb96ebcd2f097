"""Exit criteria. Each test prints its own verdict line; the terminal summary lists all seven."""

import csv
import json
import time

import numpy as np
import pytest
import torch

from sarcctx.cli import main
from sarcctx.corpus import Corpus, DialogueRecord, Label, Source, mismatch_ratio, train_val_split, write_corpus
from sarcctx.encoder import (
    HeadParams,
    TinyEncoder,
    fine_tune,
    head_loss_and_grad,
    predict,
    save_checkpoint,
)
from sarcctx.hyperparams import Hyperparams
from sarcctx.input_builder import InputMode, boundary_separator_count, build_dataset, build_input
from sarcctx.metrics import METRIC_FIELDS, confusion, relative_improvement, report_from_confusion
from sarcctx.prng import SplitMix64
from sarcctx.synthetic import separable_corpus
from sarcctx.tokenizers import WORDS, WordTokenizer

TOK = WordTokenizer()


def verdict(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


# 1 -------------------------------------------------------------------------

def brute_force_metrics(preds, gold):
    out = {}
    for c in (0, 1):
        tp = sum(1 for p, g in zip(preds, gold) if p == c and g == c)
        pred_c = sum(1 for p in preds if p == c)
        gold_c = sum(1 for g in gold if g == c)
        out[f"precision_{c}"] = tp / pred_c if pred_c else 0.0
        out[f"recall_{c}"] = tp / gold_c if gold_c else 0.0
        den = pred_c + gold_c
        out[f"f1_{c}"] = 2 * tp / den if den else 0.0
    for m in ("precision", "recall", "f1"):
        out[f"macro_{m}"] = (out[f"{m}_0"] + out[f"{m}_1"]) / 2
    return out


@pytest.mark.acceptance(1, "metrics oracle equivalence, 1000 random vectors, tol 1e-12, < 5 s")
def test_metrics_oracle_equivalence():
    rng = np.random.default_rng(20200701)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 51))
        preds, gold = rng.integers(0, 2, n).tolist(), rng.integers(0, 2, n).tolist()
        got = report_from_confusion(confusion(preds, gold)).to_dict()
        ref = brute_force_metrics(preds, gold)
        worst = max(worst, max(abs(got[k] - ref[k]) for k in METRIC_FIELDS))
    elapsed = time.perf_counter() - start
    verdict(1, worst <= 1e-12 and elapsed < 5, f"max abs diff {worst:.2e}, {elapsed:.2f} s")


# 2 -------------------------------------------------------------------------

@pytest.mark.acceptance(2, "published arithmetic: mismatch ratios and relative improvements")
def test_reference_arithmetic():
    checks = [
        ("mismatch reddit", mismatch_ratio(2.491, 4.254), 1.71, 0.005),
        ("mismatch twitter", mismatch_ratio(3.867, 3.164), 1.22, 0.005),
        ("separator gain reddit", relative_improvement(0.681, 0.716), 5.13, 0.05),
        ("context gain twitter", relative_improvement(0.752, 0.772), 2.6, 0.1),
        ("separator change twitter", relative_improvement(0.772, 0.771), -0.1, 0.05),
    ]
    for name, got, want, tol in checks:
        print(f"  {name}: {got:.4f} (target {want} +/- {tol})")
    ok = all(abs(got - want) <= tol for _, got, want, tol in checks)
    verdict(2, ok, "; ".join(f"{n}={g:.4f}" for n, g, _, _ in checks))


# 3 -------------------------------------------------------------------------

_POOL = sorted(set(WORDS))
TURN_WORDS = [_POOL[i * 8 : i * 8 + 8] for i in range(10)]
RESPONSE_WORDS = _POOL[80:120]
RESPONSE_IDS = {t for w in RESPONSE_WORDS for t in TOK.encode(w)}


def random_records(n, seed):
    rng = SplitMix64(seed)
    out = []
    for i in range(n):
        depth = rng.randbelow(11)
        turns = tuple(" ".join(TURN_WORDS[t][j % 8] for j in range(1 + rng.randbelow(500))) for t in range(depth))
        response = " ".join(RESPONSE_WORDS[rng.randbelow(len(RESPONSE_WORDS))] for _ in range(1 + rng.randbelow(120)))
        out.append(DialogueRecord(f"r{i}", Source.REDDIT, turns, response, Label.SARCASM))
    return out


@pytest.mark.acceptance(3, "input-mode invariants over 500 random records per mode, < 30 s")
def test_input_mode_invariants():
    start = time.perf_counter()
    records = random_records(500, seed=3)
    failures = []
    for mode in InputMode:
        budget = 50 if mode is InputMode.RESPONSE_ONLY else 256
        for r in records:
            enc = build_input(r, mode, TOK, budget)
            content = [t for t in enc.real_ids if t not in TOK.special_ids]
            ctx_ids = {t for t in content if t not in RESPONSE_IDS}
            if len(enc.token_ids) > budget:
                failures.append((mode, r.id, "budget"))
            if mode is InputMode.RESPONSE_ONLY and ctx_ids:
                failures.append((mode, r.id, "context leaked"))
            if mode is InputMode.CONTEXT_RESPONSE_SEPARATED and r.context and boundary_separator_count(enc, TOK) != 1:
                failures.append((mode, r.id, "separator count"))
            if mode is InputMode.CONTEXT_RESPONSE and boundary_separator_count(enc, TOK) != 0:
                failures.append((mode, r.id, "unexpected separator"))
            allowed = {t for i in range(max(0, len(r.context) - 2), len(r.context)) for t in TOK.encode(" ".join(TURN_WORDS[i]))}
            if not ctx_ids <= allowed:
                failures.append((mode, r.id, "older turn leaked"))
            if mode is not InputMode.RESPONSE_ONLY and not r.context:
                if enc.token_ids != build_input(r, InputMode.RESPONSE_ONLY, TOK, budget).token_ids:
                    failures.append((mode, r.id, "empty-context collapse"))
    empties = sum(1 for r in records if not r.context)
    elapsed = time.perf_counter() - start
    verdict(3, not failures and elapsed < 30,
            f"{len(records)} records x 3 modes ({empties} empty contexts), {len(failures)} violations, {elapsed:.2f} s")


# 4 -------------------------------------------------------------------------

@pytest.mark.acceptance(4, "head gradient vs central differences, 20 batches, rel err < 1e-4, < 60 s")
def test_gradient_check():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    torch.manual_seed(4)
    encoder = TinyEncoder().double().eval()
    worst = 0.0
    h = 1e-6
    for _ in range(20):
        n = int(rng.integers(2, 9))
        ids = torch.as_tensor(rng.integers(5, TOK.vocabulary_size, size=(n, 16)))
        ids[:, 0] = TOK.bos_id
        with torch.no_grad():
            pooled = encoder(ids, torch.ones_like(ids))[:, 0].numpy()
        labels = rng.integers(0, 2, size=n)
        head = HeadParams(rng.normal(size=(2, 32)) * 0.3, rng.normal(size=2) * 0.3)
        _, grad = head_loss_and_grad(pooled, labels, head)
        for arr, analytic in ((head.weight, grad.weight), (head.bias, grad.bias)):
            numeric = np.zeros_like(arr)
            for idx in np.ndindex(arr.shape):
                old = arr[idx]
                arr[idx] = old + h
                up = head_loss_and_grad(pooled, labels, head)[0]
                arr[idx] = old - h
                down = head_loss_and_grad(pooled, labels, head)[0]
                arr[idx] = old
                numeric[idx] = (up - down) / (2 * h)
            rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-12)
            worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    verdict(4, worst < 1e-4 and elapsed < 60, f"worst relative error {worst:.2e}, {elapsed:.2f} s")


# 5 -------------------------------------------------------------------------

@pytest.mark.acceptance(5, "overfit 32 separable records in 30 epochs, < 2 min")
def test_overfit_smoke(tmp_path, capsys):
    start = time.perf_counter()
    corpus = separable_corpus(32, seed=1)
    hp = Hyperparams(learning_rate=1e-3, epochs=30, seed=7)
    mode = InputMode.CONTEXT_RESPONSE_SEPARATED
    data = build_dataset(corpus, mode, TOK, hp)
    model = fine_tune("tiny-test", data, [], hp)
    acc = np.mean([lab == gold for (_, lab), (_, gold) in zip(predict(model, data), data)])
    first, last = model.training_history[0].train_loss, model.training_history[-1].train_loss

    ckpt = save_checkpoint(model, tmp_path / "ckpt", {
        "mode": mode.value, "context_turns": 2, "normalize": False, "source": "twitter",
        "tokenizer": TOK.descriptor()})
    write_corpus(corpus, tmp_path / "train.jsonl")
    code = main(["evaluate", str(ckpt), "--corpus", str(tmp_path / "train.jsonl"), "--output-dir", str(tmp_path / "ev")])
    macro_f1 = json.loads((tmp_path / "ev" / "metrics.jsonl").read_text())["macro_f1"]
    table = capsys.readouterr().out
    elapsed = time.perf_counter() - start
    with capsys.disabled():
        print("\n" + table, end="")
    ok = code == 0 and acc == 1.0 and last < first and f"{macro_f1:.3f}" == "1.000" and elapsed < 120
    verdict(5, ok, f"train acc {acc:.3f}, loss {first:.3f} -> {last:.3f}, eval macro F1 {macro_f1:.3f}, {elapsed:.1f} s")


# 6 -------------------------------------------------------------------------

def _run(tmp_path, tag, corpus_file):
    out = tmp_path / tag
    assert main(["train", str(corpus_file), "--encoder", "tiny-test", "--epochs", "3", "--lr", "1e-3", "--seed", "7",
                 "--mode", "context_response", "--output-dir", str(out / "ckpt")]) == 0
    assert main(["evaluate", str(out / "ckpt"), "--corpus", str(corpus_file), "--output-dir", str(out / "ev")]) == 0
    return (out / "ckpt" / "validation_metrics.jsonl").read_bytes(), (out / "ev" / "metrics.jsonl").read_bytes()


@pytest.mark.acceptance(6, "determinism: byte-identical metrics across runs, pinned split partition")
def test_determinism(tmp_path):
    corpus_file = tmp_path / "c.jsonl"
    write_corpus(separable_corpus(48, seed=2), corpus_file)
    first, second = _run(tmp_path, "a", corpus_file), _run(tmp_path, "b", corpus_file)

    # Pinned partition: SplitMix64(7) over 10 indices is [8, 1, 5, 9, 0, 4, 3, 2, 6, 7].
    ten = Corpus(separable_corpus(10).records, Source.TWITTER)
    train, val = train_val_split(ten, 0.9, 7)
    pinned = [r.id for r in train] == [f"twitter-{i + 1}" for i in (8, 1, 5, 9, 0, 4, 3, 2, 6)] and \
        [r.id for r in val] == ["twitter-8"]
    repeat = [r.id for r in train_val_split(ten, 0.9, 7)[0]] == [r.id for r in train]
    verdict(6, first == second and pinned and repeat,
            f"metrics identical={first == second}, split pinned={pinned}, split repeatable={repeat}")


# 7 -------------------------------------------------------------------------

@pytest.mark.acceptance(7, "train + evaluate all three modes on 200 records: three-row results table")
def test_end_to_end_shape(tmp_path, capsys):
    corpus_file = tmp_path / "c.jsonl"
    write_corpus(separable_corpus(200, seed=9, source="reddit"), corpus_file)
    ckpts = []
    for mode in ("context_response_separated", "response_only", "context_response"):
        out = tmp_path / mode
        assert main(["train", str(corpus_file), "--source", "reddit", "--encoder", "tiny-test", "--mode", mode,
                     "--epochs", "2", "--lr", "1e-3", "--seed", "7", "--output-dir", str(out)]) == 0
        ckpts.append(str(out))
    capsys.readouterr()
    assert main(["evaluate", *ckpts, "--corpus", str(corpus_file), "--output-dir", str(tmp_path / "ev")]) == 0
    table = capsys.readouterr().out
    with capsys.disabled():
        print("\n" + table, end="")
    with open(tmp_path / "ev" / "results.csv", newline="") as fh:
        header, *rows = list(csv.reader(fh))
    names = [r[0] for r in rows]
    decimals = all(len(v.split(".")[1]) == 3 for r in rows for v in r[1:])
    records = (tmp_path / "ev" / "metrics.jsonl").read_text().splitlines()
    ok = (
        header == ["Input", "F1-score", "Precision", "Recall"]
        and names == ["Response-only", "Context-Response", "Context-Response (Separated)"]
        and decimals
        and len(records) == 3
        and all(n in table for n in names)
    )
    verdict(7, ok, f"columns {header}, rows {names}, 3-decimal={decimals}")
