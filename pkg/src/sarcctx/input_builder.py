"""Turn dialogue records into fixed-budget encoder inputs for the three input modes.

Layouts (``|`` marks token-block boundaries, padding follows ``</s>``)::

    response_only               <s> | response | </s>
    context_response            <s> | ctx_1 ctx_2 | response | </s>
    context_response_separated  <s> | ctx_1 ctx_2 | <sep> | response | </s>

Selected context turns are joined with a single space before tokenization.
When the selected context is empty both context modes collapse to the
response-only layout, separator included.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from sarcctx.corpus import Corpus, DialogueRecord, encode_label
from sarcctx.errors import ConstructionError, SarcctxError
from sarcctx.hyperparams import Hyperparams
from sarcctx.tokenizers import TokenizerHandle

MIN_BUDGET = 8
DEFAULT_CONTEXT_TURNS = 2


class InputMode(str, enum.Enum):
    RESPONSE_ONLY = "response_only"
    CONTEXT_RESPONSE = "context_response"
    CONTEXT_RESPONSE_SEPARATED = "context_response_separated"

    @property
    def display_name(self) -> str:
        return _DISPLAY[self]


_DISPLAY = {
    InputMode.RESPONSE_ONLY: "Response-only",
    InputMode.CONTEXT_RESPONSE: "Context-Response",
    InputMode.CONTEXT_RESPONSE_SEPARATED: "Context-Response (Separated)",
}


@dataclass(frozen=True)
class EncodedInput:
    token_ids: tuple[int, ...]
    attention_mask: tuple[int, ...]
    mode: InputMode
    budget: int

    def __post_init__(self):
        if len(self.token_ids) != len(self.attention_mask):
            raise ValueError("token_ids and attention_mask differ in length")
        if len(self.token_ids) > self.budget:
            raise ValueError(f"{len(self.token_ids)} tokens exceed budget {self.budget}")

    @property
    def real_length(self) -> int:
        return sum(self.attention_mask)

    @property
    def real_ids(self) -> tuple[int, ...]:
        return self.token_ids[: self.real_length]


def select_context(record: DialogueRecord, k: int = DEFAULT_CONTEXT_TURNS) -> list[str]:
    """The last ``k`` context turns, oldest first."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return list(record.context[-k:])


def truncate_to_budget(
    context_tokens: Sequence[int],
    response_tokens: Sequence[int],
    overhead: int,
    budget: int,
) -> tuple[list[int], list[int]]:
    """Fit ``context + response + overhead`` into ``budget``.

    Oldest context tokens go first; the response is tail-trimmed only once the
    context is gone.
    """
    if budget <= overhead:
        raise ValueError(f"budget {budget} leaves no room beyond {overhead} framing tokens")
    room = budget - overhead
    ctx, resp = list(context_tokens), list(response_tokens)
    if len(resp) >= room:
        return [], resp[:room]
    keep = room - len(resp)
    if len(ctx) > keep:
        ctx = ctx[len(ctx) - keep :]
    return ctx, resp


def build_input(
    record: DialogueRecord,
    mode: InputMode | str,
    tokenizer: TokenizerHandle,
    budget: int,
    context_turns: int = DEFAULT_CONTEXT_TURNS,
) -> EncodedInput:
    mode = InputMode(mode)
    turns = [] if mode is InputMode.RESPONSE_ONLY else select_context(record, context_turns)
    separated = mode is InputMode.CONTEXT_RESPONSE_SEPARATED and bool(turns)
    overhead = 3 if separated else 2
    if budget < MIN_BUDGET or budget < overhead + 1:
        raise ConstructionError(f"budget {budget} too small (minimum {max(MIN_BUDGET, overhead + 1)})")

    ctx_tokens = tokenizer.encode(" ".join(turns)) if turns else []
    resp_tokens = tokenizer.encode(record.response)
    if not resp_tokens:
        raise ConstructionError(f"record {record.id!r}: response produced no tokens")
    ctx_tokens, resp_tokens = truncate_to_budget(ctx_tokens, resp_tokens, overhead, budget)

    ids = [tokenizer.bos_id, *ctx_tokens]
    if separated:
        ids.append(tokenizer.sep_id)
    ids += [*resp_tokens, tokenizer.eos_id]
    n_pad = budget - len(ids)
    return EncodedInput(
        token_ids=tuple(ids + [tokenizer.pad_id] * n_pad),
        attention_mask=tuple([1] * len(ids) + [0] * n_pad),
        mode=mode,
        budget=budget,
    )


def budget_for(mode: InputMode | str, hp: Hyperparams) -> int:
    if InputMode(mode) is InputMode.RESPONSE_ONLY:
        return hp.max_seq_len_response
    return hp.max_seq_len_context


def build_dataset(
    corpus: Corpus,
    mode: InputMode | str,
    tokenizer: TokenizerHandle,
    hyperparams: Hyperparams,
    context_turns: int = DEFAULT_CONTEXT_TURNS,
) -> list[tuple[EncodedInput, int | None]]:
    budget = budget_for(mode, hyperparams)
    out = []
    for rec in corpus.records:
        try:
            enc = build_input(rec, mode, tokenizer, budget, context_turns)
        except SarcctxError as exc:
            raise type(exc)(f"record {rec.id!r}: {exc}") from exc
        out.append((enc, None if rec.label is None else encode_label(rec.label)))
    return out


def boundary_separator_count(enc: EncodedInput, tokenizer: TokenizerHandle) -> int:
    """Separator tokens strictly between the opening ``<s>`` and closing ``</s>``."""
    interior = enc.real_ids[1:-1]
    return sum(1 for t in interior if t == tokenizer.sep_id)


def dump_inputs(
    records: Sequence[DialogueRecord],
    entries: Sequence[tuple[EncodedInput, int | None]],
    tokenizer: TokenizerHandle,
    n: int,
) -> str:
    """Decoded view of the first ``n`` inputs, one tab-separated line each."""
    lines = []
    for rec, (enc, label) in list(zip(records, entries))[:n]:
        lines.append(
            f"{rec.id}\t{enc.mode.value}\tlen={enc.real_length}/{enc.budget}\t"
            f"sep={boundary_separator_count(enc, tokenizer)}\tlabel={label}\t"
            f"{tokenizer.decode(enc.real_ids)}"
        )
    return "\n".join(lines) + ("\n" if lines else "")
