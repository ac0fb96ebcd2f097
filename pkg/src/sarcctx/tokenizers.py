"""Tokenizer handles: a small deterministic test tokenizer and a Hugging Face wrapper.

Both expose the same surface (``TokenizerHandle``): ``encode`` never adds
special tokens; framing is the input builder's job.
"""

from __future__ import annotations

import re
import zlib
from typing import Protocol, Sequence, runtime_checkable


@runtime_checkable
class TokenizerHandle(Protocol):
    vocabulary_size: int
    bos_id: int
    eos_id: int
    sep_id: int
    pad_id: int

    def encode(self, text: str) -> list[int]: ...

    def decode(self, ids: Sequence[int], skip_special_tokens: bool = False) -> str: ...

    def descriptor(self) -> dict: ...


SPECIAL_TOKENS = ("<s>", "<pad>", "</s>", "<unk>", "<sep>")

PUNCTUATION = tuple(".,!?;:'\"()[]{}-_/\\@#$%&*+=<>~`^|")

# Closed word list; anything outside it lands in a hash bucket.
WORDS = tuple(
    """
    a about after again all also always am an and any are as at away back bad be
    because been before being best better big but by can can't come could day did
    didn't do does doesn't don't done down even ever every exam fantastic feel few
    find first for from fun get give go going good got great had has have he her
    here him his how i i'm if in into is isn't it it's just know last least let
    life like little long look lot love made make man many me more most much must
    my need never new nice no not nothing now of off oh ok okay old on one only or
    other our out over people really right said same say see she should so some
    something still such sure take than thank thanks that that's the their them
    then there these they thing things think this those though time to today too
    totally two up us very want was way we week well went were what when where
    which while who why will wish with work world would wow yeah year yes yet you
    your you're amazing awesome brilliant clearly exactly genius obviously perfect
    wonderful sarcasm funny joke serious seriously glad happy sad angry hate tired
    boring weather rain sun monday morning night coffee traffic meeting phone
    game team win lost won news movie book food dinner lunch school job boss
    friend family car house money price sale free wait hours minutes late early
    again yet ugh lol haha user url because
    """.split()
)


class WordTokenizer:
    """Whitespace-and-punctuation tokenizer over a fixed small vocabulary.

    Text is lowercased and split into word runs and single punctuation
    characters. Known words map to fixed ids; unknown words map to one of
    ``vocabulary_size - len(base vocabulary)`` buckets chosen by CRC-32, so
    encoding is deterministic across processes. ``decode`` joins tokens with
    single spaces and renders unknown buckets as ``<unk:N>``; round-trips are
    therefore exact for lowercase in-vocabulary text written with single spaces
    between tokens.

    Instances are immutable and safe to share between threads.
    """

    _token_re = re.compile(r"[\w']+|[^\w\s]")

    def __init__(self, vocabulary_size: int = 1000):
        base = list(SPECIAL_TOKENS) + list(PUNCTUATION) + list(dict.fromkeys(WORDS))
        if vocabulary_size <= len(base):
            raise ValueError(f"vocabulary_size must exceed the {len(base)} base tokens")
        self.vocabulary_size = vocabulary_size
        self._itos = base
        self._stoi = {tok: i for i, tok in enumerate(base)}
        self._n_buckets = vocabulary_size - len(base)
        self.bos_id, self.pad_id, self.eos_id, self.unk_id, self.sep_id = (
            self._stoi[t] for t in SPECIAL_TOKENS
        )

    @property
    def special_ids(self) -> frozenset[int]:
        return frozenset({self.bos_id, self.pad_id, self.eos_id, self.unk_id, self.sep_id})

    def tokenize(self, text: str) -> list[str]:
        return self._token_re.findall(text.lower())

    def _token_id(self, tok: str) -> int:
        idx = self._stoi.get(tok)
        if idx is not None and tok not in SPECIAL_TOKENS:
            return idx
        return len(self._itos) + zlib.crc32(tok.encode("utf-8")) % self._n_buckets

    def encode(self, text: str) -> list[int]:
        return [self._token_id(t) for t in self.tokenize(text)]

    def decode(self, ids: Sequence[int], skip_special_tokens: bool = False) -> str:
        out = []
        for i in ids:
            i = int(i)
            if not 0 <= i < self.vocabulary_size:
                raise ValueError(f"token id {i} outside vocabulary")
            if skip_special_tokens and i in self.special_ids:
                continue
            out.append(self._itos[i] if i < len(self._itos) else f"<unk:{i - len(self._itos)}>")
        return " ".join(out)

    def descriptor(self) -> dict:
        return {"kind": "word", "vocabulary_size": self.vocabulary_size}


class HFTokenizer:
    """Adapter over a pretrained byte-pair tokenizer (e.g. ``roberta-large``).

    Every segment is encoded with a leading space so a response appended after
    context gets the same word-initial pieces it would have mid-sentence.
    RoBERTa's separator is its end-of-sequence token; ``sep_id == eos_id``
    there. Callers that encode from several threads should give each thread
    its own instance.
    """

    def __init__(self, name: str, tokenizer=None):
        if tokenizer is None:
            from transformers import AutoTokenizer

            tokenizer = AutoTokenizer.from_pretrained(name)
        self.name = name
        self._tok = tokenizer
        self.vocabulary_size = len(tokenizer)
        self.bos_id = tokenizer.bos_token_id if tokenizer.bos_token_id is not None else tokenizer.cls_token_id
        self.eos_id = tokenizer.eos_token_id if tokenizer.eos_token_id is not None else tokenizer.sep_token_id
        self.sep_id = tokenizer.sep_token_id
        self.pad_id = tokenizer.pad_token_id

    def encode(self, text: str) -> list[int]:
        return self._tok.encode(" " + text, add_special_tokens=False)

    def decode(self, ids: Sequence[int], skip_special_tokens: bool = False) -> str:
        return self._tok.decode(list(ids), skip_special_tokens=skip_special_tokens)

    def descriptor(self) -> dict:
        return {"kind": "hf", "name": self.name, "vocabulary_size": self.vocabulary_size}


def tokenizer_from_descriptor(desc: dict) -> TokenizerHandle:
    if desc["kind"] == "word":
        return WordTokenizer(desc["vocabulary_size"])
    if desc["kind"] == "hf":
        return HFTokenizer(desc["name"])
    raise ValueError(f"unknown tokenizer kind {desc['kind']!r}")
