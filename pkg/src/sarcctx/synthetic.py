"""Deterministic synthetic corpora for smoke tests and desk-scale experiments.

Labels are separable by construction: sarcastic responses always contain a
word from ``SARCASTIC_CUES`` and never one from ``SINCERE_CUES``, and vice
versa. Context turns are built from neutral filler only.
"""

from __future__ import annotations

from sarcctx.corpus import Corpus, DialogueRecord, Label, Source
from sarcctx.prng import SplitMix64

SARCASTIC_CUES = ("totally", "obviously", "genius", "wonderful", "brilliant", "wow")
SINCERE_CUES = ("thanks", "sad", "tired", "glad", "sorry", "serious")
FILLER = (
    "the meeting ran late again",
    "my phone died this morning",
    "traffic was bad today",
    "the weather is nice",
    "we lost the game",
    "coffee is ready",
    "the boss said the job is done",
    "school starts on monday",
    "dinner was late",
    "the movie was long",
)
RESPONSE_FRAMES = ("{cue} that is {cue2}", "oh {cue} , {filler}", "{filler} , {cue}", "yeah {cue} {cue2}")

# "sorry" is not in the tokenizer's word list; it lands in a hash bucket, which is fine.


def _pick(rng: SplitMix64, items):
    return items[rng.randbelow(len(items))]


def separable_corpus(
    n: int,
    seed: int = 0,
    source: Source | str = Source.TWITTER,
    max_context: int = 4,
    labeled: bool = True,
) -> Corpus:
    """``n`` records alternating SARCASM / NOT_SARCASM, so classes stay balanced."""
    rng = SplitMix64(seed)
    source = Source(source)
    records = []
    for i in range(n):
        label = Label.SARCASM if i % 2 == 0 else Label.NOT_SARCASM
        cues = SARCASTIC_CUES if label is Label.SARCASM else SINCERE_CUES
        response = _pick(rng, RESPONSE_FRAMES).format(
            cue=_pick(rng, cues), cue2=_pick(rng, cues), filler=_pick(rng, FILLER)
        )
        depth = rng.randbelow(max_context + 1)
        context = tuple(_pick(rng, FILLER) for _ in range(depth))
        records.append(
            DialogueRecord(f"{source.value}-{i + 1}", source, context, response, label if labeled else None)
        )
    return Corpus(tuple(records), source)
