"""Experiment configuration stored as an INI file.

Schema::

    [experiment]
    corpus = path/to/train.jsonl        ; required for `train`
    source = twitter | reddit
    mode = response_only | context_response | context_response_separated
    encoder = tiny-test | <hugging face model id, e.g. roberta-large>
    output_dir = runs/example
    context_turns = 2
    normalize = false                   ; minimal tweet normalisation
    dump_inputs = 0                     ; write decoded inputs for the first N records

    [hyperparams]
    learning_rate = 1e-05
    epochs = 3
    max_seq_len_response = 50
    max_seq_len_context = 256
    split_ratio = 0.9
    seed = 42
    batch_size = 16

Every key is optional in the file; command-line flags override file values.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from sarcctx.corpus import Source
from sarcctx.errors import ConfigError
from sarcctx.hyperparams import Hyperparams
from sarcctx.input_builder import DEFAULT_CONTEXT_TURNS, InputMode

_HP_KEYS = {f.name for f in dataclasses.fields(Hyperparams)}
_HP_CASTS = {"learning_rate": float, "split_ratio": float}


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: str | None = None
    source: Source = Source.TWITTER
    mode: InputMode = InputMode.CONTEXT_RESPONSE_SEPARATED
    encoder: str = "tiny-test"
    output_dir: str = "runs/default"
    context_turns: int = DEFAULT_CONTEXT_TURNS
    normalize: bool = False
    dump_inputs: int = 0
    hyperparams: Hyperparams = field(default_factory=Hyperparams)

    def validate(self, require_corpus: bool = True) -> "ExperimentConfig":
        if require_corpus:
            if not self.corpus:
                raise ConfigError("no corpus given")
            if not Path(self.corpus).is_file():
                raise ConfigError(f"corpus file not found: {self.corpus}")
        if self.context_turns < 1:
            raise ConfigError("context_turns must be >= 1")
        if self.dump_inputs < 0:
            raise ConfigError("dump_inputs must be >= 0")
        return self

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        exp = {
            "source": self.source.value,
            "mode": self.mode.value,
            "encoder": self.encoder,
            "output_dir": self.output_dir,
            "context_turns": str(self.context_turns),
            "normalize": str(self.normalize).lower(),
            "dump_inputs": str(self.dump_inputs),
        }
        if self.corpus is not None:
            exp = {"corpus": self.corpus, **exp}
        cp["experiment"] = exp
        cp["hyperparams"] = {k: repr(v) for k, v in self.hyperparams.to_dict().items()}
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            lines += [f"{k} = {v}" for k, v in cp[section].items()]
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from None
        unknown = set(cp.sections()) - {"experiment", "hyperparams"}
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        values = dict(cp["experiment"]) if cp.has_section("experiment") else {}
        hp = dict(cp["hyperparams"]) if cp.has_section("hyperparams") else {}
        return cls().override(**values, **hp)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_ini(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None

    def override(self, **values) -> "ExperimentConfig":
        """Copy with the given keys replaced; ``None`` values are ignored. Strings are coerced."""
        exp, hp = {}, {}
        for key, val in values.items():
            if val is None:
                continue
            key = key.replace("-", "_")
            try:
                if key in _HP_KEYS:
                    hp[key] = _HP_CASTS.get(key, int)(val)
                elif key == "source":
                    exp[key] = Source(val)
                elif key == "mode":
                    exp[key] = InputMode(val)
                elif key in ("context_turns", "dump_inputs"):
                    exp[key] = int(val)
                elif key == "normalize":
                    exp[key] = _to_bool(val)
                elif key in ("corpus", "encoder", "output_dir"):
                    exp[key] = str(val)
                else:
                    raise ConfigError(f"unknown config key {key!r}")
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {val!r} ({exc})") from None
        try:
            hyper = dataclasses.replace(self.hyperparams, **hp)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return dataclasses.replace(self, hyperparams=hyper, **exp)


def _to_bool(val) -> bool:
    if isinstance(val, bool):
        return val
    s = str(val).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")
