from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class Hyperparams:
    """Training constants. Defaults reproduce the published fine-tuning setup;
    ``batch_size`` and ``seed`` are not given there and are our choices."""

    learning_rate: float = 1e-5
    epochs: int = 3
    max_seq_len_response: int = 50
    max_seq_len_context: int = 256
    split_ratio: float = 0.9
    seed: int = 42
    batch_size: int = 16

    def __post_init__(self):
        for name in ("learning_rate", "epochs", "max_seq_len_response", "max_seq_len_context", "batch_size"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError(f"split_ratio must lie in (0, 1), got {self.split_ratio!r}")
        if not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})
