"""Problem instance container and its JSON form."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, TextIO

KINDS = ("connectivity", "tree_iso", "s5_word")


@dataclass
class ProblemInstance:
    kind: str
    payload: dict[str, Any]
    label: bool
    tokens: list[str] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ProblemInstance":
        return cls(data["kind"], data["payload"], bool(data["label"]),
                   list(data.get("tokens", [])), int(data.get("seed", 0)))

    @classmethod
    def from_json(cls, text: str) -> "ProblemInstance":
        return cls.from_dict(json.loads(text))


def write_jsonl(instances: Iterable[ProblemInstance], fh: TextIO) -> int:
    n = 0
    for inst in instances:
        fh.write(inst.to_json() + "\n")
        n += 1
    return n


def read_jsonl(fh: TextIO) -> list[ProblemInstance]:
    return [ProblemInstance.from_json(line) for line in fh if line.strip()]
