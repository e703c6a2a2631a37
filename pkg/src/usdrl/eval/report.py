"""Evaluation report record serialized as JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class EvalReport:
    task: str
    metrics: dict[str, float]
    config_digest: str = ""
    checkpoint_digest: str = ""
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "task": self.task,
            "metrics": self.metrics,
            "config_digest": self.config_digest,
            "checkpoint_digest": self.checkpoint_digest,
            "details": self.details,
        }, indent=2, sort_keys=True)

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n")
        return path

    @classmethod
    def load(cls, path) -> "EvalReport":
        data = json.loads(Path(path).read_text())
        return cls(task=data["task"], metrics=data["metrics"],
                   config_digest=data.get("config_digest", ""),
                   checkpoint_digest=data.get("checkpoint_digest", ""),
                   details=data.get("details", {}))
