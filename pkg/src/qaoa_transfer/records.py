"""Persisted experiment records and atomic file output."""

from __future__ import annotations

import datetime as _dt
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union


def atomic_write_text(path: Union[str, Path], text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def timestamp() -> str:
    """UTC ISO time, pinned by ``SOURCE_DATE_EPOCH`` when that is set."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
           else _dt.datetime.now(_dt.timezone.utc))
    return now.replace(microsecond=0).isoformat()


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


@dataclass
class ExperimentRecord:
    config: dict
    bank: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    timestamps: dict = field(default_factory=dict)
    version: str = ""

    def to_dict(self) -> dict:
        return {"config": self.config, "bank": self.bank, "results": self.results,
                "timestamps": self.timestamps, "version": self.version}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ExperimentRecord":
        d = json.loads(text)
        return cls(d["config"], d.get("bank", {}), d.get("results", {}),
                   d.get("timestamps", {}), d.get("version", ""))

    def write(self, path: Union[str, Path]) -> None:
        atomic_write_text(path, self.to_json())
