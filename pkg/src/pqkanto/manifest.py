"""Deterministic output files and the run manifest.

Every CLI command that writes files also writes a `RunManifest` next to
its primary output: the command name, the complete parameter set, the
artifact version, and the produced file names.  Replaying a manifest
re-executes the command from the recorded parameters and reproduces the
outputs byte for byte, which is what makes result files citable.

All writers here are deterministic: JSON is dumped with sorted keys,
floats are printed with 17 significant digits (round-trip exact), and
line endings are LF regardless of platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

MANIFEST_SUFFIX = ".manifest.json"


def fmt_float(v) -> str:
    """17-significant-digit rendering; round-trips float64 exactly."""
    return format(float(v), ".17g")


def csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def write_text(path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def write_json(obj, path) -> None:
    write_text(path, dumps_json(obj))


def write_csv(header: Sequence[str], rows: Sequence[Sequence], path) -> None:
    lines = [",".join(header)]
    lines += [",".join(csv_cell(v) for v in row) for row in rows]
    write_text(path, "\n".join(lines) + "\n")


@dataclass
class RunManifest:
    """Reproducibility record for one CLI invocation."""

    command: str
    params: dict
    version: str
    outputs: List[str]

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "version": self.version,
            "outputs": list(self.outputs),
        }

    def save(self, path) -> None:
        write_json(self.to_json_dict(), path)

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(
            command=data["command"],
            params=data["params"],
            version=data["version"],
            outputs=list(data["outputs"]),
        )


def manifest_path_for(output_path) -> Path:
    return Path(str(output_path) + MANIFEST_SUFFIX)
