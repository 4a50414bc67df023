"""Run manifests: every CLI output directory gets one.

The manifest pins everything that determines the outputs (command,
parameter digest, seed, input paths, tool version) and deliberately nothing
else, so rerunning with an identical manifest yields bit-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from ccsim import __version__


def digest(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_digest: str
    seed: int
    inputs: tuple[str, ...]
    version: str = __version__

    @classmethod
    def build(cls, command: str, seed: int, inputs, params: dict) -> "RunManifest":
        return cls(command, digest(params), int(seed), tuple(str(p) for p in inputs))

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "inputs": list(self.inputs),
            "version": self.version,
        }

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, sort_keys=True, indent=1)
            f.write("\n")
