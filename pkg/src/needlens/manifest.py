"""Run manifest: config hash, input digests and output artifact digests,
so identical runs are verifiable by digest comparison."""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_obj(obj) -> str:
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str).encode("utf-8")
    ).hexdigest()


class RunManifest:
    def __init__(self, path, config_hash: str):
        self.path = Path(path)
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                self.data = json.load(fh)
        else:
            self.data = {
                "version": "manifest/1",
                "run_id": None,
                "config_hash": config_hash,
                "stages": {},
            }
        self.data["config_hash"] = config_hash
        if self.data.get("run_id") is None:
            self.data["run_id"] = config_hash[:12]

    def record_stage(self, stage: str, inputs: dict[str, str], outputs: dict[str, str], seconds: float) -> None:
        self.data["stages"][stage] = {
            "inputs": inputs,
            "outputs": outputs,
            "seconds": round(seconds, 3),
        }
        self.save()

    def stage_output(self, stage: str, name: str) -> str | None:
        return self.data["stages"].get(stage, {}).get("outputs", {}).get(name)

    def has_stage(self, stage: str) -> bool:
        return stage in self.data["stages"]

    def save(self) -> None:
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)


class StageTimer:
    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.seconds = time.monotonic() - self.start
        return False
