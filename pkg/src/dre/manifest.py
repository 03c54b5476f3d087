"""Run manifests: one JSON record per command invocation, next to its outputs."""

from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timezone

__all__ = ["utc_now", "input_hashes", "write_manifest", "MANIFEST_NAME"]

MANIFEST_NAME = "manifest.json"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def input_hashes(paths) -> dict[str, str]:
    """sha256 of every existing input file, keyed by path."""
    out = {}
    for p in paths:
        if p and os.path.isfile(p):
            h = hashlib.sha256()
            with open(p, "rb") as fh:
                for chunk in iter(lambda: fh.read(1 << 20), b""):
                    h.update(chunk)
            out[str(p)] = h.hexdigest()
    return out


def write_manifest(
    out_dir,
    command: str,
    config: dict,
    seed: int,
    started_at: str,
    artifacts: list[str],
    inputs: list[str],
) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, MANIFEST_NAME)
    record = {
        "command": command,
        "config": config,
        "seed": seed,
        "started_at": started_at,
        "finished_at": utc_now(),
        "artifacts": sorted(os.path.basename(a) for a in artifacts),
        "input_sha256": input_hashes(inputs),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
