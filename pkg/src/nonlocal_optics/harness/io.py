"""Atomic CSV / JSON output with a hashed manifest."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from ..scan import ScanResult

MANIFEST = "manifest.json"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else None
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def atomic_write(path: Path, text: str) -> bytes:
    """Write via a temp file in the same directory and ``os.replace``."""
    data = text.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return data


def write_outputs(results: list[ScanResult], directory) -> dict:
    """One CSV and one JSON sidecar per scan plus ``manifest.json``; returns the manifest."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for res in results:
        for fname, text in ((f"{res.name}.csv", res.to_csv()),
                            (f"{res.name}.json", dumps(res.metadata))):
            data = atomic_write(out / fname, text)
            entries.append({"file": fname, "sha256": hashlib.sha256(data).hexdigest(),
                            "bytes": len(data)})
    manifest = {"files": sorted(entries, key=lambda e: e["file"]), "count": len(entries)}
    atomic_write(out / MANIFEST, dumps(manifest))
    return manifest
