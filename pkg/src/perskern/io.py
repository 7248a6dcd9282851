"""File formats: point-cloud CSV, diagram CSV, manifests, Gram sidecars.

Point clouds are one point per row, comma-separated, no header. Diagram
files carry a ``dim,birth,death`` header and one row per pair with ``inf``
for essential deaths. A diagram set is a directory of such files plus a
``manifest.json`` mapping each file to its label; manifest order is the
sample order every downstream artifact uses.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from pathlib import Path

import numpy as np

from .persistence import PersistencePair

MANIFEST_NAME = "manifest.json"


def save_point_cloud(path, cloud: np.ndarray):
    cloud = np.asarray(cloud, dtype=np.float64)
    np.savetxt(path, cloud, fmt="%.17g", delimiter=",")


def load_point_cloud(path) -> np.ndarray:
    cloud = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    if cloud.size == 0:
        raise ValueError(f"point cloud file {path} is empty")
    return cloud


def save_pairs(path, pairs):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("dim,birth,death\n")
        for p in pairs:
            death = "inf" if math.isinf(p.death) else repr(float(p.death))
            fh.write(f"{p.dim},{float(p.birth)!r},{death}\n")


def load_pairs(path) -> list[PersistencePair]:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "dim,birth,death":
            raise ValueError(f"{path}: expected header 'dim,birth,death', got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 3:
                raise ValueError(f"{path}:{line_no}: expected 3 columns")
            pairs.append(
                PersistencePair(int(fields[0]), float(fields[1]), float(fields[2]))
            )
    return pairs


def write_json(path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_diagram_set(directory, samples, labels, extra=None):
    """Write one diagram CSV per sample plus the ordering manifest.

    ``samples`` is a list of pair lists (or None for failed samples, which
    are recorded in the manifest without a file); ``extra`` per-sample dicts
    are merged into the manifest entries.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    width = max(4, len(str(len(samples))))
    for i, (pairs, label) in enumerate(zip(samples, labels)):
        entry = {"label": label}
        if extra is not None:
            entry.update(extra[i])
        if pairs is None:
            entry["error"] = entry.get("error", "diagram computation failed")
        else:
            name = f"sample_{i:0{width}d}.csv"
            save_pairs(directory / name, pairs)
            entry["file"] = name
        entries.append(entry)
    write_json(directory / MANIFEST_NAME, {"samples": entries})
    return directory / MANIFEST_NAME


def read_diagram_set(directory):
    """Load a diagram directory; returns (pair lists, labels, entries)."""
    directory = Path(directory)
    manifest = read_json(directory / MANIFEST_NAME)
    samples, labels, entries = [], [], []
    for entry in manifest["samples"]:
        if "file" not in entry:
            continue  # flagged sample without a diagram
        samples.append(load_pairs(directory / entry["file"]))
        labels.append(entry["label"])
        entries.append(entry)
    return samples, labels, entries


def diagram_set_hash(samples) -> str:
    """Order-sensitive digest of a list of pair lists."""
    digest = hashlib.sha256()
    for pairs in samples:
        for p in pairs:
            digest.update(f"{p.dim},{p.birth!r},{p.death!r};".encode())
        digest.update(b"|")
    return digest.hexdigest()


def save_gram(path, values: np.ndarray, provenance: dict):
    """Dense row-major CSV plus a JSON sidecar with full provenance."""
    path = Path(path)
    np.savetxt(path, np.asarray(values, dtype=np.float64), fmt="%.17g", delimiter=",")
    write_json(path.with_suffix(path.suffix + ".json"), provenance)


def load_gram(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    values = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    sidecar = path.with_suffix(path.suffix + ".json")
    provenance = read_json(sidecar) if sidecar.exists() else {}
    return values, provenance


def output_root() -> Path:
    """Default parent for relative output paths (overridable by env var)."""
    return Path(os.environ.get("PERSKERN_OUTPUT_ROOT", "."))


def resolve_output(path) -> Path:
    path = Path(path)
    return path if path.is_absolute() else output_root() / path
