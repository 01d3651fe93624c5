"""Stable on-disk formats: field snapshots, reports, and run manifests.

Field snapshot (text, version 1):

    # nsvlab-field v1
    # resolution_n=<n> dealias_cutoff=<c> role=<velocity|vorticity> alpha=<a>
    # columns: component k1 k2 re im
    <component> <k1> <k2> <re> <im>
    ...

One row per stored Fourier coefficient (exact zeros omitted), %.17g floats
so values round-trip bit-exactly.  Scalar fields use component 0 only.

All writers go through a temp-then-rename step; on failure the partial file
is left behind with a .partial suffix.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidParameterError
from .spectral import VELOCITY, VORTICITY, SpectralField, SpectralGrid

FIELD_MAGIC = "# nsvlab-field v1"


def atomic_write_text(path, text: str):
    path = Path(path)
    partial = path.with_name(path.name + ".partial")
    with open(partial, "w") as fh:
        fh.write(text)
    os.replace(partial, path)


def save_field(f: SpectralField, path, alpha: float = 0.0):
    """Write a field snapshot; alpha records the metric of the producing run."""
    lines = [
        FIELD_MAGIC,
        f"# resolution_n={f.grid.n} dealias_cutoff={f.grid.dealias_cutoff} "
        f"role={f.role} alpha={alpha:.17g}",
        "# columns: component k1 k2 re im",
    ]
    n = f.grid.n
    coeffs = f.coeffs if f.role == VELOCITY else f.coeffs[None, ...]
    half = n // 2
    freq = [(i if i < n - half else i - n) for i in range(n)]
    for comp in range(coeffs.shape[0]):
        nonzero = np.argwhere(coeffs[comp] != 0)
        for i, j in nonzero:
            c = coeffs[comp, i, j]
            lines.append(f"{comp} {freq[i]} {freq[j]} {c.real:.17g} {c.imag:.17g}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_snapshot(path) -> tuple[SpectralField, dict]:
    """Read a field snapshot; returns the field and its header metadata."""
    with open(path) as fh:
        magic = fh.readline().rstrip("\n")
        if magic != FIELD_MAGIC:
            raise InvalidParameterError(f"{path}: not a field snapshot (header {magic!r})")
        header = fh.readline().rstrip("\n").lstrip("# ")
        meta = {}
        for token in header.split():
            key, _, value = token.partition("=")
            meta[key] = value
        fh.readline()  # column comment
        try:
            n = int(meta["resolution_n"])
            cutoff = int(meta["dealias_cutoff"])
            role = meta["role"]
            alpha = float(meta["alpha"])
        except (KeyError, ValueError) as err:
            raise InvalidParameterError(f"{path}: malformed snapshot header: {err}") from err
        if role not in (VELOCITY, VORTICITY):
            raise InvalidParameterError(f"{path}: unknown role {role!r}")
        grid = SpectralGrid(n, cutoff)
        shape = grid.coeff_shape(role)
        coeffs = np.zeros((2, n, n) if role == VELOCITY else (1, n, n), dtype=complex)
        for line_no, line in enumerate(fh, start=4):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 5:
                raise InvalidParameterError(f"{path}:{line_no}: expected 5 columns")
            comp, k1, k2 = int(parts[0]), int(parts[1]), int(parts[2])
            coeffs[comp, k1 % n, k2 % n] = float(parts[3]) + 1j * float(parts[4])
    c = coeffs if role == VELOCITY else coeffs[0]
    if c.shape != shape:
        raise InvalidParameterError(f"{path}: component rows inconsistent with role {role}")
    meta_out = {"resolution_n": n, "dealias_cutoff": cutoff, "role": role, "alpha": alpha}
    return SpectralField(grid, role, c), meta_out


def load_field(path) -> SpectralField:
    return load_snapshot(path)[0]


# ----------------------------------------------------------------------------
# reports and manifests

def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class RunManifest:
    """Ledger of one CLI run: what was asked, what was written, how it went."""

    config: dict
    tool_version: str = __version__
    wall_clock_s: float = 0.0
    created_utc: str = ""
    artifacts: list = dc_field(default_factory=list)
    summary: dict = dc_field(default_factory=dict)
    complete: bool = True
    schemas: dict = dc_field(default_factory=lambda: {"csv": "v1", "json": "v1", "field": "v1"})

    def add_artifact(self, path):
        self.artifacts.append({"path": str(Path(path).name), "sha256": sha256_of(path)})

    def write(self, path):
        payload = {
            "config_hash": config_hash(self.config),
            "config": self.config,
            "tool": "nsvlab",
            "tool_version": self.tool_version,
            "wall_clock_s": round(self.wall_clock_s, 3),
            "created_utc": self.created_utc or time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "artifacts": sorted(self.artifacts, key=lambda a: a["path"]),
            "summary": self.summary,
            "complete": self.complete,
            "schemas": self.schemas,
        }
        write_json(path, payload)
