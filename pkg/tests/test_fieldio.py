"""Snapshot format round-trips, atomic writes, and manifests."""

import json
import os

import numpy as np
import pytest

from nsvlab import fieldio, spectral as sp
from nsvlab.errors import InvalidParameterError
from nsvlab.spectral import VELOCITY, VORTICITY, SpectralGrid

GRID = SpectralGrid(32)


class TestSnapshots:
    def test_velocity_roundtrip_exact(self, tmp_path):
        f = sp.random_field(GRID, VELOCITY, seed=0, decay=2.0)
        path = tmp_path / "u.field"
        fieldio.save_field(f, path, alpha=0.75)
        back, meta = fieldio.load_snapshot(path)
        np.testing.assert_array_equal(back.coeffs, f.coeffs)
        assert back.role == VELOCITY
        assert meta == {"resolution_n": 32, "dealias_cutoff": 10,
                        "role": "velocity", "alpha": 0.75}

    def test_vorticity_roundtrip_exact(self, tmp_path):
        f = sp.random_field(GRID, VORTICITY, seed=1, decay=2.0)
        path = tmp_path / "w.field"
        fieldio.save_field(f, path)
        back = fieldio.load_field(path)
        np.testing.assert_array_equal(back.coeffs, f.coeffs)
        assert back.role == VORTICITY

    def test_header_format(self, tmp_path):
        f = sp.shear_field(GRID, 1.0)
        path = tmp_path / "s.field"
        fieldio.save_field(f, path, alpha=1.0)
        lines = path.read_text().splitlines()
        assert lines[0] == "# nsvlab-field v1"
        assert lines[1] == "# resolution_n=32 dealias_cutoff=10 role=velocity alpha=1"
        assert lines[2] == "# columns: component k1 k2 re im"
        # shear mode: exactly two stored coefficients, component 0
        assert len(lines) == 5
        assert all(row.split()[0] == "0" for row in lines[3:])

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.field"
        path.write_text("not a snapshot\n")
        with pytest.raises(InvalidParameterError):
            fieldio.load_snapshot(path)

    def test_rejects_malformed_rows(self, tmp_path):
        f = sp.shear_field(GRID, 1.0)
        path = tmp_path / "s.field"
        fieldio.save_field(f, path)
        text = path.read_text() + "0 1\n"
        path.write_text(text)
        with pytest.raises(InvalidParameterError):
            fieldio.load_snapshot(path)


class TestAtomicWrite:
    def test_no_partial_after_success(self, tmp_path):
        path = tmp_path / "x.json"
        fieldio.atomic_write_text(path, "{}")
        assert path.exists()
        assert not (tmp_path / "x.json.partial").exists()

    def test_partial_left_on_failure(self, tmp_path, monkeypatch):
        path = tmp_path / "y.json"

        def boom(*args):
            raise OSError("disk full")

        monkeypatch.setattr(os, "replace", boom)
        with pytest.raises(OSError):
            fieldio.atomic_write_text(path, "data")
        assert not path.exists()
        assert (tmp_path / "y.json.partial").read_text() == "data"


class TestManifest:
    def test_hash_changes_iff_config_changes(self):
        a = fieldio.config_hash({"subcommand": "bounds", "params": {"nu": 1.0}, "seed": 0})
        b = fieldio.config_hash({"subcommand": "bounds", "params": {"nu": 1.0}, "seed": 0})
        c = fieldio.config_hash({"subcommand": "bounds", "params": {"nu": 2.0}, "seed": 0})
        assert a == b != c

    def test_manifest_lists_artifacts(self, tmp_path):
        art = tmp_path / "report.json"
        fieldio.write_json(art, {"ok": True})
        manifest = fieldio.RunManifest(config={"subcommand": "bounds", "params": {}, "seed": 0})
        manifest.add_artifact(art)
        manifest.summary = {"passed": True}
        mpath = tmp_path / "manifest.json"
        manifest.write(mpath)
        payload = json.loads(mpath.read_text())
        assert payload["artifacts"][0]["path"] == "report.json"
        assert payload["artifacts"][0]["sha256"] == fieldio.sha256_of(art)
        assert payload["complete"] is True
        assert payload["config_hash"] == fieldio.config_hash(manifest.config)
