"""Function specs (analytic presets or per-vertex CSV) and mesh specs for the command line."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import BiFunctionSample
from .mesh import Mesh, MeshError, icosahedron, icosphere, read_off, torus
from .pareto import ExtendedParetoGrid, sphere_affine_epg


class SpecError(ValueError):
    """A malformed function or mesh specification."""


@dataclass(frozen=True)
class FunctionSpec:
    kind: str  # "xz", "affine" or "csv"
    coeffs: tuple = (1.0, 0.0, 1.0, 0.0)  # c1, d1, c2, d2
    path: str | None = None

    def describe(self) -> str:
        if self.kind == "csv":
            return f"csv:{self.path}"
        if self.kind == "xz":
            return "preset:xz"
        return "preset:affine:" + ",".join(repr(c) for c in self.coeffs)


def parse_function_spec(text: str) -> FunctionSpec:
    """``preset:xz``, ``preset:affine:c1,d1,c2,d2`` or a CSV path (optionally ``csv:path``)."""
    if text == "preset:xz":
        return FunctionSpec("xz")
    if text.startswith("preset:affine:"):
        parts = text[len("preset:affine:") :].split(",")
        try:
            coeffs = tuple(float(x) for x in parts)
        except ValueError:
            raise SpecError(f"malformed affine preset {text!r}: coefficients must be numbers") from None
        if len(coeffs) != 4:
            raise SpecError(f"malformed affine preset {text!r}: expected c1,d1,c2,d2")
        if coeffs[0] <= 0 or coeffs[2] <= 0:
            raise SpecError(f"affine preset {text!r}: c1 and c2 must be positive")
        return FunctionSpec("affine", coeffs)
    if text.startswith("preset:"):
        raise SpecError(f"unknown preset {text!r}; use preset:xz or preset:affine:c1,d1,c2,d2")
    path = text[4:] if text.startswith("csv:") else text
    if not Path(path).is_file():
        raise SpecError(f"values file not found: {path}")
    return FunctionSpec("csv", path=path)


def read_values_csv(path, n_vertices: int) -> np.ndarray:
    """Read ``vertex_index,f1,f2`` rows; every vertex must appear exactly once."""
    vals = np.full((n_vertices, 2), np.nan)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != ["vertex_index", "f1", "f2"]:
            raise SpecError(f"{path}: header must be vertex_index,f1,f2")
        for line, row in enumerate(reader, start=2):
            try:
                i = int(row["vertex_index"])
                f1, f2 = float(row["f1"]), float(row["f2"])
            except (TypeError, ValueError):
                raise SpecError(f"{path}:{line}: malformed row") from None
            if not 0 <= i < n_vertices:
                raise SpecError(f"{path}:{line}: vertex index {i} out of range")
            if not np.isnan(vals[i, 0]):
                raise SpecError(f"{path}:{line}: vertex {i} listed twice")
            vals[i] = f1, f2
    missing = np.flatnonzero(np.isnan(vals[:, 0]))
    if len(missing):
        raise SpecError(f"{path}: no values for {len(missing)} vertices (first: {missing[0]})")
    return vals


def write_values_csv(sample: BiFunctionSample, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vertex_index", "f1", "f2"])
        for i, (f1, f2) in enumerate(sample.values):
            w.writerow([i, repr(float(f1)), repr(float(f2))])


def function_sample(mesh: Mesh, spec: FunctionSpec, name: str = "f") -> BiFunctionSample:
    """Evaluate a spec at the mesh vertices; presets compose (x, z) with the affine map."""
    if spec.kind == "csv":
        return BiFunctionSample(mesh, read_values_csv(spec.path, mesh.n_vertices), name)
    c1, d1, c2, d2 = spec.coeffs
    V = mesh.vertices
    return BiFunctionSample(mesh, np.column_stack([c1 * V[:, 0] + d1, c2 * V[:, 2] + d2]), name)


def grid_for_spec(spec: FunctionSpec, owner: str, samples: int = 512) -> ExtendedParetoGrid | None:
    """Analytic grid of a preset on the unit sphere; None for CSV values."""
    if spec.kind == "csv":
        return None
    return sphere_affine_epg(*spec.coeffs, owner=owner, samples=samples)


BUILTIN_MESHES = "icosahedron, icosphere:K, torus:N,M"


def load_mesh(text: str) -> Mesh:
    """An OFF path or a built-in: ``icosahedron``, ``icosphere:K``, ``torus:N,M``."""
    try:
        if text == "icosahedron":
            return icosahedron()
        if text.startswith("icosphere:"):
            return icosphere(int(text.split(":", 1)[1]))
        if text.startswith("torus:"):
            n, m = (int(x) for x in text.split(":", 1)[1].split(","))
            return torus(n, m)
    except ValueError:
        raise SpecError(f"malformed built-in mesh {text!r}; expected one of {BUILTIN_MESHES}") from None
    if not Path(text).is_file():
        raise SpecError(f"mesh file not found: {text}")
    return read_off(text)


__all__ = [
    "FunctionSpec",
    "MeshError",
    "SpecError",
    "function_sample",
    "grid_for_spec",
    "load_mesh",
    "parse_function_spec",
    "read_values_csv",
    "write_values_csv",
]
