"""Crashworthiness metrics over sampled force-deflection curves."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data import DatasetFormatError, sidecar_path


@dataclass(frozen=True)
class ForceDeflectionCurve:
    """Crushing force (N) against displacement (m) for a structure of mass ``mass`` (kg)."""

    displacement: np.ndarray
    force: np.ndarray
    mass: float

    def __post_init__(self) -> None:
        x = np.asarray(self.displacement, dtype=float).ravel().copy()
        f = np.asarray(self.force, dtype=float).ravel().copy()
        if x.shape != f.shape or x.size < 2:
            raise ValueError("need at least two (displacement, force) samples of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(f))):
            raise ValueError("curve contains non-finite values")
        if x[0] != 0.0 or np.any(np.diff(x) <= 0):
            raise ValueError("displacements must start at 0 and increase strictly")
        if np.any(f < 0):
            raise ValueError("forces must be >= 0")
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise ValueError("mass must be positive")
        x.flags.writeable = False
        f.flags.writeable = False
        object.__setattr__(self, "displacement", x)
        object.__setattr__(self, "force", f)
        object.__setattr__(self, "mass", float(self.mass))

    @property
    def stroke(self) -> float:
        return float(self.displacement[-1])


def absorbed_energy(curve: ForceDeflectionCurve) -> float:
    """Trapezoidal integral of force over displacement (J)."""
    return float(np.trapezoid(curve.force, curve.displacement))


def compute_sea(curve: ForceDeflectionCurve) -> float:
    """Specific energy absorption (J/kg)."""
    return absorbed_energy(curve) / curve.mass


def compute_cfe(curve: ForceDeflectionCurve) -> float:
    """Mean crushing force over peak crushing force."""
    f_max = float(curve.force.max())
    if f_max <= 0:
        raise ValueError("peak force is zero")
    return absorbed_energy(curve) / curve.stroke / f_max


def write_curve(curve: ForceDeflectionCurve, path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["displacement_m", "force_N"])
        for x, f in zip(curve.displacement, curve.force):
            w.writerow([format(x, ".17g"), format(f, ".17g")])
    with open(sidecar_path(path), "w", encoding="utf-8") as fh:
        json.dump({"mass_kg": curve.mass}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_curve(path: str | Path) -> ForceDeflectionCurve:
    path = Path(path)
    sp = sidecar_path(path)
    if not sp.exists():
        raise DatasetFormatError(f"missing sidecar {sp.name} with mass_kg")
    mass = json.loads(sp.read_text(encoding="utf-8")).get("mass_kg")
    if mass is None:
        raise DatasetFormatError(f"{sp.name}: missing mass_kg")
    xs, fs = [], []
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DatasetFormatError("missing header row", 1)
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise DatasetFormatError(f"expected 2 columns, found {len(row)}", lineno)
        try:
            xs.append(float(row[0]))
            fs.append(float(row[1]))
        except ValueError:
            raise DatasetFormatError("not a number", lineno) from None
    try:
        return ForceDeflectionCurve(np.array(xs), np.array(fs), float(mass))
    except ValueError as exc:
        raise DatasetFormatError(str(exc)) from None
