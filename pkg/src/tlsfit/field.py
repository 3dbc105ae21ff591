"""Cavity surface field maps.

A :class:`FieldMap` is a weighted point set on the lossy surface: each
sample carries the local |E| at a reference mode amplitude and the surface
area it represents.  Together with the stored energy and the accelerating
field at that same amplitude it is everything the surface integral needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import j0, j1

from .constants import C_LIGHT, EPS0, X01
from . import provenance
from .errors import DomainError, FieldMapError

COLUMNS = ("r_m", "z_m", "e_norm_V_per_m", "area_weight_m2")

# default geometry puts the TM010 mode at ~1.3 GHz
DEFAULT_RADIUS = 0.0883
DEFAULT_LENGTH = 0.1
DEFAULT_N_RADIAL = 64


@dataclass(frozen=True, eq=False)
class FieldMap:
    r: np.ndarray
    z: np.ndarray
    e_norm: np.ndarray
    area_weight: np.ndarray
    w_total_ref: float
    e_acc_ref: float
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arrays = {}
        for name in ("r", "z", "e_norm", "area_weight"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            arrays[name] = arr
            object.__setattr__(self, name, arr)
        n = arrays["r"].shape
        if len(n) != 1 or any(a.shape != n for a in arrays.values()):
            raise FieldMapError("invariant violated: sample columns must be 1-d and equal length")
        if n[0] == 0:
            raise FieldMapError("invariant violated: empty sample list")
        if not np.all(np.isfinite(arrays["e_norm"])) or np.any(arrays["e_norm"] < 0):
            raise FieldMapError("invariant violated: e_norm must be finite and >= 0")
        if not np.all(np.isfinite(arrays["area_weight"])) or np.any(arrays["area_weight"] <= 0):
            raise FieldMapError("invariant violated: area_weight must be > 0")
        object.__setattr__(self, "w_total_ref", float(self.w_total_ref))
        object.__setattr__(self, "e_acc_ref", float(self.e_acc_ref))
        if not (math.isfinite(self.w_total_ref) and self.w_total_ref > 0):
            raise FieldMapError("invariant violated: w_total_ref must be > 0")
        if not (math.isfinite(self.e_acc_ref) and self.e_acc_ref > 0):
            raise FieldMapError("invariant violated: e_acc_ref must be > 0")

    def __len__(self):
        return self.r.size

    @property
    def total_area(self) -> float:
        return float(self.area_weight.sum())

    def loss_weights(self) -> np.ndarray:
        """Per-sample ``|E|^2 dA / W_total``, independent of the mode amplitude."""
        return self.e_norm**2 * self.area_weight / self.w_total_ref

    def w_total(self, e_acc: float) -> float:
        return self.w_total_ref * (e_acc / self.e_acc_ref) ** 2


def pillbox_field(r, radius: float, e0: float = 1.0):
    """Axial TM010 field ``e0 J0(x01 r / R)`` of a pillbox cavity."""
    return e0 * j0(X01 * np.asarray(r, dtype=float) / radius)


def pillbox_frequency(radius: float) -> float:
    return X01 * C_LIGHT / (2.0 * math.pi * radius)


def pillbox_stored_energy(radius: float, length: float, e0: float = 1.0) -> float:
    return EPS0 / 4.0 * e0**2 * length * math.pi * radius**2 * j1(X01) ** 2


def pillbox_surface_map(radius: float = DEFAULT_RADIUS, length: float = DEFAULT_LENGTH,
                        n_radial: int = DEFAULT_N_RADIAL) -> FieldMap:
    """End-cap field map of the TM010 pillbox mode at unit on-axis amplitude.

    Gauss-Legendre nodes in r on each of the two end caps (z = 0 and
    z = length); the barrel wall has no normal field and is left out.
    E_acc is taken equal to the on-axis amplitude, so ``e_acc_ref = 1``.
    """
    if not radius > 0 or not length > 0:
        raise DomainError("pillbox radius and length must be > 0")
    if int(n_radial) != n_radial or n_radial < 8:
        raise DomainError(f"n_radial must be an integer >= 8, got {n_radial!r}")
    t, w = np.polynomial.legendre.leggauss(int(n_radial))
    r = 0.5 * radius * (t + 1.0)
    dA = 2.0 * math.pi * r * 0.5 * radius * w
    e = pillbox_field(r, radius)
    return FieldMap(
        r=np.concatenate([r, r]),
        z=np.concatenate([np.zeros_like(r), np.full_like(r, length)]),
        e_norm=np.concatenate([e, e]),
        area_weight=np.concatenate([dA, dA]),
        w_total_ref=pillbox_stored_energy(radius, length),
        e_acc_ref=1.0,
        label=f"pillbox R={radius!r} L={length!r} n_radial={int(n_radial)}",
    )


def scale_to_eacc(fmap: FieldMap, e_acc) -> np.ndarray:
    """Local surface fields at accelerating field ``e_acc`` (linear in the amplitude).

    A scalar ``e_acc`` gives shape ``(n_samples,)``; an array gives
    ``(len(e_acc), n_samples)``.
    """
    e_acc = np.asarray(e_acc, dtype=float)
    if np.any(e_acc < 0) or np.any(np.isnan(e_acc)):
        raise DomainError("e_acc must be >= 0")
    return np.multiply.outer(e_acc / fmap.e_acc_ref, fmap.e_norm)


def save_field_map(fmap: FieldMap, path, preamble=()) -> None:
    """Write ``fmap`` as CSV; ``preamble`` lines are emitted first as ``#`` comments."""
    lines = [f"# {p}" for p in preamble]
    lines.append(f"# w_total_ref={float(fmap.w_total_ref)!r}")
    lines.append(f"# e_acc_ref={float(fmap.e_acc_ref)!r}")
    lines.append(f"# label={fmap.label}")
    for k, v in fmap.meta.items():
        lines.append(f"# {k}={v}")
    lines.append(",".join(COLUMNS))
    for row in zip(fmap.r, fmap.z, fmap.e_norm, fmap.area_weight):
        lines.append(",".join(repr(float(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_field_map(path) -> FieldMap:
    """Read a field-map CSV written by :func:`save_field_map` or an external exporter."""
    path = Path(path)
    header = {}
    rows = []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    header[key.strip()] = value.strip()
                continue
            cells = [c.strip() for c in line.split(",")]
            if tuple(cells) == COLUMNS:
                continue
            if len(cells) != len(COLUMNS):
                raise FieldMapError(f"{path}:{lineno}: expected {len(COLUMNS)} columns, got {len(cells)}")
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                col = next(i for i, c in enumerate(cells) if not _is_float(c))
                raise FieldMapError(
                    f"{path}:{lineno}: column {col + 1} ({COLUMNS[col]}): cannot parse {cells[col]!r}"
                ) from None
    for key in ("w_total_ref", "e_acc_ref"):
        if key not in header:
            raise FieldMapError(f"{path}: missing header '# {key}=...'")
    try:
        w_total_ref = float(header.pop("w_total_ref"))
        e_acc_ref = float(header.pop("e_acc_ref"))
    except ValueError as exc:
        raise FieldMapError(f"{path}: bad header value: {exc}") from None
    label = header.pop("label", "")
    data = np.array(rows, dtype=float).reshape(-1, len(COLUMNS))
    return FieldMap(r=data[:, 0], z=data[:, 1], e_norm=data[:, 2], area_weight=data[:, 3],
                    w_total_ref=w_total_ref, e_acc_ref=e_acc_ref, label=label,
                    meta={k: v for k, v in header.items() if k not in provenance.KEYS})


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True
