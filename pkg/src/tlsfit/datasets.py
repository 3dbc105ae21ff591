"""Dataset CSV files and synthetic data.

Schema::

    # temperature_K=1.5
    # frequency_Hz=1300000000.0
    # label=...
    e_acc_V_per_m,q
    1000.0,15012345678.9
    ...

Extra ``# key=value`` lines are kept in ``Dataset.meta`` and written back
in order, so write -> read -> write reproduces the file byte for byte.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import provenance
from .errors import DatasetError, DomainError
from .field import FieldMap
from .fitting import DEFAULT_EMAX, DEFAULT_SEED, Dataset
from .model import ModelSpec, model_q

COLUMNS = ("e_acc_V_per_m", "q")

# best fits reported for the two TESLA cavities (interacting one-species model)
SCENARIOS = {
    "electropolished": {
        "params": {"e_c": 1.02e5, "c": 6.04e-24, "q_nontls_inv": 1.19e-11, "xi": 21.3},
        "sigma": 6.26e8,
    },
    "anodized": {
        "params": {"e_c": 5.15e3, "c": 1.16e-23, "q_nontls_inv": 1.92e-11, "xi": 205.0},
        "sigma": 3.23e8,
    },
}

DEFAULT_GRID = (1e3, 1e6, 30)


def write_dataset(data: Dataset, path, preamble=()) -> None:
    lines = [f"# {p}" for p in preamble]
    lines.append(f"# temperature_K={data.temperature!r}")
    lines.append(f"# frequency_Hz={data.frequency!r}")
    lines.append(f"# label={data.label}")
    for k, v in data.meta.items():
        lines.append(f"# {k}={v}")
    lines.append(",".join(COLUMNS))
    for e, q in zip(data.e_acc, data.q):
        lines.append(f"{float(e)!r},{float(q)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_dataset(path, e_acc_max: float = DEFAULT_EMAX) -> Dataset:
    """Parse a dataset CSV; errors name the file, line and column."""
    path = Path(path)
    header = {}
    e_vals, q_vals = [], []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition("=")
                if sep:
                    header[key.strip()] = value.strip()
                continue
            cells = [c.strip() for c in line.split(",")]
            if tuple(cells) == COLUMNS:
                continue
            if len(cells) != 2:
                raise DatasetError(f"{path}:{lineno}: expected 2 columns, got {len(cells)}")
            for col, cell in enumerate(cells):
                try:
                    float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}:{lineno}: column {col + 1} ({COLUMNS[col]}): cannot parse {cell!r}") from None
            e_vals.append(float(cells[0]))
            q_vals.append(float(cells[1]))
    if not e_vals:
        raise DatasetError(f"{path}: no data rows")
    try:
        temperature = float(header.pop("temperature_K", 1.5))
        frequency = float(header.pop("frequency_Hz", 1.3e9))
    except ValueError as exc:
        raise DatasetError(f"{path}: bad header value: {exc}") from None
    label = header.pop("label", path.stem)
    meta = {k: v for k, v in header.items() if k not in provenance.KEYS}
    return Dataset(e_vals, q_vals, temperature=temperature, frequency=frequency,
                   e_acc_max_included=e_acc_max, label=label, meta=meta)


def log_grid(e_min: float, e_max: float, n: int) -> np.ndarray:
    if not (0 < e_min < e_max):
        raise DomainError(f"grid needs 0 < e_min < e_max, got {e_min!r}, {e_max!r}")
    if n < 2:
        raise DomainError("grid needs at least 2 points")
    return np.logspace(np.log10(e_min), np.log10(e_max), int(n))


def simulate(spec: ModelSpec, fmap: Optional[FieldMap], e_acc, noise: float,
             seed: int = DEFAULT_SEED, temperature: float = 1.5, frequency: float = 1.3e9,
             label: str = "synthetic") -> Dataset:
    """Model Q at ``e_acc`` plus Gaussian noise of standard deviation ``noise``.

    Noise comes from numpy's PCG64 generator seeded with ``seed`` and its
    ziggurat ``standard_normal`` transform.
    """
    if noise < 0:
        raise DomainError(f"noise must be >= 0, got {noise!r}")
    e_acc = np.asarray(e_acc, dtype=float)
    q = model_q(spec, fmap, e_acc)
    if noise > 0:
        rng = np.random.Generator(np.random.PCG64(seed))
        q = q + noise * rng.standard_normal(e_acc.size)
    if np.any(q <= 0):
        raise DomainError("noise drove a Q value non-positive; lower the noise")
    return Dataset(e_acc, q, temperature=temperature, frequency=frequency, label=label)


def scenario_dataset(name: str, fmap: FieldMap, seed: int = DEFAULT_SEED, noise: Optional[float] = None,
                     grid=DEFAULT_GRID) -> Dataset:
    sc = SCENARIOS[name]
    spec = ModelSpec.from_name("interacting", sc["params"])
    sigma = sc["sigma"] if noise is None else noise
    return simulate(spec, fmap, log_grid(*grid), sigma, seed=seed, label=f"{name}-synthetic-seed{seed}")


def bundled_dataset_path(name: str) -> Path:
    """Path of the packaged synthetic dataset for scenario ``name`` (default seed)."""
    if name not in SCENARIOS:
        raise DatasetError(f"no bundled dataset {name!r}; choose from {sorted(SCENARIOS)}")
    return Path(str(resources.files("tlsfit") / "data" / f"{name}_synthetic.csv"))
