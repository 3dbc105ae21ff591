"""Dimensionless TLS loss kernels.

Every kernel equals 1 at zero field and decays as the drive saturates the
two-level systems.  All fields are in V/m; the functions broadcast over
numpy arrays in ``e`` and return a plain float for scalar input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR, K_B
from .errors import DomainError

# below this |xi - 1| the analytic noninteracting limit is used
XI_LIMIT_TOL = 1e-6


@dataclass(frozen=True)
class TLSSpecies:
    """One TLS species: critical field, loss coefficient, spectral diffusion."""

    e_c: float
    c: float
    xi: float = 1.0

    def __post_init__(self):
        if not self.e_c > 0:
            raise DomainError(f"e_c must be > 0, got {self.e_c!r}")
        if not self.c > 0:
            raise DomainError(f"c must be > 0, got {self.c!r}")
        if not self.xi >= 1:
            raise DomainError(f"xi must be >= 1, got {self.xi!r}")


@dataclass(frozen=True)
class ThermalContext:
    """Bath temperature (K) and angular resonance frequency (rad/s)."""

    temperature: float
    omega0: float

    def __post_init__(self):
        if not self.temperature > 0:
            raise DomainError(f"temperature must be > 0, got {self.temperature!r}")
        if not self.omega0 > 0:
            raise DomainError(f"omega0 must be > 0, got {self.omega0!r}")

    @classmethod
    def from_frequency(cls, temperature: float, frequency: float) -> "ThermalContext":
        return cls(temperature, 2.0 * math.pi * frequency)

    @property
    def frequency(self) -> float:
        return self.omega0 / (2.0 * math.pi)


def _field_array(e):
    arr = np.asarray(e, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("field must be >= 0")
    return arr


def _out(value, like):
    return float(value) if np.ndim(like) == 0 else value


def _check_ec(e_c):
    if not e_c > 0:
        raise DomainError(f"e_c must be > 0, got {e_c!r}")


def bracket_interp(e, e_c: float, xi: float):
    """Interpolating saturation factor between noninteracting and interacting TLS.

    Behaves as 1 for ``e << e_c``, as ``ln(xi e_c / e) / ln(xi)`` for
    ``e_c << e << xi e_c`` and as ``e_c / e`` for ``e >> xi e_c``.

    The logarithm ``ln(xi sqrt[(1 + (e/xi e_c)^2) / (1 + (e/e_c)^2)])`` is
    rewritten exactly as ``0.5 * log1p((xi^2 - 1) / (1 + (e/e_c)^2))``, which
    has no cancellation at either end of the field range.
    """
    _check_ec(e_c)
    if not xi >= 1:
        raise DomainError(f"xi must be >= 1, got {xi!r}")
    arr = _field_array(e)
    a2 = (arr / e_c) ** 2
    if abs(xi - 1.0) < XI_LIMIT_TOL:
        val = 1.0 / np.sqrt(1.0 + a2)
    else:
        dxi = xi - 1.0
        prefactor = dxi / (xi * math.log1p(dxi))
        log_term = 0.5 * np.log1p(dxi * (xi + 1.0) / (1.0 + a2))
        val = prefactor * log_term + 1.0 / (xi * np.sqrt(1.0 + a2 / (xi * xi)))
    val = np.where(arr == 0, 1.0, val)
    return _out(val, e)


def kernel_noninteracting(e, e_c: float):
    """Standard saturation factor ``1 / sqrt(1 + (e/e_c)^2)``."""
    _check_ec(e_c)
    arr = _field_array(e)
    return _out(1.0 / np.sqrt(1.0 + (arr / e_c) ** 2), e)


def kernel_interacting_asymptote(e, e_c: float, xi: float):
    """Logarithmic interacting-TLS factor ``ln(xi e_c / e) / ln(xi)``.

    Only meaningful inside ``e_c <= e <= xi e_c``; used to validate
    :func:`bracket_interp`, never inside a fit.
    """
    _check_ec(e_c)
    if not xi > 1:
        raise DomainError(f"xi must be > 1, got {xi!r}")
    arr = _field_array(e)
    # small slack so the window endpoints themselves are accepted
    lo, hi = e_c * (1 - 1e-12), xi * e_c * (1 + 1e-12)
    if np.any(arr < lo) or np.any(arr > hi):
        raise DomainError("field outside the interacting window [e_c, xi*e_c]")
    return _out(np.log(xi * e_c / arr) / math.log(xi), e)


def kernel_beta(e_acc, e_c: float, beta: float):
    """Phenomenological ``[1 + (e_acc/e_c)^2]^-beta``; units only need to agree."""
    _check_ec(e_c)
    if not (0 < beta <= 1):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    arr = _field_array(e_acc)
    return _out(np.exp(-beta * np.log1p((arr / e_c) ** 2)), e_acc)


def thermal_factor(ctx: ThermalContext) -> float:
    """Thermal population factor ``tanh(hbar omega0 / 2 k_B T)``."""
    return math.tanh(HBAR * ctx.omega0 / (2.0 * K_B * ctx.temperature))


def species_coefficient(p: float, rho_area: float, ctx: ThermalContext) -> float:
    """Loss coefficient c (C^2/J) from dipole moment p (C m) and energy-area density (1/(J m^2))."""
    if not p > 0:
        raise DomainError(f"dipole moment must be > 0, got {p!r}")
    if not rho_area > 0:
        raise DomainError(f"rho_area must be > 0, got {rho_area!r}")
    return math.pi / 12.0 * p * p * thermal_factor(ctx) * rho_area


def rho_area_from_coefficient(c: float, p: float, ctx: ThermalContext) -> float:
    """Inverse of :func:`species_coefficient` for the energy-area density."""
    if not c > 0:
        raise DomainError(f"c must be > 0, got {c!r}")
    if not p > 0:
        raise DomainError(f"dipole moment must be > 0, got {p!r}")
    return 12.0 * c / (math.pi * p * p * thermal_factor(ctx))
