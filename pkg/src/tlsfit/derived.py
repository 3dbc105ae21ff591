"""Microscopic TLS quantities back-calculated from fitted (c, E_c).

A fit only constrains the combinations c and E_c, so every estimate here
needs an assumed dipole moment; the atomic-scale default is
``p = 1e-29 C m`` (about one electron charge times one angstrom).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import EPS0, HBAR, K_B
from .errors import DomainError
from .kernels import ThermalContext, rho_area_from_coefficient

DEFAULT_DIPOLE = 1e-29          # C m
DEFAULT_DELTA_SPREAD = 3.0      # K, spread of TLS asymmetry energies
DEFAULT_EPS_R = 33.0


def _positive(**kw):
    for name, v in kw.items():
        if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
            raise DomainError(f"{name} must be a positive finite number, got {v!r}")


def critical_field(p: float, sqrt_t1t2: float) -> float:
    """Saturation field sqrt(3/2) hbar / (p sqrt(T1 T2))."""
    _positive(p=p, sqrt_t1t2=sqrt_t1t2)
    return math.sqrt(1.5) * HBAR / (p * sqrt_t1t2)


def sqrt_t1t2_from_ec(p: float, e_c: float) -> float:
    """sqrt(T1 T2) in seconds from the critical field and dipole moment."""
    _positive(p=p, e_c=e_c)
    return math.sqrt(1.5) * HBAR / (p * e_c)


def area_density_from_c(c: float, p: float, ctx: ThermalContext, delta_spread: float) -> float:
    """TLS area density (1/m^2), taking rho' = sigma_TLS / (pi k_B delta_spread)."""
    _positive(c=c, p=p, delta_spread=delta_spread)
    rho_area = rho_area_from_coefficient(c, p, ctx)
    return rho_area * math.pi * K_B * delta_spread


def zero_field_loss_tangent(c: float, ctx: ThermalContext, thickness: float, eps_r: float) -> float:
    """Loss tangent of a lossy layer in the low-field, low-temperature limit.

    ``4 c * 2 k_B T / (eps_r eps_0 * thickness * hbar omega0)``.
    """
    _positive(c=c, thickness=thickness, eps_r=eps_r)
    return 4.0 * c * 2.0 * K_B * ctx.temperature / (eps_r * EPS0 * thickness * HBAR * ctx.omega0)


@dataclass(frozen=True)
class MicroscopicEstimate:
    dipole_assumed: float
    sqrt_t1t2: float
    sigma_tls_area: float
    tan_delta_zero_field: float
    inputs_echo: dict

    def rows(self) -> list[tuple[str, str, str]]:
        """``(quantity, value, unit)`` rows, assumptions first."""
        echo = self.inputs_echo
        return [
            ("assumed dipole p", f"{self.dipole_assumed:.4g}", "C m"),
            ("assumed asymmetry spread", f"{echo['delta_spread_K']:.4g}", "K"),
            ("assumed relative permittivity", f"{echo['eps_r']:.4g}", ""),
            ("assumed layer thickness", f"{echo['thickness']:.4g}", "m"),
            ("temperature", f"{echo['temperature']:.4g}", "K"),
            ("frequency", f"{echo['frequency']:.6g}", "Hz"),
            ("input E_c", f"{echo['e_c']:.4g}", "V/m"),
            ("input c", f"{echo['c']:.4g}", "C^2/J"),
            ("sqrt(T1 T2)", f"{self.sqrt_t1t2:.4g}", "s"),
            ("TLS area density", f"{self.sigma_tls_area:.4g}", "1/m^2"),
            ("TLS area density", f"{self.sigma_tls_area * 1e-4:.4g}", "1/cm^2"),
            ("zero-field loss tangent", f"{self.tan_delta_zero_field:.4g}", ""),
        ]


def microscopic_estimate(e_c: float, c: float, ctx: ThermalContext, thickness: float,
                         p: float = DEFAULT_DIPOLE, eps_r: float = DEFAULT_EPS_R,
                         delta_spread: float = DEFAULT_DELTA_SPREAD) -> MicroscopicEstimate:
    return MicroscopicEstimate(
        dipole_assumed=p,
        sqrt_t1t2=sqrt_t1t2_from_ec(p, e_c),
        sigma_tls_area=area_density_from_c(c, p, ctx, delta_spread),
        tan_delta_zero_field=zero_field_loss_tangent(c, ctx, thickness, eps_r),
        inputs_echo={"e_c": e_c, "c": c, "thickness": thickness, "eps_r": eps_r,
                     "delta_spread_K": delta_spread, "temperature": ctx.temperature,
                     "frequency": ctx.frequency},
    )
