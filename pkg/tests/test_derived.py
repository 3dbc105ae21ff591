import math

import pytest

from tlsfit import (
    ThermalContext,
    area_density_from_c,
    microscopic_estimate,
    species_coefficient,
    sqrt_t1t2_from_ec,
    zero_field_loss_tangent,
)
from tlsfit.derived import critical_field
from tlsfit.errors import DomainError

CTX = ThermalContext.from_frequency(1.5, 1.3e9)


def test_sqrt_t1t2_thin_oxide():
    assert sqrt_t1t2_from_ec(1e-29, 1.02e5) == pytest.approx(1.27e-10, rel=5e-3, abs=0)


def test_sqrt_t1t2_thick_oxide():
    assert sqrt_t1t2_from_ec(1e-29, 5.15e3) == pytest.approx(2.5e-9, rel=5e-3, abs=0)


def test_critical_field_round_trip():
    tau = 3.3e-10
    assert sqrt_t1t2_from_ec(1e-29, critical_field(1e-29, tau)) == pytest.approx(tau, rel=1e-12, abs=0)


@pytest.mark.parametrize("c, want_cm2", [(6.04e-24, 1.4e11), (1.16e-23, 2.7e11)])
def test_area_density(c, want_cm2):
    sigma = area_density_from_c(c, 1e-29, CTX, 3.0)
    assert sigma * 1e-4 == pytest.approx(want_cm2, rel=0.05, abs=0)


def test_area_density_round_trip():
    # sigma = rho' pi k_B delta, so rho' = sigma / (pi k_B delta)
    sigma = 1.4e15
    from tlsfit.constants import K_B

    rho = sigma / (math.pi * K_B * 3.0)
    c = species_coefficient(1e-29, rho, CTX)
    assert area_density_from_c(c, 1e-29, CTX, 3.0) == pytest.approx(sigma, rel=1e-12, abs=0)


def test_loss_tangent_thin_oxide():
    assert zero_field_loss_tangent(6.04e-24, CTX, 5e-9, 33.0) == pytest.approx(8e-4, rel=0.10, abs=0)


def test_loss_tangent_thickness_scaling():
    a = zero_field_loss_tangent(6.04e-24, CTX, 5e-9, 33.0)
    assert zero_field_loss_tangent(6.04e-24, CTX, 10e-9, 33.0) == pytest.approx(a / 2, rel=1e-14, abs=0)


@pytest.mark.parametrize("kw", [dict(c=0.0), dict(thickness=0.0), dict(eps_r=-1.0)])
def test_loss_tangent_domain(kw):
    args = dict(c=6e-24, ctx=CTX, thickness=5e-9, eps_r=33.0) | kw
    with pytest.raises(DomainError):
        zero_field_loss_tangent(**args)


def test_estimate_echoes_assumptions():
    est = microscopic_estimate(1.02e5, 6.04e-24, CTX, 5e-9)
    assert est.dipole_assumed == 1e-29
    assert est.inputs_echo["eps_r"] == 33.0
    assert est.inputs_echo["delta_spread_K"] == 3.0
    assert est.inputs_echo["thickness"] == 5e-9
    names = [r[0] for r in est.rows()]
    assert names[:4] == ["assumed dipole p", "assumed asymmetry spread", "assumed relative permittivity",
                         "assumed layer thickness"]
    assert est.tan_delta_zero_field == pytest.approx(8e-4, rel=0.1, abs=0)
