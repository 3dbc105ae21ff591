"""Forward model for 1/Q(E_acc).

Surface-integral kinds sum, over TLS species and field-map samples, the
local ``|E|^2 dA / W_total`` times a saturation kernel evaluated at the
local field.  The beta model instead applies one global kernel in E_acc.

Model catalog
-------------
``interacting``      one species with the interpolating bracket
                     (e_c, c, q_nontls_inv, xi)
``nonint<n>``        n noninteracting species
                     (e_c1..e_cn, c1..cn, q_nontls_inv)
``beta``             (e_c, f_delta, q_nontls_inv, beta)
``gauss_ec``         Gaussian spread of E_c (mean e_c, relative width)
``exp_ec``           exponential spread of E_c (scale e_c)
``gauss_dipole``     Gaussian spread of the dipole p around its mean
``exp_dipole``       exponential spread of the dipole p (mean = scale)

Distribution kinds use the noninteracting kernel under the average.  For
the dipole kinds a TLS with dipole ``u`` times the mean carries loss
weight ``u^2`` and critical field ``e_c / u``; the weight is normalised so
that ``c`` is the total zero-field coefficient of the distribution and
``e_c`` is the critical field of the mean-dipole TLS.  This coupling of c
and E_c through p is a modelling convention and is flagged in reports.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, QuadratureError
from .field import FieldMap, scale_to_eacc
from .kernels import ThermalContext, bracket_interp, kernel_beta, kernel_noninteracting

INTERACTING = "interacting_one_species"
NONINTERACTING = "noninteracting_n_species"
BETA = "beta_model"
DIST_GAUSSIAN_EC = "dist_gaussian_ec"
DIST_EXPONENTIAL_EC = "dist_exponential_ec"
DIST_GAUSSIAN_DIPOLE = "dist_gaussian_dipole"
DIST_EXPONENTIAL_DIPOLE = "dist_exponential_dipole"

DIST_KINDS = {
    DIST_GAUSSIAN_EC: ("gaussian", "ec"),
    DIST_EXPONENTIAL_EC: ("exponential", "ec"),
    DIST_GAUSSIAN_DIPOLE: ("gaussian", "dipole"),
    DIST_EXPONENTIAL_DIPOLE: ("exponential", "dipole"),
}

SHORT_NAMES = {
    INTERACTING: "interacting",
    BETA: "beta",
    DIST_GAUSSIAN_EC: "gauss_ec",
    DIST_EXPONENTIAL_EC: "exp_ec",
    DIST_GAUSSIAN_DIPOLE: "gauss_dipole",
    DIST_EXPONENTIAL_DIPOLE: "exp_dipole",
}


@dataclass(frozen=True)
class ParamDef:
    """Free parameter with its search box; ``transform`` is 'log' or 'logit'."""

    name: str
    lo: float
    hi: float
    transform: str = "log"


# search boxes bracket the published best fits by >= 2 decades
_BOUNDS = {
    "e_c": (1e1, 1e8),
    "c": (1e-27, 1e-20),
    "xi": (1.0, 1e6),
    "q_nontls_inv": (1e-13, 1e-9),
    "f_delta": (1e-14, 1e-8),
    "width": (1e-3, 1e1),
    "beta": (0.0, 1.0),
}


def _pdef(name):
    base = re.sub(r"\d+$", "", name)
    lo, hi = _BOUNDS[base]
    return ParamDef(name, lo, hi, "logit" if base == "beta" else "log")


def parse_model_name(name: str) -> tuple[str, int]:
    """Map a short name ('interacting', 'nonint2', 'beta', ...) to ``(kind, n_species)``."""
    name = name.strip().lower()
    m = re.fullmatch(r"nonint(\d+)", name)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise ValueError(f"nonint needs at least one species: {name!r}")
        return NONINTERACTING, n
    for kind, short in SHORT_NAMES.items():
        if name in (short, kind):
            return kind, 1
    raise ValueError(f"unknown model {name!r}; expected one of "
                     f"{', '.join(list(SHORT_NAMES.values()) + ['nonint<n>'])}")


def short_name(kind: str, n_species: int = 1) -> str:
    if kind == NONINTERACTING:
        return f"nonint{n_species}"
    return SHORT_NAMES[kind]


def param_names(kind: str, n_species: int = 1) -> list[str]:
    if kind == INTERACTING:
        return ["e_c", "c", "q_nontls_inv", "xi"]
    if kind == NONINTERACTING:
        if n_species == 1:
            return ["e_c", "c", "q_nontls_inv"]
        return ([f"e_c{j}" for j in range(1, n_species + 1)]
                + [f"c{j}" for j in range(1, n_species + 1)] + ["q_nontls_inv"])
    if kind == BETA:
        return ["e_c", "f_delta", "q_nontls_inv", "beta"]
    if kind in (DIST_GAUSSIAN_EC, DIST_GAUSSIAN_DIPOLE):
        return ["e_c", "width", "c", "q_nontls_inv"]
    if kind in (DIST_EXPONENTIAL_EC, DIST_EXPONENTIAL_DIPOLE):
        return ["e_c", "c", "q_nontls_inv"]
    raise ValueError(f"unknown model kind {kind!r}")


def param_defs(kind: str, n_species: int = 1) -> list[ParamDef]:
    return [_pdef(n) for n in param_names(kind, n_species)]


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre in log(parameter).

    ``n_nodes`` per panel; panels are at most ``panel_width`` wide in
    log-space.  With ``check`` the rule is re-run with doubled nodes and a
    relative change above ``rtol`` raises :class:`QuadratureError`.
    """

    n_nodes: int = 12
    panel_width: float = 1.0
    check: bool = True
    rtol: float = 1e-6


@dataclass(frozen=True)
class Distribution:
    """Distribution of TLS parameters.

    ``family`` is 'gaussian' (truncated at zero) or 'exponential'; ``over``
    is 'ec' (critical field spread, ``center`` is the mean or scale in V/m)
    or 'dipole' (dipole spread relative to its mean, ``center`` is the
    mean-dipole critical field).  ``width`` is the relative standard
    deviation of a Gaussian and is ignored for the exponential.
    """

    family: str
    over: str
    center: float
    width: float = 0.0

    def __post_init__(self):
        if self.family not in ("gaussian", "exponential"):
            raise DomainError(f"unknown distribution family {self.family!r}")
        if self.over not in ("ec", "dipole"):
            raise DomainError(f"distribution must be over 'ec' or 'dipole', got {self.over!r}")
        if not self.center > 0:
            raise DomainError(f"distribution center/scale must be > 0, got {self.center!r}")
        if self.family == "gaussian" and not self.width > 0:
            raise DomainError(f"gaussian width must be > 0, got {self.width!r}")


def _panel_rule(a, b, h, n):
    m = max(1, math.ceil((b - a) / h - 1e-9))
    edges = np.linspace(a, b, m + 1)
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()


def _log_density(dist: Distribution, theta):
    """Unnormalised log-density of the loss-weighted variable."""
    # dipole spreads weight each TLS by u^2 (c proportional to p^2)
    k = 2.0 if dist.over == "dipole" else 0.0
    mean = 1.0 if dist.over == "dipole" else dist.center
    with np.errstate(divide="ignore"):
        logt = np.log(theta)
    if dist.family == "gaussian":
        sd = dist.width * mean
        return k * logt - 0.5 * ((theta - mean) / sd) ** 2
    return k * logt - theta / mean


def _quadrature_nodes(dist: Distribution, n_nodes: int, panel_width: float):
    """Nodes ``theta`` and normalised weights for the loss-weighted density."""
    k = 2.0 if dist.over == "dipole" else 0.0
    mean = 1.0 if dist.over == "dipole" else dist.center
    # mass below lo scales as lo^(k+1); keep it under ~1e-13
    floor = mean * 1e-13 ** (1.0 / (k + 1.0))
    pieces = []
    if dist.family == "gaussian":
        sd = dist.width * mean
        hi = mean + 12.0 * sd
        lo = mean - 12.0 * sd
        if lo <= 0:
            lo = floor
        split = max(lo, mean / 20.0)
        if split > lo:
            pieces.append(_panel_rule(math.log(lo), math.log(split), 2.0 * panel_width, n_nodes))
        rel = dist.width
        fine = min(panel_width, 2.0 * rel / (1.0 + 2.0 * rel))
        pieces.append(_panel_rule(math.log(split), math.log(hi), fine, n_nodes))
    else:
        hi = mean * 60.0
        pieces.append(_panel_rule(math.log(floor), math.log(hi), panel_width, n_nodes))
    x = np.concatenate([p[0] for p in pieces])
    w = np.concatenate([p[1] for p in pieces])
    theta = np.exp(x)
    logg = _log_density(dist, theta) + x
    g = np.exp(logg - logg.max()) * w
    return theta, g / g.sum()


def _dist_kernel(kernel_kind, e, ec_nodes, xi):
    ratio2 = (e[..., None] / ec_nodes) ** 2
    if kernel_kind == "noninteracting":
        return 1.0 / np.sqrt(1.0 + ratio2)
    if kernel_kind == "interacting":
        dxi = xi - 1.0
        if abs(dxi) < 1e-6:
            return 1.0 / np.sqrt(1.0 + ratio2)
        pre = dxi / (xi * math.log1p(dxi))
        return (pre * 0.5 * np.log1p(dxi * (xi + 1.0) / (1.0 + ratio2))
                + 1.0 / (xi * np.sqrt(1.0 + ratio2 / (xi * xi))))
    raise DomainError(f"unknown kernel kind {kernel_kind!r}")


def _dist_average_once(kernel_kind, dist, e, n_nodes, panel_width, xi):
    theta, wts = _quadrature_nodes(dist, n_nodes, panel_width)
    ec_nodes = dist.center / theta if dist.over == "dipole" else theta
    return _dist_kernel(kernel_kind, e, ec_nodes, xi) @ wts


def dist_average(kernel_kind: str, dist: Distribution, e, quad: QuadratureSpec = QuadratureSpec(),
                 xi: float = 1.0):
    """Average saturation kernel over a TLS parameter distribution.

    Parameters
    ----------
    kernel_kind : {'noninteracting', 'interacting'}
        Kernel under the average; 'interacting' uses the bracket with ``xi``.
    dist : Distribution
    e : float or ndarray
        Local field(s), V/m.
    quad : QuadratureSpec

    Returns
    -------
    float or ndarray
        The averaged factor, 1 at zero field.
    """
    arr = np.asarray(e, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("field must be >= 0")
    val = _dist_average_once(kernel_kind, dist, arr, quad.n_nodes, quad.panel_width, xi)
    if quad.check:
        fine = _dist_average_once(kernel_kind, dist, arr, 2 * quad.n_nodes, quad.panel_width, xi)
        err = np.max(np.abs(fine - val) / np.maximum(np.abs(fine), 1e-300))
        if err > quad.rtol:
            raise QuadratureError(f"distribution average changed by {err:.3g} (relative) "
                                  f"when doubling nodes")
    val = np.where(arr == 0, 1.0, val)
    return float(val) if np.ndim(e) == 0 else val


@dataclass(frozen=True)
class QPoint:
    e_acc: float
    q: float

    def __post_init__(self):
        if not self.e_acc >= 0:
            raise DomainError(f"e_acc must be >= 0, got {self.e_acc!r}")
        if not self.q > 0:
            raise DomainError(f"q must be > 0, got {self.q!r}")


@dataclass(frozen=True)
class ModelSpec:
    """A loss model with concrete parameter values.

    ``params`` maps each name of :func:`param_names` to its value (SI units).
    Loss coefficients may be zero; every other scale parameter must be > 0.
    """

    kind: str
    params: dict
    n_species: int = 1
    ctx: Optional[ThermalContext] = None
    quad: QuadratureSpec = field(default_factory=lambda: QuadratureSpec(check=False))

    def __post_init__(self):
        names = param_names(self.kind, self.n_species)
        if set(self.params) != set(names):
            raise DomainError(f"{self.name}: expected parameters {names}, got {sorted(self.params)}")
        object.__setattr__(self, "params", {n: float(self.params[n]) for n in names})
        for name, v in self.params.items():
            base = re.sub(r"\d+$", "", name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
            if base in ("c", "q_nontls_inv", "f_delta"):
                if v < 0:
                    raise DomainError(f"{name} must be >= 0, got {v!r}")
            elif base == "xi":
                if v < 1:
                    raise DomainError(f"xi must be >= 1, got {v!r}")
            elif base == "beta":
                if not 0 < v <= 1:
                    raise DomainError(f"beta must lie in (0, 1], got {v!r}")
            elif v <= 0:
                raise DomainError(f"{name} must be > 0, got {v!r}")

    @property
    def name(self) -> str:
        return short_name(self.kind, self.n_species)

    @property
    def names(self) -> list[str]:
        return param_names(self.kind, self.n_species)

    def vector(self) -> np.ndarray:
        return np.array([self.params[n] for n in self.names])

    def with_vector(self, values) -> "ModelSpec":
        return ModelSpec(self.kind, dict(zip(self.names, map(float, values))),
                         self.n_species, self.ctx, self.quad)

    @classmethod
    def from_name(cls, name: str, params: dict, **kw) -> "ModelSpec":
        kind, n = parse_model_name(name)
        return cls(kind, params, n, **kw)

    def distribution(self) -> Distribution:
        family, over = DIST_KINDS[self.kind]
        return Distribution(family, over, self.params["e_c"], self.params.get("width", 0.0))

    def species(self) -> list[tuple[float, float]]:
        """``(c_j, e_c_j)`` pairs for the noninteracting kinds."""
        if self.kind != NONINTERACTING:
            raise DomainError(f"{self.name} has no discrete noninteracting species")
        if self.n_species == 1:
            return [(self.params["c"], self.params["e_c"])]
        return [(self.params[f"c{j}"], self.params[f"e_c{j}"]) for j in range(1, self.n_species + 1)]


def inverse_q(spec: ModelSpec, fmap: FieldMap, e_acc):
    """1/Q from the surface integral at accelerating field(s) ``e_acc`` (V/m).

    The ratio ``|E|^2 / W_total`` does not depend on the mode amplitude, so
    it is taken at reference normalisation; only the kernels see the
    scaled local field.  Zero field therefore needs no special case.
    """
    if spec.kind == BETA:
        raise DomainError("beta model has no surface integral; use inverse_q_beta")
    fields = scale_to_eacc(fmap, e_acc)
    weights = fmap.loss_weights()
    p = spec.params
    if spec.kind == INTERACTING:
        tls = p["c"] * (bracket_interp(fields, p["e_c"], p["xi"]) @ weights)
    elif spec.kind == NONINTERACTING:
        tls = sum(c * (kernel_noninteracting(fields, ec) @ weights) for c, ec in spec.species())
    else:
        avg = dist_average("noninteracting", spec.distribution(), fields, spec.quad)
        tls = p["c"] * (avg @ weights)
    out = tls + p["q_nontls_inv"]
    return float(out) if np.ndim(e_acc) == 0 else out


def inverse_q_beta(spec: ModelSpec, e_acc):
    """1/Q of the global exponent-beta model at ``e_acc`` (V/m)."""
    if spec.kind != BETA:
        raise DomainError(f"inverse_q_beta needs the beta model, got {spec.name}")
    p = spec.params
    return p["f_delta"] * kernel_beta(e_acc, p["e_c"], p["beta"]) + p["q_nontls_inv"]


def model_inverse_q(spec: ModelSpec, fmap: Optional[FieldMap], e_acc):
    """Dispatch to :func:`inverse_q_beta` or :func:`inverse_q` by model kind."""
    if spec.kind == BETA:
        return inverse_q_beta(spec, e_acc)
    if fmap is None:
        raise DomainError(f"{spec.name} needs a field map")
    return inverse_q(spec, fmap, e_acc)


def model_q(spec: ModelSpec, fmap: Optional[FieldMap], e_acc):
    return 1.0 / model_inverse_q(spec, fmap, e_acc)
