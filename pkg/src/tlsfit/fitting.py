"""Chi-square fitting of loss models to Q(E_acc) data.

The residual variable is Q itself, because the experimental scatter is
estimated in Q units from the low-field plateau.  Parameter errors are
conditional: one parameter is scanned with the others frozen at the best
fit until chi2/DoF rises by one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import (
    DatasetError,
    DatasetTooSmallError,
    DomainError,
    FitConvergenceError,
    InsufficientPlateauError,
    MixedDatasetError,
    UnboundedProfileError,
)
from .field import FieldMap
from .model import (
    DIST_KINDS,
    NONINTERACTING,
    ModelSpec,
    model_q,
    param_defs,
    parse_model_name,
    short_name,
)

DEFAULT_SEED = 1729
DEFAULT_EMAX = 1.0e6      # V/m; points above are excluded from chi2
MIN_FIT_POINTS = 6
MIN_PLATEAU_POINTS = 4
_CHI2_FLOOR = 1e-6

# logit box for beta: (1e-4, 1 - 1e-6)
_LOGIT_BOX = (math.log(1e-4 / (1 - 1e-4)), math.log((1 - 1e-6) / 1e-6))


class DegenerateFitWarning(UserWarning):
    """A best-fit parameter sits within 1% of its search bound."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Measured ``(E_acc, Q)`` points, sorted by E_acc on construction."""

    e_acc: np.ndarray
    q: np.ndarray
    temperature: float = 1.5
    frequency: float = 1.3e9
    e_acc_max_included: float = DEFAULT_EMAX
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        e = np.array(self.e_acc, dtype=float).ravel()
        q = np.array(self.q, dtype=float).ravel()
        if e.shape != q.shape:
            raise DatasetError("e_acc and q must have the same length")
        if np.any(~np.isfinite(e)) or np.any(e < 0):
            raise DatasetError("e_acc values must be finite and >= 0")
        if np.any(~np.isfinite(q)) or np.any(q <= 0):
            raise DatasetError("q values must be finite and > 0")
        order = np.argsort(e, kind="stable")
        e, q = e[order], q[order]
        e.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "e_acc", e)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_points(cls, points, **kw) -> "Dataset":
        return cls([p.e_acc for p in points], [p.q for p in points], **kw)

    def __len__(self):
        return self.e_acc.size

    @property
    def mask(self) -> np.ndarray:
        return self.e_acc <= self.e_acc_max_included

    def included(self) -> tuple[np.ndarray, np.ndarray]:
        m = self.mask
        return self.e_acc[m], self.q[m]

    def trimmed(self, e_acc_max: float) -> "Dataset":
        return replace(self, e_acc_max_included=e_acc_max)

    def require_fit_size(self) -> int:
        n = int(self.mask.sum())
        if n < MIN_FIT_POINTS:
            raise DatasetTooSmallError(
                f"dataset {self.label!r} has {n} points at E_acc <= {self.e_acc_max_included:g} V/m; "
                f"at least {MIN_FIT_POINTS} are needed")
        return n


def default_plateau_cutoff(data: Dataset) -> float:
    """Lowest quartile of the included E_acc values."""
    e, _ = data.included()
    if e.size == 0:
        raise InsufficientPlateauError("no included points")
    return float(np.quantile(e, 0.25))


def estimate_sigma_exp(data: Dataset, plateau_cutoff: Optional[float] = None) -> float:
    """Sample standard deviation (n-1) of Q over the low-field plateau."""
    if plateau_cutoff is None:
        plateau_cutoff = default_plateau_cutoff(data)
    e, q = data.included()
    plateau = q[e <= plateau_cutoff]
    if plateau.size < MIN_PLATEAU_POINTS:
        raise InsufficientPlateauError(
            f"{plateau.size} points at E_acc <= {plateau_cutoff:g} V/m; "
            f"need {MIN_PLATEAU_POINTS} to estimate sigma_exp")
    return float(np.std(plateau, ddof=1))


def _residuals(spec: ModelSpec, e, q, fmap, sigma):
    return (model_q(spec, fmap, e) - q) / sigma


def chi2(spec: ModelSpec, data: Dataset, fmap: Optional[FieldMap], sigma: float) -> float:
    """Sum over included points of ``((Q_model - Q) / sigma)^2``."""
    if not sigma > 0:
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    e, q = data.included()
    r = _residuals(spec, e, q, fmap, sigma)
    return float(r @ r)


@dataclass
class FitConfig:
    """Optimizer settings.

    Starts are drawn log-uniformly (logit-uniformly for beta) inside the
    search box; the best ``n_starts`` of ``n_screen`` random draws seed
    independent Nelder-Mead runs.  Each run restarts from its own optimum
    until chi2 improves by less than ``tol`` (relative).  Starts agree when
    their chi2 is within ``agree_rtol`` of the best one.
    """

    n_starts: int = 12
    n_screen: int = 256
    tol: float = 1e-6
    agree_rtol: float = 1e-3
    seed: int = DEFAULT_SEED
    sigma: Optional[float] = None
    plateau_cutoff: Optional[float] = None
    max_restarts: int = 30
    maxfev: int = 4000
    profile: bool = True
    bounds: dict = field(default_factory=dict)


@dataclass
class FitResult:
    kind: str
    n_species: int
    names: list
    values: np.ndarray
    chi2: float
    dof: int
    sigma_exp: float
    param_errors: list = field(default_factory=list)   # (lower, upper) offsets; None = unbounded
    n_starts_converged: int = 0
    at_bound: list = field(default_factory=list)
    dataset_label: str = ""
    n_points: int = 0
    seed: int = DEFAULT_SEED
    start_chi2: list = field(default_factory=list)

    @property
    def chi2_per_dof(self) -> float:
        return self.chi2 / self.dof

    @property
    def name(self) -> str:
        return short_name(self.kind, self.n_species)

    @property
    def n_free(self) -> int:
        return len(self.names)

    @property
    def params(self) -> dict:
        return dict(zip(self.names, map(float, self.values)))

    def spec(self) -> ModelSpec:
        return ModelSpec(self.kind, self.params, self.n_species)

    def to_dict(self) -> dict:
        return {
            "model": self.name,
            "kind": self.kind,
            "n_species": self.n_species,
            "dataset": self.dataset_label,
            "n_points": self.n_points,
            "dof": self.dof,
            "chi2": self.chi2,
            "chi2_per_dof": self.chi2_per_dof,
            "sigma_exp": self.sigma_exp,
            "seed": self.seed,
            "n_starts_converged": self.n_starts_converged,
            "start_chi2": list(self.start_chi2),
            "at_bound": list(self.at_bound),
            "params": [
                {"name": n, "value": float(v),
                 "lower": None if not self.param_errors else self.param_errors[i][0],
                 "upper": None if not self.param_errors else self.param_errors[i][1]}
                for i, (n, v) in enumerate(zip(self.names, self.values))
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        kind, n = parse_model_name(d["model"])
        return cls(
            kind=kind, n_species=n,
            names=[p["name"] for p in d["params"]],
            values=np.array([p["value"] for p in d["params"]]),
            chi2=d["chi2"], dof=d["dof"], sigma_exp=d["sigma_exp"],
            param_errors=[(p["lower"], p["upper"]) for p in d["params"]],
            n_starts_converged=d.get("n_starts_converged", 0),
            at_bound=list(d.get("at_bound", [])),
            dataset_label=d.get("dataset", ""), n_points=d.get("n_points", 0),
            seed=d.get("seed", DEFAULT_SEED), start_chi2=list(d.get("start_chi2", [])),
        )


class _Transform:
    """Map between natural parameters and the unconstrained search space."""

    def __init__(self, defs, overrides=None):
        self.defs = defs
        lo, hi = [], []
        for d in defs:
            if d.transform == "logit":
                a, b = _LOGIT_BOX
            else:
                plo, phi = (overrides or {}).get(d.name, (d.lo, d.hi))
                a, b = math.log10(plo), math.log10(phi)
            lo.append(a)
            hi.append(b)
        self.lo = np.array(lo)
        self.hi = np.array(hi)

    def to_natural(self, u):
        out = np.empty(len(self.defs))
        for i, d in enumerate(self.defs):
            out[i] = 1.0 / (1.0 + math.exp(-u[i])) if d.transform == "logit" else 10.0 ** u[i]
        return out

    def to_search(self, v):
        out = np.empty(len(self.defs))
        for i, d in enumerate(self.defs):
            out[i] = math.log(v[i] / (1.0 - v[i])) if d.transform == "logit" else math.log10(v[i])
        return out


def _canonical(kind, n_species, values):
    """Order noninteracting species by ascending E_c."""
    if kind != NONINTERACTING or n_species == 1:
        return values
    n = n_species
    ec, c = values[:n], values[n:2 * n]
    order = np.argsort(ec, kind="stable")
    return np.concatenate([ec[order], c[order], values[2 * n:]])


def _run_start(objective, u0, lo, hi, cfg):
    bounds = list(zip(lo, hi))
    x = np.clip(u0, lo, hi)
    f = objective(x)
    for _ in range(cfg.max_restarts):
        # relative tolerance, floored so an exact (chi2 -> 0) fit still terminates
        scale = max(f, _CHI2_FLOOR)
        res = minimize(objective, x, method="Nelder-Mead", bounds=bounds,
                       options={"xatol": 1e-8, "fatol": cfg.tol * scale,
                                "maxfev": cfg.maxfev, "adaptive": len(x) > 3})
        improvement = f - res.fun
        if res.fun <= f:
            x, f = res.x, res.fun
        if improvement <= cfg.tol * max(f, _CHI2_FLOOR):
            break
    return f, x


def fit(kind, data: Dataset, fmap: Optional[FieldMap], cfg: Optional[FitConfig] = None,
        n_species: int = 1) -> FitResult:
    """Minimise chi2 over the free parameters of one model.

    ``kind`` is a model kind or a short name such as ``'nonint2'``; a short
    name overrides ``n_species``.  Raises :class:`FitConvergenceError` when
    fewer than two starts reach the best chi2.
    """
    cfg = cfg or FitConfig()
    if kind != NONINTERACTING:
        kind, n_species = parse_model_name(kind)
    n = data.require_fit_size()
    defs = param_defs(kind, n_species)
    dof = n - len(defs)
    if dof <= 0:
        raise DatasetTooSmallError(f"{n} points leave no degrees of freedom for {len(defs)} parameters")
    sigma = cfg.sigma if cfg.sigma is not None else estimate_sigma_exp(data, cfg.plateau_cutoff)
    if not sigma > 0:
        raise DatasetError(f"sigma_exp = {sigma!r}; a zero-scatter plateau cannot set the chi2 scale")

    e, q = data.included()
    tr = _Transform(defs, cfg.bounds)
    base = ModelSpec(kind, dict(zip([d.name for d in defs], tr.to_natural(0.5 * (tr.lo + tr.hi)))), n_species)

    def objective(u):
        spec = base.with_vector(tr.to_natural(u))
        r = _residuals(spec, e, q, fmap, sigma)
        val = float(r @ r)
        return val if math.isfinite(val) else 1e300

    rng = np.random.default_rng(cfg.seed)
    cand = tr.lo + (tr.hi - tr.lo) * rng.random((max(cfg.n_screen, cfg.n_starts), len(defs)))
    screen = np.array([objective(u) for u in cand])
    starts = cand[np.argsort(screen, kind="stable")[:cfg.n_starts]]

    outcomes = [_run_start(objective, u0, tr.lo, tr.hi, cfg) for u0 in starts]
    fvals = np.array([f for f, _ in outcomes])
    ibest = int(np.argmin(fvals))
    fbest, ubest = outcomes[ibest]
    agree = np.abs(fvals - fbest) <= cfg.agree_rtol * fbest + 1e-9
    n_conv = int(agree.sum())
    if cfg.n_starts >= 2 and n_conv < 2:
        raise FitConvergenceError(
            f"{short_name(kind, n_species)}: only the best start reached chi2 = {fbest:.6g}; "
            f"start outcomes: {', '.join(f'{f:.6g}' for f in fvals)}",
            outcomes=[(float(f), tr.to_natural(u).tolist()) for f, u in outcomes])

    span = tr.hi - tr.lo
    hugging = [d.name for d, u, s in zip(defs, ubest, span)
               if min(u - tr.lo[defs.index(d)], tr.hi[defs.index(d)] - u) < 0.01 * s]
    if hugging:
        warnings.warn(f"{short_name(kind, n_species)}: parameters near search bound: {', '.join(hugging)}",
                      DegenerateFitWarning, stacklevel=2)

    values = _canonical(kind, n_species, tr.to_natural(ubest))
    result = FitResult(
        kind=kind, n_species=n_species, names=[d.name for d in defs], values=values,
        chi2=float(fbest), dof=dof, sigma_exp=float(sigma), n_starts_converged=n_conv,
        at_bound=hugging, dataset_label=data.label, n_points=n, seed=cfg.seed,
        start_chi2=[float(f) for f in fvals],
    )
    # re-evaluate at the canonical ordering so chi2 matches the reported vector exactly
    result.chi2 = chi2(result.spec(), data, fmap, sigma)
    if cfg.profile:
        result.param_errors = [profile_error(result, i, data, fmap, sigma, strict=False)
                               for i in range(len(defs))]
    return result


def _domain(name):
    base = name.rstrip("0123456789")
    if base == "xi":
        return 1.0, math.inf
    if base == "beta":
        return 0.0, 1.0
    return 0.0, math.inf


def profile_error(result: FitResult, param_index: int, data: Dataset, fmap: Optional[FieldMap],
                  sigma: float, strict: bool = True):
    """Conditional 1-sigma offsets ``(lower, upper)`` of one parameter.

    The parameter is moved away from its best-fit value with all others
    frozen until chi2/DoF reaches its minimum plus one; the crossing is
    bracketed by geometric steps and refined with Brent's method.  A side
    that does not cross within a factor 1e3 of the best-fit value (or
    before the parameter's domain ends) is returned as ``None``.  With
    ``strict`` an :class:`UnboundedProfileError` is raised if neither side
    crosses.
    """
    spec = result.spec()
    vec = spec.vector()
    p0 = vec[param_index]
    name = spec.names[param_index]
    dom_lo, dom_hi = _domain(name)
    target = chi2(spec, data, fmap, sigma) / result.dof + 1.0

    def g(v):
        trial = vec.copy()
        trial[param_index] = v
        return chi2(spec.with_vector(trial), data, fmap, sigma) / result.dof - target

    def side(direction):
        prev = p0
        delta = 1e-4
        while True:
            v = p0 * (1.0 + delta) if direction > 0 else p0 / (1.0 + delta)
            at_edge = False
            if direction > 0 and v >= dom_hi:
                v, at_edge = dom_hi, True
            if direction < 0 and v <= dom_lo:
                if dom_lo <= 0:
                    return None
                v, at_edge = dom_lo, True
            if v == prev:
                return None
            if g(v) > 0:
                root = brentq(g, prev, v, xtol=abs(p0) * 1e-13, rtol=1e-12, maxiter=200)
                return float(abs(root - p0))
            if at_edge or delta >= 1e3:
                return None
            prev = v
            delta *= 2.0

    lower, upper = side(-1), side(+1)
    if strict and lower is None and upper is None:
        raise UnboundedProfileError(f"{name}: chi2/DoF + 1 not reached on either side")
    return lower, upper


def compare_models(results) -> list[dict]:
    """Rank fit results by chi2/DoF (ties: fewer free parameters first)."""
    results = list(results)
    if len({(r.dataset_label, r.n_points) for r in results}) > 1:
        raise MixedDatasetError("results were fitted to different datasets")
    if len({round(r.sigma_exp, 9) for r in results}) > 1:
        raise MixedDatasetError("results were fitted with different sigma_exp")
    ranked = sorted(results, key=lambda r: (r.chi2_per_dof, r.n_free))
    rows = []
    for rank, r in enumerate(ranked, start=1):
        errs = r.param_errors or [(None, None)] * r.n_free
        rows.append({
            "rank": rank,
            "model": r.name,
            "chi2_per_dof": r.chi2_per_dof,
            "chi2": r.chi2,
            "dof": r.dof,
            "params": [(n, float(v), lo, hi) for n, v, (lo, hi) in zip(r.names, r.values, errs)],
            "at_bound": list(r.at_bound),
            "coupled_dipole": r.kind in DIST_KINDS and DIST_KINDS[r.kind][1] == "dipole",
        })
    return rows


def _fmt_err(x):
    return "unbounded" if x is None else f"{x:.3g}"


def format_comparison(rows) -> str:
    """Plain-text comparison table."""
    out = [f"{'rank':<5}{'model':<14}{'chi2/DoF':>10}{'chi2':>12}{'DoF':>5}  parameters (conditional 1-sigma: -lower/+upper)"]
    for row in rows:
        first = True
        for name, v, lo, hi in row["params"]:
            lead = (f"{row['rank']:<5}{row['model']:<14}{row['chi2_per_dof']:>10.4g}"
                    f"{row['chi2']:>12.5g}{row['dof']:>5}") if first else " " * 46
            flag = "  [at search bound]" if name in row["at_bound"] else ""
            out.append(f"{lead}  {name} = {v:.4g} (-{_fmt_err(lo)}/+{_fmt_err(hi)}){flag}")
            first = False
        if row["coupled_dipole"]:
            out.append(" " * 48 + "note: c and E_c coupled through the dipole spread")
    out.append("Errors are conditional: other parameters frozen at the best fit, "
               "chi2/DoF raised by 1.")
    return "\n".join(out)
