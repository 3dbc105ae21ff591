"""Command-line interface: ``tlsfit {field,simulate,fit,derive}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, provenance
from .datasets import DEFAULT_GRID, SCENARIOS, log_grid, read_dataset, simulate, write_dataset
from .derived import DEFAULT_DELTA_SPREAD, DEFAULT_DIPOLE, DEFAULT_EPS_R, microscopic_estimate
from .errors import TLSFitError
from .field import (
    DEFAULT_LENGTH,
    DEFAULT_N_RADIAL,
    DEFAULT_RADIUS,
    load_field_map,
    pillbox_frequency,
    pillbox_surface_map,
    save_field_map,
)
from .fitting import (
    DEFAULT_EMAX,
    DEFAULT_SEED,
    FitConfig,
    FitResult,
    compare_models,
    estimate_sigma_exp,
    fit,
    format_comparison,
)
from .kernels import ThermalContext
from .model import BETA, ModelSpec, model_q, param_names, parse_model_name

log = logging.getLogger("tlsfit")

DEFAULT_MODELS = "interacting,nonint1,nonint2,beta"
CURVE_POINTS = 200


class UsageError(Exception):
    pass


def _field_from_args(args):
    if args.field:
        return load_field_map(args.field), [args.field]
    return pillbox_surface_map(args.radius, args.length, args.n_radial), []


def _add_field_flags(p, with_file=True):
    if with_file:
        p.add_argument("--field", metavar="CSV", help="field-map CSV (default: analytic pillbox)")
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS, help="pillbox radius, m")
    p.add_argument("--length", type=float, default=DEFAULT_LENGTH, help="pillbox length, m")
    p.add_argument("--n-radial", type=int, default=DEFAULT_N_RADIAL, help="radial quadrature nodes (>= 8)")


def _check_geometry(args):
    if args.radius <= 0 or args.length <= 0:
        raise UsageError("--radius and --length must be > 0")
    if args.n_radial < 8:
        raise UsageError(f"--n-radial must be >= 8, got {args.n_radial}")


def _header(lines):
    return "".join(f"# {line}\n" for line in lines)


def cmd_field(args, argv) -> int:
    _check_geometry(args)
    fmap = pillbox_surface_map(args.radius, args.length, args.n_radial)
    f0 = pillbox_frequency(args.radius)
    fmap.meta.update({"f0_Hz": repr(f0), "n_samples": str(len(fmap))})
    out = args.out or "fieldmap.csv"
    save_field_map(fmap, out, preamble=provenance.header_lines(argv))
    print(f"f0 = {f0:.6g} Hz")
    print(f"W_total(E_acc = 1 V/m) = {fmap.w_total_ref:.6g} J")
    print(f"samples = {len(fmap)}  (surface area {fmap.total_area:.6g} m^2)")
    print(f"wrote {out}")
    return 0


def _parse_params(pairs):
    out = {}
    for item in pairs or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--param {name}: cannot parse {value!r}") from None
    return out


def cmd_simulate(args, argv) -> int:
    if not args.field:
        _check_geometry(args)
    if not args.grid_min < args.grid_max:
        raise UsageError(f"--grid-min ({args.grid_min:g}) must be below --grid-max ({args.grid_max:g})")
    if args.grid_min <= 0 or args.n_points < 2:
        raise UsageError("--grid-min must be > 0 and --n-points >= 2")
    scenario = SCENARIOS[args.scenario]
    kind, n = parse_model_name(args.model)
    names = param_names(kind, n)
    params = {k: v for k, v in scenario["params"].items() if k in names}
    params.update(_parse_params(args.param))
    missing = [k for k in names if k not in params]
    if missing:
        raise UsageError(f"model {args.model} needs --param for: {', '.join(missing)}")
    unknown = sorted(set(params) - set(names))
    if unknown:
        raise UsageError(f"model {args.model} has no parameter(s): {', '.join(unknown)}")
    spec = ModelSpec(kind, params, n)
    fmap, inputs = (None, []) if kind == BETA and not args.field else _field_from_args(args)
    noise = scenario["sigma"] if args.noise is None else args.noise
    grid = log_grid(args.grid_min, args.grid_max, args.n_points)
    data = simulate(spec, fmap, grid, noise, seed=args.seed, temperature=args.temperature,
                    frequency=args.frequency, label=args.label or f"{args.scenario}-synthetic")
    data.meta.update({"model": spec.name, "noise_sigma": repr(noise),
                      **{f"truth_{k}": repr(v) for k, v in spec.params.items()}})
    out = args.out or "dataset.csv"
    write_dataset(data, out, preamble=provenance.header_lines(argv, args.seed, inputs))
    print(f"wrote {len(data)} points to {out}")
    return 0


def _curve(spec, fmap, e_lo, e_hi):
    e = np.logspace(np.log10(max(e_lo, 1e-12)), np.log10(e_hi), CURVE_POINTS)
    return e, model_q(spec, fmap, e)


def cmd_fit(args, argv) -> int:
    if args.starts < 1:
        raise UsageError("--starts must be >= 1")
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    for m in models:
        try:
            parse_model_name(m)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    data = read_dataset(args.dataset, e_acc_max=args.emax)
    fmap, inputs = _field_from_args(args)
    inputs = [args.dataset, *inputs]
    data.require_fit_size()
    sigma = args.sigma if args.sigma is not None else estimate_sigma_exp(data, args.plateau_cutoff)
    log.info("sigma_exp = %.6g (%s)", sigma, "given" if args.sigma is not None else "plateau estimate")
    cfg = FitConfig(n_starts=args.starts, tol=args.tol, seed=args.seed, sigma=sigma)

    outdir = Path(args.out or "tlsfit-out")
    outdir.mkdir(parents=True, exist_ok=True)
    head = provenance.header_lines(argv, args.seed, inputs)

    results, failures = [], {}
    for name in models:
        log.info("fitting %s", name)
        try:
            results.append(fit(name, data, fmap, cfg))
        except TLSFitError as exc:
            log.error("%s: %s", name, exc)
            failures[name] = str(exc)

    e_inc, _ = data.included()
    for r in results:
        e, q = _curve(r.spec(), fmap, e_inc.min(), e_inc.max())
        lines = [_header(head), f"# model={r.name}\n", "e_acc_V_per_m,q_model\n"]
        lines += [f"{float(a)!r},{float(b)!r}\n" for a, b in zip(e, q)]
        (outdir / f"curve_{r.name}.csv").write_text("".join(lines), encoding="utf-8")

    table = format_comparison(compare_models(results)) if results else "no successful fits"
    if failures:
        table += "\n" + "\n".join(f"FAILED {k}: {v}" for k, v in failures.items())
    (outdir / "comparison.txt").write_text(_header(head) + table + "\n", encoding="utf-8")

    doc = {
        "provenance": dict(line.split("=", 1) for line in head if not line.startswith("input=")),
        "inputs": [line.split("=", 1)[1] for line in head if line.startswith("input=")],
        "dataset": {"label": data.label, "temperature_K": data.temperature,
                    "frequency_Hz": data.frequency, "e_acc_max_included": data.e_acc_max_included,
                    "n_included": int(data.mask.sum())},
        "sigma_exp": sigma,
        "results": [r.to_dict() for r in sorted(results, key=lambda r: (r.chi2_per_dof, r.n_free))],
        "failures": failures,
    }
    (outdir / "results.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(table)
    return 1 if failures else 0


def cmd_derive(args, argv) -> int:
    temperature, frequency = args.temperature, args.frequency
    if args.result:
        doc = json.loads(Path(args.result).read_text(encoding="utf-8"))
        matches = [r for r in doc["results"] if r["model"] == args.model]
        if not matches:
            raise UsageError(f"{args.result} has no fit for model {args.model!r}")
        res = FitResult.from_dict(matches[0])
        if "e_c" not in res.params or "c" not in res.params:
            raise UsageError(f"model {args.model!r} has no single (c, e_c) pair")
        e_c, c = res.params["e_c"], res.params["c"]
        temperature = temperature if temperature is not None else doc["dataset"]["temperature_K"]
        frequency = frequency if frequency is not None else doc["dataset"]["frequency_Hz"]
    else:
        if args.c is None or args.e_c is None:
            raise UsageError("give --result FILE or both --c and --e-c")
        e_c, c = args.e_c, args.c
    if args.thickness is None:
        raise UsageError("missing required flag --thickness (oxide thickness in m)")
    ctx = ThermalContext.from_frequency(temperature if temperature is not None else 1.5,
                                        frequency if frequency is not None else 1.3e9)
    est = microscopic_estimate(e_c, c, ctx, args.thickness, p=args.dipole, eps_r=args.eps_r,
                               delta_spread=args.delta_spread)
    rows = est.rows()
    width = max(len(r[0]) for r in rows)
    text = "\n".join(f"{q:<{width}}  {v:>12}  {u}".rstrip() for q, v, u in rows)
    print(text)
    if args.out:
        inputs = [args.result] if args.result else []
        Path(args.out).write_text(_header(provenance.header_lines(argv, None, inputs)) + text + "\n",
                                  encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tlsfit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tlsfit {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field", help="write the analytic pillbox field map")
    _add_field_flags(p, with_file=False)
    p.add_argument("--out", help="output CSV (default fieldmap.csv)")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("simulate", help="generate a synthetic Q(E_acc) dataset")
    p.add_argument("--model", default="interacting")
    p.add_argument("--scenario", choices=sorted(SCENARIOS), default="electropolished",
                   help="default parameters and noise")
    p.add_argument("--param", action="append", metavar="NAME=VALUE", help="override a model parameter")
    p.add_argument("--grid-min", type=float, default=DEFAULT_GRID[0], help="lowest E_acc, V/m")
    p.add_argument("--grid-max", type=float, default=DEFAULT_GRID[1], help="highest E_acc, V/m")
    p.add_argument("--n-points", type=int, default=DEFAULT_GRID[2])
    p.add_argument("--noise", type=float, help="Gaussian noise sigma in Q units")
    p.add_argument("--temperature", type=float, default=1.5, help="K")
    p.add_argument("--frequency", type=float, default=1.3e9, help="Hz")
    p.add_argument("--label")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", help="output CSV (default dataset.csv)")
    _add_field_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit models to a dataset and compare them")
    p.add_argument("dataset", help="dataset CSV")
    p.add_argument("--models", default=DEFAULT_MODELS, help=f"comma list (default {DEFAULT_MODELS})")
    p.add_argument("--emax", type=float, default=DEFAULT_EMAX, help="exclude points above this E_acc, V/m")
    p.add_argument("--sigma", type=float, help="experimental sigma in Q units (default: plateau estimate)")
    p.add_argument("--plateau-cutoff", type=float, help="plateau upper E_acc, V/m (default: lowest quartile)")
    p.add_argument("--starts", type=int, default=FitConfig.n_starts)
    p.add_argument("--tol", type=float, default=FitConfig.tol)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", help="output directory (default tlsfit-out)")
    _add_field_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("derive", help="microscopic TLS estimates from (c, E_c)")
    p.add_argument("--result", help="results.json written by 'fit'")
    p.add_argument("--model", default="interacting", help="which fit in --result to use")
    p.add_argument("--c", type=float, help="loss coefficient, C^2/J")
    p.add_argument("--e-c", type=float, help="critical field, V/m")
    p.add_argument("--thickness", type=float, help="oxide thickness, m")
    p.add_argument("--dipole", type=float, default=DEFAULT_DIPOLE, help="assumed dipole moment, C m")
    p.add_argument("--delta-spread", type=float, default=DEFAULT_DELTA_SPREAD, help="asymmetry spread, K")
    p.add_argument("--eps-r", type=float, default=DEFAULT_EPS_R)
    p.add_argument("--temperature", type=float, help="K (default 1.5 or the fit's dataset)")
    p.add_argument("--frequency", type=float, help="Hz (default 1.3e9 or the fit's dataset)")
    p.add_argument("--out", help="also write the table to this file")
    p.set_defaults(func=cmd_derive)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args, argv)
    except UsageError as exc:
        parser.error(str(exc))
    except (TLSFitError, OSError) as exc:
        print(f"tlsfit {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
