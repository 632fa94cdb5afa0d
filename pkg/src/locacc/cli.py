"""Command line front end.

    locacc bounds   --ensemble bell3 --method quadrature
    locacc sweep-e1 --phi pi/4 --steps 100 --out e1.csv
    locacc scrooge  --ensemble random:2x2:1 --samples 100000
    locacc distill  --ensemble bellmix:0.7:0.1:0.1:0.1 --m 1
    locacc selftest

Exit codes: 0 success, 2 input error, 3 numerical consistency failure,
4 optimizer budget exhausted (only with ``--strict``).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    chi_L,
    distillation_bound,
    hashing_compatibility_check,
    holevo_chi,
    is_bell_diagonal,
    jrw_lambda,
    lambda_L,
    lambda_L_product_average,
    swap_parties,
)
from .ensembles import (
    BUILTINS,
    _angle,
    average_state,
    is_product_average,
    resolve_decomposition,
    resolve_ensemble,
)
from .errors import BudgetExhausted, InputError, LocaccError, NumericalError, SchemaError
from .haar import make_rng, sample_product_basis_matrices, sample_unitaries
from .oracle import GLOBAL_MAX_DIM, average_product_basis_mi, optimize_global_orthogonal, optimize_two_step_locc
from .reports import SWEEP_HEADER, dumps, envelope, rows_to_csv, sweep_e1
from .scrooge import GLOBAL, PRODUCT, constancy_check, mode_agreement, sample_scrooge

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_BUDGET = 0, 2, 3, 4
SANDWICH_TOL = 1e-9


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage problems are input errors too, reported as JSON like the rest
        self.print_usage(sys.stderr)
        print(dumps({"error": "UsageError", "message": message}))
        raise SystemExit(EXIT_INPUT)


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _angle_arg(text):
    try:
        return _angle(text)
    except SchemaError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p, ensemble_default=None, method_default="auto"):
    p.add_argument("--ensemble", default=ensemble_default, required=ensemble_default is None,
                   help=f"path to an ensemble JSON file or a builtin: {', '.join(BUILTINS)}")
    p.add_argument("--method", choices=("quadrature", "mc", "auto"), default=method_default,
                   help="quadrature needs a qubit party; auto picks it when possible")
    p.add_argument("--ntheta", type=_positive_int, default=64)
    p.add_argument("--nphi", type=_positive_int, default=64)
    p.add_argument("--samples", type=_positive_int, default=200_000, help="Monte Carlo product samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--out", help="write the report here instead of stdout")


def _bound_opts(args):
    return {"ntheta": args.ntheta, "nphi": args.nphi, "samples": args.samples,
            "seed": args.seed, "threads": args.threads}


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _flat_csv(results):
    rows = []
    for key, r in results.items():
        if isinstance(r, dict) and "value_bits" in r:
            rows.append((key, r["value_bits"], r.get("std_error_bits", 0.0), r.get("method", "")))
    return rows_to_csv(("quantity", "value_bits", "std_error_bits", "method"), rows)


# --- bounds -------------------------------------------------------------

def _two_step(e, args):
    if 2 not in e.dims or len(e.dims) != 2:
        return None
    ee = e if e.dims[0] == 2 else swap_parties(e)
    res = optimize_two_step_locc(ee, budget=args.budget, restarts=args.restarts, seed=args.seed,
                                 strict=args.strict)
    return res


def cmd_bounds(args):
    t0 = time.perf_counter()
    e = resolve_ensemble(args.ensemble)
    opts = _bound_opts(args)
    chi = holevo_chi(e)
    results = {"chi": chi.to_dict(), "lambda": jrw_lambda(e).to_dict()}
    upper = None
    if len(e.dims) == 2:
        upper = chi_L(e, args.e_out)
        results["chi_L"] = upper.to_dict()
    low = lambda_L(e, args.method, **opts)
    results["lambda_L"] = low.to_dict()
    if len(e.dims) == 2 and is_product_average(e):
        results["lambda_L_product_average"] = lambda_L_product_average(
            e, args.method, form=args.eq3_form, **opts).to_dict()
    oracle = {}
    if args.bases > 0:
        mean, se = average_product_basis_mi(e, args.bases, make_rng(args.seed))
        oracle["product_basis_average"] = {"value_bits": mean, "std_error_bits": se, "n_bases": args.bases}
    two = None
    if args.budget > 0:
        two = _two_step(e, args)
        if two is not None:
            oracle["two_step_locc"] = two.to_dict()
        if e.dim <= GLOBAL_MAX_DIM:
            glob = optimize_global_orthogonal(e, budget=args.budget, restarts=args.restarts,
                                              seed=args.seed, strict=args.strict)
            oracle["global_orthogonal"] = glob.to_dict()
    results["oracle"] = oracle
    sigma = 3.0 * low.std_error
    sandwich = {"lambda_L": low.value, "locc_lower": two.value if two is not None else None,
                "chi_L": upper.value if upper is not None else None, "chi": chi.value}
    checks = [low.value <= chi.value + sigma + SANDWICH_TOL]
    if two is not None:
        checks.append(low.value <= two.value + sigma + SANDWICH_TOL)
        if upper is not None:
            checks.append(two.value <= upper.value + SANDWICH_TOL)
        checks.append(two.value <= chi.value + SANDWICH_TOL)
    sandwich["holds"] = all(checks)
    results["sandwich"] = sandwich
    params = {"ensemble": args.ensemble, "dims": list(e.dims), "method": args.method, **opts,
              "bases": args.bases, "budget": args.budget, "restarts": args.restarts,
              "e_out": args.e_out, "eq3_form": args.eq3_form}
    doc = envelope("bounds", args.seed, params, results, t0)
    _emit(_flat_csv(results) if args.format == "csv" else dumps(doc), args.out)
    return EXIT_OK


# --- sweep-e1 -----------------------------------------------------------

def cmd_sweep_e1(args):
    t0 = time.perf_counter()
    method = "quadrature" if args.method == "auto" else args.method
    rows = sweep_e1(args.phi, args.theta_min, args.theta_max, args.steps, method, **_bound_opts(args))
    if args.format == "csv":
        _emit(rows_to_csv(SWEEP_HEADER, rows), args.out)
    else:
        params = {"phi": args.phi, "theta_min": args.theta_min, "theta_max": args.theta_max,
                  "steps": args.steps, "method": method, **_bound_opts(args)}
        results = {"rows": [dict(zip(SWEEP_HEADER, r)) for r in rows]}
        _emit(dumps(envelope("sweep-e1", args.seed, params, results, t0)), args.out)
    return EXIT_OK


# --- scrooge ------------------------------------------------------------

def cmd_scrooge(args):
    t0 = time.perf_counter()
    e = resolve_ensemble(args.ensemble)
    rho = average_state(e)
    rng = make_rng(args.seed)
    s = sample_scrooge(rho, args.samples, rng, seed=args.seed)
    err, scale = s.recovery()
    dims = rho.dims
    pbases = sample_product_basis_matrices(dims, args.bases, rng)
    gbases = sample_unitaries(rho.dim, args.bases, rng)
    prod_stats = constancy_check(s, args.bases, mode=PRODUCT, bases=pbases)
    glob_stats = constancy_check(s, args.bases, mode=GLOBAL, bases=gbases)
    results = {"recovery": {"max_error": err, "mc_scale": scale, "within_5_scale": err <= 5 * scale},
               "product": prod_stats.to_dict(), "global": glob_stats.to_dict()}
    if args.bases > 1 and len(s) >= 20:
        diff, sigma = mode_agreement(s, pbases, gbases)
        results["mode_agreement"] = {"difference_bits": diff, "sigma_bits": sigma,
                                     "within_3_sigma": abs(diff) <= 3 * sigma + SANDWICH_TOL}
    if args.dump_sample:
        Path(args.dump_sample).write_text(json.dumps(s.to_dict()), encoding="utf-8")
    params = {"ensemble": args.ensemble, "dims": list(dims), "samples": args.samples, "bases": args.bases,
              "dump_sample": args.dump_sample}
    _emit(dumps(envelope("scrooge", args.seed, params, results, t0)), args.out)
    return EXIT_OK


# --- distill ------------------------------------------------------------

def _load_isometry(path):
    if path is None:
        return None
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        arr = np.asarray(doc, dtype=np.float64)
        return arr[..., 0] + 1j * arr[..., 1] if arr.ndim == 3 else arr.astype(np.complex128)
    except (OSError, ValueError, TypeError, IndexError) as exc:
        raise SchemaError(f"cannot read isometry {path}: {exc}") from None


def cmd_distill(args):
    t0 = time.perf_counter()
    d = resolve_decomposition(args.ensemble)
    iso = _load_isometry(args.isometry)
    opts = _bound_opts(args)
    results = {}
    if is_bell_diagonal(d):
        chk = hashing_compatibility_check(d, args.m, iso, args.method, **opts)
        results["distill_D"] = chk.bound.to_dict()
        results["hashing"] = {"hashing_yield_bits": chk.hashing_yield, "compatible": chk.compatible}
    else:
        results["distill_D"] = distillation_bound(d, args.m, iso, args.method, **opts).to_dict()
    params = {"ensemble": args.ensemble, "dims": list(d.dims), "m": args.m, "isometry": args.isometry,
              "method": args.method, **opts}
    _emit(dumps(envelope("distill", args.seed, params, results, t0)), args.out)
    return EXIT_OK


# --- selftest -----------------------------------------------------------

def cmd_selftest(args):
    from .acceptance import run_all

    t0 = time.perf_counter()
    results = run_all(only=set(args.only) if args.only else None,
                      echo=lambda line: print(line, file=sys.stderr, flush=True))
    passed = all(r.passed for r in results)
    doc = envelope("selftest", None, {"only": args.only}, {"passed": passed,
                   "criteria": [r.to_dict() for r in results]}, t0)
    _emit(dumps(doc), args.out)
    return EXIT_OK if passed else EXIT_NUMERICAL


def build_parser():
    p = _Parser(prog="locacc", description="Bounds on locally accessible information.")
    p.add_argument("--version", action="version", version=f"locacc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bounds", help="chi, Lambda, chi_L, Lambda_L and oracle values for one ensemble")
    _common(b)
    b.add_argument("--bases", type=_nonneg_int, default=10_000, help="random product bases for the oracle (0 skips)")
    b.add_argument("--budget", type=_nonneg_int, default=5000, help="optimizer evaluations (0 skips)")
    b.add_argument("--restarts", type=_positive_int, default=4)
    b.add_argument("--strict", action="store_true", help="fail with exit 4 when an optimizer runs out of budget")
    b.add_argument("--e-out", type=float, default=0.0, help="average output entanglement for chi_L")
    b.add_argument("--eq3-form", choices=("derived", "printed"), default="derived",
                   help="expression used for the product-average cross-check")
    b.add_argument("--format", choices=("json", "csv"), default="json")
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("sweep-e1", help="Lambda_L of the E1 family along theta")
    _common(s, ensemble_default="e1", method_default="quadrature")
    s.add_argument("--phi", type=_angle_arg, default=math.pi / 4)
    s.add_argument("--theta-min", type=_angle_arg, default=0.0)
    s.add_argument("--theta-max", type=_angle_arg, default=math.pi)
    s.add_argument("--steps", type=_positive_int, default=100)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_sweep_e1)

    c = sub.add_parser("scrooge", help="sample the Scrooge ensemble of an average state")
    _common(c)
    c.set_defaults(samples=100_000)
    c.add_argument("--bases", type=_positive_int, default=50)
    c.add_argument("--dump-sample", help="write the weighted sample as ensemble JSON")
    c.add_argument("--format", choices=("json",), default="json")
    c.set_defaults(func=cmd_scrooge)

    d = sub.add_parser("distill", help="distillation bound for a pure-state decomposition")
    _common(d)
    d.add_argument("--m", type=_positive_int, default=1, help="number of copies")
    d.add_argument("--isometry", help="JSON 2 x dA matrix (entries real or [re, im])")
    d.add_argument("--format", choices=("json",), default="json")
    d.set_defaults(func=cmd_distill)

    t = sub.add_parser("selftest", help="run the acceptance criteria")
    t.add_argument("--only", type=int, nargs="+", choices=range(1, 10), metavar="N")
    t.add_argument("--out")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExhausted as exc:
        code = EXIT_BUDGET
        payload = exc.to_dict()
    except InputError as exc:
        code, payload = EXIT_INPUT, exc.to_dict()
    except NumericalError as exc:
        code, payload = EXIT_NUMERICAL, exc.to_dict()
    except LocaccError as exc:
        code, payload = EXIT_NUMERICAL, exc.to_dict()
    except (ValueError, OSError) as exc:
        code, payload = EXIT_INPUT, {"error": type(exc).__name__, "message": str(exc)}
    payload["exit_code"] = code
    print(dumps(payload))
    return code


if __name__ == "__main__":
    sys.exit(main())
