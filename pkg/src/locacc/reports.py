"""Report envelopes, CSV output and the E1 sweep shared by the CLI and the
acceptance suite."""
from __future__ import annotations

import csv
import io
import json
import math
import time

import numpy as np

from .bounds import holevo_chi, lambda_L
from .ensembles import e1_ensemble
from .errors import DegenerateParameters

CSV_FLOAT = "%.17g"


def tool_version() -> str:
    from . import __version__
    return __version__


def envelope(command: str, seed, params: dict, results: dict, started: float) -> dict:
    """Top-level report with everything needed to rerun it."""
    from ._kernels import BACKEND
    return {"tool": "locacc", "version": tool_version(), "command": command, "seed": seed,
            "kernel_backend": BACKEND, "params": params, "results": results,
            "wall_clock_seconds": time.perf_counter() - started}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(doc) -> str:
    # json writes floats with repr, the shortest string that round-trips
    return json.dumps(_clean(doc), indent=2, sort_keys=False)


def format_float(x) -> str:
    return CSV_FLOAT % x if x is not None else ""


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


SWEEP_HEADER = ("theta", "lambda_L", "std_error", "chi", "flag")


def sweep_e1(phi: float, theta_min: float = 0.0, theta_max: float = math.pi, steps: int = 100,
             method: str = "quadrature", **opts) -> list[tuple]:
    """Rows ``(theta, lambda_L, std_error, chi, flag)``; degenerate points are
    kept with empty values and flag ``degenerate``."""
    if steps < 1:
        raise ValueError("steps must be positive")
    thetas = np.linspace(theta_min, theta_max, steps) if steps > 1 else np.array([theta_min])
    rows = []
    for th in thetas:
        try:
            e = e1_ensemble(float(th), phi)
        except DegenerateParameters:
            rows.append((float(th), None, None, None, "degenerate"))
            continue
        r = lambda_L(e, method, **opts)
        rows.append((float(th), r.value, r.std_error, holevo_chi(e).value, "ok"))
    return rows
