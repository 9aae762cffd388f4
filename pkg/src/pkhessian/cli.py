"""Command-line verification suites.

    pkhessian identities     algebraic identities, oracles, operator factorization
    pkhessian supersolution  residual scans of the explicit supersolution family
    pkhessian expansion      quadrature checks of the integral identities

Reports are JSON (canonical) or CSV.  Exit status: 0 all checks pass,
1 some check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import os
import sys
import time
from typing import Any, Iterable, Optional

import numpy as np

from . import estimates, hessop, oracle, radial, sampling, symfun

SCHEMA = "pkhessian-report/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("pkhessian")


class UsageError(Exception):
    pass


def _num(x) -> Optional[float]:
    """JSON-safe float: non-finite values become ``None``."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def record(name: str, value, tolerance, passed: bool, **params) -> dict[str, Any]:
    return {"name": name, "value": _num(value), "tolerance": _num(tolerance), "pass": bool(passed), "params": params}


def build_report(command: str, parameters: dict, checks: list[dict], wall_time: Optional[float]) -> dict:
    passed = sum(c["pass"] for c in checks)
    report = {
        "schema": SCHEMA,
        "command": command,
        "parameters": parameters,
        "checks": checks,
        "summary": {"total": len(checks), "passed": passed, "failed": len(checks) - passed},
    }
    if wall_time is not None:
        report["wall_time_s"] = wall_time
    return report


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def render_csv(report: dict) -> str:
    """One row per check: name, value, tolerance, pass, then sorted parameter columns."""
    param_keys = sorted({key for c in report["checks"] for key in c["params"]})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "value", "tolerance", "pass"] + param_keys)
    for c in report["checks"]:
        row = [c["name"], c["value"], c["tolerance"], c["pass"]]
        row += [c["params"].get(key) for key in param_keys]
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- identities


def _worst(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(values.max()) if values.size else 0.0


def run_identities(cfg: argparse.Namespace) -> tuple[list[dict], dict]:
    rng = np.random.default_rng(cfg.seed)
    checks: list[dict] = []
    info: dict[str, Any] = {"acceptance_rates": {}}
    if cfg.trials == 0:
        log.warning("trials = 0: nothing to check, report is empty")
        return checks, info
    p_range = (cfg.p_min, cfg.p_max)

    for n in range(1, cfg.n_max + 1):
        A = sampling.random_matrices(rng, cfg.trials, n)
        sigmas, grads = symfun.sigma_sequence(A, n)
        for k in range(1, n + 1):
            scale = symfun.entry_scale(A, k)
            res = symfun.identity_residuals(A, k)
            checks.append(record("euler", _worst(res.euler / scale), cfg.tol, _worst(res.euler / scale) <= cfg.tol, n=n, k=k))
            checks.append(record("exchange", _worst(res.exchange / scale), cfg.tol, _worst(res.exchange / scale) <= cfg.tol, n=n, k=k))
            if n <= oracle.MAX_ORACLE_DIM:
                ref = oracle.sigma_minor_oracle(A, k)
                rel = np.abs(sigmas[k] - ref) / np.maximum(np.abs(ref), scale)
                checks.append(record("oracle_sigma", _worst(rel), cfg.tol, _worst(rel) <= cfg.tol, n=n, k=k))
                fd = oracle.gradient_fd_oracle(A, k)
                gscale = symfun.entry_scale(A, k - 1)
                err = np.max(np.abs(fd - grads[k]), axis=(-2, -1)) / gscale
                checks.append(record("oracle_gradient", _worst(err), cfg.fd_tol, _worst(err) <= cfg.fd_tol, n=n, k=k))

        pts = sampling.random_points(rng, cfg.trials, n, p_range)
        half, inv_half = hessop.anisotropy_sqrt(pts.g, pts.p)
        B = hessop.anisotropy_matrix(pts.g, pts.p)
        bscale = np.max(np.abs(B), axis=(-2, -1))
        sq = np.max(np.abs(half @ half - B), axis=(-2, -1)) / bscale
        inv = np.max(np.abs(half @ inv_half - np.eye(n)), axis=(-2, -1))
        checks.append(record("sqrt_square", _worst(sq), cfg.sqrt_tol, _worst(sq) <= cfg.sqrt_tol, n=n))
        checks.append(record("sqrt_inverse", _worst(inv), cfg.sqrt_tol, _worst(inv) <= cfg.sqrt_tol, n=n))
        J = sampling.batch_flux_jacobian(pts)
        lam = np.linalg.eigvalsh(sampling.batch_symmetrized(pts))
        jsig = symfun.sigma_sequence(J, n)[0]
        for k in range(1, n + 1):
            spectral = symfun.sigma_of_vector(lam, k)
            mag = symfun.sigma_of_vector(np.abs(lam), k)
            rel = np.abs(jsig[k] - spectral) / np.where(mag > 0, mag, 1.0)
            checks.append(record("spectral_equality", _worst(rel), cfg.spectral_tol, _worst(rel) <= cfg.spectral_tol, n=n, k=k))

        for k in range(1, n + 1):
            sample = sampling.admissible_points(rng, cfg.trials, n, k, p_range)
            info["acceptance_rates"][f"n={n},k={k}"] = round(sample.acceptance_rate, 6)
            Jk = sampling.batch_flux_jacobian(sample.points)
            gk = symfun.sigma_sequence(Jk, k)[1]
            for s in range(1, k + 1):
                G = gk[s]
                margin = np.trace(G, axis1=-2, axis2=-1) - np.max(np.abs(G), axis=(-2, -1))
                rel = margin / symfun.entry_scale(Jk, s - 1)
                worst = float(rel.min())
                checks.append(record("domination", worst, -cfg.tol, worst >= -cfg.tol, n=n, k=k, s=s))

    for f in range(cfg.fields):
        n = 2 + f % 3
        field = sampling.random_polynomial_field(rng, n, degree=3)
        x0 = rng.uniform(-1, 1, size=n)
        for k in range(1, min(3, n) + 1):
            div = oracle.divergence_fd_probe(field, x0, k)
            checks.append(record("divergence_free", div, cfg.div_tol, div <= cfg.div_tol, field=f, n=n, k=k))

    for n, p, k, expected in ((3, 2.0, 1, 3.0), (4, 3.0, 1, 8.0), (5, 2.0, 2, 10.0)):
        ex = hessop.critical_exponents(n, p, k)
        ok = ex.kp_star == expected
        if p == 2:
            ok = ok and ex.k_star_lower == ex.kp_star
        checks.append(record("critical_exponent", ex.kp_star, 0.0, ok, n=n, p=p, k=k, expected=expected))
    return checks, info


# ------------------------------------------------------------ supersolution


def _alpha_values(kp_star: float, cfg: argparse.Namespace) -> list[tuple[str, float]]:
    out = [(f"{a:g}", float(a)) for a in cfg.alpha or []]
    out += [(f"k_p*{o:+g}", kp_star + o) for o in cfg.alpha_offset or []]
    out += [(f"{s:g}*k_p*", s * kp_star) for s in cfg.alpha_scale or []]
    return out


def run_supersolution(cfg: argparse.Namespace) -> tuple[list[dict], dict]:
    grid = radial.log_grid(cfg.r_min, cfg.r_max, cfg.radii)
    checks: list[dict] = []
    scan_rows: list[dict] = []
    for n, p, k in itertools.product(cfg.n, cfg.p, cfg.k):
        if not p * k < n:
            continue
        kp_star = n * (p - 1) * k / (n - p * k)
        for (label, alpha), A in itertools.product(_alpha_values(kp_star, cfg), cfg.A):
            sp = radial.SupersolutionParams(n, k, p, alpha, A)
            params = dict(n=n, p=p, k=k, alpha=alpha, alpha_label=label, A=A, kp_star=kp_star)
            try:
                C = radial.supersolution_constant(sp)
            except radial.FamilyFailsError:
                # nonexistence side: the family must fail here
                checks.append(record("supersolution", None, None, alpha < kp_star, status="family-fails",
                                     C_star=None, admissible_fraction=None, **params))
                continue
            except ValueError:
                checks.append(record("supersolution", None, None, alpha < kp_star, status="profile-undefined",
                                     C_star=None, admissible_fraction=None, **params))
                continue
            if C == 0:
                checks.append(record("supersolution", None, None, True, status="degenerate",
                                     C_star=0.0, admissible_fraction=None, **params))
                continue
            scan = radial.supersolution_scan(sp, grid)
            ok = scan.min_residual >= -cfg.tol and scan.admissible_fraction == 1.0
            checks.append(record("supersolution", scan.min_residual, -cfg.tol, ok, status="scanned",
                                 C_star=scan.C_star, admissible_fraction=scan.admissible_fraction,
                                 worst_radius=scan.worst_radius, **params))
            if cfg.plot_dir:
                scan_rows.extend(_residual_curve(sp, grid, params))
    info: dict[str, Any] = {}
    if cfg.plot_dir:
        info["plot_rows"] = scan_rows
    return checks, info


def _residual_curve(sp: radial.SupersolutionParams, grid: np.ndarray, params: dict) -> list[dict]:
    profile = radial.supersolution_radial_profile(sp)
    rows = []
    for r in grid:
        F = radial.radial_pk_hessian_closed_form(profile, float(r), sp.n, sp.p, sp.k)
        target = (-float(profile.phi(r))) ** sp.alpha
        rows.append(dict(params, r=float(r), F=F, target=target, residual=F - target))
    return rows


# ---------------------------------------------------------------- expansion


def run_expansion(cfg: argparse.Namespace) -> tuple[list[dict], dict]:
    checks: list[dict] = []
    tol = 10 * cfg.quad_tol
    for name in cfg.profiles:
        if name not in estimates.CORPUS_NAMES:
            raise UsageError(f"unknown profile {name!r}; choose from {', '.join(estimates.CORPUS_NAMES)}")
    for name, n, p, k in itertools.product(cfg.profiles, cfg.n, cfg.p, cfg.k):
        if not (p * k < n and k <= cfg.k_max):
            continue
        u = estimates.corpus_profile(name, n, p, k)
        for delta, theta, R in itertools.product(cfg.delta, cfg.theta, cfg.R):
            params = estimates.EstimateParams(n, k, p, delta, theta, R, quad_tol=cfg.quad_tol)
            tag = dict(profile=name, n=n, p=p, k=k, delta=delta, theta=theta, R=R)
            try:
                residuals = estimates.quantity_integrals(u, params).residuals
            except (estimates.QuadratureError, ValueError) as exc:
                checks.append(record("quadrature", None, tol, False, error=str(exc), **tag))
                continue
            for key, value in residuals.items():
                checks.append(record(key, value, tol, value <= tol, **tag))
    return checks, {}


# ------------------------------------------------------------------ parsing


def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file whose keys override the defaults")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default="-", help="report path ('-' for stdout)")
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identity)")
    sub.add_argument("--plot-dir", help="write residual-vs-r CSV data here (supersolution only)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pkhessian", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("identities", help="algebraic identities, oracles and operator factorization")
    _common(s)
    s.add_argument("--n-max", type=int, default=6)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--fields", type=int, default=20, help="random polynomial fields for the divergence check")
    s.add_argument("--p-min", type=float, default=1.2)
    s.add_argument("--p-max", type=float, default=4.0)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--fd-tol", type=float, default=1e-6)
    s.add_argument("--sqrt-tol", type=float, default=1e-12)
    s.add_argument("--spectral-tol", type=float, default=1e-10)
    s.add_argument("--div-tol", type=float, default=1e-7)

    s = subs.add_parser("supersolution", help="scan the explicit supersolution family")
    _common(s)
    s.add_argument("--n", type=int, nargs="+", default=[3, 4, 5, 6])
    s.add_argument("--p", type=float, nargs="+", default=[2.0, 2.5, 3.0])
    s.add_argument("--k", type=int, nargs="+", default=[1, 2, 3])
    s.add_argument("--alpha", type=float, nargs="*", default=[], help="absolute alpha values")
    s.add_argument("--alpha-offset", type=float, nargs="*", default=[0.01, 1.0, -0.1],
                   help="alpha = k_p* + offset")
    s.add_argument("--alpha-scale", type=float, nargs="*", default=[2.0], help="alpha = scale * k_p*")
    s.add_argument("--A", type=float, nargs="+", default=[0.0, 1.0, 10.0])
    s.add_argument("--radii", type=int, default=200)
    s.add_argument("--r-min", type=float, default=1e-3)
    s.add_argument("--r-max", type=float, default=1e3)
    s.add_argument("--tol", type=float, default=1e-9)

    s = subs.add_parser("expansion", help="quadrature checks of the integral identities")
    _common(s)
    s.add_argument("--profiles", nargs="+", default=list(estimates.CORPUS_NAMES))
    s.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    s.add_argument("--p", type=float, nargs="+", default=[2.0, 2.5, 3.0])
    s.add_argument("--k", type=int, nargs="+", default=[1, 2, 3])
    s.add_argument("--k-max", type=int, default=3)
    s.add_argument("--delta", type=float, nargs="+", default=[0.0, 0.5, 1.0])
    s.add_argument("--theta", type=float, nargs="+", default=[8.0, 12.0])
    s.add_argument("--R", type=float, nargs="+", default=[1.0, 2.0])
    s.add_argument("--quad-tol", type=float, default=1e-9)
    return parser


RUNNERS = {"identities": run_identities, "supersolution": run_supersolution, "expansion": run_expansion}
_NOT_PARAMETERS = {"config", "out", "format", "timing", "command", "plot_dir"}


def parse_config(argv: Optional[Iterable[str]] = None) -> argparse.Namespace:
    """Parse flags; a ``--config`` file replaces defaults, explicit flags win."""
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    cfg = parser.parse_args(argv)
    if cfg.config:
        try:
            with open(cfg.config, encoding="utf-8") as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {cfg.config}: {exc}") from exc
        sub = parser._subparsers._group_actions[0].choices[cfg.command]
        known = {a.dest for a in sub._actions}
        overrides = {key.replace("-", "_"): v for key, v in overrides.items()}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**overrides)
        cfg = parser.parse_args(argv)
    _validate(cfg)
    return cfg


def _validate(cfg: argparse.Namespace) -> None:
    for key, value in vars(cfg).items():
        if isinstance(value, list) and not value and key not in ("alpha", "alpha_offset", "alpha_scale"):
            raise UsageError(f"grid {key} is empty")
        if key.endswith("tol") and not value >= 0:
            raise UsageError(f"{key} must be nonnegative")
    if cfg.command == "identities":
        if cfg.trials < 0 or cfg.n_max < 1 or cfg.fields < 0:
            raise UsageError("need trials >= 0, fields >= 0, n_max >= 1")
        if not 1 < cfg.p_min <= cfg.p_max:
            raise UsageError("need 1 < p_min <= p_max")
    if cfg.command == "supersolution":
        if not (cfg.alpha or cfg.alpha_offset or cfg.alpha_scale):
            raise UsageError("no alpha values given")
        if cfg.radii < 1 or not 0 < cfg.r_min <= cfg.r_max:
            raise UsageError("need radii >= 1 and 0 < r_min <= r_max")
    if cfg.command == "expansion" and not 0 < cfg.quad_tol <= 1e-3:
        raise UsageError("quad_tol must lie in (0, 1e-3]")


def run(cfg: argparse.Namespace) -> dict:
    start = time.perf_counter()
    checks, info = RUNNERS[cfg.command](cfg)
    parameters = {k: v for k, v in sorted(vars(cfg).items()) if k not in _NOT_PARAMETERS}
    plot_rows = info.pop("plot_rows", None)
    parameters.update(info)
    wall = time.perf_counter() - start if cfg.timing else None
    report = build_report(cfg.command, parameters, checks, wall)
    if plot_rows is not None:
        _write_plot_rows(cfg.plot_dir, plot_rows)
    return report


def _write_plot_rows(directory: str, rows: list[dict]) -> None:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, "supersolution_residual_vs_r.csv")
    keys = list(rows[0]) if rows else []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def main(argv: Optional[Iterable[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"pkhessian: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse usage errors
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        report = run(cfg)
    except UsageError as exc:
        print(f"pkhessian: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render_json(report) if cfg.format == "json" else render_csv(report)
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    summary = report["summary"]
    log.info("%s: %d checks, %d passed, %d failed", cfg.command, summary["total"], summary["passed"], summary["failed"])
    return EXIT_OK if summary["failed"] == 0 else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
