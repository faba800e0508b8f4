"""Command-line front end.

Subcommands emit CSV tables (17 significant digits) and JSON diagnostics.
Exit codes: 0 success, 2 validation error, 3 solver failure, 4 check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, annulus, branch, ck, identities, linearization, selftest

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_CHECK = 4

log = logging.getLogger("twophase")


class ValidationError(ValueError):
    pass


# defaults per parameter; a JSON config file and then flags override these
DEFAULTS = {
    "dim": None,
    "sigma_c": 2.0,
    "rho": None,
    "mode_k": None,
    "t_max": 0.02,
    "steps": 10,
    "epsilon": "0.1",
    "gamma": "1.0",
    "angular_order": None,
    "radial_order": None,
    "tol": None,
    "out": None,
    "seed": 20240601,
    "parallel": 1,
    "samples": 199,
    "draws": 50,
    "criteria": None,
}


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return "" if x is None else str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


class Output:
    """Writes named CSV/JSON artifacts to --out, or to stdout when unset."""

    def __init__(self, out: str | None, stream=None):
        self.dir = Path(out) if out else None
        self.stream = stream or sys.stdout
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def _emit(self, name: str, text: str) -> None:
        if self.dir:
            (self.dir / name).write_text(text)
        else:
            self.stream.write(f"# {name}\n{text}")

    def csv(self, name: str, header: list[str], rows) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
        self._emit(name, buf.getvalue())

    def json(self, name: str, data: dict) -> None:
        self._emit(name, json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# parameter parsing


def int_list(text) -> list[int]:
    """'2', '2,3,4' or '2-8' (inclusive)."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(v) for v in text]
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ValidationError(f"empty range {part!r}")
            out.extend(range(lo_i, hi_i + 1))
        else:
            out.append(int(part))
    return out


def float_list(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(v) for v in text]
    return [float(p) for p in str(text).split(",")]


def auto_or_float(text):
    if text is None or str(text).lower() == "auto":
        return None
    return float(text)


def _dims(cfg: dict, default: str) -> list[int]:
    dims = int_list(cfg["dim"] if cfg["dim"] is not None else default)
    _check_dims(dims)
    return dims


def _single(values: list, name: str):
    if len(values) != 1:
        raise ValidationError(f"{name} takes a single value for this command")
    return values[0]


def _check_dims(dims):
    for N in dims:
        if N < 2:
            raise ValidationError(f"dimension must be >= 2, got {N}")


def _check_sigma(sigmas, allow_one=False):
    for s in sigmas:
        if not s > 0 or not math.isfinite(s):
            raise ValidationError(f"sigma_c must be positive, got {s}")
        if s == 1 and not allow_one:
            raise ValidationError("sigma_c = 1 is the single-phase case; no two-phase problem")


def _pool_map(fn, items, parallel: int):
    if parallel > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


# ---------------------------------------------------------------------------
# commands


def _critical_row(args):
    N, k, s = args
    if k < 2:
        return [N, k, None, None, None, None, "no critical radius"]
    closed = linearization.critical_radius(N, k).R_star
    root = linearization.critical_radius(N, k, "root-found", s).R_star
    dR = linearization.dR_frechet_matrix(N, s, closed, k)[1]
    return [N, k, closed, root, abs(closed - root), dR, ""]


def cmd_critical_radii(cfg: dict, out: Output) -> int:
    dims = _dims(cfg, "2-4")
    ks = int_list(cfg["mode_k"] if cfg["mode_k"] is not None else "2-8")
    s = _single(float_list(cfg["sigma_c"]), "--sigma-c")
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-9
    _check_sigma([s])
    if any(k < 0 for k in ks):
        raise ValidationError("mode numbers must be >= 0")
    rows = _pool_map(_critical_row, [(N, k, s) for N in dims for k in ks], cfg["parallel"])
    out.csv(
        "critical_radii.csv",
        ["N", "k", "R_star_closed", "R_star_root", "abs_diff", "det_dR_M_at_R_star", "note"],
        rows,
    )
    monotone = {}
    for N in dims:
        vals = [r[2] for r in rows if r[0] == N and r[2] is not None]
        monotone[N] = bool(all(b > a for a, b in zip(vals, vals[1:])))
    worst = max((r[4] for r in rows if r[4] is not None), default=0.0)
    ok = worst <= tol and all(monotone.values())
    out.json(
        "critical_radii.json",
        {"sigma_c": s, "max_abs_diff": worst, "tol": tol, "monotone": monotone, "passed": ok},
    )
    return EXIT_OK if ok else EXIT_CHECK


def _scan_rows(args):
    N, s, k, Rs = args
    return [[N, s, k, R, linearization.det_M(N, s, R, k)] for R in Rs]


def cmd_bifurcation_scan(cfg: dict, out: Output) -> int:
    dims = _dims(cfg, "2")
    sigmas = float_list(cfg["sigma_c"])
    ks = int_list(cfg["mode_k"] if cfg["mode_k"] is not None else "0-8")
    n = int(cfg["samples"])
    _check_sigma(sigmas)
    if n < 2:
        raise ValidationError("--samples must be >= 2")
    Rs = np.linspace(0.01, 0.99, n)
    jobs = [(N, s, k, Rs) for N in dims for s in sigmas for k in ks]
    blocks = _pool_map(_scan_rows, jobs, cfg["parallel"])
    out.csv("det_M_scan.csv", ["N", "sigma_c", "k", "R", "det_M"], [r for b in blocks for r in b])
    crossings = {}
    for (N, s, k, _), b in zip(jobs, blocks):
        d = np.array([r[4] for r in b])
        crossings[f"N={N},sigma_c={s:g},k={k}"] = int(np.sum(np.sign(d[:-1]) != np.sign(d[1:])))
    out.json("det_M_scan.json", {"samples": n, "sign_changes": crossings})
    return EXIT_OK


def cmd_trace_branch(cfg: dict, out: Output) -> int:
    N = _single(_dims(cfg, "2"), "--dim")
    s = _single(float_list(cfg["sigma_c"]), "--sigma-c")
    k = _single(int_list(cfg["mode_k"] if cfg["mode_k"] is not None else 2), "--mode-k")
    _check_sigma([s])
    if k < 2:
        raise ValidationError("branch tracing needs --mode-k >= 2 (no bifurcation for k < 2)")
    t_max, steps = float(cfg["t_max"]), int(cfg["steps"])
    if not t_max > 0 or steps < 1:
        raise ValidationError("need --t-max > 0 and --steps >= 1")
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-11
    res = branch.Resolution.default(k, cfg["angular_order"])
    if res.K < k + 4:
        raise ValidationError(f"--angular-order (truncation K) must be >= k*+4 = {k + 4}")

    status = EXIT_OK
    failure = None
    try:
        diag = branch.trace_branch(N, s, k, t_max, steps, res, tol)
    except branch.BranchError as exc:
        if exc.last is None:
            raise
        diag = exc.last
        failure = str(exc)
        status = EXIT_SOLVER
    rows = []
    for p in diag.points:
        ratio = p.xi_hat[k] / p.eta_hat[k] if p.t != 0 else float("nan")
        rows.append([p.t, p.rho, p.residual_norm, ratio, branch.outer_oscillation(p, N), p.newton_iters])
    out.csv(
        "branch.csv",
        ["t", "rho", "residual", "tangent_ratio", "outer_oscillation", "newton_iters"],
        rows,
    )
    last = diag.points[-1]
    th = np.linspace(0.0, np.pi, 361)
    dom = last.domain(N)
    out.csv("boundary.csv", ["theta", "r_in", "r_out"], zip(th, dom.r_in(th), dom.r_out(th)))
    info = {
        "N": N,
        "sigma_c": s,
        "k_star": k,
        "R_star": diag.R_star,
        "kernel": [diag.beta, diag.gamma],
        "kernel_ratio": diag.kernel_ratio,
        "resolution": {"K": res.K, "K_solver": res.K_solver, "n_colloc": res.n_colloc},
        "newton_tol": tol,
        "final": {"t": last.t, "rho": last.rho, "eta_hat": last.eta_hat, "xi_hat": last.xi_hat},
        "failure": failure,
    }
    if diag.probe is not None:
        info["probe"] = {"t": diag.probe.t, "tangent_ratio": diag.tangent_ratio,
                         "relative_error": diag.tangent_error}
    if failure is None:
        cert = branch.verify_branch_point(last, N, s, res)
        info["certificate"] = {
            "residual_hi": cert.residual_hi,
            "dirichlet_inner": cert.dirichlet_inner,
            "flux_inner": cert.flux_inner,
            "dirichlet_outer": cert.dirichlet_outer,
            "u_max_interior": cert.u_max_interior,
            "tol": cert.tol,
            "passed": cert.passed,
        }
        if not cert.passed:
            status = EXIT_CHECK
    out.json("branch.json", info)
    if failure:
        log.error("%s", failure)
    return status


def cmd_counterexample(cfg: dict, out: Output) -> int:
    N = _single(_dims(cfg, "2"), "--dim")
    s = _single(float_list(cfg["sigma_c"]), "--sigma-c")
    _check_sigma([s], allow_one=True)
    R = float(cfg["rho"]) if cfg["rho"] is not None else 1.0
    if not R > 0:
        raise ValidationError("core radius (--rho) must be positive")
    eps = auto_or_float(cfg["epsilon"])
    if eps is None:
        eps = ck.select_epsilon(N, s, R)
    if eps < 0:
        raise ValidationError("epsilon must be >= 0")
    config = ck.CKConfig(N, s, R, eps, gamma=auto_or_float(cfg["gamma"]))
    if not ck.admissible(config):
        raise ValidationError(f"epsilon={eps} fails the monotonicity or gap check")
    n_ang = int(cfg["angular_order"] or 64)
    n_rad = int(cfg["radial_order"] or 32)
    dom = ck.build_counterexample(config, n_ang)
    out.csv("counterexample.csv", ["theta", "r"], zip(dom.theta, dom.r))
    inputs = ck.translate_to_identity_frame(dom)
    reports = {}
    for xi in (0.0, 1.0, -0.3):
        rep = identities.verify_identity(inputs, xi, n_ang, n_rad)
        reports[f"{xi:g}"] = {
            "deficit": rep.deficit, "I": rep.I, "II": rep.II, "III": rep.III,
            "residual": rep.residual, "relative_residual": rep.relative_residual,
        }
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-6
    worst = max(r["relative_residual"] for r in reports.values())
    info = dom.diagnostics() | {
        "angular_order": n_ang,
        "radial_order": n_rad,
        "identity": reports,
        "identity_max_relative_residual": worst,
        "tol": tol,
    }
    out.json("counterexample.json", info)
    return EXIT_OK if worst <= tol else EXIT_CHECK


def cmd_verify_identities(cfg: dict, out: Output) -> int:
    dims = _dims(cfg, "2,3")
    draws = int(cfg["draws"])
    if draws < 1:
        raise ValidationError("--draws must be >= 1")
    n = int(cfg["angular_order"] or 64)
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-10
    rng = np.random.default_rng(cfg["seed"])
    rows = []
    worst = 0.0
    for i in range(draws):
        N = dims[i % len(dims)]
        z = rng.uniform(-0.5, 0.5)
        lam = rng.uniform(1.0, 2.0)
        s = rng.uniform(0.2, 5.0)
        xi = rng.uniform(-1.0, 1.0)
        c = identities.OffsetBallConfig(N, s, z, lam)
        II_c, II_q = identities.term_II_closed(c), identities.term_II_quadrature(c, n)
        III_c, III_q = identities.term_III_closed(c, xi), identities.term_III_quadrature(c, xi, n)
        e2, e3 = selftest._rel(II_c, II_q), selftest._rel(III_c, III_q)
        worst = max(worst, e2, e3)
        rows.append([i, N, s, z, lam, xi, II_c, II_q, e2, III_c, III_q, e3])
    out.csv(
        "offset_balls.csv",
        ["draw", "N", "sigma_c", "z", "lambda", "xi", "II_closed", "II_quadrature", "II_rel",
         "III_closed", "III_quadrature", "III_rel"],
        rows,
    )
    out.json(
        "offset_balls.json",
        {"draws": draws, "seed": cfg["seed"], "angular_order": n, "max_relative": worst,
         "tol": tol, "passed": worst <= tol},
    )
    return EXIT_OK if worst <= tol else EXIT_CHECK


def _run_one(n: int) -> selftest.CriterionResult:
    return selftest.run_criterion(n)


def cmd_selftest(cfg: dict, out: Output) -> int:
    numbers = int_list(cfg["criteria"]) if cfg["criteria"] else sorted(selftest.CRITERIA)
    unknown = [n for n in numbers if n not in selftest.CRITERIA]
    if unknown:
        raise ValidationError(f"unknown criteria {unknown}")
    results = _pool_map(_run_one, numbers, cfg["parallel"])
    for r in results:
        print(r.summary(), file=sys.stderr)
    if cfg["out"]:
        out.json(
            "selftest.json",
            {
                str(r.number): {
                    "title": r.title,
                    "passed": r.passed,
                    "error": r.error,
                    "checks": [
                        {"name": c.name, "passed": c.passed, "value": c.value, "threshold": c.threshold}
                        for c in r.checks
                    ],
                }
                for r in results
            },
        )
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_CHECK


COMMANDS = {
    "critical-radii": (cmd_critical_radii, "closed-form vs root-found critical radii"),
    "bifurcation-scan": (cmd_bifurcation_scan, "det M(R, k) samples for heatmaps"),
    "trace-branch": (cmd_trace_branch, "continue the non-radial branch from R*(k)"),
    "counterexample": (cmd_counterexample, "build the asymmetric two-phase domain"),
    "verify-identities": (cmd_verify_identities, "offset-ball closed forms vs quadrature"),
    "selftest": (cmd_selftest, "run the acceptance suite"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("parameters")
    # default None everywhere so that only explicitly given flags override the config file
    g.add_argument("--dim", help="dimension N; lists '2,3' and ranges '2-4' where sweeps apply")
    g.add_argument("--sigma-c", dest="sigma_c", help="conductivity ratio (comma list for scans)")
    g.add_argument("--rho", type=float, help="core radius (CK core radius R for counterexample)")
    g.add_argument("--mode-k", dest="mode_k", help="mode number, list or range")
    g.add_argument("--t-max", dest="t_max", type=float)
    g.add_argument("--steps", type=int)
    g.add_argument("--epsilon", help="offset of the radiality centre, or 'auto'")
    g.add_argument("--gamma", help="level value, or 'auto' (gap midpoint)")
    g.add_argument("--angular-order", dest="angular_order", type=int,
                   help="angular quadrature order; harmonic truncation K for trace-branch")
    g.add_argument("--radial-order", dest="radial_order", type=int)
    g.add_argument("--tol", type=float, help="pass/fail tolerance (command-specific default)")
    g.add_argument("--samples", type=int, help="R samples for bifurcation-scan")
    g.add_argument("--draws", type=int, help="random draws for verify-identities")
    g.add_argument("--criteria", help="subset of criteria for selftest, e.g. '1-3,7'")
    g.add_argument("--out", help="output directory (stdout when omitted)")
    g.add_argument("--seed", type=int)
    g.add_argument("--parallel", type=int, help="worker processes for independent sweeps")
    g.add_argument("--config", help="JSON file of parameters; flags take precedence")
    g.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="twophase", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_)
    return p


def resolve_config(ns: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if ns.config:
        try:
            data = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
        for key, value in data.items():
            key = key.replace("-", "_")
            if key not in cfg:
                raise ValidationError(f"unknown config key {key!r}")
            cfg[key] = value
    for key in DEFAULTS:
        value = getattr(ns, key, None)
        if value is not None:
            cfg[key] = value
    if int(cfg["parallel"]) < 1:
        raise ValidationError("--parallel must be >= 1")
    cfg["parallel"] = int(cfg["parallel"])
    return cfg


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    fn, _ = COMMANDS[ns.command]
    try:
        cfg = resolve_config(ns)
        return fn(cfg, Output(cfg["out"]))
    except (ValidationError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (branch.BranchError, annulus.ResolutionError, RuntimeError, ArithmeticError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
