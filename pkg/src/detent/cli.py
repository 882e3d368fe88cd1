"""Command-line front end.

Exit status: 0 on success, 1 on a domain error (instability, out-of-validity,
non-convergence), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

from . import analysis, dynamics
from .covariance import MomentMethod, covariance_matrix_late, mode_moments
from .entanglement import entanglement_report
from .errors import DetentError, DomainError, NoConvergenceError
from .model import Branch, SystemParams, classify_regime

DEFAULTS = {
    "m": 1.0,
    "omega": 1.0,
    "gamma": 0.01,
    "sigma": 0.0,
    "ell": 1.0,
    "lambda_cut": 1000.0,
    "beta": math.inf,
}
#: Config-file keys besides the parameter names.
_EXTRA_KEYS = {"format", "out", "method"}
_ALIASES = {"cutoff": "lambda_cut", "lambda-cut": "lambda_cut"}

#: Relative tolerance of the built-in closed-form vs quadrature self-test.
CHECK_RTOL = 1e-6
# The closed forms drop O(omega^2 / lambda_cut^2) terms of <p^2>, so every
# grid point keeps lambda_cut >= 1000 omega.
CHECK_GRID = (
    dict(omega=1.0, gamma=0.01, sigma=0.0, ell=1.0, lambda_cut=1e3),
    dict(omega=1.0, gamma=0.05, sigma=0.5, ell=2.0, lambda_cut=1e3),
    dict(omega=1.0, gamma=0.02, sigma=-0.3, ell=0.5, lambda_cut=2e3),
    dict(omega=5.0, gamma=0.1, sigma=10.0, ell=0.05, lambda_cut=1e4),
    dict(omega=2.0, gamma=0.1, sigma=1.0, ell=10.0, lambda_cut=1e3),
    dict(omega=1.0, gamma=0.2, sigma=0.1, ell=3.0, lambda_cut=5e3),
)


class UsageError(Exception):
    pass


def _real(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def read_config(path: str) -> dict[str, str]:
    """Parse a ``key = value`` file. Blank lines and ``#`` comments are skipped."""
    out: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in DEFAULTS and key not in _EXTRA_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".detent-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _param_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("system parameters")
    g.add_argument("--m", type=_real, help="oscillator mass (default 1)")
    g.add_argument("--omega", type=_real, help="renormalized frequency (default 1)")
    g.add_argument("--gamma", type=_real, help="damping constant (default 0.01)")
    g.add_argument("--sigma", type=_real, help="inter-oscillator coupling (default 0)")
    g.add_argument("--ell", type=_real, help="separation (default 1)")
    g.add_argument("--lambda-cut", "--cutoff", dest="lambda_cut", type=_real,
                   help="high-frequency cutoff (default 1000)")
    g.add_argument("--beta", type=_real, help="inverse temperature (default inf)")
    p.add_argument("--config", help="key = value file of defaults; flags override it")
    p.add_argument("--out", help="write the result to this file instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parent = _param_parent()
    parser = argparse.ArgumentParser(
        prog="detent",
        description="Late-time entanglement of two detectors in a common field.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("negativity", parents=[parent],
                       help="symplectic eigenvalues, negativity, branch and regime at one point")
    p.add_argument("--method", choices=[m.value for m in MomentMethod])

    p = sub.add_parser("sweep", parents=[parent], help="evaluate a parameter grid")
    p.add_argument("--grid", required=True,
                   help="name=start:stop:count[,name=...] or name=v1;v2;... over "
                        + ", ".join(analysis.SWEEP_AXES))
    p.add_argument("--method", choices=[m.value for m in MomentMethod])
    p.add_argument("--critical", action="store_true",
                   help="add numeric ell_< and ell_> per point (default when ell is unset)")

    p = sub.add_parser("critical-sep", parents=[parent],
                       help="numeric and analytic critical separations")
    p.add_argument("--bracket", help="lo:hi search range in ell")

    p = sub.add_parser("poles", parents=[parent], help="dominant poles and the pole ladder")
    p.add_argument("--ladder", type=int, default=0, metavar="N",
                   help="also refine ladder poles n = 5 .. 4 + N")

    p = sub.add_parser("transient", parents=[parent], help="homogeneous normal-mode trajectory")
    p.add_argument("--mode", choices=("plus", "minus"), default="plus")
    p.add_argument("--chi0", type=_real, default=1.0)
    p.add_argument("--v0", type=_real, default=0.0)
    p.add_argument("--t-max", dest="t_max", type=_real, default=50.0)
    p.add_argument("--dt", type=_real)

    sub.add_parser("check", parents=[parent],
                   help="closed-form vs quadrature self-test on a fixed grid")
    return parser


def _resolve(args) -> tuple[dict, dict]:
    """Merge defaults, config file and flags. Returns (params, extras)."""
    conf = read_config(args.config) if args.config else {}
    values: dict = {}
    explicit = set()
    for name, default in DEFAULTS.items():
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
            explicit.add(name)
        elif name in conf:
            try:
                values[name] = float(conf[name])
            except ValueError:
                raise UsageError(f"config value for {name} is not a number: {conf[name]!r}") from None
            explicit.add(name)
        else:
            values[name] = default
    extras = {
        "format": args.format or conf.get("format", "csv"),
        "out": args.out or conf.get("out"),
        "method": getattr(args, "method", None) or conf.get("method"),
        "explicit": explicit,
    }
    if extras["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {extras['format']!r}")
    if extras["method"] is not None and extras["method"] not in [m.value for m in MomentMethod]:
        raise UsageError(f"unknown method {extras['method']!r}")
    return values, extras


def _params(values: dict) -> SystemParams:
    return SystemParams(**values)


def _emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _table(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        doc = {"columns": columns,
               "rows": [{c: analysis._json_value(r[c]) for c in columns} for r in rows]}
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([analysis._fmt(r[c]) for c in columns])
    return buf.getvalue()


def _default_method(params: SystemParams, method: str | None) -> MomentMethod:
    if method is not None:
        return MomentMethod(method)
    return MomentMethod.CLOSED_FORM if params.zero_temperature else MomentMethod.QUADRATURE


def cmd_negativity(values, extras) -> int:
    params = _params(values)
    method = _default_method(params, extras["method"])
    report = entanglement_report(covariance_matrix_late(params, method))
    regime = classify_regime(params).regime.value if params.gamma > 0 else "undefined"
    row = {
        "eta_lt": report.eta_lt, "eta_gt": report.eta_gt,
        "negativity": report.negativity, "log_negativity": report.log_negativity,
        "branch": report.branch.value, "regime": regime, "entangled": report.entangled,
    }
    _emit(_table([row], list(row), extras["format"]), extras["out"])
    return 0


def cmd_sweep(args, values, extras) -> int:
    base = _params(values)
    axes = analysis.parse_grid(args.grid)
    critical = args.critical or ("ell" not in extras["explicit"] and "ell" not in axes)
    result = analysis.sweep(base, axes, method=extras["method"], critical=critical)
    text = result.to_json() if extras["format"] == "json" else result.to_csv()
    _emit(text, extras["out"])
    return 0


def _parse_bracket(text: str | None):
    if text is None:
        return None
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"bracket must be lo:hi, got {text!r}") from None
    if not 0 < lo < hi:
        raise UsageError(f"bracket needs 0 < lo < hi, got {text!r}")
    return lo, hi


def cmd_critical(args, values, extras) -> int:
    params = _params(values)
    if params.gamma <= 0:
        raise DomainError("critical separations need gamma > 0")
    rows = []

    def add(cs):
        rows.append({"kind": cs.kind.value, "method": cs.method.value, "value": cs.value,
                     "eta_residual": cs.eta_residual, "valid": cs.valid, "note": cs.note})

    for cs in analysis.critical_separation_numeric(params, _parse_bracket(args.bracket)):
        add(cs)
    formulas = (analysis.ell_gt_large_sep, analysis.ell_gt_small_sep, analysis.ell_lt_iterated)
    for formula in formulas:
        try:
            add(formula(params))
        except (DomainError, NoConvergenceError) as exc:
            rows.append({"kind": "", "method": formula.__name__, "value": math.nan,
                         "eta_residual": math.nan, "valid": False, "note": str(exc)})
    if params.sigma > 0:
        try:
            add(analysis.branch_switch_separation(params))
        except (DomainError, NoConvergenceError) as exc:
            rows.append({"kind": "ell_cross", "method": "numeric_root", "value": math.nan,
                         "eta_residual": math.nan, "valid": False, "note": str(exc)})
    cols = ["kind", "method", "value", "eta_residual", "valid", "note"]
    _emit(_table(rows, cols, extras["format"]), extras["out"])
    return 0


def cmd_poles(args, values, extras) -> int:
    params = _params(values)
    rows = []
    for branch in Branch:
        for label, finder in (("perturbative", dynamics.dominant_pole_perturbative),
                              ("numeric", dynamics.dominant_pole_numeric)):
            try:
                ps = finder(branch, params)
            except (DomainError, NoConvergenceError) as exc:
                rows.append({"mode": branch.value, "method": label, "n": 0, "re": math.nan,
                             "im": math.nan, "residual": math.nan, "note": str(exc)})
                continue
            s = ps.dominant[0]
            rows.append({"mode": branch.value, "method": label, "n": 0, "re": s.real,
                         "im": s.imag, "residual": ps.residual_norm, "note": ""})
        if args.ladder > 0:
            ps = dynamics.asymptotic_pole_ladder(branch, params, 5, 4 + args.ladder)
            for lp in ps.ladder:
                res = abs(dynamics.g_tilde(branch, lp.s, params))
                rows.append({"mode": branch.value, "method": "ladder", "n": lp.n,
                             "re": lp.s.real, "im": lp.s.imag, "residual": res, "note": ""})
    cols = ["mode", "method", "n", "re", "im", "residual", "note"]
    _emit(_table(rows, cols, extras["format"]), extras["out"])
    return 0


def cmd_transient(args, values, extras) -> int:
    params = _params(values)
    traj = dynamics.simulate_transient(params, args.mode, args.chi0, args.v0, args.t_max,
                                       args.dt, on_blowup="flag")
    rows = [{"t": t, "chi": x, "chi_dot": v}
            for t, x, v in zip(traj.times, traj.chi, traj.chi_dot)]
    _emit(_table(rows, ["t", "chi", "chi_dot"], extras["format"]), extras["out"])
    if traj.blew_up:
        print(f"detent: the {args.mode} mode blew up at t={traj.times[-1]:.6g} "
              "(unstable: 2 gamma > omega_mode^2 ell)", file=sys.stderr)
        return 1
    return 0


def cmd_check(values, extras) -> int:
    rows = []
    ok = True
    for point in CHECK_GRID:
        params = SystemParams(**point)
        worst = 0.0
        for branch in Branch:
            a = mode_moments(branch, params, MomentMethod.CLOSED_FORM)
            b = mode_moments(branch, params, MomentMethod.QUADRATURE)
            for x, y in ((a.chi_sq, b.chi_sq), (a.p_sq, b.p_sq)):
                worst = max(worst, abs(x - y) / abs(y))
        passed = worst <= CHECK_RTOL
        ok &= passed
        rows.append({**point, "max_rel_diff": worst, "passed": passed})
    cols = list(CHECK_GRID[0]) + ["max_rel_diff", "passed"]
    _emit(_table(rows, cols, extras["format"]), extras["out"])
    return 0 if ok else 1


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        values, extras = _resolve(args)
        if args.command == "negativity":
            return cmd_negativity(values, extras)
        if args.command == "sweep":
            return cmd_sweep(args, values, extras)
        if args.command == "critical-sep":
            return cmd_critical(args, values, extras)
        if args.command == "poles":
            return cmd_poles(args, values, extras)
        if args.command == "transient":
            return cmd_transient(args, values, extras)
        return cmd_check(values, extras)
    except UsageError as exc:
        print(f"detent: usage error: {exc}", file=sys.stderr)
        return 2
    except (DetentError, ValueError) as exc:
        print(f"detent: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"detent: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
