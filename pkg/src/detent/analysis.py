"""Critical separations, the damping bound, asymptotic constants and parameter sweeps."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .covariance import MomentMethod, mode_moments
from .entanglement import EtaBranch, eta_reduced, negativity
from .errors import DomainError, InstabilityError, NoConvergenceError, ValidityError
from .model import Branch, SystemParams, classify_regime, stability_check
from .specfun import EULER_GAMMA, PI, lambert_w

#: Samples per decade of ell used to bracket roots of eta_lt^2 = 1/4.
SCAN_SAMPLES_PER_DECADE = 400
#: Target |eta_lt^2 - 1/4| for refined roots.
ROOT_TOL = 1e-10
#: Axes a sweep may vary.
SWEEP_AXES = ("gamma", "sigma", "ell", "lambda_cut", "beta")


class CriticalKind(str, Enum):
    ELL_GT = "ell_gt"
    ELL_LT = "ell_lt"
    ELL_CROSS = "ell_cross"


class CriticalMethod(str, Enum):
    NUMERIC_ROOT = "numeric_root"
    LARGE_SEP_FORMULA = "large_sep_formula"
    SMALL_SEP_FORMULA = "small_sep_formula"
    ITERATED = "iterated"
    LAMBERT_CLOSED = "lambert_closed"


@dataclass(frozen=True)
class CriticalSeparation:
    """A separation where entanglement switches on/off (or the eta branch switches).

    ``valid`` is False when the producing approximation was used outside
    its regime or the value lies in the unstable region; ``note`` says why.
    """

    value: float
    kind: CriticalKind
    method: CriticalMethod
    eta_residual: float
    valid: bool = True
    note: str = ""


@dataclass(frozen=True)
class EtaState:
    eta_lt_sq: float
    eta_gt_sq: float
    branch: EtaBranch


# ---------------------------------------------------------------- eta(ell)

def eta_state(params: SystemParams, ell: float | None = None,
              method: MomentMethod | str = MomentMethod.CLOSED_FORM,
              order: int | None = 1) -> EtaState:
    """Reduced symplectic data at separation ``ell`` (defaults to params.ell)."""
    if ell is not None:
        params = params.with_(ell=float(ell))
    plus_ok, minus_ok = stability_check(params)
    if not (plus_ok and minus_ok):
        raise InstabilityError(
            f"unstable at ell={params.ell}: need 2 gamma < omega_mode^2 ell for both modes")
    plus = mode_moments(Branch.PLUS, params, method, order)
    minus = mode_moments(Branch.MINUS, params, method, order)
    lt, gt, branch = eta_reduced(plus.chi_sq, minus.chi_sq, plus.p_sq, minus.p_sq)
    return EtaState(lt, gt, branch)


def eta_sq_of_ell(params: SystemParams, ell: float | None = None,
                  method: MomentMethod | str = MomentMethod.CLOSED_FORM,
                  order: int | None = 1) -> float:
    """eta_lt^2 at separation ``ell``; raises InstabilityError in the runaway region."""
    return eta_state(params, ell, method, order).eta_lt_sq


def asymptotic_eta_sq(omega: float, sigma: float, gamma: float = 0.0,
                      lambda_cut: float | None = None) -> float:
    """Large-separation constant of eta_lt^2 to first order in gamma."""
    wp2, wm2 = omega**2 + sigma, omega**2 - sigma
    if not (wp2 > 0 and wm2 > 0):
        raise DomainError("need |sigma| < omega^2")
    value = 0.25 * math.sqrt(wm2 / wp2)
    if gamma:
        if lambda_cut is None:
            raise DomainError("the first-order gamma correction needs lambda_cut")
        value += gamma * (-math.sqrt(wm2) / (2 * PI * wp2)
                          + math.sqrt(wp2) / (2 * PI * wp2) * (math.log(lambda_cut**2 / wm2) - 1))
    return value


@dataclass(frozen=True)
class GammaBound:
    exact: float
    small_sigma: float


def gamma_upper_bound(omega: float, sigma: float, lambda_cut: float) -> GammaBound:
    """Largest damping that still allows entanglement at large separation.

    ``exact`` sets the first-order asymptotic constant equal to 1/4;
    ``small_sigma`` is its leading behaviour for sigma << omega^2.
    """
    if not (0 <= sigma < omega**2):
        raise DomainError("need 0 <= sigma < omega^2")
    wp2, wm2 = omega**2 + sigma, omega**2 - sigma
    num = 0.25 * (1 - math.sqrt(wm2 / wp2))
    den = (math.sqrt(wp2) / (2 * PI * wp2) * (math.log(lambda_cut**2 / wm2) - 1)
           - math.sqrt(wm2) / (2 * PI * wp2))
    if den <= 0:
        raise DomainError("cutoff too small for the damping bound (denominator <= 0)")
    small = omega * PI * sigma / (4 * omega**2 * (math.log(lambda_cut / omega) - 1))
    return GammaBound(num / den, small)


# ---------------------------------------------------------------- numeric roots

def _scan_lower(params: SystemParams) -> float:
    wmin_sq = min(params.omega**2 + params.sigma, params.omega**2 - params.sigma)
    return 2.0 * params.gamma / wmin_sq * 1.01


def default_bracket(params: SystemParams) -> tuple[float, float]:
    """[2 gamma / min(omega_mode^2) * 1.01, 1e3 / omega]."""
    lo = _scan_lower(params)
    if lo <= 0:
        lo = 1e-6 / params.omega
    return lo, 1e3 / params.omega


def _log_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    n = max(2, int(math.ceil(math.log10(hi / lo) * per_decade)) + 1)
    return np.geomspace(lo, hi, n)


def _refine_root(f, a: float, b: float, fa: float) -> tuple[float, float]:
    x = brentq(f, a, b, xtol=1e-15 * a, rtol=1e-15, maxiter=200)
    res = abs(f(x))
    if res > ROOT_TOL:
        # bisection polish on the bracket brentq kept
        lo, hi, flo = a, b, fa
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if abs(fm) <= ROOT_TOL or hi - lo <= 1e-16 * hi:
                x, res = mid, abs(fm)
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
    return x, res


def critical_separation_numeric(params: SystemParams, bracket: tuple[float, float] | None = None,
                                method: MomentMethod | str = MomentMethod.CLOSED_FORM,
                                samples_per_decade: int = SCAN_SAMPLES_PER_DECADE,
                                order: int | None = 1) -> list[CriticalSeparation]:
    """All roots of eta_lt^2(ell) = 1/4 in ``bracket`` (ascending).

    A log-spaced scan brackets sign changes, each refined by Brent's method
    to |eta_lt^2 - 1/4| <= 1e-10. A root where the state is separable on the
    short side is an ``ell_gt``; separable on the long side, an ``ell_lt``.
    """
    lo, hi = bracket if bracket is not None else default_bracket(params)
    stable_lo = _scan_lower(params) / 1.01
    if lo <= stable_lo:
        raise InstabilityError(f"bracket start {lo} is not above the stability boundary {stable_lo}")
    if hi <= lo:
        raise DomainError("empty bracket")

    def f(ell):
        return eta_sq_of_ell(params, ell, method, order) - 0.25

    grid = _log_grid(lo, hi, samples_per_decade)
    values = np.array([f(x) for x in grid])
    roots = []
    for i in range(len(grid) - 1):
        fa, fb = values[i], values[i + 1]
        if fa == 0.0:
            roots.append((grid[i], 0.0, values[i - 1] if i else fb))
            continue
        if (fa > 0) != (fb > 0) and fb != 0.0:
            x, res = _refine_root(f, grid[i], grid[i + 1], fa)
            roots.append((x, res, fa))
    out = []
    for x, res, f_short in roots:
        kind = CriticalKind.ELL_GT if f_short > 0 else CriticalKind.ELL_LT
        out.append(CriticalSeparation(x, kind, CriticalMethod.NUMERIC_ROOT, res,
                                      valid=res <= ROOT_TOL))
    return out


def branch_switch_separation(params: SystemParams, bracket: tuple[float, float] | None = None,
                             samples_per_decade: int = 100) -> CriticalSeparation | None:
    """Separation where <chi+^2><p-^2> = <chi-^2><p+^2> (eta branch crossover).

    Returns the crossing nearest 2 gamma / sigma, or None if there is none.
    """
    lo, hi = bracket if bracket is not None else default_bracket(params)

    def gap(ell):
        p = params.with_(ell=ell)
        plus = mode_moments(Branch.PLUS, p)
        minus = mode_moments(Branch.MINUS, p)
        a, b = plus.chi_sq * minus.p_sq, minus.chi_sq * plus.p_sq
        return (a - b) / (a + b)

    grid = _log_grid(lo, hi, samples_per_decade)
    vals = [gap(x) for x in grid]
    crossings = []
    for i in range(len(grid) - 1):
        if (vals[i] > 0) != (vals[i + 1] > 0):
            crossings.append(brentq(gap, grid[i], grid[i + 1], xtol=1e-15 * grid[i], rtol=1e-15))
    if not crossings:
        return None
    target = 2 * params.gamma / params.sigma if params.sigma > 0 else math.sqrt(lo * hi)
    x = min(crossings, key=lambda c: abs(math.log(c / target)))
    res = abs(eta_sq_of_ell(params, x) - 0.25)
    return CriticalSeparation(x, CriticalKind.ELL_CROSS, CriticalMethod.NUMERIC_ROOT, res)


# ---------------------------------------------------------------- analytic formulas

def _omegas(params: SystemParams) -> tuple[float, float]:
    wp2, wm2 = params.omega**2 + params.sigma, params.omega**2 - params.sigma
    if wm2 <= 0 or wp2 <= 0:
        raise DomainError("need |sigma| < omega^2")
    return math.sqrt(wp2), math.sqrt(wm2)


def _residual(params: SystemParams, ell: float) -> float:
    try:
        return abs(eta_sq_of_ell(params, ell) - 0.25)
    except (InstabilityError, DomainError):
        return math.nan


def large_sep_coefficients(params: SystemParams) -> tuple[float, float]:
    """(alpha_c, beta_c) of eta_lt^2 ~ alpha_c + beta_c / ell^2, to second order in gamma."""
    wp, wm = _omegas(params)
    g, lam = params.gamma, params.lambda_cut
    log_term = math.log(lam**2 / wm**2) - 1
    alpha = (wm / (4 * wp)
             + (-wm + wp * log_term) / (2 * PI * wp**2) * g
             - (PI**2 * (3 * wp**2 - wm**2) + 8 * wp * wm * log_term)
             / (8 * PI**2 * wp**3 * wm) * g**2)
    beta = wm / (PI * wp**4) * g + 2 * log_term / (PI * wp**4) * g**2
    return alpha, beta


def ell_gt_large_sep(params: SystemParams) -> CriticalSeparation:
    """ell_> = sqrt(4 beta_c / (1 - 4 alpha_c)) for omega_- ell_> > 1 and varsigma > 1."""
    alpha, beta = large_sep_coefficients(params)
    radicand = 1 - 4 * alpha
    if radicand <= 0:
        raise ValidityError(
            f"large-separation constant alpha_c={alpha:.6g} >= 1/4: the state is separable "
            "at large separation, so there is no ell_>")
    value = math.sqrt(4 * beta / radicand)
    wp, wm = _omegas(params)
    notes = []
    if wm * value <= 1:
        notes.append("omega_- ell_> <= 1 (formula assumes large separation)")
    if params.gamma > 0 and params.sigma * value / (2 * params.gamma) <= 1:
        notes.append("varsigma <= 1 at the result")
    if 2 * params.gamma >= wm**2 * value:
        notes.append("result lies in the unstable region")
    return CriticalSeparation(value, CriticalKind.ELL_GT, CriticalMethod.LARGE_SEP_FORMULA,
                              _residual(params, value), not notes, "; ".join(notes))


def small_sep_coefficients(params: SystemParams, ell: float) -> dict[str, float]:
    """Coefficients a0, a1, b0, b1, c0, c1 of the small-separation expansion at ``ell``."""
    wp, wm = _omegas(params)
    log_term = EULER_GAMMA + math.log(params.lambda_cut * ell)
    return {
        "a0": wm**3 / (4 * wp**3),
        "a1": -(wp + wm) * wm**2 / (PI * wp**3),
        "b0": (wp**2 + wm**2) * wm / (4 * wp**3),
        "b1": -((wp + wm) * (wp**2 + wm**2) - wp * wm**2 * log_term) / (PI * wp**3),
        "c0": wm / (4 * wp),
        "c1": -((wp + wm) - wp * log_term) / (PI * wp),
    }


def ell_gt_small_sep_leading(params: SystemParams) -> float:
    wp, wm = _omegas(params)
    den = -(wp**2 + wm**2) + math.sqrt((wp**2 - wm**2) ** 2 + 4 * wp**3 * wm)
    if den <= 0:
        raise ValidityError("leading small-separation ell_> has a non-positive denominator")
    return 2 * params.gamma / den


def ell_gt_small_sep(params: SystemParams) -> CriticalSeparation:
    """ell_> for omega_pm ell < 1: leading term plus the O(gamma/omega_+) correction."""
    wp, wm = _omegas(params)
    ell0 = ell_gt_small_sep_leading(params)
    k = small_sep_coefficients(params, ell0)
    X = wm**2 * ell0 / params.gamma
    # first-order shift of X = omega_-^2 ell / gamma; converting it back to a
    # length needs the factor gamma / omega_-^2
    dX = ((k["a1"] * X + k["b1"] * X**2 + k["c1"] * X**3)
          / (2 * k["a0"] + k["b0"] * X) * params.gamma / wp)
    value = ell0 + dX * params.gamma / wm**2
    notes = []
    if value <= 0:
        raise ValidityError(f"small-separation ell_> correction drove the value negative ({value:.6g})")
    # ell_> is where entanglement returns; that needs the far-separation constant below 1/4
    alpha, _ = large_sep_coefficients(params)
    if alpha >= 0.25:
        notes.append(f"large-separation constant alpha_c={alpha:.6g} >= 1/4, so no ell_> exists")
    if max(wp, wm) * value >= 1:
        notes.append("omega_pm ell_> >= 1 (formula assumes small separation)")
    if params.gamma > 0 and params.sigma * value / (2 * params.gamma) <= 1:
        notes.append("varsigma <= 1 at the result")
    if 2 * params.gamma >= wm**2 * value:
        notes.append("result lies in the unstable region")
    return CriticalSeparation(value, CriticalKind.ELL_GT, CriticalMethod.SMALL_SEP_FORMULA,
                              _residual(params, value), not notes, "; ".join(notes))


def ell_lt_map(params: SystemParams, ell: float) -> float:
    """Right-hand side of the small-separation fixed-point equation for ell_<."""
    wp, wm = _omegas(params)
    g = params.gamma
    L = EULER_GAMMA + math.log(wp**2 * ell / params.lambda_cut)
    num = ((wp**2 + wm**2) / (4 * wp * wm)
           - ((wp**3 + wm**3) + wp**2 * wm * L) / (PI * wp * wm**2) * g / wp) * g / wm**2
    den = (wp - wm) / (4 * wm) - wp * L / (PI * wm) * g / wp
    if den <= 0:
        raise ValidityError("ell_< iteration denominator is non-positive")
    return num / den


def ell_lt_iterated(params: SystemParams, n_iter: int = 50, start: float | None = None,
                    rtol: float = 1e-10) -> CriticalSeparation:
    """Fixed-point iteration for ell_< starting from 1.5 * 2 gamma / omega_-^2."""
    wp, wm = _omegas(params)
    if params.gamma <= 0:
        raise DomainError("ell_< needs gamma > 0")
    ell = start if start is not None else 1.5 * 2 * params.gamma / wm**2
    for _ in range(n_iter):
        new = ell_lt_map(params, ell)
        if not new > 0:
            raise ValidityError(f"ell_< iteration produced a non-positive value {new:.6g}")
        done = abs(new - ell) <= rtol * new
        ell = new
        if done:
            break
    else:
        err = NoConvergenceError(f"ell_< iteration did not settle in {n_iter} steps; last {ell:.10g}")
        err.last_iterate = ell
        raise err
    notes = []
    if params.sigma >= params.omega**2 / 2:
        notes.append("sigma >= omega^2/2")
    if params.sigma * ell / (2 * params.gamma) >= 1:
        notes.append("varsigma >= 1 at the result")
    if 2 * params.gamma >= wm**2 * ell:
        notes.append("result lies in the unstable region")
    return CriticalSeparation(ell, CriticalKind.ELL_LT, CriticalMethod.ITERATED,
                              _residual(params, ell), not notes, "; ".join(notes))


@dataclass(frozen=True)
class WeakCouplingEllLt:
    first_iteration: CriticalSeparation
    lambert: CriticalSeparation


def weak_coupling_residual(omega: float, lambda_cut: float, ell: float) -> float:
    """c2/ell + c1 ln ell + c0 with c2 = -pi/(2 omega), c1 = -1, c0 = ln(Lambda/omega^2) - gamma_E."""
    return -PI / (2 * omega * ell) - math.log(ell) + math.log(lambda_cut / omega**2) - EULER_GAMMA


def ell_lt_weak_coupling(omega: float, lambda_cut: float) -> WeakCouplingEllLt:
    """ell_< in the negligible-direct-coupling limit.

    Solves ``ell = pi / (2 omega (ln(Lambda/(omega^2 ell)) - gamma_E))`` by one
    substitution ell -> pi/(2 omega) and exactly via
    ``ell = -pi / (2 omega W_{-1}(-(pi omega / 2 Lambda) e^{gamma_E}))``.
    """
    if omega <= 0 or lambda_cut <= 0:
        raise DomainError("omega and lambda_cut must be positive")
    z = -(PI * omega / (2 * lambda_cut)) * math.exp(EULER_GAMMA)
    if z <= -1 / math.e:
        raise DomainError(f"Lambert argument {z:.6g} <= -1/e: cutoff too small for a real ell_<")
    first_den = math.log(lambda_cut / (omega**2 * PI / (2 * omega))) - EULER_GAMMA
    if first_den <= 0:
        raise DomainError("cutoff too small: first-iteration denominator is non-positive")
    first = PI / (2 * omega * first_den)
    exact = -PI / (2 * omega * lambert_w(-1, z, real=True))
    res_first = abs(weak_coupling_residual(omega, lambda_cut, first))
    res_exact = abs(weak_coupling_residual(omega, lambda_cut, exact))
    return WeakCouplingEllLt(
        CriticalSeparation(first, CriticalKind.ELL_LT, CriticalMethod.ITERATED, math.nan,
                           note=f"one substitution; fixed-point residual {res_first:.3g}"),
        CriticalSeparation(exact, CriticalKind.ELL_LT, CriticalMethod.LAMBERT_CLOSED, math.nan,
                           note=f"fixed-point residual {res_exact:.3g}"),
    )


# ---------------------------------------------------------------- sweeps

def parse_grid(text: str) -> dict[str, np.ndarray]:
    """Parse ``name=start:stop:count[,name=...]`` (or ``name=v1;v2;...``) into axes."""
    axes: dict[str, np.ndarray] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise DomainError(f"grid entry {part!r} is not name=start:stop:count")
        name, spec = (s.strip() for s in part.split("=", 1))
        if name not in SWEEP_AXES:
            raise DomainError(f"cannot sweep {name!r}; allowed axes: {', '.join(SWEEP_AXES)}")
        if name in axes:
            raise DomainError(f"axis {name!r} given twice")
        try:
            if ":" in spec:
                start, stop, count = spec.split(":")
                n = int(count)
                if n < 1:
                    raise ValueError
                axes[name] = np.linspace(float(start), float(stop), n)
            else:
                axes[name] = np.array([float(v) for v in spec.split(";")])
        except ValueError as exc:
            raise DomainError(f"bad grid specification for {name!r}: {spec!r}") from exc
    if not axes:
        raise DomainError("empty grid")
    return axes


@dataclass
class SweepResult:
    """Row-major results over the product of ``axes`` (last axis fastest).

    Unstable or invalid points carry NaN in the numeric arrays and the
    label ``"unstable"`` or ``"invalid"`` in ``regime``; nothing is fabricated.
    """

    base: SystemParams
    axes: dict[str, np.ndarray]
    eta_sq: np.ndarray
    negativity: np.ndarray
    log_negativity: np.ndarray
    branch: np.ndarray
    regime: np.ndarray
    stable_plus: np.ndarray
    stable_minus: np.ndarray
    ell_lt: np.ndarray | None = None
    ell_gt: np.ndarray | None = None
    errors: np.ndarray = field(default=None)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.axes.values())

    def points(self):
        names = list(self.axes)
        for idx in itertools.product(*(range(len(v)) for v in self.axes.values())):
            values = {n: float(self.axes[n][i]) for n, i in zip(names, idx)}
            yield idx, values

    def columns(self) -> list[str]:
        cols = list(SystemParams.field_names()) + [
            "eta_sq", "negativity", "log_negativity", "branch",
            "stable_plus", "stable_minus", "regime"]
        if self.ell_lt is not None:
            cols += ["ell_lt", "ell_gt"]
        return cols

    def rows(self):
        base = self.base_dict()
        for idx, values in self.points():
            row = dict(base)
            row.update(values)
            row.update(eta_sq=self.eta_sq[idx], negativity=self.negativity[idx],
                       log_negativity=self.log_negativity[idx], branch=self.branch[idx],
                       stable_plus=bool(self.stable_plus[idx]),
                       stable_minus=bool(self.stable_minus[idx]), regime=self.regime[idx])
            if self.ell_lt is not None:
                row.update(ell_lt=self.ell_lt[idx], ell_gt=self.ell_gt[idx])
            yield row

    def base_dict(self) -> dict:
        return self.base.to_dict()

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = self.columns()
        writer.writerow(cols)
        for row in self.rows():
            writer.writerow([_fmt(row[c]) for c in cols])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "columns": self.columns(),
            "axes": {k: [float(x) for x in v] for k, v in self.axes.items()},
            "rows": [{c: _json_value(row[c]) for c in self.columns()} for row in self.rows()],
        }
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else (None if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return value


def _evaluate_point(params: SystemParams, method, critical: bool):
    stable_plus, stable_minus = stability_check(params)
    out = {"stable_plus": stable_plus, "stable_minus": stable_minus,
           "eta_sq": math.nan, "negativity": math.nan, "log_negativity": math.nan,
           "branch": "", "regime": "unstable", "ell_lt": math.nan, "ell_gt": math.nan,
           "error": ""}
    if not (stable_plus and stable_minus):
        return out
    try:
        st = eta_state(params, method=method)
        n, en = negativity(math.sqrt(st.eta_lt_sq))
        out.update(eta_sq=st.eta_lt_sq, negativity=n, log_negativity=en, branch=st.branch.value)
        out["regime"] = (classify_regime(params).regime.value if params.gamma > 0
                         else "undefined")
    except (DomainError, NoConvergenceError) as exc:
        out.update(regime="invalid", error=str(exc))
    if critical and params.gamma > 0:
        try:
            roots = critical_separation_numeric(params)
            lts = [r.value for r in roots if r.kind is CriticalKind.ELL_LT]
            gts = [r.value for r in roots if r.kind is CriticalKind.ELL_GT]
            out["ell_lt"] = min(lts) if lts else math.nan
            out["ell_gt"] = max(gts) if gts else math.nan
        except (DomainError, NoConvergenceError) as exc:
            out["error"] = out["error"] or str(exc)
    return out


def sweep(base: SystemParams, axes: dict[str, np.ndarray],
          method: MomentMethod | str | None = None, critical: bool = False) -> SweepResult:
    """Evaluate the pipeline on every point of the grid product.

    ``method`` defaults to closed forms at zero temperature and quadrature
    otherwise. With ``critical=True`` the numeric ell_< (smallest) and
    ell_> (largest) roots are added per point; their own ell axis is ignored.
    Points that fail validation become sentinels; the sweep never aborts.
    """
    for name in axes:
        if name not in SWEEP_AXES:
            raise DomainError(f"cannot sweep {name!r}")
    shape = tuple(len(v) for v in axes.values())
    eta = np.full(shape, math.nan)
    neg = np.full(shape, math.nan)
    lneg = np.full(shape, math.nan)
    branch = np.full(shape, "", dtype=object)
    regime = np.full(shape, "", dtype=object)
    sp = np.zeros(shape, dtype=bool)
    sm = np.zeros(shape, dtype=bool)
    errors = np.full(shape, "", dtype=object)
    ell_lt = np.full(shape, math.nan) if critical else None
    ell_gt = np.full(shape, math.nan) if critical else None
    result = SweepResult(base, dict(axes), eta, neg, lneg, branch, regime, sp, sm,
                         ell_lt, ell_gt, errors)
    for idx, values in result.points():
        try:
            params = base.with_(**values)
        except DomainError as exc:
            regime[idx] = "invalid"
            errors[idx] = str(exc)
            continue
        m = method
        if m is None:
            m = MomentMethod.CLOSED_FORM if params.zero_temperature else MomentMethod.QUADRATURE
        r = _evaluate_point(params, m, critical)
        eta[idx], neg[idx], lneg[idx] = r["eta_sq"], r["negativity"], r["log_negativity"]
        branch[idx], regime[idx], errors[idx] = r["branch"], r["regime"], r["error"]
        sp[idx], sm[idx] = r["stable_plus"], r["stable_minus"]
        if critical:
            ell_lt[idx], ell_gt[idx] = r["ell_lt"], r["ell_gt"]
    return result
