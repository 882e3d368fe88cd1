"""Late-time second moments of the normal modes and the 4x4 covariance matrix.

Two independent evaluations of the same moments:

* adaptive quadrature of the real-frequency integrals (any temperature);
* closed forms in terms of arccot and the exponential integral (zero temperature).

The closed forms are exact integrals of the propagator expanded to first
order in the delay coupling, ``1/D +/- (2 gamma/ell) e^{i kappa ell} / D^2``
with ``D = omega_mode^2 - kappa^2 - 2 i gamma kappa``. Quadrature integrates
that same first-order propagator by default (``order=1``) so the two paths
are directly comparable; ``order=None`` integrates the exact propagator
``1/g(-i kappa)`` instead.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from .errors import DomainError, InstabilityError, NoConvergenceError
from .model import Branch, ModeView, SystemParams, branch_stable, mode_view, require_stable
from .specfun import PI, arccot, exp_e1_scaled

#: Relative accuracy requested from each quadrature call.
QUAD_EPSREL = 1e-11
#: Estimated error above which a quadrature result is rejected.
QUAD_ACCEPT = 1e-8


class MomentMethod(str, Enum):
    QUADRATURE = "quadrature"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class KernelSample:
    R: float
    kappa: float
    value: float


@dataclass(frozen=True)
class ModeMoments:
    branch: Branch
    chi_sq: float
    p_sq: float
    method: MomentMethod
    cutoff_used: float


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric 4x4 covariance in the (chi1, p1, chi2, p2) basis."""

    entries: np.ndarray
    plus: ModeMoments | None = None
    minus: ModeMoments | None = None

    def __post_init__(self):
        v = np.asarray(self.entries, dtype=float)
        if v.shape != (4, 4):
            raise DomainError(f"covariance matrix must be 4x4, got {v.shape}")
        if not np.allclose(v, v.T, rtol=0, atol=1e-14 * max(1.0, np.abs(v).max())):
            raise DomainError("covariance matrix must be symmetric")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "entries", v)

    @property
    def A(self) -> np.ndarray:
        return self.entries[:2, :2]

    @property
    def B(self) -> np.ndarray:
        return self.entries[2:, 2:]

    @property
    def C(self) -> np.ndarray:
        return self.entries[:2, 2:]


def _xcoth(kappa: float, beta: float) -> float:
    """kappa * coth(beta kappa / 2) with its limit 2/beta at kappa = 0 (|kappa| at beta = inf)."""
    if math.isinf(beta):
        return abs(kappa)
    x = 0.5 * beta * kappa
    if abs(x) < 1e-8:
        return 2.0 / beta
    if abs(x) > 20.0:
        return abs(kappa)
    return kappa / math.tanh(x)


def hadamard_kernel(R: float, kappa: float, beta: float = math.inf) -> float:
    """Fourier-space Hadamard function sin(kappa R)/(4 pi R) * coth(beta kappa / 2).

    ``R = 0`` uses the limit kappa coth(beta kappa/2) / (4 pi); at kappa = 0
    with finite beta the product's finite limit 1/(2 pi beta) is returned.
    At zero temperature the coth factor is sgn(kappa), which keeps the
    kernel even in kappa.
    """
    if R < 0:
        raise DomainError("separation R must be non-negative")
    if kappa == 0.0:
        return 0.0 if math.isinf(beta) else 1.0 / (2.0 * PI * beta)
    # sin(kappa R)/(kappa R) * kappa coth(...) keeps both limits analytic
    sinc = 1.0 if R == 0 else math.sin(kappa * R) / (kappa * R)
    return sinc * _xcoth(kappa, beta) / (4.0 * PI)


def hadamard_sample(R: float, kappa: float, beta: float = math.inf) -> KernelSample:
    return KernelSample(R, kappa, hadamard_kernel(R, kappa, beta))


def _mode(params: SystemParams, mode) -> ModeView:
    if isinstance(mode, ModeView):
        return mode
    return mode_view(params, mode)


def _require_mode_stable(params: SystemParams, mode: ModeView) -> None:
    if not branch_stable(params, mode.branch):
        raise InstabilityError(
            f"{mode.branch.value} mode is unstable: need 2 gamma < omega_mode^2 ell "
            f"(gamma={params.gamma}, omega_mode^2={mode.omega_mode_sq}, ell={params.ell})")


# ---------------------------------------------------------------- closed forms

def _closed_setup(mode, params: SystemParams):
    mode = _mode(params, mode)
    if not params.zero_temperature:
        raise DomainError("closed-form moments are available at zero temperature only")
    if params.gamma >= mode.omega_mode:
        raise DomainError(
            f"{mode.branch.value} mode: closed forms need gamma < omega_mode "
            f"(gamma={params.gamma}, omega_mode={mode.omega_mode})")
    W = mode.resonance
    w = complex(params.gamma * params.ell, W * params.ell)
    A = 1j * exp_e1_scaled(w)
    return mode, W, A, A.conjugate()


def position_integrals_closed(mode, params: SystemParams) -> tuple[complex, complex]:
    """(I1, I2): integrals over kappa in [0, inf) of 1/D and (2 gamma/ell) e^{i kappa ell}/D^2.

    Both are purely imaginary. The delay sign of the mode is applied by the
    caller (chi^2 uses I1 +/- I2).
    """
    mode, W, A, B = _closed_setup(mode, params)
    g, ell = params.gamma, params.ell
    I1 = 1j / W * arccot(g / W)
    I2 = (-1j * g * g / (W * W * mode.omega_mode_sq * ell)
          + 1j * (1 - 1j * W * ell) * g / (2 * W**3 * ell) * A
          + 1j * (1 + 1j * W * ell) * g / (2 * W**3 * ell) * B)
    return I1, I2


def momentum_integrals_closed(mode, params: SystemParams) -> tuple[complex, complex]:
    """(J1, J2): kappa^2-weighted counterparts of (I1, I2), J1 cut off at lambda_cut.

    J1 keeps the leading -Lambda real part and the ln Lambda term of its
    imaginary part; terms vanishing as Lambda -> inf are dropped. J2
    converges without a cutoff.
    """
    mode, W, A, B = _closed_setup(mode, params)
    g, ell, lam = params.gamma, params.ell, params.lambda_cut
    J1 = -lam - (1j / (2 * W)) * (
        -PI * (W - 1j * g) ** 2
        + 2 * (W * W - g * g) * math.atan(g / W)
        + 2 * W * g * math.log(mode.omega_mode_sq / lam**2))
    J2 = (1j * g * g / (W * W * ell)
          - g / (2 * W**3 * ell) * (1j * mode.omega_mode_sq - (W - 1j * g) ** 2 * W * ell) * A
          + g / (2 * W**3 * ell) * (-1j * mode.omega_mode_sq - (W + 1j * g) ** 2 * W * ell) * B)
    return J1, J2


def mode_moments_closed(mode, params: SystemParams) -> ModeMoments:
    mode = _mode(params, mode)
    _require_mode_stable(params, mode)
    I1, I2 = position_integrals_closed(mode, params)
    J1, J2 = momentum_integrals_closed(mode, params)
    c, m, sgn = mode.weight, params.m, mode.sign
    chi_sq = c / (PI * m) * (I1 + sgn * I2).imag
    p_sq = c * m / PI * (J1 + sgn * J2).imag
    if not (chi_sq > 0 and p_sq > 0):
        raise InstabilityError(
            f"{mode.branch.value} mode: non-positive closed-form moments "
            f"(chi^2={chi_sq:.6g}, p^2={p_sq:.6g})")
    return ModeMoments(mode.branch, chi_sq, p_sq, MomentMethod.CLOSED_FORM, params.lambda_cut)


# ---------------------------------------------------------------- quadrature

class _Integrands:
    """Spectral weights Im(propagator) * coth(beta kappa/2), written to stay finite at kappa = 0."""

    def __init__(self, mode: ModeView, params: SystemParams):
        self.wsq = mode.omega_mode_sq
        self.g = params.gamma
        self.ell = params.ell
        self.beta = params.beta
        self.sign = mode.sign
        self.delay = self.sign * 2.0 * params.gamma / params.ell

    def _D(self, k):
        return complex(self.wsq - k * k, -2.0 * self.g * k)

    def base(self, k):
        # Im(1/D) coth = 2 gamma / |D|^2 * kappa coth
        return 2.0 * self.g / abs(self._D(k)) ** 2 * _xcoth(k, self.beta)

    def cos_part(self, k):
        # delay * Im(1/D^2) coth, Im(1/D^2) = 4 gamma kappa (w^2 - kappa^2) / |D|^4
        d2 = abs(self._D(k)) ** 2
        return self.delay * 4.0 * self.g * (self.wsq - k * k) / (d2 * d2) * _xcoth(k, self.beta)

    def sin_part(self, k):
        # delay * Re(1/D^2) coth; only used away from kappa = 0
        d2 = abs(self._D(k)) ** 2
        re = ((self.wsq - k * k) ** 2 - 4.0 * self.g**2 * k * k) / (d2 * d2)
        return self.delay * re * _xcoth(k, self.beta) / k

    def first_order(self, k):
        d2 = abs(self._D(k)) ** 2
        xc = _xcoth(k, self.beta)
        re = ((self.wsq - k * k) ** 2 - 4.0 * self.g**2 * k * k) / (d2 * d2)
        kl = k * self.ell
        sinc = 1.0 if kl == 0 else math.sin(kl) / kl
        osc = self.delay * (math.cos(kl) * 4.0 * self.g * (self.wsq - k * k) / (d2 * d2)
                            + self.ell * sinc * re) * xc
        return 2.0 * self.g / d2 * xc + osc

    def exact(self, k):
        # 8 pi gamma |d2|^2 [G_H(0,k) +/- G_H(ell,k)], i.e. Im(1/g) coth
        gval = self._D(k) - self.delay * cmath.exp(1j * k * self.ell)
        kern = hadamard_kernel(0.0, k, self.beta) + self.sign * hadamard_kernel(self.ell, k, self.beta)
        return 8.0 * PI * self.g * kern / abs(gval) ** 2

    def remainder(self, k):
        # Im(1/g - first-order propagator) coth = Im(x^2 / (D^2 (D - x))) coth
        D = self._D(k)
        x = self.delay * cmath.exp(1j * k * self.ell)
        r = x * x / (D * D * (D - x))
        return r.imag * _xcoth(k, self.beta) / k


def _quad(f, a, b, epsabs=0.0, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=QUAD_EPSREL, **kw)
    return val, err


def _breakpoints(mode: ModeView, params: SystemParams, upper: float, max_zeros: int = 4000):
    pts = set()
    res = mode.omega_mode
    for k in (0.25, 1.0, 4.0, 16.0, 64.0):
        for p in (res - k * params.gamma, res + k * params.gamma):
            if 0 < p < upper:
                pts.add(p)
    pts.add(min(res, upper * 0.999))
    n_zeros = int(upper * params.ell / PI)
    if n_zeros <= max_zeros:
        pts.update(n * PI / params.ell for n in range(1, n_zeros + 1)
                   if n * PI / params.ell < upper)
    return sorted(p for p in pts if 0 < p < upper)


def _integrate_spectrum(mode: ModeView, params: SystemParams, power: int, upper: float,
                        order: int | None) -> float:
    """Integral over [0, upper] of kappa^power * Im(propagator) * coth(beta kappa/2)."""
    ig = _Integrands(mode, params)
    inner = ig.first_order if order == 1 else ig.exact
    split = min(3.0 * mode.omega_mode + 10.0 * params.gamma, upper)
    pts = _breakpoints(mode, params, split)

    def weight(f):
        if power == 0:
            return f
        return lambda k: k**power * f(k)

    total, err = _quad(weight(inner), 0.0, split, points=pts or None,
                       limit=50 * (len(pts) + 2))
    errs = [err]
    if split < upper:
        finite = math.isfinite(upper)
        geo = []
        if finite:
            k = split * 4.0
            while k < upper:
                geo.append(k)
                k *= 4.0
        v, e = _quad(weight(ig.base), split, upper, points=geo or None, limit=500)
        total += v
        errs.append(e)
        if finite:
            for part, kind in ((ig.cos_part, "cos"), (ig.sin_part, "sin")):
                v, e = _quad(weight(part), split, upper, weight=kind, wvar=params.ell,
                             limit=20000)
                total += v
                errs.append(e)
        else:
            for part, kind in ((ig.cos_part, "cos"), (ig.sin_part, "sin")):
                # QAWF needs an absolute target; chi^2 integrals are O(1/omega_mode)
                v, e = _quad(weight(part), split, math.inf, weight=kind, wvar=params.ell,
                             epsabs=1e-15 / mode.omega_mode, limlst=200)
                total += v
                errs.append(e)
        if order is None:
            v, e = _quad(weight(ig.remainder), split, upper, limit=2000)
            total += v
            errs.append(e)
    err = sum(errs)
    if not math.isfinite(total) or err > QUAD_ACCEPT * max(abs(total), 1e-300):
        raise NoConvergenceError(
            f"{mode.branch.value} mode spectral integral (power {power}) did not converge: "
            f"value={total:.6g}, error estimate={err:.3g}")
    return total


def mode_moments_quadrature(mode, params: SystemParams, order: int | None = 1) -> ModeMoments:
    """Late-time moments by adaptive quadrature at any temperature.

    ``chi^2 = (c/(pi m)) int_0^inf Im P(kappa) coth(beta kappa/2) dkappa`` and
    ``p^2 = (c m/pi) int_0^Lambda kappa^2 Im P(kappa) coth(beta kappa/2) dkappa``
    where P is the first-order propagator (``order=1``) or the exact one
    (``order=None``). The kappa = 0 coth pole is absorbed analytically into
    kappa coth(beta kappa/2).
    """
    mode = _mode(params, mode)
    if order not in (1, None):
        raise DomainError("order must be 1 (first-order propagator) or None (exact)")
    _require_mode_stable(params, mode)
    c, m = mode.weight, params.m
    chi_int = _integrate_spectrum(mode, params, 0, math.inf, order)
    p_int = _integrate_spectrum(mode, params, 2, params.lambda_cut, order)
    chi_sq = c / (PI * m) * chi_int
    p_sq = c * m / PI * p_int
    if not (chi_sq > 0 and p_sq > 0):
        raise InstabilityError(
            f"{mode.branch.value} mode: non-positive quadrature moments "
            f"(chi^2={chi_sq:.6g}, p^2={p_sq:.6g})")
    return ModeMoments(mode.branch, chi_sq, p_sq, MomentMethod.QUADRATURE, params.lambda_cut)


# ---------------------------------------------------------------- assembly

def covariance_from_moments(plus: ModeMoments, minus: ModeMoments) -> CovarianceMatrix:
    """Assemble V with chi1 = chi+ + chi-/2, chi2 = chi+ - chi-/2 and uncorrelated modes."""
    if plus.branch is not Branch.PLUS or minus.branch is not Branch.MINUS:
        raise DomainError("expected (plus, minus) mode moments")
    xx = plus.chi_sq + 0.25 * minus.chi_sq
    xc = plus.chi_sq - 0.25 * minus.chi_sq
    pp = plus.p_sq + 0.25 * minus.p_sq
    pc = plus.p_sq - 0.25 * minus.p_sq
    v = np.array([
        [xx, 0.0, xc, 0.0],
        [0.0, pp, 0.0, pc],
        [xc, 0.0, xx, 0.0],
        [0.0, pc, 0.0, pp],
    ])
    return CovarianceMatrix(v, plus, minus)


def mode_moments(mode, params: SystemParams, method: MomentMethod | str = MomentMethod.CLOSED_FORM,
                 order: int | None = 1) -> ModeMoments:
    method = MomentMethod(method)
    if method is MomentMethod.CLOSED_FORM:
        return mode_moments_closed(mode, params)
    return mode_moments_quadrature(mode, params, order=order)


def covariance_matrix_late(params: SystemParams,
                           method: MomentMethod | str = MomentMethod.CLOSED_FORM,
                           order: int | None = 1) -> CovarianceMatrix:
    """Late-time covariance matrix; closed forms need zero temperature."""
    require_stable(params)
    plus = mode_moments(Branch.PLUS, params, method, order)
    minus = mode_moments(Branch.MINUS, params, method, order)
    return covariance_from_moments(plus, minus)
