"""Normal-mode delay dynamics.

Each normal mode obeys

    chi'' + 2 gamma chi' + omega_mode^2 chi = +/- (2 gamma / ell) theta(t - ell) chi(t - ell)

whose Laplace-space characteristic function is
``g(s) = s^2 + 2 gamma s + omega_mode^2 -/+ (2 gamma / ell) exp(-s ell)``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, InstabilityError, NoConvergenceError, ValidityError
from .model import Branch, ModeView, SystemParams, mode_view
from .specfun import lambert_w

#: |g(s)| below this (relative to omega_mode^2) marks a pole on the real-frequency axis.
POLE_ON_AXIS_TOL = 1e-14
#: Newton stopping rule: |g(s)| <= NEWTON_TOL * max(omega_mode^2, |s|^2).
NEWTON_TOL = 1e-12
#: Amplitude growth factor reported as a blow-up by the transient solver.
BLOWUP_FACTOR = 1e6

# 3-point Gauss-Legendre nodes/weights on [0, 1]
_GL_NODES = np.array([0.5 - math.sqrt(0.15), 0.5, 0.5 + math.sqrt(0.15)])
_GL_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


class PoleMethod(str, Enum):
    PERTURBATIVE = "perturbative"
    NUMERIC = "numeric"
    LAMBERT = "lambert"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class LadderPole:
    n: int
    s: complex


@dataclass(frozen=True)
class PoleSet:
    """Poles of 1/g for one mode.

    ``dominant`` is the conjugate pair closest to the imaginary axis (None for
    a pure ladder computation); ``ladder`` holds large-n poles in the upper
    half plane, their conjugates being implied.
    """

    dominant: tuple[complex, complex] | None
    ladder: tuple[LadderPole, ...]
    method: PoleMethod
    residual_norm: float


@dataclass(frozen=True)
class EffectiveParams:
    Gamma: float
    W: float
    W_sq_smooth: float


@dataclass
class Trajectory:
    times: np.ndarray
    chi: np.ndarray
    chi_dot: np.ndarray
    mode: Branch
    blew_up: bool = False

    def __post_init__(self):
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise DomainError("trajectory times must be strictly increasing")


@dataclass(frozen=True)
class ZeroSeparationModel:
    """Local, retardation-free equations obtained by matching Lambda * ell = pi / 2.

    The plus mode is damped at rate ``plus_damping`` (coefficient of chi'),
    the minus mode is undamped. Only meaningful for times well below
    ``validity_time`` = 1 / (gamma omega_-^2 ell^2) at the physical separation.
    """

    plus_damping: float
    plus_freq_sq: float
    minus_damping: float
    minus_freq_sq: float
    matched_ell: float
    validity_time: float


def _as_mode(params: SystemParams, mode) -> ModeView:
    if isinstance(mode, ModeView):
        return mode
    return mode_view(params, mode, require_underdamped=False)


def g_tilde(mode, s: complex, params: SystemParams) -> complex:
    mode = _as_mode(params, mode)
    s = complex(s)
    delay = 2.0 * params.gamma / params.ell * cmath.exp(-s * params.ell)
    return s * s + 2.0 * params.gamma * s + mode.omega_mode_sq - mode.sign * delay


def g_tilde_prime(mode, s: complex, params: SystemParams) -> complex:
    mode = _as_mode(params, mode)
    s = complex(s)
    return 2.0 * s + 2.0 * params.gamma + mode.sign * 2.0 * params.gamma * cmath.exp(-s * params.ell)


def d2_bar(mode, kappa: float, params: SystemParams) -> complex:
    """Real-frequency propagator 1/g(-i kappa)."""
    mode = _as_mode(params, mode)
    g = g_tilde(mode, complex(0.0, -kappa), params)
    if abs(g) < POLE_ON_AXIS_TOL * max(1.0, mode.omega_mode_sq):
        raise InstabilityError(
            f"g vanishes on the real-frequency axis at kappa={kappa} (marginal stability)")
    return 1.0 / g


def d2_series(mode, kappa: float, order: int, params: SystemParams) -> complex:
    """Partial sum of 1/g(-i kappa) expanded in powers of the delay term.

    The n-th term is ``(+/- 2 gamma/ell)^n e^{i n kappa ell} / D^{n+1}`` with
    ``D = -kappa^2 - 2 i gamma kappa + omega_mode^2``; this equals
    ``(-/+ gamma/ell)^n / n! (1/omega d/d omega)^n (1/D)`` term by term. The
    ratio of successive terms is ``2 gamma / (ell |D|)``; a RuntimeWarning is
    issued when it is not below one.
    """
    mode = _as_mode(params, mode)
    if order < 0:
        raise DomainError("series order must be non-negative")
    q = 2.0 * params.gamma / (mode.omega_mode_sq * params.ell)
    if q >= 1.0:
        raise ValidityError(
            f"delay expansion needs 2 gamma / (omega_mode^2 ell) < 1, got {q:.6g}")
    D = complex(mode.omega_mode_sq - kappa * kappa, -2.0 * params.gamma * kappa)
    ratio = mode.sign * 2.0 * params.gamma / params.ell * cmath.exp(1j * kappa * params.ell) / D
    if order > 0 and abs(ratio) >= 1.0:
        warnings.warn(
            f"delay series diverges at kappa={kappa}: term ratio {abs(ratio):.3g} >= 1",
            RuntimeWarning, stacklevel=2)
    total = 0j
    term = 1.0 / D
    for _ in range(order + 1):
        total += term
        term *= ratio
    return total


def _require_perturbative(mode: ModeView, params: SystemParams) -> None:
    if 2.0 * params.gamma >= mode.omega_mode_sq * params.ell:
        raise ValidityError(
            f"{mode.branch.value} mode: perturbative poles need 2 gamma < omega_mode^2 ell "
            f"(gamma={params.gamma}, omega_mode^2={mode.omega_mode_sq}, ell={params.ell})")


def effective_parameters(mode, params: SystemParams) -> EffectiveParams:
    """Effective damping Gamma and frequency W of the dominant pole pair.

    ``W_sq_smooth`` drops the oscillating cosine of W^2 and is monotone in ell.
    """
    mode = _as_mode(params, mode)
    w_sq_smooth = mode.omega_mode_sq - mode.sign * 2.0 * params.gamma / params.ell
    if w_sq_smooth <= 0:
        raise InstabilityError(
            f"{mode.branch.value} mode: smoothed W^2 = {w_sq_smooth:.6g} <= 0 "
            "(runaway regime 2 gamma >= omega_mode^2 ell)")
    _require_perturbative(mode, params)
    w = mode.omega_mode
    x = w * params.ell
    Gamma = params.gamma * (1.0 + mode.sign * math.sin(x) / x)
    W = w * (1.0 - mode.sign * (params.gamma / w) * math.cos(x) / x)
    return EffectiveParams(Gamma=Gamma, W=W, W_sq_smooth=w_sq_smooth)


def dominant_pole_perturbative(mode, params: SystemParams) -> PoleSet:
    """First-order (in the delay coupling) dominant pole pair s = -Gamma +/- i W."""
    mode = _as_mode(params, mode)
    _require_perturbative(mode, params)
    w = mode.omega_mode
    x = w * params.ell
    Gamma = params.gamma * (1.0 + mode.sign * math.sin(x) / x)
    W = w * (1.0 - mode.sign * (params.gamma / w) * math.cos(x) / x)
    s = complex(-Gamma, W)
    residual = max(abs(g_tilde(mode, s, params)), abs(g_tilde(mode, s.conjugate(), params)))
    return PoleSet((s, s.conjugate()), (), PoleMethod.PERTURBATIVE, residual)


def find_poles_numeric(mode, params: SystemParams, seed: complex,
                       max_iter: int = 100) -> complex:
    """Newton refinement of a zero of g from ``seed``."""
    mode = _as_mode(params, mode)
    s = complex(seed)
    for _ in range(max_iter):
        try:
            g = g_tilde(mode, s, params)
            if abs(g) <= NEWTON_TOL * max(mode.omega_mode_sq, abs(s) ** 2):
                return _polish(mode, params, s, g)
            gp = g_tilde_prime(mode, s, params)
        except OverflowError:
            # the iterate ran far into Re s < 0 where e^{-s ell} overflows
            break
        if gp == 0:
            raise NoConvergenceError(f"g'(s) vanishes at s={s}")
        step = g / gp
        # backtrack while |g| grows: a full step can land deep in Re s < 0, where
        # e^{-s ell} is huge and Newton would only crawl back by ~1/ell per step
        for _ in range(40):
            trial = s - step
            try:
                if abs(g_tilde(mode, trial, params)) < abs(g):
                    break
            except OverflowError:
                pass
            step *= 0.5
        s = s - step
        if not (math.isfinite(s.real) and math.isfinite(s.imag)):
            break
    raise NoConvergenceError(
        f"Newton iteration for a pole of the {mode.branch.value} mode did not converge "
        f"from seed {seed}")


def _polish(mode: ModeView, params: SystemParams, s: complex, g: complex) -> complex:
    """A few extra Newton steps, keeping the iterate with the smallest residual."""
    best, best_res = s, abs(g)
    for _ in range(3):
        if best_res == 0.0:
            break
        gp = g_tilde_prime(mode, s, params)
        if gp == 0:
            break
        s = s - g / gp
        g = g_tilde(mode, s, params)
        if abs(g) < best_res:
            best, best_res = s, abs(g)
    return best


def dominant_pole_numeric(mode, params: SystemParams) -> PoleSet:
    """Rightmost pole found by Newton from the natural seeds.

    Seeds are the perturbative pair (when valid) or the undamped frequency,
    plus a real-axis seed that catches the runaway root of the plus mode.
    """
    mode = _as_mode(params, mode)
    seeds = []
    try:
        seeds.append(dominant_pole_perturbative(mode, params).dominant[0])
    except ValidityError:
        seeds.append(complex(-params.gamma, mode.omega_mode))
    seeds.append(complex(max(1.0, mode.omega_mode), 0.0))
    seeds.append(0j)
    roots = []
    for seed in seeds:
        try:
            roots.append(find_poles_numeric(mode, params, seed))
        except NoConvergenceError:
            continue
    if not roots:
        raise NoConvergenceError(f"no pole of the {mode.branch.value} mode located")
    s = max(roots, key=lambda r: (r.real, abs(r.imag)))
    if abs(s.imag) <= 1e-14 * max(1.0, abs(s)):
        s = complex(s.real, 0.0)
    if s.imag < 0:
        s = s.conjugate()
    residual = abs(g_tilde(mode, s, params))
    return PoleSet((s, s.conjugate()), (), PoleMethod.NUMERIC, residual)


def _lambert_w0_of_exp(a: float) -> float:
    """W_0(e^a) for real a, stable when e^a overflows."""
    if a < 700.0:
        return lambert_w(0, math.exp(a), real=True)
    # w + ln w = a
    w = a - math.log(a)
    for _ in range(50):
        step = (w + math.log(w) - a) / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 1e-16 * w:
            break
    return w


def strong_damping_root(mode, params: SystemParams, *, allow_complex: bool = False) -> complex:
    """Pole of the strong-damping reduction ``2 gamma ell y + omega_mode^2 ell^2 -/+ 2 gamma ell e^{-y} = 0``.

    With y = s ell, the solution is ``y = -a + W(+/- e^a)`` with
    ``a = omega_mode^2 ell / (2 gamma)``. The caller asserts ``2 gamma ell >> 1``.
    The plus mode has a real root, positive exactly when ``2 gamma > omega_+^2 ell``.
    The minus mode has no real root; with ``allow_complex=True`` the principal
    complex solution is returned instead of raising.
    """
    mode = _as_mode(params, mode)
    if params.gamma == 0:
        raise DomainError("strong-damping root needs gamma > 0")
    a = mode.omega_mode_sq * params.ell / (2.0 * params.gamma)
    if mode.branch is Branch.PLUS:
        # w + ln w = a, so y = w - a = -ln w without cancelling two O(a) terms
        y = -math.log(_lambert_w0_of_exp(a))
        return complex(y / params.ell, 0.0)
    if not allow_complex:
        raise ValidityError(
            "the minus mode has no real strong-damping root (W of -e^a with -e^a < -1/e is complex)")
    y = -a + lambert_w(0, -math.exp(a))
    return y / params.ell


def strong_damping_residual(mode, y: complex, params: SystemParams) -> complex:
    """Residual of the reduced strong-damping equation at y = s ell."""
    mode = _as_mode(params, mode)
    gl = 2.0 * params.gamma * params.ell
    return gl * y + mode.omega_mode_sq * params.ell**2 - mode.sign * gl * cmath.exp(-y)


def ladder_seed(mode, n: int, params: SystemParams) -> complex:
    """Leading asymptotic estimate of the n-th ladder pole, n >= 1, upper half plane."""
    mode = _as_mode(params, mode)
    v = math.pi * (2 * n + 0.5 - 0.5 * mode.sign - 1.0)
    u = math.log(2.0 * params.gamma * params.ell) - 2.0 * math.log(abs(v))
    return complex(u, v) / params.ell


def asymptotic_pole_ladder(mode, params: SystemParams, n_min: int, n_max: int) -> PoleSet:
    """Large-n poles from the asymptotic ladder estimate, each refined by Newton.

    Intended for ``n_min >= 5`` where the estimate lies in Newton's basin.
    Refinement failures raise NoConvergenceError naming the offending n.
    """
    mode = _as_mode(params, mode)
    if params.gamma == 0:
        raise DomainError("the pole ladder exists only for gamma > 0")
    if n_min < 1 or n_max < n_min:
        raise DomainError(f"invalid ladder range [{n_min}, {n_max}]")
    poles = []
    worst = 0.0
    for n in range(n_min, n_max + 1):
        seed = ladder_seed(mode, n, params)
        try:
            s = find_poles_numeric(mode, params, seed)
        except NoConvergenceError as exc:
            raise NoConvergenceError(f"ladder pole n={n}: {exc}") from exc
        poles.append(LadderPole(n, s))
        worst = max(worst, abs(g_tilde(mode, s, params)))
    return PoleSet(None, tuple(poles), PoleMethod.ASYMPTOTIC, worst)


def zero_separation_model(params: SystemParams) -> ZeroSeparationModel:
    """Local common-bath equations with retardation dropped and Lambda ell = pi/2."""
    shift = 4.0 * params.gamma * params.lambda_cut / math.pi
    omega_plus_sq = params.omega**2 + params.sigma
    omega_minus_sq = params.omega**2 - params.sigma
    return ZeroSeparationModel(
        plus_damping=4.0 * params.gamma,
        plus_freq_sq=omega_plus_sq - shift,
        minus_damping=0.0,
        minus_freq_sq=omega_minus_sq + shift,
        matched_ell=math.pi / (2.0 * params.lambda_cut),
        validity_time=(math.inf if params.gamma == 0
                       else 1.0 / (params.gamma * omega_minus_sq * params.ell**2)),
    )


def _oscillator_basis(gamma: float, omega_sq: float, tau):
    """e^{-gamma tau} * (C, S) where C'' = (gamma^2 - omega^2) C, C(0)=1, S(0)=0, S'(0)=1."""
    tau = np.asarray(tau, dtype=float)
    disc = omega_sq - gamma * gamma
    if disc > 0:
        w = math.sqrt(disc)
        c, s = np.cos(w * tau), np.sin(w * tau) / w
    elif disc < 0:
        w = math.sqrt(-disc)
        c, s = np.cosh(w * tau), np.sinh(w * tau) / w
    else:
        c, s = np.ones_like(tau), tau.copy()
    decay = np.exp(-gamma * tau)
    return decay * c, decay * s


def damped_oscillator(gamma: float, omega_sq: float, chi0: float, v0: float, t):
    """Closed-form solution of chi'' + 2 gamma chi' + omega^2 chi = 0."""
    c, s = _oscillator_basis(gamma, omega_sq, t)
    chi = chi0 * c + (v0 + gamma * chi0) * s
    chi_dot = v0 * c - (omega_sq * chi0 + gamma * v0) * s
    return chi, chi_dot


def _hermite(x0, x1, v0, v1, h, theta):
    t2 = theta * theta
    t3 = t2 * theta
    return ((2 * t3 - 3 * t2 + 1) * x0 + (t3 - 2 * t2 + theta) * h * v0
            + (-2 * t3 + 3 * t2) * x1 + (t3 - t2) * h * v1)


def simulate_transient(params: SystemParams, mode, chi0: float, v0: float, t_max: float,
                       dt: float | None = None, *, delay: bool = True,
                       on_blowup: str = "raise") -> Trajectory:
    """Homogeneous evolution of one normal mode by the method of steps.

    On [0, ell) the delay term is inactive and the closed-form damped
    oscillator is used. Beyond that, each step propagates the state exactly
    through the damped oscillator and adds the response to the delayed
    forcing, which is already known from history (cubic Hermite
    interpolation of stored chi, chi'), integrated by 3-point Gauss-Legendre.
    The step is shrunk so that ell is an integer number of steps.

    Amplitude growth beyond BLOWUP_FACTOR times the initial amplitude stops
    the run; ``on_blowup='raise'`` raises InstabilityError, ``'flag'`` returns
    the truncated trajectory with ``blew_up=True``. ``delay=False`` drops the
    delay term (private-bath oscillator) for cross-checks.
    """
    mode = _as_mode(params, mode)
    if on_blowup not in ("raise", "flag"):
        raise DomainError("on_blowup must be 'raise' or 'flag'")
    if t_max <= 0:
        raise DomainError("t_max must be positive")
    ell = params.ell
    dt_cap = min(ell / 50.0, 2.0 * math.pi / (50.0 * mode.omega_mode))
    if dt is None:
        dt = dt_cap
    elif dt <= 0 or dt > dt_cap * (1 + 1e-12):
        raise DomainError(f"dt must lie in (0, {dt_cap:.6g}] (ell/50 and 2 pi/(50 omega_mode))")
    steps_per_delay = math.ceil(ell / dt - 1e-9)
    h = ell / steps_per_delay
    n_steps = int(math.floor(t_max / h + 1e-9))
    times = h * np.arange(n_steps + 1)
    gamma, wsq = params.gamma, mode.omega_mode_sq
    chi = np.empty(n_steps + 1)
    vel = np.empty(n_steps + 1)

    n_first = min(steps_per_delay, n_steps)
    chi[: n_first + 1], vel[: n_first + 1] = damped_oscillator(
        gamma, wsq, chi0, v0, times[: n_first + 1])
    chi[0], vel[0] = chi0, v0

    scale0 = max(abs(chi0), abs(v0) / mode.omega_mode)
    limit = BLOWUP_FACTOR * scale0
    coupling = mode.sign * 2.0 * gamma / ell if delay else 0.0

    # one-step transfer matrices
    c1, s1 = _oscillator_basis(gamma, wsq, h)
    c1, s1 = float(c1), float(s1)
    a11, a12 = c1 + gamma * s1, s1
    a21, a22 = -wsq * s1, c1 - gamma * s1
    # impulse responses at the quadrature nodes, tau = h * (1 - node)
    cg, sg = _oscillator_basis(gamma, wsq, h * (1.0 - _GL_NODES))
    gx = h * _GL_WEIGHTS * sg
    gv = h * _GL_WEIGHTS * (cg - gamma * sg)

    blew_up = False
    last = n_steps
    if scale0 > 0 and np.max(np.abs(chi[: n_first + 1])) > limit:
        blew_up, last = True, int(np.argmax(np.abs(chi[: n_first + 1]) > limit))
    k = n_first
    while not blew_up and k < n_steps:
        j = k - steps_per_delay
        xc, vc = chi[k], vel[k]
        nx = a11 * xc + a12 * vc
        nv = a21 * xc + a22 * vc
        if coupling != 0.0:
            hist = _hermite(chi[j], chi[j + 1], vel[j], vel[j + 1], h, _GL_NODES)
            f = coupling * hist
            nx += float(np.dot(gx, f))
            nv += float(np.dot(gv, f))
        k += 1
        chi[k], vel[k] = nx, nv
        if scale0 > 0 and abs(nx) > limit:
            blew_up, last = True, k
    if blew_up:
        traj = Trajectory(times[: last + 1], chi[: last + 1], vel[: last + 1], mode.branch, True)
        if on_blowup == "raise":
            err = InstabilityError(
                f"{mode.branch.value} mode amplitude exceeded {BLOWUP_FACTOR:g}x its initial "
                f"value at t={times[last]:.6g}")
            err.trajectory = traj
            raise err
        return traj
    return Trajectory(times, chi, vel, mode.branch, False)
