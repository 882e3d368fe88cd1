"""Physical configuration, normal modes, stability and regime labels.

Natural units (hbar = c = 1). Separation and time share units.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum

from .errors import DomainError, InstabilityError

#: Half-width of the band around varsigma = 1 labelled as crossover.
CROSSOVER_MARGIN = 0.1

_FIELD_NAMES = ("m", "omega", "gamma", "sigma", "ell", "lambda_cut", "beta")


class Branch(str, Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.PLUS else -1


class Regime(str, Enum):
    DIRECT_DOMINATED = "direct_dominated"
    CROSSOVER = "crossover"
    INDUCED_DOMINATED = "induced_dominated"


@dataclass(frozen=True)
class SystemParams:
    """Two identical detectors in a common massless scalar field.

    ``beta = math.inf`` means zero temperature. The hard invariants are
    checked on construction. The weak-coupling bound ``|sigma| < omega^2 -
    gamma^2`` (real resonance frequencies) is not, because strong-damping
    configurations are legitimate input to the pole and stability analysis;
    operations that need real resonance frequencies check it themselves via
    :meth:`require_weak_coupling`.
    """

    omega: float
    gamma: float
    sigma: float
    ell: float
    lambda_cut: float
    m: float = 1.0
    beta: float = math.inf

    def __post_init__(self):
        for name in _FIELD_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise DomainError(f"{name} must be a real number, got {value!r}")
            object.__setattr__(self, name, float(value))
            if math.isnan(value):
                raise DomainError(f"{name} is NaN")
        for name in ("m", "omega", "gamma", "sigma", "ell", "lambda_cut"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.m <= 0:
            raise DomainError(f"mass must be positive, got m={self.m}")
        if self.omega <= 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.gamma < 0:
            raise DomainError(f"gamma must be non-negative, got {self.gamma}")
        if self.ell <= 0:
            raise DomainError(f"separation ell must be positive, got {self.ell}")
        if self.lambda_cut <= self.omega:
            raise DomainError(
                f"cutoff must exceed omega (lambda_cut={self.lambda_cut}, omega={self.omega})")
        if abs(self.sigma) >= self.omega**2:
            raise DomainError(
                f"|sigma| must be below omega^2 (sigma={self.sigma}, omega^2={self.omega**2})")
        if self.beta <= 0:
            raise DomainError(f"beta must be positive or inf, got {self.beta}")

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)

    @property
    def weak_coupling(self) -> bool:
        return abs(self.sigma) < self.omega**2 - self.gamma**2

    def require_weak_coupling(self) -> None:
        if not self.weak_coupling:
            raise DomainError(
                "resonance frequencies are not real: need |sigma| < omega^2 - gamma^2 "
                f"(sigma={self.sigma}, omega={self.omega}, gamma={self.gamma})")

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class ModeView:
    """Derived per-mode quantities for the CoM (plus) or relative (minus) mode."""

    branch: Branch
    omega_mode_sq: float
    resonance_sq: float
    weight: float

    @property
    def sign(self) -> int:
        return self.branch.sign

    @property
    def omega_mode(self) -> float:
        return math.sqrt(self.omega_mode_sq)

    @property
    def resonance(self) -> float:
        if self.resonance_sq <= 0:
            raise DomainError(
                f"{self.branch.value} mode is not underdamped (Omega^2={self.resonance_sq})")
        return math.sqrt(self.resonance_sq)


def renormalized_frequency(omega_bare_sq: float, gamma: float, lambda_cut: float) -> float:
    """omega^2 = omega_b^2 - 4 gamma Lambda / pi."""
    omega_sq = omega_bare_sq - 4.0 * gamma * lambda_cut / math.pi
    if omega_sq <= 0:
        raise DomainError(
            f"renormalized frequency squared is {omega_sq:.6g} <= 0; "
            "bare frequency too small for this damping and cutoff")
    return omega_sq


def bare_frequency_sq(omega_sq: float, gamma: float, lambda_cut: float) -> float:
    """Inverse of :func:`renormalized_frequency`."""
    return omega_sq + 4.0 * gamma * lambda_cut / math.pi


def mode_view(params: SystemParams, branch: Branch | str,
              require_underdamped: bool = True) -> ModeView:
    branch = Branch(branch)
    omega_mode_sq = params.omega**2 + branch.sign * params.sigma
    if omega_mode_sq <= 0:
        raise DomainError(f"{branch.value} mode frequency squared is {omega_mode_sq} <= 0")
    resonance_sq = omega_mode_sq - params.gamma**2
    if require_underdamped and resonance_sq <= 0:
        raise DomainError(
            f"{branch.value} mode resonance frequency squared is {resonance_sq} <= 0 "
            "(need gamma < omega_mode)")
    weight = 0.5 if branch is Branch.PLUS else 2.0
    return ModeView(branch, omega_mode_sq, resonance_sq, weight)


def branch_stable(params: SystemParams, branch: Branch | str) -> bool:
    """A mode is stable iff 2 gamma < omega_mode^2 ell; the boundary itself counts as unstable."""
    branch = Branch(branch)
    omega_mode_sq = params.omega**2 + branch.sign * params.sigma
    return 2.0 * params.gamma < omega_mode_sq * params.ell


def stability_check(params: SystemParams) -> tuple[bool, bool]:
    """(stable_plus, stable_minus)."""
    return branch_stable(params, Branch.PLUS), branch_stable(params, Branch.MINUS)


def require_stable(params: SystemParams) -> None:
    plus, minus = stability_check(params)
    if not (plus and minus):
        which = [b for b, ok in (("plus", plus), ("minus", minus)) if not ok]
        raise InstabilityError(
            f"runaway {'/'.join(which)} mode: need 2*gamma < omega_mode^2 * ell "
            f"(gamma={params.gamma}, sigma={params.sigma}, ell={params.ell})")


@dataclass(frozen=True)
class RegimeReport:
    varsigma: float
    regime: Regime
    stable_plus: bool
    stable_minus: bool
    zero_sep_validity_time: float


def varsigma(params: SystemParams) -> float:
    if params.gamma == 0:
        raise DomainError("varsigma = sigma*ell/(2*gamma) is undefined for gamma = 0")
    return params.sigma * params.ell / (2.0 * params.gamma)


def classify_regime(params: SystemParams, margin: float = CROSSOVER_MARGIN) -> RegimeReport:
    """Label direct-coupling vs field-induced dominance from varsigma = sigma ell / 2 gamma."""
    vs = varsigma(params)
    if vs > 1.0 + margin:
        regime = Regime.DIRECT_DOMINATED
    elif vs < 1.0 - margin:
        regime = Regime.INDUCED_DOMINATED
    else:
        regime = Regime.CROSSOVER
    stable_plus, stable_minus = stability_check(params)
    omega_minus_sq = params.omega**2 - params.sigma
    validity = 1.0 / (params.gamma * omega_minus_sq * params.ell**2)
    return RegimeReport(vs, regime, stable_plus, stable_minus, validity)
