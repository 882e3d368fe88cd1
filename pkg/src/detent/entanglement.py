"""Symplectic spectrum of the partially transposed covariance matrix and negativity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .covariance import CovarianceMatrix
from .errors import DomainError

#: Relative gap between the two mode products below which the branch is degenerate.
DEGENERACY_TOL = 1e-9
#: Below this value of disc / delta^2 the invariant formula hands over to the eigenvalue route.
NEAR_DEGENERATE = 1e-6

_J = np.array([[0.0, 1.0], [-1.0, 0.0]])
_OMEGA = np.block([[_J, np.zeros((2, 2))], [np.zeros((2, 2)), _J]])
_PT = np.diag([1.0, 1.0, 1.0, -1.0])


class EtaBranch(str, Enum):
    PLUS_CHI_MINUS_P = "plus_chi_minus_p"
    MINUS_CHI_PLUS_P = "minus_chi_plus_p"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class EntanglementReport:
    eta_lt: float
    eta_gt: float
    negativity: float
    log_negativity: float
    branch: EtaBranch | None  # None when V lacks the symmetric two-mode structure
    entangled: bool


def _entries(V) -> np.ndarray:
    v = V.entries if isinstance(V, CovarianceMatrix) else np.asarray(V, dtype=float)
    if v.shape != (4, 4):
        raise DomainError(f"expected a 4x4 covariance matrix, got shape {v.shape}")
    return v


def partial_transpose(V):
    """Flip the sign of p2 (V -> P V P with P = diag(1, 1, 1, -1))."""
    v = _PT @ _entries(V) @ _PT
    if isinstance(V, CovarianceMatrix):
        return CovarianceMatrix(v, V.plus, V.minus)
    return v


def _require_positive_definite(v: np.ndarray) -> None:
    if not np.allclose(v, v.T, rtol=0, atol=1e-12 * max(1.0, np.abs(v).max())):
        raise DomainError("covariance matrix is not symmetric")
    try:
        np.linalg.cholesky(v)
    except np.linalg.LinAlgError as exc:
        raise DomainError("covariance matrix is not positive definite") from exc


def symplectic_eigenvalues(V) -> tuple[float, float]:
    """(eta_gt, eta_lt) of the partially transposed V from its 2x2 block invariants.

    With V = [[A, C], [C^T, B]], the partially transposed invariant is
    ``D = det A + det B - 2 det C`` and
    ``eta^2 = (D +/- sqrt(D^2 - 4 det V)) / 2``.
    """
    v = _entries(V)
    _require_positive_definite(v)
    det_a = np.linalg.det(v[:2, :2])
    det_b = np.linalg.det(v[2:, 2:])
    det_c = np.linalg.det(v[:2, 2:])
    det_v = np.linalg.det(v)
    delta = det_a + det_b - 2.0 * det_c
    disc = delta * delta - 4.0 * det_v
    if disc < NEAR_DEGENERATE * delta * delta:
        # the root gap ~ sqrt(disc) carries an absolute error ~ eps * delta^2 / sqrt(disc);
        # near degeneracy the eigenvalue route keeps full precision
        return symplectic_eigenvalues_numeric(v)
    root = math.sqrt(disc)
    gt_sq = 0.5 * (delta + root)
    # smaller root via det V / gt_sq avoids cancellation
    lt_sq = det_v / gt_sq
    return math.sqrt(gt_sq), math.sqrt(lt_sq)


def symplectic_eigenvalues_numeric(V) -> tuple[float, float]:
    """(eta_gt, eta_lt) as moduli of the eigenvalues of i Omega V^PT."""
    v = _entries(partial_transpose(_entries(V)))
    _require_positive_definite(_entries(V))
    ev = np.sort(np.abs(np.linalg.eigvals(1j * _OMEGA @ v)))
    # eigenvalues come in +/- pairs
    return float(0.5 * (ev[2] + ev[3])), float(0.5 * (ev[0] + ev[1]))


def eta_reduced(chi_p: float, chi_m: float, p_p: float, p_m: float
                ) -> tuple[float, float, EtaBranch]:
    """(eta_lt^2, eta_gt^2, branch) for the symmetric late-time state.

    For identical detectors the partially transposed symplectic eigenvalues
    are the products <chi+^2><p-^2> and <chi-^2><p+^2>.
    """
    for name, val in (("chi_p", chi_p), ("chi_m", chi_m), ("p_p", p_p), ("p_m", p_m)):
        if not val > 0:
            raise DomainError(f"mode moment {name} must be positive, got {val}")
    a = chi_p * p_m
    b = chi_m * p_p
    if abs(a - b) <= DEGENERACY_TOL * max(a, b):
        branch = EtaBranch.DEGENERATE
    elif a < b:
        branch = EtaBranch.PLUS_CHI_MINUS_P
    else:
        branch = EtaBranch.MINUS_CHI_PLUS_P
    return min(a, b), max(a, b), branch


def negativity(eta_lt: float) -> tuple[float, float]:
    """(N, E_N) = (max{0, (1 - 2 eta)/(2 eta)}, max{0, -ln 2 eta})."""
    if not eta_lt > 0:
        raise DomainError(f"symplectic eigenvalue must be positive, got {eta_lt}")
    if eta_lt >= 0.5:
        return 0.0, 0.0
    return (1.0 - 2.0 * eta_lt) / (2.0 * eta_lt), -math.log(2.0 * eta_lt)


def mode_moments_from_matrix(V) -> tuple[float, float, float, float]:
    """Invert the assembly: (<chi+^2>, <chi-^2>, <p+^2>, <p-^2>) from V."""
    v = _entries(V)
    return (0.5 * (v[0, 0] + v[0, 2]), 2.0 * (v[0, 0] - v[0, 2]),
            0.5 * (v[1, 1] + v[1, 3]), 2.0 * (v[1, 1] - v[1, 3]))


def branch_from_matrix(V) -> EtaBranch:
    """Branch label from the sign of V22 V13 - V11 V24 = (<chi+^2><p-^2> - <chi-^2><p+^2>)/2."""
    chi_p, chi_m, p_p, p_m = mode_moments_from_matrix(V)
    return eta_reduced(chi_p, chi_m, p_p, p_m)[2]


def has_mode_structure(V, rtol: float = 1e-12) -> bool:
    """True for the identical-detector layout: equal diagonal blocks, no chi-p cross terms."""
    v = _entries(V)
    tol = rtol * np.abs(v).max()
    zero = [(0, 1), (0, 3), (1, 2), (2, 3)]
    return (all(abs(v[i, j]) <= tol and abs(v[j, i]) <= tol for i, j in zero)
            and abs(v[0, 0] - v[2, 2]) <= tol and abs(v[1, 1] - v[3, 3]) <= tol)


def entanglement_report(V) -> EntanglementReport:
    eta_gt, eta_lt = symplectic_eigenvalues(V)
    n, en = negativity(eta_lt)
    branch = branch_from_matrix(V) if has_mode_structure(V) else None
    return EntanglementReport(eta_lt, eta_gt, n, en, branch, eta_lt < 0.5)
