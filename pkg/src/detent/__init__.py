"""Late-time entanglement of two detectors coupled through a common quantum field."""

from .analysis import (
    CriticalKind,
    CriticalMethod,
    CriticalSeparation,
    SweepResult,
    asymptotic_eta_sq,
    branch_switch_separation,
    critical_separation_numeric,
    ell_gt_large_sep,
    ell_gt_small_sep,
    ell_lt_iterated,
    ell_lt_weak_coupling,
    eta_sq_of_ell,
    gamma_upper_bound,
    sweep,
)
from .covariance import (
    CovarianceMatrix,
    ModeMoments,
    MomentMethod,
    covariance_matrix_late,
    mode_moments,
)
from .dynamics import (
    PoleSet,
    asymptotic_pole_ladder,
    dominant_pole_numeric,
    dominant_pole_perturbative,
    effective_parameters,
    simulate_transient,
)
from .entanglement import (
    EntanglementReport,
    EtaBranch,
    entanglement_report,
    eta_reduced,
    negativity,
    symplectic_eigenvalues,
)
from .errors import DetentError, DomainError, InstabilityError, NoConvergenceError, ValidityError
from .model import Branch, Regime, SystemParams, classify_regime, mode_view, stability_check

__version__ = "0.1.0"
