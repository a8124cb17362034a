"""Positivity of quadratic forms on discrete sets, +-1 / lattice autocorrelation
membership, and point-process views of finite-state processes."""

from cornerpd.definiteness import (
    DefinitenessVerdict,
    Method,
    Verdict,
    cpd_exact,
    cpd_refute,
    cpd_theorem3,
    lattice_positive_exact,
)
from cornerpd.errors import (
    CapacityError,
    CertificateError,
    CornerPDError,
    DimensionError,
    NonConvergenceError,
    ValidationError,
)
from cornerpd.membership import (
    AcfSequence,
    Membership,
    MembershipVerdict,
    lattice_membership_test,
    lattice_rho0,
    mcmillan_test,
    mcmillan_trace_check,
    toeplitz_is_psd,
    verify_decomposition,
    verify_witness,
)
from cornerpd.quadform import (
    SymmetricSplit,
    as_symmetric,
    build_toeplitz,
    qf_value,
    symmetrize_zero_diag,
)
from cornerpd.search import (
    EnumerationResult,
    SearchResult,
    anti_stable_sweep,
    enumerate_anti_stable,
    enumerate_hypercube_min,
    enumerate_lattice_min,
    flip_gain,
    is_anti_stable,
    is_stable,
    lattice_descent,
    multistart,
    run_anti_stable,
    run_stable,
)

__version__ = "0.1.0"
