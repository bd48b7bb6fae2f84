"""
Dictionary between quantum states and Gaussian field covariances.

A density operator ``rho`` and a dispersion ``sigma2 > 0`` give the covariance
``D = sigma2 * rho``; conversely ``rho = D / Tr D``. A Hermitian observable
``A`` becomes the quadratic form ``f_A(phi) = <A phi, phi>`` whose Gaussian
mean is ``Tr(D A) = Tr D * Tr(rho A)``.
"""
from dataclasses import dataclass

import numpy as np

from . import fields
from ._validation import check_fields, check_vector
from .exceptions import DimensionMismatch, InvalidState, NotHermitian, ZeroField
from .linalg import ATOL, as_operator, eig_hermitian, is_hermitian, outer, scaled_tol

#: Traces at or below this value are treated as a vanishing field.
ZERO_TRACE = 1e-12


def check_density(rho, tol=ATOL) -> np.ndarray:
    """Validate a density operator: Hermitian, PSD and unit trace within ``tol``."""
    rho = as_operator(rho, "density operator")
    if not is_hermitian(rho, tol):
        raise InvalidState("density operator is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise InvalidState(f"density operator has trace {tr.real:.12g}, expected 1")
    if eig_hermitian(rho, tol).eigenvalues[-1] < -tol:
        raise InvalidState("density operator is not positive semidefinite")
    return rho


def pure_state(psi, tol=1e-12) -> np.ndarray:
    """Projector ``psi (x) psi`` onto a unit vector."""
    psi = check_vector(psi, name="state vector")
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > tol:
        raise InvalidState(f"state vector has norm {norm:.15g}, expected 1")
    return outer(psi)


def _check_sigma2(sigma2):
    sigma2 = float(sigma2)
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return sigma2


def covariance_from_state(rho, sigma2=1.0, seed=0) -> fields.GaussianFieldSpec:
    rho = check_density(rho)
    return fields.GaussianFieldSpec(_check_sigma2(sigma2) * rho, seed)


def state_from_covariance(spec) -> np.ndarray:
    """Normalize a covariance (spec or matrix) to unit trace."""
    D = spec.covariance if isinstance(spec, fields.GaussianFieldSpec) else as_operator(spec)
    tr = np.trace(D).real
    if tr <= ZERO_TRACE:
        raise ZeroField(f"covariance trace {tr:.3e} is not positive")
    return D / tr


def _check_observable(A, dim):
    A = as_operator(A, "observable")
    if A.shape[0] != dim:
        raise DimensionMismatch(f"observable has dimension {A.shape[0]}, expected {dim}")
    if not is_hermitian(A, scaled_tol(A)):
        raise NotHermitian("observable is not Hermitian")
    return A


def quadratic_form(A, phi):
    """
    ``<A phi, phi>`` for one field (returns a float) or for each row of an
    ``(n, d)`` sample matrix (returns an array).
    """
    phi = np.asarray(phi, dtype=np.complex128)
    single = phi.ndim == 1
    X = check_fields(phi)
    A = _check_observable(A, X.shape[1])
    vals = np.einsum("nk,nk->n", X @ A.T, X.conj())
    bound = ATOL * np.einsum("nk,nk->n", X, X.conj()).real * max(np.max(np.abs(A)), 1.0) * A.shape[0]
    if np.any(np.abs(vals.imag) > bound):
        raise NotHermitian("quadratic form has a non-negligible imaginary part")
    return float(vals[0].real) if single else vals.real


def quantum_average(A, rho) -> float:
    """``Tr(rho A)``; for a pure state this is ``<A psi, psi>``."""
    rho = check_density(rho)
    A = _check_observable(A, rho.shape[0])
    val = np.trace(rho @ A)
    if abs(val.imag) > scaled_tol(A):
        raise NotHermitian(f"Tr(rho A) has imaginary part {val.imag:.3e}")
    return float(val.real)


def classical_average_mc(A, spec, n, n_jobs=1):
    """
    Monte Carlo estimate of ``E f_A(phi)`` for ``phi ~ spec``.

    Returns
    -------
    estimate : float
    stderr : float
        Standard error of the mean (sample variance with divisor ``n - 1``).
    """
    if int(n) < 2:
        raise ValueError("n must be at least 2")
    ens = fields.sample(spec, n, n_jobs=n_jobs)
    vals = quadratic_form(A, ens.samples)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(len(vals)))


@dataclass(frozen=True)
class ScalingReport:
    """Classical Monte Carlo average against the rescaled quantum average."""

    lhs: float
    stderr: float
    rhs: float
    n: int
    n_stderr: float = 4.0

    @property
    def difference(self) -> float:
        return self.lhs - self.rhs

    @property
    def threshold(self) -> float:
        return self.n_stderr * self.stderr

    @property
    def passed(self) -> bool:
        return abs(self.difference) <= self.threshold


def check_scaling_relation(A, rho, sigma2=1.0, n=100_000, seed=0, n_jobs=1) -> ScalingReport:
    spec = covariance_from_state(rho, sigma2, seed)
    lhs, err = classical_average_mc(A, spec, n, n_jobs=n_jobs)
    rhs = float(sigma2) * quantum_average(A, rho)
    return ScalingReport(lhs, err, rhs, int(n))
