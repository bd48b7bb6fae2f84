"""
Zero-mean circular complex Gaussian fields N(0, D) on C^d.

Samples are stored row-wise: an ensemble of ``n`` fields is an ``(n, d)``
complex array. Draws are reproducible: sample ``i`` of stream ``s`` comes from
the substream ``SeedSequence(seed, spawn_key=(s, i // CHUNK))``, so the output
does not depend on how chunks are distributed over workers.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_fields
from .exceptions import InvalidCovariance, NotHermitian
from .linalg import ATOL, as_operator, eig_hermitian, scaled_tol

#: Number of consecutive sample indices that share one RNG substream.
CHUNK = 8192

_MAX_SEED = 2**64 - 1


@dataclass(frozen=True, eq=False)
class GaussianFieldSpec:
    """Distribution N(0, covariance) together with the seed used to sample it."""

    covariance: np.ndarray
    seed: int = 0
    # filled in from the covariance; clipped eigenpairs reused by every draw
    _factor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        try:
            D = as_operator(self.covariance, "covariance")
        except ValueError as exc:
            raise InvalidCovariance(str(exc)) from exc
        if not 0 <= int(self.seed) <= _MAX_SEED:
            raise ValueError("seed must be a 64-bit unsigned integer")
        tol = scaled_tol(D)
        try:
            w, Q = eig_hermitian(D, tol)
        except NotHermitian as exc:
            raise InvalidCovariance(str(exc)) from exc
        if w.size and w[-1] < -tol:
            raise InvalidCovariance(f"covariance has eigenvalue {w[-1]:.3e} < -{tol:.1e}")
        # zero out negatives and roundoff-level positives so rank-deficient
        # covariances keep their exact support
        cutoff = max(w.size, 1) * np.finfo(float).eps * (w[0] if w.size else 0.0)
        w = np.where(w > cutoff, w, 0.0)
        D.setflags(write=False)
        object.__setattr__(self, "covariance", D)
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "_factor", Q * np.sqrt(w))

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]

    def with_seed(self, seed):
        return GaussianFieldSpec(self.covariance, seed)


@dataclass(frozen=True, eq=False)
class FieldEnsemble:
    """A finite collection of sampled fields and the spec they were drawn from."""

    spec: GaussianFieldSpec
    samples: np.ndarray

    def __post_init__(self):
        X = check_fields(self.samples, self.spec.dim)
        X.setflags(write=False)
        object.__setattr__(self, "samples", X)

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    def __len__(self):
        return self.count


def standard_complex_normal(rng, size):
    """Circular complex normal draws with E|z|^2 = 1 (real and imaginary variance 1/2)."""
    # interleaved (re, im) pairs so a shorter draw is a prefix of a longer one
    pairs = rng.standard_normal((*size, 2))
    return (pairs[..., 0] + 1j * pairs[..., 1]) / np.sqrt(2.0)


def _chunk_rng(seed, stream, chunk):
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream, chunk)))
    )


def standard_fields(seed, n, dim, stream=0, n_jobs=1) -> np.ndarray:
    """
    Draw ``n`` standard circular complex vectors of length ``dim`` from substream ``stream``.

    The result is bitwise identical for every ``n_jobs``.
    """
    n_chunks = -(-n // CHUNK)
    out = np.empty((n, dim), dtype=np.complex128)

    def fill(c):
        lo, hi = c * CHUNK, min(n, (c + 1) * CHUNK)
        out[lo:hi] = standard_complex_normal(_chunk_rng(seed, stream, c), (hi - lo, dim))

    if n_jobs == 1 or n_chunks == 1:
        for c in range(n_chunks):
            fill(c)
    else:
        workers = None if n_jobs in (None, -1) else n_jobs
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(n_chunks)))
    return out


def sample(spec: GaussianFieldSpec, n: int, stream=0, n_jobs=1) -> FieldEnsemble:
    """
    Draw ``n`` independent fields ``phi = Q diag(sqrt(lambda)) z`` from ``spec``.

    ``stream`` selects an independent family of substreams under the same seed;
    block filters use one stream per block.
    """
    if int(n) < 1:
        raise ValueError("n must be at least 1")
    z = standard_fields(spec.seed, int(n), spec.dim, stream, n_jobs)
    return FieldEnsemble(spec, z @ spec._factor.T)


def empirical_mean(ens) -> np.ndarray:
    X = _samples(ens)
    return X.mean(axis=0)


def empirical_covariance(ens) -> np.ndarray:
    """
    Known-zero-mean covariance estimate ``(1/n) sum phi phi^H``.

    Entry ``(k, l)`` estimates ``E phi_k conj(phi_l)``; no mean is subtracted.
    """
    X = _samples(ens)
    return X.T @ X.conj() / X.shape[0]


def empirical_pseudo_covariance(ens) -> np.ndarray:
    """Estimate of ``E phi phi^T``; vanishes for circular fields."""
    X = _samples(ens)
    return X.T @ X / X.shape[0]


def empirical_cross_covariance(X, Y) -> np.ndarray:
    """Estimate of ``E x y^H`` from paired rows of ``X`` and ``Y``."""
    X, Y = _samples(X), _samples(Y)
    return X.T @ Y.conj() / X.shape[0]


def dispersion(spec) -> float:
    """Trace of the covariance, the mean squared field norm."""
    D = spec.covariance if isinstance(spec, GaussianFieldSpec) else as_operator(spec)
    tr = np.trace(D)
    if abs(tr.imag) > ATOL:
        raise InvalidCovariance(f"trace has imaginary part {tr.imag:.3e}")
    return float(tr.real)


def _samples(ens):
    if isinstance(ens, FieldEnsemble):
        return ens.samples
    X = check_fields(ens)
    if X.shape[0] < 1:
        raise ValueError("ensemble is empty")
    return X


class GaussianField(BaseEstimator):
    """
    Estimator wrapper around a zero-mean circular Gaussian field.

    ``fit`` estimates the covariance from an ``(n, d)`` sample matrix with the
    known-zero-mean estimator; ``sample`` draws new fields from the fitted (or
    given) covariance.

    Parameters
    ----------
    covariance : array_like or None
        Fixed covariance. When given, ``fit`` only checks the dimension.
    seed : int
        Seed for :meth:`sample`.
    n_jobs : int
        Worker threads used when sampling; does not change the output.
    """

    def __init__(self, covariance=None, seed=0, n_jobs=1):
        self.covariance = covariance
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        if self.covariance is not None:
            self.spec_ = GaussianFieldSpec(self.covariance, self.seed)
            if X is not None:
                check_fields(X, self.spec_.dim)
        else:
            if X is None:
                raise ValueError("either covariance or samples are required")
            self.spec_ = GaussianFieldSpec(empirical_covariance(X), self.seed)
        self.covariance_ = self.spec_.covariance
        self.n_features_in_ = self.spec_.dim
        return self

    def sample(self, n, stream=0):
        if not hasattr(self, "spec_"):
            self.fit()
        return sample(self.spec_, n, stream=stream, n_jobs=self.n_jobs).samples

    def dispersion(self):
        if not hasattr(self, "spec_"):
            self.fit()
        return dispersion(self.spec_)
