"""
Classical linear filters on Gaussian fields and the exact channel oracle.

A single filter maps ``phi -> V phi`` and pushes the covariance forward to
``V D V^*``. A block filter ``(V_1, ..., V_k)`` maps ``k`` independent copies
of a field to ``sum_i V_i phi_i``; the output covariance is
``sum_i V_i D V_i^*``, i.e. the Kraus channel applied to ``D``. Normalizing
that covariance recovers the channel output state for any dispersion.

Both filter classes follow the scikit-learn transformer protocol so they can
be placed in pipelines over ``(n_samples, dim)`` complex sample matrices.
"""
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import fields
from ._validation import check_block_fields, check_fields
from .exceptions import (
    DimensionMismatch,
    Incomplete,
    InvalidCovariance,
    NotOrthogonal,
    NotProjector,
    NotTracePreserving,
)
from .linalg import (
    ATOL,
    as_operator,
    frobenius_distance,
    is_hermitian,
    is_projector,
    is_psd,
    scaled_tol,
    unitary_from_hamiltonian,
)
from .states import check_density, state_from_covariance

#: Branches whose Born weight falls below this have no conditional state.
DEGENERATE_WEIGHT = 1e-12


def pushforward_covariance(V, D) -> np.ndarray:
    """Covariance ``V D V^*`` of the filtered field ``V phi`` when ``phi ~ N(0, D)``."""
    V = as_operator(V, "filter", square=False)
    D = as_operator(D, "covariance")
    if V.shape[1] != D.shape[0]:
        raise DimensionMismatch(f"filter expects dimension {V.shape[1]}, covariance has {D.shape[0]}")
    tol = scaled_tol(D)
    if not is_hermitian(D, tol) or not is_psd(D, tol):
        raise InvalidCovariance("covariance must be Hermitian positive semidefinite")
    return V @ D @ V.conj().T


class LinearFilter(TransformerMixin, BaseEstimator):
    """
    The filter ``phi -> V phi`` for a (possibly rectangular) operator ``V``.

    Parameters
    ----------
    operator : array_like, shape (out_dim, in_dim)
    """

    def __init__(self, operator=None):
        self.operator = operator

    def fit(self, X=None, y=None):
        V = as_operator(self.operator, "filter", square=False)
        if X is not None:
            check_fields(X, V.shape[1])
        self.operator_ = V
        self.n_features_in_ = V.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_fields(X, self.n_features_in_)
        return X @ self.operator_.T

    def covariance_out(self, D):
        check_is_fitted(self)
        return pushforward_covariance(self.operator_, D)

    def apply(self, ens):
        """Filter a :class:`~pcsft.fields.FieldEnsemble`, carrying the pushed-forward spec."""
        check_is_fitted(self)
        if ens.spec.dim != self.n_features_in_:
            raise DimensionMismatch(
                f"filter expects dimension {self.n_features_in_}, ensemble has {ens.spec.dim}"
            )
        out_spec = fields.GaussianFieldSpec(self.covariance_out(ens.spec.covariance), ens.spec.seed)
        return fields.FieldEnsemble(out_spec, self.transform(ens.samples))


def _fitted(filt):
    return filt if hasattr(filt, "operator_") or hasattr(filt, "blocks_") else filt.fit()


def apply_filter(V, ens) -> "fields.FieldEnsemble":
    if not isinstance(V, LinearFilter):
        V = LinearFilter(V)
    return _fitted(V).apply(ens)


def unitary_filter(H, t, hbar=1.0) -> LinearFilter:
    """Schrodinger evolution over time ``t`` as the filter ``exp(-i t H / hbar)``."""
    return LinearFilter(unitary_from_hamiltonian(H, t, hbar)).fit()


def projection_filter(P, tol=ATOL) -> LinearFilter:
    P = as_operator(P, "projector")
    if not is_projector(P, tol):
        raise NotProjector("operator is not a Hermitian idempotent")
    return LinearFilter(P).fit()


@dataclass(frozen=True)
class KrausValidation:
    """Residuals of both completeness conventions for a set of blocks."""

    trace_preserving: bool
    residual: float  # || sum V^* V - I ||_F, decides the verdict
    povm_residual: float  # || sum V V^* - I ||_F, reported only
    blocks_psd: bool
    tol: float

    @property
    def valid(self) -> bool:
        return self.trace_preserving and self.blocks_psd


def validate_kraus(blocks, tol=ATOL) -> KrausValidation:
    if isinstance(blocks, BlockFilter):
        blocks = blocks.blocks
    Vs = [as_operator(V, f"block {i}", square=False) for i, V in enumerate(blocks)]
    if not Vs:
        raise ValueError("at least one block is required")
    in_dims = {V.shape[1] for V in Vs}
    out_dims = {V.shape[0] for V in Vs}
    if len(out_dims) != 1:
        raise DimensionMismatch("blocks must share their output dimension")
    (d_out,) = out_dims
    povm = sum(V @ V.conj().T for V in Vs)
    povm_residual = frobenius_distance(povm, np.eye(d_out))
    if len(in_dims) != 1:
        # inputs live on different spaces; completeness has no meaning
        return KrausValidation(False, float("nan"), povm_residual, True, tol)
    (d_in,) = in_dims
    effects = [V.conj().T @ V for V in Vs]
    psd = all(is_psd(E, scaled_tol(E)) for E in effects)
    residual = frobenius_distance(sum(effects), np.eye(d_in))
    return KrausValidation(residual <= tol, residual, povm_residual, psd, tol)


class BlockFilter(TransformerMixin, BaseEstimator):
    """
    The block filter ``(phi_1, ..., phi_k) -> sum_i V_i phi_i`` on independent field copies.

    Parameters
    ----------
    blocks : sequence of array_like
        Operators ``V_i`` of shape ``(out_dim, in_dim_i)`` sharing ``out_dim``.
    unchecked : bool
        Skip the trace-preservation check ``sum V_i^* V_i = I``. Needed for
        sub-normalized filters.
    tol : float
        Frobenius tolerance of the trace-preservation check.
    n_jobs : int
        Worker threads for sampling; results do not depend on it.
    """

    def __init__(self, blocks=None, unchecked=False, tol=ATOL, n_jobs=1):
        self.blocks = blocks
        self.unchecked = unchecked
        self.tol = tol
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        if self.blocks is None or len(self.blocks) == 0:
            raise ValueError("at least one block is required")
        Vs = [as_operator(V, f"block {i}", square=False) for i, V in enumerate(self.blocks)]
        if len({V.shape[0] for V in Vs}) != 1:
            raise DimensionMismatch("blocks must share their output dimension")
        self.validation_ = validate_kraus(Vs, self.tol)
        if not self.unchecked and not self.validation_.trace_preserving:
            raise NotTracePreserving(
                f"sum V_i^* V_i deviates from identity by {self.validation_.residual:.3e}"
            )
        self.blocks_ = Vs
        self.in_dims_ = [V.shape[1] for V in Vs]
        self.out_dim_ = Vs[0].shape[0]
        if X is not None:
            self._check_input(X)
        return self

    @property
    def n_blocks(self):
        return len(self.blocks)

    def _common_in_dim(self):
        if len(set(self.in_dims_)) != 1:
            raise DimensionMismatch("blocks have different input dimensions")
        return self.in_dims_[0]

    def _check_input(self, X):
        if isinstance(X, (list, tuple)):
            if len(X) != len(self.blocks_):
                raise DimensionMismatch(f"expected {len(self.blocks_)} field blocks, got {len(X)}")
            Xs = [check_fields(x, d) for x, d in zip(X, self.in_dims_)]
            if len({x.shape[0] for x in Xs}) != 1:
                raise DimensionMismatch("field blocks have different sample counts")
            return Xs
        X = check_block_fields(X, len(self.blocks_), self._common_in_dim())
        return [X[:, i, :] for i in range(X.shape[1])]

    def transform(self, X):
        """
        Parameters
        ----------
        X : array_like, shape (n_samples, n_blocks, in_dim), or list of (n_samples, in_dim_i)
            One independent field copy per block.
        """
        check_is_fitted(self)
        Xs = self._check_input(X)
        return sum(x @ V.T for x, V in zip(Xs, self.blocks_))

    def covariance_out(self, D):
        check_is_fitted(self)
        return sum(pushforward_covariance(V, D) for V in self.blocks_)

    def sample_transform(self, spec, n):
        """Draw one copy of ``spec`` per block on its own substream and filter them."""
        check_is_fitted(self)
        d = self._common_in_dim()
        if spec.dim != d:
            raise DimensionMismatch(f"blocks expect dimension {d}, spec has {spec.dim}")
        out = np.zeros((int(n), self.out_dim_), dtype=np.complex128)
        for i, V in enumerate(self.blocks_):
            out += fields.sample(spec, n, stream=i, n_jobs=self.n_jobs).samples @ V.T
        out_spec = fields.GaussianFieldSpec(self.covariance_out(spec.covariance), spec.seed)
        return fields.FieldEnsemble(out_spec, out)


def luders_measurement_filter(projectors, tol=ATOL) -> BlockFilter:
    """Block filter of a complete family of mutually orthogonal projectors."""
    Ps = [as_operator(P, f"projector {i}") for i, P in enumerate(projectors)]
    if not Ps:
        raise ValueError("at least one projector is required")
    d = Ps[0].shape[0]
    if any(P.shape != (d, d) for P in Ps):
        raise DimensionMismatch("projectors must share their dimension")
    for i, P in enumerate(Ps):
        if not is_projector(P, tol):
            raise NotProjector(f"projector {i} is not a Hermitian idempotent")
    for i in range(len(Ps)):
        for j in range(i + 1, len(Ps)):
            if np.linalg.norm(Ps[i] @ Ps[j]) > tol * d:
                raise NotOrthogonal(f"projectors {i} and {j} overlap")
    residual = frobenius_distance(sum(Ps), np.eye(d))
    if residual > tol * d:
        raise Incomplete(f"projectors sum to identity only within {residual:.3e}")
    return BlockFilter(Ps, tol=tol).fit()


def kraus_filter_apply(ch, spec, n, n_jobs=None) -> "fields.FieldEnsemble":
    """Realize the channel ``ch`` on ``n`` draws of ``spec`` by filtering independent copies."""
    if not isinstance(ch, BlockFilter):
        ch = BlockFilter(ch)
    ch = _fitted(ch)
    if n_jobs is not None and n_jobs != ch.n_jobs:
        ch = BlockFilter(ch.blocks, ch.unchecked, ch.tol, n_jobs).fit()
    return ch.sample_transform(spec, n)


def _channel_blocks(ch, strict):
    if isinstance(ch, BlockFilter):
        ch = _fitted(ch)
        Vs, validation = ch.blocks_, ch.validation_
    else:
        Vs = [as_operator(V, f"block {i}", square=False) for i, V in enumerate(ch)]
        validation = validate_kraus(Vs)
    if strict and not validation.trace_preserving:
        raise NotTracePreserving(
            f"sum V_i^* V_i deviates from identity by {validation.residual:.3e}"
        )
    return Vs


def kraus_channel_exact(ch, rho, strict=False) -> np.ndarray:
    """``sum_i V_i rho V_i^*``: the exact output the filters are checked against."""
    Vs = _channel_blocks(ch, strict)
    rho = check_density(rho)
    if any(V.shape[1] != rho.shape[0] for V in Vs):
        raise DimensionMismatch("block input dimension does not match the state")
    return sum(V @ rho @ V.conj().T for V in Vs)


@dataclass(frozen=True)
class ChannelDecomposition:
    """
    Born weights ``p_i = Tr(V_i rho V_i^*)`` and conditional states
    ``V_i rho V_i^* / p_i``. Degenerate branches (``p_i < 1e-12``) have state ``None``.
    """

    weights: np.ndarray
    conditional_states: list = field(repr=False)
    degenerate: tuple = ()
    out_dim: int = 0

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.out_dim, self.out_dim), dtype=np.complex128)
        for p, s in zip(self.weights, self.conditional_states):
            if s is not None:
                out += p * s
        return out


def channel_decomposition(ch, rho, strict=False) -> ChannelDecomposition:
    Vs = _channel_blocks(ch, strict)
    rho = check_density(rho)
    if any(V.shape[1] != rho.shape[0] for V in Vs):
        raise DimensionMismatch("block input dimension does not match the state")
    weights, states, degenerate = [], [], []
    for i, V in enumerate(Vs):
        branch = V @ rho @ V.conj().T
        p = float(np.trace(branch).real)
        weights.append(max(p, 0.0))
        if p < DEGENERATE_WEIGHT:
            states.append(None)
            degenerate.append(i)
        else:
            states.append(branch / p)
    return ChannelDecomposition(np.array(weights), states, tuple(degenerate), Vs[0].shape[0])


def output_state_mc(ch, spec, n, n_jobs=None) -> np.ndarray:
    """Normalized empirical covariance of the filtered ensemble."""
    ens = kraus_filter_apply(ch, spec, n, n_jobs=n_jobs)
    return state_from_covariance(fields.empirical_covariance(ens))
