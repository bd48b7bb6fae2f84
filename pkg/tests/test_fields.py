import numpy as np
import pytest

from helpers import random_density, random_hermitian
from pcsft.exceptions import InvalidCovariance
from pcsft.fields import (
    CHUNK,
    FieldEnsemble,
    GaussianField,
    GaussianFieldSpec,
    dispersion,
    empirical_covariance,
    empirical_mean,
    empirical_pseudo_covariance,
    sample,
)
from pcsft.linalg import frobenius_distance, outer

N = 100_000
# ||D_hat - D||_F has RMS Tr(D)/sqrt(n) for circular fields; 5x that was never
# exceeded over 1500 independent calibration seeds
COV_C = 5.0


def test_zero_covariance_gives_zero_fields():
    ens = sample(GaussianFieldSpec(np.zeros((3, 3)), seed=1), 5)
    assert ens.count == 5
    np.testing.assert_array_equal(ens.samples, 0)


def test_identity_covariance_converges():
    ens = sample(GaussianFieldSpec(np.eye(2), seed=11), N)
    assert frobenius_distance(empirical_covariance(ens), np.eye(2)) <= 0.05
    assert np.all(np.abs(empirical_mean(ens)) <= 0.02)


def test_rank_one_support_is_exact():
    ens = sample(GaussianFieldSpec(outer([1, 0]), seed=2), 1000)
    assert np.all(ens.samples[:, 1] == 0)
    assert np.any(ens.samples[:, 0] != 0)


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_low_rank_support(rng, rank):
    d = 6
    D = 2.5 * random_density(rng, d, rank)
    w, Q = np.linalg.eigh(D)
    top = Q[:, -rank:]
    X = sample(GaussianFieldSpec(D, seed=5), 20_000).samples
    off = X - (X @ top.conj()) @ top.T
    rel = np.linalg.norm(off, axis=1) / np.linalg.norm(X, axis=1)
    assert rel.max() <= 1e-8


def test_standard_normal_convention():
    z = sample(GaussianFieldSpec(np.eye(1), seed=3), N).samples[:, 0]
    # real and imaginary parts each carry variance 1/2
    assert abs(np.var(z.real) - 0.5) < 0.01
    assert abs(np.var(z.imag) - 0.5) < 0.01
    assert abs(np.mean(z.real * z.imag)) < 0.01


def test_sampling_is_deterministic():
    spec = GaussianFieldSpec(random_density(np.random.default_rng(0), 4), seed=2**64 - 1)
    a = sample(spec, 3 * CHUNK + 17).samples
    b = sample(spec, 3 * CHUNK + 17).samples
    assert a.tobytes() == b.tobytes()
    c = sample(spec.with_seed(7), 3 * CHUNK + 17).samples
    assert not np.array_equal(a, c)


def test_parallel_equals_serial():
    spec = GaussianFieldSpec(random_density(np.random.default_rng(1), 3), seed=99)
    serial = sample(spec, 5 * CHUNK + 3, n_jobs=1).samples
    for jobs in (2, 4, -1):
        assert sample(spec, 5 * CHUNK + 3, n_jobs=jobs).samples.tobytes() == serial.tobytes()


def test_prefix_stability():
    spec = GaussianFieldSpec(np.eye(2), seed=4)
    long = sample(spec, 2 * CHUNK).samples
    np.testing.assert_array_equal(sample(spec, 100).samples, long[:100])


def test_streams_are_distinct():
    spec = GaussianFieldSpec(np.eye(2), seed=4)
    assert not np.array_equal(sample(spec, 10, stream=0).samples, sample(spec, 10, stream=1).samples)


def test_invalid_covariances():
    with pytest.raises(InvalidCovariance):
        GaussianFieldSpec(np.diag([1.0, -0.5]))
    with pytest.raises(InvalidCovariance):
        GaussianFieldSpec(np.array([[1, 1], [0, 1]]))
    with pytest.raises(InvalidCovariance):
        GaussianFieldSpec(np.ones((2, 3)))
    # roundoff-level negative eigenvalues are clipped, not rejected
    spec = GaussianFieldSpec(np.diag([1.0, -1e-13]))
    assert np.all(sample(spec, 10).samples[:, 1] == 0)
    with pytest.raises(ValueError):
        sample(spec, 0)
    with pytest.raises(ValueError):
        GaussianFieldSpec(np.eye(2), seed=-1)


def test_spec_is_immutable():
    spec = GaussianFieldSpec(np.eye(2))
    with pytest.raises(ValueError):
        spec.covariance[0, 0] = 3
    with pytest.raises(AttributeError):
        spec.seed = 3


def test_mean_estimator_examples():
    v = np.array([1 + 2j, -3j])
    spec = GaussianFieldSpec(np.eye(2))
    np.testing.assert_array_equal(empirical_mean(FieldEnsemble(spec, np.tile(v, (4, 1)))), v)
    np.testing.assert_array_equal(empirical_mean(FieldEnsemble(spec, np.array([v, -v]))), 0)


def test_covariance_estimator_examples():
    v = np.array([1 + 2j, -3j])
    spec = GaussianFieldSpec(np.eye(2))
    D = empirical_covariance(FieldEnsemble(spec, v[None, :]))
    np.testing.assert_allclose(D, np.outer(v, v.conj()))
    # entry (k, l) estimates E phi_k conj(phi_l)
    assert D[0, 1] == v[0] * np.conj(v[1])
    np.testing.assert_array_equal(empirical_covariance(FieldEnsemble(spec, np.zeros((3, 2)))), 0)


def test_covariance_diag21_convergence():
    D = np.diag([2.0, 1.0])
    ens = sample(GaussianFieldSpec(D, seed=21), N)
    err = frobenius_distance(empirical_covariance(ens), D)
    assert err <= 0.1
    assert err <= COV_C * np.trace(D) / np.sqrt(N)


def test_dispersion():
    assert dispersion(GaussianFieldSpec(np.eye(5))) == 5
    psi = np.array([1, 1j]) / np.sqrt(2)
    assert dispersion(GaussianFieldSpec(3.0 * outer(psi))) == pytest.approx(3.0, abs=1e-12)
    X = sample(GaussianFieldSpec(np.diag([2.0, 1.0]), seed=8), N).samples
    assert abs(np.mean(np.sum(np.abs(X) ** 2, axis=1)) - 3.0) <= 0.1


@pytest.mark.parametrize("d", [1, 2, 5, 8])
def test_zero_mean_and_circularity(rng, d):
    D = 3.0 * random_density(rng, d)
    ens = sample(GaussianFieldSpec(D, seed=100 + d), N)
    dkk = np.diag(D).real
    assert np.all(np.abs(empirical_mean(ens)) <= 4 * np.sqrt(dkk / N))
    pseudo = empirical_pseudo_covariance(ens)
    assert np.all(np.abs(pseudo) <= 4 * np.sqrt(np.outer(dkk, dkk) / N))


@pytest.mark.parametrize("d,rank", [(2, 1), (3, 3), (8, 8), (8, 2)])
def test_covariance_convergence_bound(rng, d, rank):
    D = random_density(rng, d, rank) * 1.7
    ens = sample(GaussianFieldSpec(D, seed=7 * d + rank), N)
    Dhat = empirical_covariance(ens)
    assert frobenius_distance(Dhat, D) <= COV_C * np.trace(D).real / np.sqrt(N)
    np.testing.assert_allclose(Dhat, Dhat.conj().T, atol=1e-15)
    assert np.linalg.eigvalsh(Dhat).min() >= -1e-12


class TestGaussianFieldEstimator:
    def test_fit_from_samples(self, rng):
        D = random_hermitian(rng, 3)
        D = D @ D
        X = sample(GaussianFieldSpec(D, seed=1), N).samples
        model = GaussianField(seed=5).fit(X)
        np.testing.assert_allclose(model.covariance_, empirical_covariance(X))
        assert model.n_features_in_ == 3

    def test_fixed_covariance_sampling(self):
        model = GaussianField(covariance=np.eye(2), seed=9, n_jobs=2)
        X = model.sample(100)
        np.testing.assert_array_equal(X, sample(GaussianFieldSpec(np.eye(2), 9), 100).samples)
        assert model.dispersion() == 2.0

    def test_params_roundtrip(self):
        from sklearn.base import clone

        model = GaussianField(covariance=np.eye(2), seed=3)
        assert model.get_params()["seed"] == 3
        twin = clone(model).set_params(seed=4)
        assert twin.seed == 4 and model.seed == 3

    def test_requires_data_or_covariance(self):
        with pytest.raises(ValueError):
            GaussianField().fit()
