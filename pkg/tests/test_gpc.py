import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkmnc.errors import (
    DimensionMismatch,
    EmptyData,
    PartitionTooLarge,
)
from gkmnc.gpc import (
    KernelParams,
    gpc_classify,
    gpc_classify_batch,
    gpc_predict_prob,
    gpc_predict_prob_batch,
    gpc_train,
    kernel_matrix,
    laplace_mode,
    logistic_link,
)


def bisection_mode_1d(tol=1e-12):
    """Oracle: the 1-D posterior mode solves (1 - logistic(f)) = f for a unit
    prior variance and a single +1 target; solved by bisection."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid - (1.0 - 1.0 / (1.0 + np.exp(-mid))) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def blob_problem(seed=0, n=20, spread=0.1):
    rng = np.random.default_rng(seed)
    x = np.vstack([rng.normal(-5, spread, (n, 1)), rng.normal(5, spread, (n, 1))])
    y = np.array([-1] * n + [1] * n)
    return x, y


class TestLink:
    def test_zero_is_half(self):
        assert logistic_link(0.0) == 0.5

    def test_saturation_without_overflow(self):
        assert logistic_link(40.0) == pytest.approx(1.0, abs=1e-15)
        assert logistic_link(-40.0) == pytest.approx(0.0, abs=1e-15)

    @given(st.floats(min_value=-500, max_value=500, allow_nan=False))
    @settings(max_examples=100, deadline=None)
    def test_symmetry(self, f):
        assert logistic_link(f) + logistic_link(-f) == pytest.approx(1.0, abs=1e-12)


class TestKernel:
    def test_diagonal_is_one_plus_jitter(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        params = KernelParams(signal_variance=1.0, length_scale=1.0, jitter=1e-8)
        k = kernel_matrix(x, None, params)
        assert np.allclose(np.diag(k), 1.0 + 1e-8)

    def test_decay_with_distance(self):
        params = KernelParams()
        far = kernel_matrix(np.array([[0.0]]), np.array([[50.0]]), params)
        assert far[0, 0] < 1e-12

    def test_distance_sqrt_two_lengthscales(self):
        ell = 0.7
        params = KernelParams(signal_variance=2.0, length_scale=ell)
        x = np.array([[0.0], [ell * np.sqrt(2.0)]])
        k = kernel_matrix(x, x.copy(), params)  # cross form: no jitter
        assert k[0, 1] == pytest.approx(2.0 * np.exp(-1.0), rel=1e-12)

    def test_symmetric_and_cholesky_factorizable(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(40, 3))
        k = kernel_matrix(x, None, KernelParams())
        assert np.max(np.abs(k - k.T)) < 1e-12
        np.linalg.cholesky(k)  # must not raise

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            kernel_matrix(np.zeros((2, 2)), np.zeros((2, 3)), KernelParams())

    def test_param_validation(self):
        with pytest.raises(ValueError):
            KernelParams(signal_variance=0.0)


class TestLaplace:
    def test_one_dimensional_fixed_point(self):
        oracle = bisection_mode_1d()
        result = laplace_mode(np.array([[1.0]]), np.array([1.0]))
        assert result.f_hat[0] == pytest.approx(oracle, abs=1e-4)

    def test_identity_prior_decouples(self):
        oracle = bisection_mode_1d()
        result = laplace_mode(np.eye(2), np.array([1.0, -1.0]))
        assert result.f_hat[0] == pytest.approx(oracle, abs=1e-4)
        assert result.f_hat[1] == pytest.approx(-oracle, abs=1e-4)

    def test_label_flip_negates_mode(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(15, 2))
        k = kernel_matrix(x, None, KernelParams())
        y = np.array([1.0, -1.0] * 7 + [1.0])
        a = laplace_mode(k, y)
        b = laplace_mode(k, -y)
        assert np.allclose(a.f_hat, -b.f_hat, atol=1e-10)

    def test_psi_monotone_increasing(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(25, 2))
        k = kernel_matrix(x, None, KernelParams())
        y = np.where(x[:, 0] > 0, 1.0, -1.0)
        result = laplace_mode(k, y)
        trace = result.psi_trace
        violations = sum(1 for a, b in zip(trace, trace[1:]) if b < a - 1e-6)
        assert violations == 0

    def test_stationarity_residual(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(30, 3))
        k = kernel_matrix(x, None, KernelParams())
        y = np.where(x[:, 0] + x[:, 1] > 0, 1.0, -1.0)
        result = laplace_mode(k, y)
        assert np.max(np.abs(result.f_hat - k @ result.alpha)) < 1e-6


class TestTrain:
    def test_separated_blobs_full_accuracy(self):
        x, y = blob_problem()
        model = gpc_train(x, y)
        assert np.all(gpc_classify_batch(model, x) == y)

    def test_single_class_constant(self):
        model = gpc_train(np.array([[0.0], [1.0]]), np.array([1, 1]))
        assert model.constant_class == 1
        prob = gpc_predict_prob(model, np.array([99.0]))
        assert 0.0 < prob < 1.0 and prob > 0.5
        assert gpc_classify(model, np.array([-99.0])) == 1

    def test_defaults_recorded_without_optimization(self):
        x, y = blob_problem()
        model = gpc_train(x, y, optimize_hyperparams=False)
        assert model.kernel.signal_variance == 1.0
        assert model.kernel.length_scale == 1.0

    def test_size_cap(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(50, 1))
        y = np.where(x[:, 0] > 0, 1, -1)
        with pytest.raises(PartitionTooLarge, match="grouping or clustering"):
            gpc_train(x, y, size_cap=49)

    def test_empty_partition(self):
        with pytest.raises(EmptyData):
            gpc_train(np.empty((0, 1)), np.empty(0, dtype=int))

    def test_hyperparameter_optimization_improves_marginal_likelihood(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(30, 1)) * 3.0
        y = np.where(np.sin(x[:, 0]) > 0, 1, -1)
        base = gpc_train(x, y, optimize_hyperparams=False)
        tuned = gpc_train(x, y, optimize_hyperparams=True)
        assert tuned.log_marginal_likelihood >= base.log_marginal_likelihood - 1e-9


class TestPredict:
    def test_zero_latent_mean_gives_half(self):
        # symmetric labels at one location cancel the latent mean
        x = np.array([[0.0], [0.0]])
        y = np.array([1, -1])
        model = gpc_train(x, y)
        assert gpc_predict_prob(model, np.array([0.0])) == pytest.approx(0.5, abs=1e-12)

    def test_zero_variance_reduces_to_link(self):
        from gkmnc.gpc import _quadrature_prob

        mu = np.array([-1.3, 0.0, 0.4, 2.0])
        probs = _quadrature_prob(mu, np.zeros(4))
        assert np.allclose(probs, logistic_link(mu), atol=1e-12)

    def test_probabilities_in_open_interval(self):
        x, y = blob_problem(seed=7)
        model = gpc_train(x, y)
        rng = np.random.default_rng(8)
        p = gpc_predict_prob_batch(model, rng.normal(0, 10, (100, 1)))
        assert np.all(p > 0.0) and np.all(p < 1.0)

    def test_label_flip_complements_probability(self):
        x, y = blob_problem(seed=9)
        a = gpc_train(x, y)
        b = gpc_train(x, -y)
        rng = np.random.default_rng(10)
        queries = rng.normal(0, 4, (60, 1))
        pa = gpc_predict_prob_batch(a, queries)
        pb = gpc_predict_prob_batch(b, queries)
        assert np.max(np.abs(pa + pb - 1.0)) < 1e-10

    def test_class_complement_sums_to_one_by_construction(self):
        x, y = blob_problem(seed=11)
        model = gpc_train(x, y)
        p1 = gpc_predict_prob(model, np.array([1.0]))
        assert p1 + (1.0 - p1) == 1.0

    def test_classify_threshold(self):
        x, y = blob_problem(seed=12)
        model = gpc_train(x, y)
        assert gpc_classify(model, np.array([5.0])) == 1
        assert gpc_classify(model, np.array([-5.0])) == -1

    def test_dimension_mismatch(self):
        x, y = blob_problem()
        model = gpc_train(x, y)
        with pytest.raises(DimensionMismatch):
            gpc_predict_prob_batch(model, np.zeros((3, 4)))
