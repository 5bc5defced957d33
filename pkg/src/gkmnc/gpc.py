"""Binary Gaussian process classification with a logistic link.

The latent posterior is approximated by Laplace inference: Newton iteration
maximizes Psi(f) = log p(y|f) - f' K^-1 f / 2 using the numerically stable
B = I + W^(1/2) K W^(1/2) factorization, so K itself is never inverted.
Predictive class probabilities integrate the logistic link over the latent
Gaussian with 20-node Gauss-Hermite quadrature.

Kernel: squared exponential with a shared length scale,
K_ij = signal_variance * exp(-||x_i - x_j||^2 / (2 length_scale^2)),
with jitter added on the diagonal of symmetric Gram matrices. Optional
hyperparameter fitting maximizes the Laplace log marginal likelihood over
(log signal_variance, log length_scale) by conjugate gradient with
finite-difference gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.linalg import solve_triangular
from scipy.spatial.distance import cdist

from .dataset import NormalizationParams, apply_normalizer, fit_normalizer
from .errors import (
    CholeskyFailure,
    DimensionMismatch,
    EmptyData,
    NonConvergence,
    PartitionTooLarge,
)
from .optim import CgConfig, LineSearchConfig, conjugate_gradient, finite_difference_gradient

NEWTON_TOLERANCE = 1e-6
NEWTON_MAX_ITERATIONS = 100
DEFAULT_SIZE_CAP = 3000
CONSTANT_LATENT = 20.0

_GH_NODES, _GH_WEIGHTS = hermgauss(20)


def logistic_link(f: np.ndarray | float) -> np.ndarray | float:
    """1 / (1 + exp(-f)), stable for large |f|."""
    z = np.asarray(f, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class KernelParams:
    signal_variance: float = 1.0
    length_scale: float = 1.0
    jitter: float = 1e-8

    def __post_init__(self) -> None:
        if self.signal_variance <= 0 or self.length_scale <= 0:
            raise ValueError("signal_variance and length_scale must be positive")
        if self.jitter < 0:
            raise ValueError("jitter must be nonnegative")


def kernel_matrix(
    x: np.ndarray, x2: np.ndarray | None, params: KernelParams
) -> np.ndarray:
    """Squared-exponential kernel matrix. Pass x2=None for the symmetric
    Gram matrix of x, which gets jitter on its diagonal."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    symmetric = x2 is None
    x2m = x if symmetric else np.atleast_2d(np.asarray(x2, dtype=float))
    if x.shape[1] != x2m.shape[1]:
        raise DimensionMismatch(
            f"feature dimensions differ: {x.shape[1]} vs {x2m.shape[1]}"
        )
    d2 = cdist(x, x2m, metric="sqeuclidean")
    k = params.signal_variance * np.exp(-d2 / (2.0 * params.length_scale**2))
    if symmetric:
        k[np.diag_indices_from(k)] += params.jitter
    return k


def _log_likelihood(y: np.ndarray, f: np.ndarray) -> float:
    """log p(y|f) = -sum log(1 + exp(-y f)) for y in {+1,-1}."""
    return float(-np.logaddexp(0.0, -y * f).sum())


def _cholesky_b(k: np.ndarray, sqrt_w: np.ndarray) -> np.ndarray:
    b = np.eye(len(k)) + sqrt_w[:, None] * k * sqrt_w[None, :]
    try:
        return np.linalg.cholesky(b)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure(
            "B = I + W^(1/2) K W^(1/2) is not positive definite; "
            "the kernel matrix likely needs more jitter"
        ) from exc


@dataclass(frozen=True)
class LaplaceResult:
    f_hat: np.ndarray
    alpha: np.ndarray  # gradient of log p(y|f) at the mode
    sqrt_w: np.ndarray
    chol_lower: np.ndarray  # Cholesky factor of B at the mode
    log_marginal_likelihood: float
    psi_trace: tuple[float, ...]


def laplace_mode(k: np.ndarray, y: np.ndarray) -> LaplaceResult:
    """Find the mode of the latent posterior by Newton iteration.

    Converges when the Psi objective changes by less than 1e-6; each
    iteration solves against the Cholesky factor of B rather than K, which
    keeps the update well conditioned for any positive semidefinite K.
    """
    k = np.asarray(k, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    if k.shape != (n, n):
        raise DimensionMismatch(f"K is {k.shape}, targets have length {n}")
    t = (y + 1.0) / 2.0

    f = np.zeros(n)
    psi = _log_likelihood(y, f)
    trace = [psi]
    converged = False
    for _ in range(NEWTON_MAX_ITERATIONS):
        pi = logistic_link(f)
        w = pi * (1.0 - pi)
        sqrt_w = np.sqrt(w)
        chol = _cholesky_b(k, sqrt_w)
        b_vec = w * f + (t - pi)
        inner = solve_triangular(chol, sqrt_w * (k @ b_vec), lower=True)
        a = b_vec - sqrt_w * solve_triangular(chol.T, inner, lower=False)
        f = k @ a
        psi_new = -0.5 * float(a @ f) + _log_likelihood(y, f)
        trace.append(psi_new)
        if abs(psi_new - psi) < NEWTON_TOLERANCE:
            psi = psi_new
            converged = True
            break
        psi = psi_new
    if not converged:
        raise NonConvergence(
            f"Laplace Newton did not converge within {NEWTON_MAX_ITERATIONS} iterations"
        )

    alpha = t - logistic_link(f)
    pi = logistic_link(f)
    sqrt_w = np.sqrt(pi * (1.0 - pi))
    chol = _cholesky_b(k, sqrt_w)
    lml = (
        -0.5 * float(alpha @ f)
        + _log_likelihood(y, f)
        - float(np.log(np.diag(chol)).sum())
    )
    return LaplaceResult(
        f_hat=f,
        alpha=alpha,
        sqrt_w=sqrt_w,
        chol_lower=chol,
        log_marginal_likelihood=lml,
        psi_trace=tuple(trace),
    )


@dataclass(frozen=True)
class GpcModel:
    training_inputs: np.ndarray  # normalized feature space
    training_targets: np.ndarray  # {+1, -1}
    kernel: KernelParams
    f_hat: np.ndarray
    alpha: np.ndarray
    sqrt_w: np.ndarray
    chol_lower: np.ndarray
    log_marginal_likelihood: float
    normalizer: NormalizationParams
    seed: int
    constant_class: int | None = None  # set for single-class partitions

    @property
    def n_training(self) -> int:
        return self.training_inputs.shape[0]


def _laplace_lml(xn: np.ndarray, y: np.ndarray, params: KernelParams) -> float:
    try:
        return laplace_mode(kernel_matrix(xn, None, params), y).log_marginal_likelihood
    except (CholeskyFailure, NonConvergence, FloatingPointError):
        return -np.inf


def gpc_train(
    features: np.ndarray,
    targets: np.ndarray,
    seed: int = 0,
    optimize_hyperparams: bool = False,
    cg: CgConfig | None = None,
    ls: LineSearchConfig | None = None,
    kernel: KernelParams | None = None,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> GpcModel:
    """Normalize the partition, build the Gram matrix, and run Laplace
    inference. With optimize_hyperparams, first maximizes the Laplace log
    marginal likelihood over (log signal_variance, log length_scale) using
    conjugate gradient with finite-difference gradients.

    Refuses partitions above size_cap: cubic-cost training on such data is
    exactly what grouping and clustering are there to avoid.
    """
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=int)
    if features.shape[0] == 0:
        raise EmptyData("cannot train on an empty partition")
    if features.shape[0] > size_cap:
        raise PartitionTooLarge(
            f"partition has {features.shape[0]} rows, above the GPC cap of {size_cap}; "
            "split the data with grouping or clustering, raise the cap, or use mlp"
        )
    normalizer = fit_normalizer(features)
    params = kernel or KernelParams()

    classes = np.unique(targets)
    if classes.size == 1:
        return GpcModel(
            training_inputs=np.empty((0, features.shape[1])),
            training_targets=np.empty(0, dtype=int),
            kernel=params,
            f_hat=np.empty(0),
            alpha=np.empty(0),
            sqrt_w=np.empty(0),
            chol_lower=np.empty((0, 0)),
            log_marginal_likelihood=0.0,
            normalizer=normalizer,
            seed=seed,
            constant_class=int(classes[0]),
        )

    xn = apply_normalizer(normalizer, features)
    y = targets.astype(float)

    if optimize_hyperparams:
        def negative_lml(theta: np.ndarray) -> float:
            p = replace(
                params,
                signal_variance=float(np.exp(theta[0])),
                length_scale=float(np.exp(theta[1])),
            )
            return -_laplace_lml(xn, y, p)

        theta0 = np.log([params.signal_variance, params.length_scale])
        theta, _ = conjugate_gradient(
            objective=negative_lml,
            gradient=lambda th: finite_difference_gradient(negative_lml, th, h=1e-4),
            x0=theta0,
            cg=cg or CgConfig(max_iterations=100, gradient_norm_tolerance=1e-3),
            ls=ls or LineSearchConfig(),
        )
        params = replace(
            params,
            signal_variance=float(np.exp(theta[0])),
            length_scale=float(np.exp(theta[1])),
        )

    result = laplace_mode(kernel_matrix(xn, None, params), y)
    return GpcModel(
        training_inputs=xn,
        training_targets=targets.copy(),
        kernel=params,
        f_hat=result.f_hat,
        alpha=result.alpha,
        sqrt_w=result.sqrt_w,
        chol_lower=result.chol_lower,
        log_marginal_likelihood=result.log_marginal_likelihood,
        normalizer=normalizer,
        seed=seed,
    )


def _quadrature_prob(mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """E[logistic(f)] under N(mu, sigma^2) by Gauss-Hermite quadrature."""
    latent = mu[:, None] + np.sqrt(2.0) * sigma[:, None] * _GH_NODES[None, :]
    return (logistic_link(latent) @ _GH_WEIGHTS) / np.sqrt(np.pi)


def gpc_predict_prob_batch(model: GpcModel, features: np.ndarray) -> np.ndarray:
    """Class +1 probability for each raw feature row."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    if features.shape[1] != model.normalizer.n_features:
        raise DimensionMismatch(
            f"expected {model.normalizer.n_features} features, got {features.shape[1]}"
        )
    if model.constant_class is not None:
        p = logistic_link(CONSTANT_LATENT if model.constant_class == 1 else -CONSTANT_LATENT)
        return np.full(features.shape[0], p)
    xn = apply_normalizer(model.normalizer, features)
    k_star = kernel_matrix(model.training_inputs, xn, model.kernel)  # (n, m)
    mu = k_star.T @ model.alpha
    v = solve_triangular(model.chol_lower, model.sqrt_w[:, None] * k_star, lower=True)
    var = np.maximum(model.kernel.signal_variance - np.sum(v**2, axis=0), 0.0)
    return _quadrature_prob(mu, np.sqrt(var))


def gpc_predict_prob(model: GpcModel, x: np.ndarray) -> float:
    """Probability of class +1 for one raw feature vector."""
    return float(gpc_predict_prob_batch(model, np.asarray(x, dtype=float).ravel()[None, :])[0])


def gpc_classify(model: GpcModel, x: np.ndarray) -> int:
    """Class decision: probability strictly above 0.5 is +1, otherwise -1."""
    return 1 if gpc_predict_prob(model, x) > 0.5 else -1


def gpc_classify_batch(model: GpcModel, features: np.ndarray) -> np.ndarray:
    return np.where(gpc_predict_prob_batch(model, features) > 0.5, 1, -1)
