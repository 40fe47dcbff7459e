"""Dense least squares and Gaussian conditioning primitives."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class AffineModel:
    """x -> intercept + coefficients @ x over a fixed feature index set."""

    intercept: float
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coef = np.array(self.coefficients, dtype=float)
        if coef.ndim != 1:
            raise ValueError("coefficients must be 1-d")
        if not np.isfinite(coef).all() or not np.isfinite(self.intercept):
            raise ValueError("affine model entries must be finite")
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def n_features(self) -> int:
        return self.coefficients.size

    def predict(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        out = self.intercept + x @ self.coefficients
        return float(out) if out.ndim == 0 else out

    __call__ = predict


def least_squares(features, targets) -> AffineModel:
    """Minimum-norm least squares with an internally appended intercept column.

    The solution minimizes the Euclidean norm of the stacked vector
    (coefficients, intercept) among all minimizers of the residual sum of
    squares, so consistent systems are interpolated exactly and
    rank-deficient ones resolve deterministically. The rank cutoff is
    machine epsilon times the larger matrix dimension, relative to the
    largest singular value.
    """
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if features.ndim != 2:
        raise ValueError("features must be a 2-d matrix")
    n = features.shape[0]
    if targets.shape != (n,):
        raise ValueError(f"targets shape {targets.shape} does not match {n} rows")
    if n < 1:
        raise ValueError("at least one observation required")
    if not np.isfinite(features).all() or not np.isfinite(targets).all():
        raise ValueError("least squares requires finite inputs")
    augmented = np.column_stack([features, np.ones(n)])
    solution, *_ = np.linalg.lstsq(augmented, targets, rcond=None)
    return AffineModel(float(solution[-1]), solution[:-1])


def clip(value, level: float):
    """Truncate to [-level, level]; level must be positive."""
    if not level > 0.0:
        raise ValueError(f"clip level must be positive, got {level}")
    out = np.minimum(level, np.maximum(-level, value))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GaussianParams:
    """Mean and covariance of a d-dimensional Gaussian.

    The covariance must be symmetric within 1e-12 and may be singular;
    eigenvalues below -1e-10 are rejected.
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.covariance, dtype=float)
        if mean.ndim != 1:
            raise ValueError("mean must be 1-d")
        d = mean.size
        if cov.shape != (d, d):
            raise ValueError(f"covariance shape {cov.shape} does not match dimension {d}")
        if not np.isfinite(mean).all() or not np.isfinite(cov).all():
            raise ValueError("Gaussian parameters must be finite")
        if np.abs(cov - cov.T).max(initial=0.0) > 1e-12:
            raise ValueError("covariance must be symmetric within 1e-12")
        if d and np.linalg.eigvalsh(cov).min() < -1e-10:
            raise ValueError("covariance has an eigenvalue below -1e-10")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dimension(self) -> int:
        return self.mean.size

    @cached_property
    def factor(self) -> np.ndarray:
        """A matrix F with F @ F.T equal to the covariance (spectral square root).

        Valid for singular covariances; samples are mean + F @ z with z
        standard normal.
        """
        eigvals, eigvecs = np.linalg.eigh(self.covariance)
        return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        z = rng.standard_normal((size, self.dimension))
        return self.mean + z @ self.factor.T


def _validated_observed(observed, dimension: int) -> np.ndarray:
    obs = np.asarray(observed, dtype=int)
    if obs.ndim != 1:
        raise ValueError("observed indices must be 1-d")
    if obs.size:
        if obs.min() < 0 or obs.max() >= dimension:
            raise ValueError("observed indices outside the dimension")
        if np.unique(obs).size != obs.size:
            raise ValueError("observed indices must be distinct")
    return np.sort(obs)


def conditional_mean_map(params: GaussianParams, observed) -> tuple[np.ndarray, np.ndarray]:
    """Affine map (offset, gain) with E[X_mis | X_obs = x] = offset + gain @ x.

    Singular observed blocks are inverted by pseudoinverse with the same
    rank cutoff as the least-squares solver; missing coordinates are
    reported in ascending order.
    """
    d = params.dimension
    obs = _validated_observed(observed, d)
    mis = np.setdiff1d(np.arange(d), obs)
    if mis.size == 0:
        return np.empty(0), np.empty((0, obs.size))
    if obs.size == 0:
        return params.mean[mis].copy(), np.empty((mis.size, 0))
    cov = params.covariance
    block_oo = cov[np.ix_(obs, obs)]
    block_mo = cov[np.ix_(mis, obs)]
    cutoff = np.finfo(float).eps * max(block_oo.shape)
    gain = block_mo @ np.linalg.pinv(block_oo, rcond=cutoff, hermitian=True)
    offset = params.mean[mis] - gain @ params.mean[obs]
    return offset, gain


def conditional_gaussian(params: GaussianParams, observed, x_obs) -> np.ndarray:
    """Conditional mean of the missing block given observed values.

    With every coordinate observed the result is empty; with none observed
    it is the unconditional mean.
    """
    offset, gain = conditional_mean_map(params, observed)
    x_obs = np.asarray(x_obs, dtype=float)
    if x_obs.shape != (gain.shape[1],):
        raise ValueError(f"x_obs shape {x_obs.shape} does not match {gain.shape[1]} observed indices")
    return offset + gain @ x_obs
