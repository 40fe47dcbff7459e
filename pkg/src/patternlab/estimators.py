"""Trainable regressors for masked data.

Three families: per-pattern least squares with a frequency threshold (plus
optional ball filter and prediction clipping), linear regression on
zero-filled values concatenated with the mask (the jointly optimal
constant-imputation baseline), and chained-equations imputation followed
by linear regression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .patterns import (
    MaskedDataset,
    MissingPattern,
    build_pattern_index,
    group_rows_by_key,
    pack_mask_rows,
)
from .solver import AffineModel, clip, least_squares


def default_ball_radius(gamma: float, n: int) -> float:
    """sqrt(gamma) * (1 + sqrt(gamma * log n)), the recommended filter radius."""
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    return math.sqrt(gamma) * (1.0 + math.sqrt(gamma * math.log(n)))


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs of the per-pattern regressor.

    tau: frequency threshold in [0, 1]; a pattern gets a model only when its
        empirical frequency strictly exceeds tau.
    clip_level: truncate predictions to [-L, L] when set.
    ball_radius: keep only training rows whose observed block has sup-norm
        at most this radius when set.
    gamma: scale of the covariates (largest per-coordinate second moment);
        only used to derive and sanity-check the radius.
    lipschitz_bound: slope bound used when deriving a clip level.
    """

    tau: float = 0.0
    clip_level: float | None = None
    ball_radius: float | None = None
    gamma: float | None = None
    lipschitz_bound: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if self.clip_level is not None and not self.clip_level > 0.0:
            raise ValueError("clip_level must be positive")
        if self.ball_radius is not None:
            if not self.ball_radius > 0.0:
                raise ValueError("ball_radius must be positive")
            if self.gamma is not None and not self.ball_radius > math.sqrt(self.gamma):
                raise ValueError("ball_radius must exceed sqrt(gamma)")
        if self.gamma is not None and not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        if self.lipschitz_bound is not None and not self.lipschitz_bound > 0.0:
            raise ValueError("lipschitz_bound must be positive")


def theory_config(data: MaskedDataset, lipschitz_bound: float | None = None) -> EstimatorConfig:
    """Config with threshold d/n, ball filter on, and clipping when a slope bound is given.

    The covariate scale is estimated as the largest per-column mean square
    over observed entries. Without a slope bound, clipping stays off rather
    than guessing one.
    """
    observed = ~data.mask
    second_moments = [
        float(np.mean(data.values[observed[:, j], j] ** 2))
        for j in range(data.d)
        if observed[:, j].any()
    ]
    if not second_moments:
        raise ValueError("no observed entries to estimate the covariate scale from")
    gamma = max(second_moments)
    if gamma <= 0.0:
        gamma = 1.0
    radius = default_ball_radius(gamma, data.n)
    level = (radius + 1.0) * (lipschitz_bound + 1.0) if lipschitz_bound is not None else None
    return EstimatorConfig(
        tau=min(1.0, data.d / data.n),
        clip_level=level,
        ball_radius=radius,
        gamma=gamma,
        lipschitz_bound=lipschitz_bound,
    )


@dataclass(frozen=True)
class PbpRegression:
    """One affine model per sufficiently frequent pattern; 0 elsewhere."""

    dimension: int
    models: dict
    config: EstimatorConfig
    train_frequencies: dict = field(default_factory=dict)

    def predict_one(self, x_obs, m: MissingPattern) -> float:
        if m.dimension != self.dimension:
            raise ValueError(f"pattern dimension {m.dimension} does not match model dimension {self.dimension}")
        x_obs = np.asarray(x_obs, dtype=float)
        if x_obs.shape != (m.n_observed,):
            raise ValueError(f"x_obs shape {x_obs.shape} does not match {m.n_observed} observed coordinates")
        model = self.models.get(m)
        if model is None:
            return 0.0
        value = float(model.predict(x_obs))
        if self.config.clip_level is not None:
            value = clip(value, self.config.clip_level)
        return value

    def predict_masked(self, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """Predictions for a batch of rows; masked cells of ``values`` are never read."""
        values = np.asarray(values, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        out = np.zeros(values.shape[0])
        for key, rows in group_rows_by_key(pack_mask_rows(mask)):
            pattern = MissingPattern(key, self.dimension)
            model = self.models.get(pattern)
            if model is None:
                continue
            block = values[np.ix_(rows, np.array(pattern.observed_indices, dtype=int))]
            out[rows] = model.predict(block) if pattern.n_observed else model.intercept
        if self.config.clip_level is not None:
            out = clip(out, self.config.clip_level)
        return out

    def to_json(self) -> dict:
        entries = sorted(self.models.items(), key=lambda item: item[0].bits)
        return {
            "tau": self.config.tau,
            "clip": self.config.clip_level,
            "models": [
                {
                    "mask": pattern.to_string(),
                    "intercept": model.intercept,
                    "coef": [float(c) for c in model.coefficients],
                }
                for pattern, model in entries
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PbpRegression":
        entries = obj["models"]
        if not entries:
            raise ValueError("serialized model list is empty; the dimension is unrecoverable")
        models = {}
        for entry in entries:
            pattern = MissingPattern.from_string(entry["mask"])
            models[pattern] = AffineModel(float(entry["intercept"]), np.array(entry["coef"], dtype=float))
        dims = {p.dimension for p in models}
        if len(dims) != 1:
            raise ValueError("serialized masks disagree on the dimension")
        config = EstimatorConfig(tau=float(obj["tau"]), clip_level=obj.get("clip"))
        return cls(dimension=dims.pop(), models=models, config=config)


def fit_pbp(data: MaskedDataset, config: EstimatorConfig) -> PbpRegression:
    """Fit one least-squares model per pattern with frequency above ``config.tau``.

    With a ball radius set, each pattern's rows are first restricted to
    those whose observed block stays inside the sup-norm ball; a pattern
    whose filtered subsample is empty keeps an all-zero model.
    """
    index = build_pattern_index(data)
    models = {}
    for pattern in sorted(index.groups, key=lambda p: p.bits):
        if not index.frequencies[pattern] > config.tau:
            continue
        rows = index.groups[pattern]
        obs = np.array(pattern.observed_indices, dtype=int)
        block = data.values[np.ix_(rows, obs)]
        if config.ball_radius is not None and obs.size:
            inside = np.abs(block).max(axis=1) <= config.ball_radius
            rows = rows[inside]
            block = block[inside]
        if rows.size == 0:
            models[pattern] = AffineModel(0.0, np.zeros(obs.size))
            continue
        models[pattern] = least_squares(block, data.responses[rows])
    return PbpRegression(
        dimension=data.d,
        models=models,
        config=config,
        train_frequencies=dict(index.frequencies),
    )


def predict_pbp(model: PbpRegression, x_obs, m: MissingPattern) -> float:
    return model.predict_one(x_obs, m)


def _zero_filled(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, 0.0, values)


@dataclass(frozen=True)
class ConstantImputeRegression:
    """Linear regression on the 2d features (zero-filled values, mask).

    Regressing on the mask indicators alongside zero-filled values realizes
    the jointly optimal per-coordinate imputation constants.
    """

    dimension: int
    regression: AffineModel

    def predict_one(self, x_obs, m: MissingPattern) -> float:
        x_obs = np.asarray(x_obs, dtype=float)
        if x_obs.shape != (m.n_observed,):
            raise ValueError("x_obs does not match the pattern's observed coordinates")
        filled = np.zeros(self.dimension)
        filled[np.array(m.observed_indices, dtype=int)] = x_obs
        bits = np.array([m.is_missing(j) for j in range(self.dimension)], dtype=float)
        return float(self.regression.predict(np.concatenate([filled, bits])))

    def predict_masked(self, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
        mask = np.asarray(mask, dtype=bool)
        features = np.hstack([_zero_filled(values, mask), mask.astype(float)])
        return self.regression.predict(features)

    def to_json(self) -> dict:
        return {
            "kind": "constant_impute",
            "d": self.dimension,
            "intercept": self.regression.intercept,
            "coef": [float(c) for c in self.regression.coefficients],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConstantImputeRegression":
        d = int(obj["d"])
        return cls(d, AffineModel(float(obj["intercept"]), np.array(obj["coef"], dtype=float)))


def fit_constant_impute(data: MaskedDataset) -> ConstantImputeRegression:
    features = np.hstack([_zero_filled(data.values, data.mask), data.mask.astype(float)])
    return ConstantImputeRegression(data.d, least_squares(features, data.responses))


def _damped_column_model(features: np.ndarray, targets: np.ndarray, damping: float) -> AffineModel:
    """Evidence-tuned ridge with an unpenalized intercept and a ridge floor.

    The ridge weight follows the usual evidence updates with weak 1e-6
    hyperpriors and a loose stopping rule, the conventional defaults for
    chained-equation column models: exact linear relations are recovered
    almost unshrunk while noisy, nearly collinear feature blocks (imputed
    near-duplicate columns) stay damped instead of receiving huge
    compensating coefficients. ``damping`` floors the ridge on the normal
    equations, relative to the feature scale, for exact-collinearity safety.
    """
    n, k = features.shape
    x_mean = features.mean(axis=0) if n else np.zeros(k)
    y_mean = float(targets.mean()) if n else 0.0
    centered = features - x_mean
    residual_y = targets - y_mean
    gram = centered.T @ centered
    eigvals, eigvecs = np.linalg.eigh(gram)
    eigvals = np.clip(eigvals, 0.0, None)
    projected = eigvecs.T @ (centered.T @ residual_y)
    y_var = float(residual_y @ residual_y) / max(n, 1)
    alpha = 1.0 / (y_var + 1e-12)
    lam = 1.0
    hyper = 1e-6
    coef = np.zeros(k)
    for _ in range(300):
        shrink = eigvals + lam / alpha
        new_coef = eigvecs @ (projected / np.where(shrink > 0.0, shrink, 1.0))
        dof = float((eigvals / shrink).sum()) if k else 0.0
        sse = float(np.sum((residual_y - centered @ new_coef) ** 2))
        lam = (dof + 2.0 * hyper) / (float(new_coef @ new_coef) + 2.0 * hyper)
        alpha = (n - dof + 2.0 * hyper) / (sse + 2.0 * hyper)
        done = float(np.abs(new_coef - coef).sum()) < 1e-3
        coef = new_coef
        if done:
            break
    scale = float(np.trace(gram)) / k if k else 1.0
    ridge = max(lam / alpha, damping * scale, 1e-300)
    solution = np.linalg.solve(gram + ridge * np.eye(k), centered.T @ residual_y)
    return AffineModel(y_mean - float(x_mean @ solution), solution)


@dataclass(frozen=True)
class IterativeImputeRegression:
    """Chained-equations imputation followed by linear regression.

    Missing cells start at the observed column means and are refreshed by
    cycling the stored per-column models in ascending column order for the
    stored number of rounds, both while training and at prediction time.
    Columns never observed in training impute to 0 and carry no model.
    """

    dimension: int
    column_means: np.ndarray
    column_models: tuple
    rounds: int
    regression: AffineModel
    round_deltas: tuple = ()

    def complete(self, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        completed = np.where(mask, self.column_means, values)
        for _ in range(self.rounds):
            for j in range(self.dimension):
                model = self.column_models[j]
                rows = np.flatnonzero(mask[:, j])
                if model is None or rows.size == 0:
                    continue
                others = np.delete(np.arange(self.dimension), j)
                completed[rows, j] = model.predict(completed[np.ix_(rows, others)])
        return completed

    def predict_one(self, x_obs, m: MissingPattern) -> float:
        x_obs = np.asarray(x_obs, dtype=float)
        if x_obs.shape != (m.n_observed,):
            raise ValueError("x_obs does not match the pattern's observed coordinates")
        row = np.zeros((1, self.dimension))
        row[0, np.array(m.observed_indices, dtype=int)] = x_obs
        mask = np.array([[m.is_missing(j) for j in range(self.dimension)]])
        return float(self.predict_masked(row, mask)[0])

    def predict_masked(self, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
        return self.regression.predict(self.complete(values, mask))

    def to_json(self) -> dict:
        return {
            "kind": "iterative_impute",
            "d": self.dimension,
            "rounds": self.rounds,
            "column_means": [float(c) for c in self.column_means],
            "column_models": [
                None
                if model is None
                else {"intercept": model.intercept, "coef": [float(c) for c in model.coefficients]}
                for model in self.column_models
            ],
            "intercept": self.regression.intercept,
            "coef": [float(c) for c in self.regression.coefficients],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "IterativeImputeRegression":
        models = tuple(
            None
            if entry is None
            else AffineModel(float(entry["intercept"]), np.array(entry["coef"], dtype=float))
            for entry in obj["column_models"]
        )
        return cls(
            dimension=int(obj["d"]),
            column_means=np.array(obj["column_means"], dtype=float),
            column_models=models,
            rounds=int(obj["rounds"]),
            regression=AffineModel(float(obj["intercept"]), np.array(obj["coef"], dtype=float)),
        )


def fit_iterative_impute(
    data: MaskedDataset, rounds: int = 10, damping: float = 1e-14, tol: float = 1e-3
) -> IterativeImputeRegression:
    """Chained-equations fit: cycle columns ascending, up to ``rounds`` sweeps.

    Each sweep refits column j on the other, currently completed, columns
    using the rows where j is observed, then overwrites j's missing cells
    with predictions. Sweeps stop early once the largest imputed-cell change
    falls below ``tol`` times the observed-value scale (set tol=0 to always
    run all sweeps); prediction replays the executed number of sweeps. The
    final regression of the response on the completed matrix is solved
    without damping.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    observed = ~data.mask
    means = np.array(
        [data.values[observed[:, j], j].mean() if observed[:, j].any() else 0.0 for j in range(data.d)]
    )
    completed = np.where(data.mask, means, data.values)
    column_models: list[AffineModel | None] = [None] * data.d
    deltas = []
    any_missing = data.mask.any()
    value_scale = float(np.abs(completed[observed]).max()) if observed.any() else 0.0
    executed = 0
    for _ in range(rounds):
        before = completed.copy()
        for j in range(data.d):
            rows_obs = np.flatnonzero(observed[:, j])
            if rows_obs.size == 0:
                continue
            others = np.delete(np.arange(data.d), j)
            model = _damped_column_model(
                completed[np.ix_(rows_obs, others)], completed[rows_obs, j], damping
            )
            column_models[j] = model
            rows_mis = np.flatnonzero(data.mask[:, j])
            if rows_mis.size:
                completed[rows_mis, j] = model.predict(completed[np.ix_(rows_mis, others)])
        executed += 1
        if any_missing:
            changes = np.abs(completed - before)[data.mask]
            deltas.append(float(changes.mean()))
            if changes.max() < tol * value_scale:
                break
        else:
            deltas.append(0.0)
            break
    fitted = IterativeImputeRegression(
        dimension=data.d,
        column_means=means,
        column_models=tuple(column_models),
        rounds=executed,
        regression=AffineModel(0.0, np.zeros(data.d)),
        round_deltas=tuple(deltas),
    )
    # Fit the response regression on the completion the stored models
    # reproduce, not on the training sweeps' evolving completion: training
    # and prediction then share one imputation map, without which the
    # regression's coefficients on nearly collinear imputed columns do not
    # transfer to fresh data.
    replayed = fitted.complete(np.where(data.mask, 0.0, data.values), data.mask)
    return IterativeImputeRegression(
        dimension=data.d,
        column_means=means,
        column_models=tuple(column_models),
        rounds=executed,
        regression=least_squares(replayed, data.responses),
        round_deltas=tuple(deltas),
    )
