"""Synthetic regression scenarios with missing covariates.

Every scenario fixes a linear response (intercept, coefficients, Gaussian
noise) on top of a covariate law and a masking mechanism:

* Gaussian covariates with masking independent of the values (any pattern
  law, including the merge family),
* a two-block design where the second block's mask is the sign pattern of
  the always-observed first block and also shifts its mean,
* a per-pattern Gaussian mixture (pattern drawn first, covariates drawn
  from that pattern's own Gaussian),
* self-masking, where each coordinate hides itself with a bell-shaped
  probability in its own value.

The first three expose the exact optimum predictor pattern by pattern as
an affine model; self-masking only admits the sampling oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import MergeModel, PatternDistribution
from .patterns import (
    MaskedDataset,
    MissingPattern,
    group_rows_by_key,
    pack_mask_rows,
    unpack_masks,
)
from .solver import AffineModel, GaussianParams, conditional_mean_map


class NoClosedFormError(RuntimeError):
    """The scenario has no exact per-pattern predictor; use bayes_oracle_mc."""


class InsufficientSamplesError(RuntimeError):
    """The sampling oracle accepted too few draws near the probe point."""

    def __init__(self, message: str, accepted: int = 0):
        super().__init__(message)
        self.accepted = accepted


@dataclass(frozen=True)
class LabeledSample:
    """A generated batch: masked dataset, the pre-masking values, and the
    exact optimum predictions when the scenario has them."""

    dataset: MaskedDataset
    full_values: np.ndarray
    bayes_values: np.ndarray | None


class Scenario:
    """Base class; subclasses implement drawing and per-pattern optima."""

    has_closed_form = True

    def __init__(self, beta0: float, beta, noise_sd: float, name: str):
        beta = np.array(beta, dtype=float)
        if beta.ndim != 1 or beta.size == 0:
            raise ValueError("beta must be a nonempty vector")
        if not np.isfinite(beta).all() or not np.isfinite(beta0):
            raise ValueError("model coefficients must be finite")
        noise_sd = float(noise_sd)
        if noise_sd < 0.0:
            raise ValueError("noise level must be nonnegative")
        beta.setflags(write=False)
        self.beta0 = float(beta0)
        self.beta = beta
        self.noise_sd = noise_sd
        self.name = name
        self._pattern_models: dict[MissingPattern, AffineModel] = {}

    @property
    def d(self) -> int:
        return self.beta.size

    def _draw(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _conditional_map(self, m: MissingPattern) -> tuple[np.ndarray, np.ndarray]:
        """(offset, gain) of E[X_mis | X_obs, M = m] for the pattern's split."""
        raise NotImplementedError

    def generate(self, n: int, rng: np.random.Generator, with_bayes: bool = True) -> LabeledSample:
        """Draw n labeled rows. Order of draws: covariates and mask first,
        response noise last, so samples are reproducible given the seed.
        ``with_bayes=False`` skips the exact-optimum column (the draw itself
        is unchanged)."""
        if n < 1:
            raise ValueError(f"sample size must be >= 1, got {n}")
        values, mask = self._draw(n, rng)
        noise = rng.standard_normal(n)
        responses = self.beta0 + values @ self.beta + self.noise_sd * noise
        dataset = MaskedDataset(values, mask, responses)
        bayes = self._bayes_for(values, mask) if with_bayes and self.has_closed_form else None
        full = np.array(values, dtype=float)
        full.setflags(write=False)
        return LabeledSample(dataset=dataset, full_values=full, bayes_values=bayes)

    def pattern_model(self, m: MissingPattern) -> AffineModel:
        """The optimum predictor for pattern m as an affine model over the
        observed coordinates (ascending order)."""
        if not self.has_closed_form:
            raise NoClosedFormError(f"{self.name}: no exact per-pattern predictor; use bayes_oracle_mc")
        if m.dimension != self.d:
            raise ValueError(f"pattern dimension {m.dimension} does not match scenario dimension {self.d}")
        model = self._pattern_models.get(m)
        if model is None:
            offset, gain = self._conditional_map(m)
            obs = np.array(m.observed_indices, dtype=int)
            mis = np.array(m.missing_indices, dtype=int)
            intercept = self.beta0 + float(self.beta[mis] @ offset)
            coefficients = self.beta[obs] + gain.T @ self.beta[mis]
            model = AffineModel(intercept, coefficients)
            self._pattern_models[m] = model
        return model

    def bayes_predict(self, x_obs, m: MissingPattern) -> float:
        """Exact E[Y | observed values, pattern m]."""
        x_obs = np.asarray(x_obs, dtype=float)
        if x_obs.shape != (m.n_observed,):
            raise ValueError(f"x_obs shape {x_obs.shape} does not match {m.n_observed} observed coordinates")
        return float(self.pattern_model(m).predict(x_obs))

    def _bayes_for(self, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
        out = np.empty(values.shape[0])
        for key, rows in group_rows_by_key(pack_mask_rows(mask)):
            pattern = MissingPattern(key, self.d)
            model = self.pattern_model(pattern)
            obs = np.array(pattern.observed_indices, dtype=int)
            block = values[np.ix_(rows, obs)]
            out[rows] = model.predict(block) if obs.size else model.intercept
        out.setflags(write=False)
        return out


class McarGaussianScenario(Scenario):
    """Gaussian covariates, mask drawn independently of the values."""

    def __init__(
        self,
        beta0: float,
        beta,
        noise_sd: float,
        covariates: GaussianParams,
        missingness: PatternDistribution,
        name: str = "mcar_gaussian",
    ):
        super().__init__(beta0, beta, noise_sd, name)
        if covariates.dimension != self.d:
            raise ValueError("covariate dimension does not match beta")
        if missingness.dimension != self.d:
            raise ValueError("missingness dimension does not match beta")
        self.covariates = covariates
        self.missingness = missingness

    def _draw(self, n, rng):
        values = self.covariates.sample(rng, n)
        mask = unpack_masks(self.missingness.sample_masks(rng, n), self.d)
        return values, mask

    def _conditional_map(self, m):
        return conditional_mean_map(self.covariates, m.observed_indices)


def merge_scenario(
    beta0: float,
    beta,
    noise_sd: float,
    covariates: GaussianParams,
    protocols,
    weights,
    eta: float,
    name: str = "merge",
) -> McarGaussianScenario:
    """Gaussian covariates masked by the protocol-plus-failure union model."""
    return McarGaussianScenario(
        beta0, beta, noise_sd, covariates, MergeModel(protocols, weights, eta), name=name
    )


class MarBlockScenario(Scenario):
    """Two equal blocks: block 1 is standard normal and always observed;
    block 2's mask is the componentwise sign pattern of block 1 (missing
    where the paired block-1 coordinate is positive) and block 2 is Gaussian
    around that 0/1 mask vector with the given covariance."""

    def __init__(self, beta0, beta, noise_sd: float, block_cov, name: str = "mar_block"):
        super().__init__(beta0, beta, noise_sd, name)
        if self.d % 2 != 0:
            raise ValueError("dimension must split into two equal blocks")
        k = self.d // 2
        cov = np.asarray(block_cov, dtype=float)
        if cov.shape != (k, k):
            raise ValueError(f"block covariance must be {k}x{k}, got {cov.shape}")
        self.block_size = k
        self.block_cov = cov

    def _draw(self, n, rng):
        k = self.block_size
        block1 = rng.standard_normal((n, k))
        mask2 = block1 > 0.0
        noise2 = rng.standard_normal((n, k))
        factor = GaussianParams(np.zeros(k), self.block_cov).factor
        block2 = mask2.astype(float) + noise2 @ factor.T
        values = np.hstack([block1, block2])
        mask = np.hstack([np.zeros((n, k), dtype=bool), mask2])
        return values, mask

    def _conditional_map(self, m):
        k = self.block_size
        if any(m.is_missing(j) for j in range(k)):
            raise ValueError("block-1 coordinates are always observed in this scenario")
        mask2 = np.array([m.is_missing(k + j) for j in range(k)])
        params = GaussianParams(mask2.astype(float), self.block_cov)
        obs_within = np.flatnonzero(~mask2)
        offset, gain = conditional_mean_map(params, obs_within)
        # Missing coordinates all sit in block 2; observed ones are block 1
        # (which carries no information on block 2 beyond the mask) plus the
        # observed part of block 2.
        full_gain = np.zeros((offset.size, m.n_observed))
        obs_full = np.array(m.observed_indices, dtype=int)
        for col, j in enumerate(obs_within):
            position = int(np.flatnonzero(obs_full == k + j)[0])
            full_gain[:, position] = gain[:, col]
        return offset, full_gain


class GpmmScenario(Scenario):
    """Pattern-first mixture: draw the pattern, then Gaussian covariates
    with that pattern's own mean and covariance."""

    def __init__(self, beta0, beta, noise_sd: float, components, name: str = "gpmm"):
        super().__init__(beta0, beta, noise_sd, name)
        comps = []
        for prob, pattern, params in components:
            prob = float(prob)
            if prob <= 0.0:
                raise ValueError("component probabilities must be positive")
            if not isinstance(pattern, MissingPattern) or pattern.dimension != self.d:
                raise ValueError("component patterns must match the scenario dimension")
            if params.dimension != self.d:
                raise ValueError("component Gaussians must match the scenario dimension")
            comps.append((prob, pattern, params))
        total = sum(p for p, _, _ in comps)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"component probabilities sum to {total!r}, expected 1")
        if len({pattern for _, pattern, _ in comps}) != len(comps):
            raise ValueError("component patterns must be distinct")
        self.components = tuple(comps)
        self._by_pattern = {pattern: params for _, pattern, params in comps}
        self._cumulative = np.cumsum([p for p, _, _ in comps])

    def pattern_probabilities(self) -> dict:
        return {pattern: prob for prob, pattern, _ in self.components}

    def _draw(self, n, rng):
        choice = np.searchsorted(self._cumulative, rng.random(n), side="right")
        choice = np.minimum(choice, len(self.components) - 1)
        z = rng.standard_normal((n, self.d))
        values = np.empty((n, self.d))
        keys = np.empty(n, dtype=np.int64)
        for idx, (_, pattern, params) in enumerate(self.components):
            rows = np.flatnonzero(choice == idx)
            if rows.size == 0:
                continue
            values[rows] = params.mean + z[rows] @ params.factor.T
            keys[rows] = pattern.bits
        return values, unpack_masks(keys, self.d)

    def _conditional_map(self, m):
        params = self._by_pattern.get(m)
        if params is None:
            raise ValueError(f"pattern {m} has probability zero in this mixture")
        return conditional_mean_map(params, m.observed_indices)


class SelfMaskingScenario(Scenario):
    """Each coordinate hides itself with probability peaking at its own
    value: P(missing | x) = peak_prob * exp(-(x - center)^2 / (2 scale^2)).

    No exact per-pattern predictor is exposed; validate predictions with
    bayes_oracle_mc.
    """

    has_closed_form = False

    def __init__(
        self,
        beta0,
        beta,
        noise_sd: float,
        covariates: GaussianParams,
        mask_center,
        mask_scale,
        mask_peak_prob=0.5,
        name: str = "self_masking",
    ):
        super().__init__(beta0, beta, noise_sd, name)
        if covariates.dimension != self.d:
            raise ValueError("covariate dimension does not match beta")
        center = np.broadcast_to(np.asarray(mask_center, dtype=float), (self.d,)).copy()
        scale = np.broadcast_to(np.asarray(mask_scale, dtype=float), (self.d,)).copy()
        peak = np.broadcast_to(np.asarray(mask_peak_prob, dtype=float), (self.d,)).copy()
        if (scale <= 0.0).any():
            raise ValueError("mask scales must be positive")
        if ((peak <= 0.0) | (peak > 1.0)).any():
            raise ValueError("peak masking probabilities must lie in (0, 1]")
        self.covariates = covariates
        self.mask_center = center
        self.mask_scale = scale
        self.mask_peak_prob = peak

    def _draw(self, n, rng):
        values = self.covariates.sample(rng, n)
        probs = self.mask_peak_prob * np.exp(
            -0.5 * ((values - self.mask_center) / self.mask_scale) ** 2
        )
        mask = rng.random((n, self.d)) < probs
        return values, mask

    def _conditional_map(self, m):
        raise NoClosedFormError(f"{self.name}: no exact per-pattern predictor; use bayes_oracle_mc")


@dataclass(frozen=True)
class OracleEstimate:
    estimate: float
    std_error: float
    accepted: int


def bayes_oracle_mc(
    scenario: Scenario,
    x_obs,
    m: MissingPattern,
    samples: int,
    bandwidth: float = 0.1,
    rng: np.random.Generator | None = None,
    min_accepted: int = 50,
) -> OracleEstimate:
    """Sampling estimate of E[Y | observed values near x_obs, pattern m].

    Draws labeled rows from the scenario and keeps those whose pattern is m
    and whose observed block lies within ``bandwidth`` of the probe in
    sup-norm; returns the mean response over the kept rows. The answer
    carries a bias of order the bandwidth on top of the reported standard
    error. Intended as a test oracle, not a production predictor.
    """
    if rng is None:
        raise ValueError("pass an explicit generator so oracle runs are reproducible")
    if m.dimension != scenario.d:
        raise ValueError("pattern dimension does not match the scenario")
    x_obs = np.asarray(x_obs, dtype=float)
    if x_obs.shape != (m.n_observed,):
        raise ValueError("x_obs does not match the pattern's observed coordinates")
    if bandwidth <= 0.0:
        raise ValueError("bandwidth must be positive")
    obs = np.array(m.observed_indices, dtype=int)
    kept = []
    remaining = int(samples)
    chunk_size = 250_000
    while remaining > 0:
        chunk = min(chunk_size, remaining)
        remaining -= chunk
        sample = scenario.generate(chunk, rng, with_bayes=False)
        keys = pack_mask_rows(sample.dataset.mask)
        rows = np.flatnonzero(keys == m.bits)
        if rows.size == 0:
            continue
        if obs.size:
            block = sample.full_values[np.ix_(rows, obs)]
            near = np.abs(block - x_obs).max(axis=1) <= bandwidth
            rows = rows[near]
        if rows.size:
            kept.append(sample.dataset.responses[rows])
    accepted = int(sum(len(k) for k in kept))
    if accepted < min_accepted:
        raise InsufficientSamplesError(
            f"only {accepted} of {samples} draws fell in the acceptance window "
            f"(need {min_accepted}); widen the bandwidth or raise the budget",
            accepted=accepted,
        )
    responses = np.concatenate(kept)
    spread = float(responses.std(ddof=1)) if accepted > 1 else 0.0
    return OracleEstimate(
        estimate=float(responses.mean()),
        std_error=spread / float(np.sqrt(accepted)),
        accepted=accepted,
    )


def paired_block_covariance(d: int, block: int = 2) -> np.ndarray:
    """Block-diagonal covariance made of all-ones blocks of the given size."""
    if d % block != 0:
        raise ValueError(f"dimension {d} is not a multiple of the block size {block}")
    out = np.zeros((d, d))
    for start in range(0, d, block):
        out[start : start + block, start : start + block] = 1.0
    return out


def _gpmm_preset_components() -> list:
    u8 = paired_block_covariance(8)
    ones8 = np.ones((8, 8))
    eye8 = np.eye(8)
    rows = [
        (0.60, "01010000", (0, 5, 4, -1, 0, 0, 0, 0), u8),
        (0.30, "10110000", (1, 3, 0, 2, 0, 0, 0, 0), ones8),
        (0.02, "01110000", (0, 5, 4, -1, 0, 0, 0, 0), eye8),
        (0.02, "11010000", (0, 5, 0, -1, 0, 0, 0, 0), eye8),
        (0.02, "11000000", (0, -10, 7, -1, 0, 0, 0, 0), eye8),
        (0.02, "01000000", (0, 9, 0, -1, 0, 0, 0, 0), eye8),
        (0.02, "00100000", (3, 0, 0, -1, 0, 0, 0, 0), eye8),
    ]
    return [
        (p, MissingPattern.from_string(mask), GaussianParams(np.array(mu, dtype=float), cov))
        for p, mask, mu, cov in rows
    ]


PRESET_NAMES = ("mcar_a", "mar_b", "gpmm_c", "bern_pA", "bern_pB", "bern_pC", "bern_pD")


def preset(name: str):
    """Built-in scenarios (mcar_a, mar_b, gpmm_c) and d=4 Bernoulli pattern
    laws (bern_pA, bern_pB, bern_pC, bern_pD)."""
    from .distributions import HeterogeneousBernoulli, HomogeneousBernoulli

    if name == "mcar_a":
        return McarGaussianScenario(
            beta0=0.0,
            beta=np.ones(8),
            noise_sd=0.1,
            covariates=GaussianParams(np.ones(8), paired_block_covariance(8)),
            missingness=HomogeneousBernoulli(8, 0.1),
            name="mcar_a",
        )
    if name == "mar_b":
        return MarBlockScenario(
            beta0=0.0,
            beta=np.ones(8),
            noise_sd=0.5,
            block_cov=paired_block_covariance(4),
            name="mar_b",
        )
    if name == "gpmm_c":
        return GpmmScenario(
            beta0=0.0,
            beta=np.ones(8),
            noise_sd=1.0,
            components=_gpmm_preset_components(),
            name="gpmm_c",
        )
    if name == "bern_pA":
        return HomogeneousBernoulli(4, 0.5)
    if name == "bern_pB":
        return HomogeneousBernoulli(4, 0.15)
    if name == "bern_pC":
        return HeterogeneousBernoulli((0.3, 0.2, 0.05, 0.05))
    if name == "bern_pD":
        return HomogeneousBernoulli(4, 0.10)
    raise ValueError(f"unknown preset {name!r}; choose one of {', '.join(PRESET_NAMES)}")


def scenario_from_json(obj: dict) -> Scenario:
    """Build a scenario from its JSON description or a {"preset": name} reference."""
    if "preset" in obj:
        built = preset(obj["preset"])
        if not isinstance(built, Scenario):
            raise ValueError(f"preset {obj['preset']!r} is a pattern law, not a scenario")
        return built
    kind = obj.get("kind")
    d = int(obj["d"])
    beta0 = float(obj["beta0"])
    beta = np.asarray(obj["beta"], dtype=float)
    sigma = float(obj["sigma"])
    if beta.shape != (d,):
        raise ValueError(f"beta must have length {d}")
    name = obj.get("name", kind)
    if kind == "mcar_gaussian":
        from .distributions import distribution_from_json

        params = GaussianParams(np.asarray(obj["mu"], dtype=float), np.asarray(obj["cov"], dtype=float))
        return McarGaussianScenario(
            beta0, beta, sigma, params, distribution_from_json(obj["missingness"]), name=name
        )
    if kind == "mar_block":
        return MarBlockScenario(beta0, beta, sigma, np.asarray(obj["block_cov"], dtype=float), name=name)
    if kind == "gpmm":
        components = [
            (
                float(c["p"]),
                MissingPattern.from_string(c["mask"]),
                GaussianParams(np.asarray(c["mu"], dtype=float), np.asarray(c["cov"], dtype=float)),
            )
            for c in obj["components"]
        ]
        return GpmmScenario(beta0, beta, sigma, components, name=name)
    if kind == "self_masking":
        params = GaussianParams(np.asarray(obj["mu"], dtype=float), np.asarray(obj["cov"], dtype=float))
        return SelfMaskingScenario(
            beta0,
            beta,
            sigma,
            params,
            mask_center=obj["mask_center"],
            mask_scale=obj["mask_scale"],
            mask_peak_prob=obj.get("mask_peak_prob", 0.5),
            name=name,
        )
    if kind == "merge":
        params = GaussianParams(np.asarray(obj["mu"], dtype=float), np.asarray(obj["cov"], dtype=float))
        protocols = [MissingPattern.from_string(s) for s in obj["protocols"]]
        return merge_scenario(
            beta0, beta, sigma, params, protocols, obj["weights"], float(obj["eta"]), name=name
        )
    raise ValueError(f"unknown scenario kind {kind!r}")
