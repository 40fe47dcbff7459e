"""Probability laws over missingness patterns.

Families: explicit laws stored sparsely on their support, independent
per-coordinate Bernoulli masking (homogeneous or per-coordinate rates), the
merge model (a categorical protocol mask OR-ed with independent
per-coordinate failures), and the uniform law over all 2**d patterns.
"""

from __future__ import annotations

import abc

import numpy as np

from .patterns import MAX_DIMENSION, MissingPattern, unpack_masks

ENUMERATION_LIMIT = 20


class PatternDistribution(abc.ABC):
    """A distribution over d-bit missingness patterns."""

    dimension: int

    @abc.abstractmethod
    def probability(self, m: MissingPattern) -> float:
        """P(M = m)."""

    @abc.abstractmethod
    def mask_probabilities(self, keys: np.ndarray) -> np.ndarray:
        """Vectorized P(M = m) over an array of packed pattern keys."""

    @abc.abstractmethod
    def sample_masks(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` packed pattern keys."""

    def sample(self, rng: np.random.Generator) -> MissingPattern:
        return MissingPattern(int(self.sample_masks(rng, 1)[0]), self.dimension)

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """(keys, probabilities) for every pattern of positive probability.

        Parametric families enumerate all 2**d patterns, so this requires
        d <= 20; explicit laws return their stored support at any d.
        """
        keys, probs = self.enumerate_probabilities()
        positive = probs > 0.0
        return keys[positive], probs[positive]

    def enumerate_probabilities(self) -> tuple[np.ndarray, np.ndarray]:
        if self.dimension > ENUMERATION_LIMIT:
            raise ValueError(
                f"enumeration over 2**{self.dimension} patterns refused "
                f"(limit d <= {ENUMERATION_LIMIT}); use Monte Carlo instead"
            )
        keys = np.arange(1 << self.dimension, dtype=np.int64)
        return keys, self.mask_probabilities(keys)

    def _check_dimension(self, m: MissingPattern) -> None:
        if m.dimension != self.dimension:
            raise ValueError(
                f"pattern dimension {m.dimension} does not match distribution dimension {self.dimension}"
            )


def _validate_dimension(d: int) -> int:
    d = int(d)
    if not 1 <= d <= MAX_DIMENSION:
        raise ValueError(f"dimension must be in [1, {MAX_DIMENSION}], got {d}")
    return d


class ExplicitPatterns(PatternDistribution):
    """A law given by an explicit pattern -> probability map.

    Only the support is stored, so the dimension may exceed the enumeration
    limit. Probabilities must be nonnegative and sum to 1 within 1e-12.
    """

    def __init__(self, dimension: int, probabilities: dict):
        self.dimension = _validate_dimension(dimension)
        items = []
        for pattern, p in probabilities.items():
            if not isinstance(pattern, MissingPattern):
                raise TypeError("keys must be MissingPattern instances")
            self._check_dimension(pattern)
            p = float(p)
            if p < 0.0:
                raise ValueError(f"negative probability {p} for {pattern}")
            if p > 0.0:
                items.append((pattern.bits, p))
        total = float(np.sum([p for _, p in items], dtype=float)) if items else 0.0
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, expected 1 within 1e-12")
        items.sort()
        self._keys = np.array([k for k, _ in items], dtype=np.int64)
        self._probs = np.array([p for _, p in items], dtype=float)
        self._lookup = {k: p for k, p in items}
        self._cumulative = np.cumsum(self._probs)

    def probability(self, m: MissingPattern) -> float:
        self._check_dimension(m)
        return self._lookup.get(m.bits, 0.0)

    def mask_probabilities(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.int64)
        pos = np.searchsorted(self._keys, keys)
        pos = np.clip(pos, 0, self._keys.size - 1)
        hit = self._keys[pos] == keys
        return np.where(hit, self._probs[pos], 0.0)

    def sample_masks(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        idx = np.searchsorted(self._cumulative, u, side="right")
        idx = np.minimum(idx, self._keys.size - 1)
        return self._keys[idx]

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        return self._keys.copy(), self._probs.copy()

    def enumerate_probabilities(self) -> tuple[np.ndarray, np.ndarray]:
        if self.dimension > ENUMERATION_LIMIT:
            return self.support()
        return super().enumerate_probabilities()

    def items(self):
        for k, p in zip(self._keys, self._probs):
            yield MissingPattern(int(k), self.dimension), float(p)


class BernoulliPatterns(PatternDistribution):
    """Independent per-coordinate masking: coordinate j is missing w.p. eps_j."""

    def __init__(self, epsilons):
        eps = np.array(epsilons, dtype=float)
        if eps.ndim != 1 or eps.size == 0:
            raise ValueError("epsilons must be a nonempty 1-d sequence")
        if ((eps < 0.0) | (eps > 1.0)).any():
            raise ValueError("rates must lie in [0, 1]")
        self.dimension = _validate_dimension(eps.size)
        eps.setflags(write=False)
        self.epsilons = eps

    def probability(self, m: MissingPattern) -> float:
        self._check_dimension(m)
        bits = np.array([m.is_missing(j) for j in range(self.dimension)])
        return float(np.prod(np.where(bits, self.epsilons, 1.0 - self.epsilons)))

    def mask_probabilities(self, keys: np.ndarray) -> np.ndarray:
        bits = unpack_masks(keys, self.dimension)
        return np.where(bits, self.epsilons, 1.0 - self.epsilons).prod(axis=1)

    def sample_masks(self, rng: np.random.Generator, size: int) -> np.ndarray:
        bits = rng.random((size, self.dimension)) < self.epsilons
        from .patterns import pack_mask_rows

        return pack_mask_rows(bits)


class HeterogeneousBernoulli(BernoulliPatterns):
    """Bernoulli masking with per-coordinate rates."""


class HomogeneousBernoulli(BernoulliPatterns):
    """Bernoulli masking with one shared rate for every coordinate."""

    def __init__(self, dimension: int, epsilon: float):
        dimension = _validate_dimension(dimension)
        super().__init__(np.full(dimension, float(epsilon)))
        self.epsilon = float(epsilon)


class MergeModel(PatternDistribution):
    """Protocol masking OR-ed with independent per-coordinate failures.

    A protocol pattern P_k is drawn with weight w_k, each coordinate it
    leaves observed then fails independently with rate eta, and the final
    pattern is the union of the protocol mask and the failure mask. Hence

        P(M = m) = sum_k w_k 1[m >= P_k] eta^a_k (1 - eta)^(f_k - a_k)

    with f_k the coordinates P_k leaves observed and a_k the number of those
    that m marks missing.
    """

    def __init__(self, protocols, weights, eta: float):
        protocols = list(protocols)
        if not protocols:
            raise ValueError("at least one protocol pattern required")
        if not all(isinstance(p, MissingPattern) for p in protocols):
            raise TypeError("protocols must be MissingPattern instances")
        self.dimension = protocols[0].dimension
        if any(p.dimension != self.dimension for p in protocols):
            raise ValueError("protocols must share one dimension")
        w = np.array(weights, dtype=float)
        if w.shape != (len(protocols),):
            raise ValueError("one weight per protocol required")
        if (w < 0.0).any() or abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1 within 1e-12")
        eta = float(eta)
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"failure rate must lie in [0, 1], got {eta}")
        self.protocols = tuple(protocols)
        self.weights = w
        self.eta = eta
        self._protocol_keys = np.array([p.bits for p in protocols], dtype=np.int64)
        self._cumulative = np.cumsum(w)

    def probability(self, m: MissingPattern) -> float:
        self._check_dimension(m)
        return float(self.mask_probabilities(np.array([m.bits], dtype=np.int64))[0])

    def mask_probabilities(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.int64)
        bits = unpack_masks(keys, self.dimension)
        total = np.zeros(keys.shape, dtype=float)
        for pk, w in zip(self._protocol_keys, self.weights):
            free = ~unpack_masks(np.array([pk]), self.dimension)[0]
            covers = (keys & pk) == pk
            failed = bits[:, free].sum(axis=1)
            n_free = int(free.sum())
            term = self.eta**failed * (1.0 - self.eta) ** (n_free - failed)
            total += w * np.where(covers, term, 0.0)
        return total

    def sample_masks(self, rng: np.random.Generator, size: int) -> np.ndarray:
        choice = np.searchsorted(self._cumulative, rng.random(size), side="right")
        choice = np.minimum(choice, self._protocol_keys.size - 1)
        failures = rng.random((size, self.dimension)) < self.eta
        from .patterns import pack_mask_rows

        return self._protocol_keys[choice] | pack_mask_rows(failures)


class UniformPatterns(PatternDistribution):
    """The uniform law over all 2**d patterns."""

    def __init__(self, dimension: int):
        self.dimension = _validate_dimension(dimension)

    def probability(self, m: MissingPattern) -> float:
        self._check_dimension(m)
        return 0.5**self.dimension

    def mask_probabilities(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.int64)
        return np.full(keys.shape, 0.5**self.dimension)

    def sample_masks(self, rng: np.random.Generator, size: int) -> np.ndarray:
        high = np.uint64(1) << np.uint64(self.dimension)
        return rng.integers(0, high, size=size, dtype=np.uint64).astype(np.int64)


def pattern_probability(dist: PatternDistribution, m: MissingPattern) -> float:
    """P(M = m) under ``dist``; raises on a dimension mismatch."""
    return dist.probability(m)


def sample_pattern(dist: PatternDistribution, rng: np.random.Generator) -> MissingPattern:
    """Draw one pattern; deterministic given the generator state."""
    return dist.sample(rng)


def explicit_from_json(obj: dict) -> ExplicitPatterns:
    """Load an explicit law from {"d": int, "patterns": [{"mask": "0110", "p": float}, ...]}."""
    d = int(obj["d"])
    mapping = {}
    for entry in obj["patterns"]:
        pattern = MissingPattern.from_string(entry["mask"])
        if pattern.dimension != d:
            raise ValueError(f"mask {entry['mask']!r} does not have {d} characters")
        if pattern in mapping:
            raise ValueError(f"duplicate mask {entry['mask']!r}")
        mapping[pattern] = float(entry["p"])
    return ExplicitPatterns(d, mapping)


def explicit_to_json(dist: ExplicitPatterns) -> dict:
    return {
        "d": dist.dimension,
        "patterns": [{"mask": m.to_string(), "p": p} for m, p in dist.items()],
    }


def distribution_from_json(obj: dict) -> PatternDistribution:
    """Load any supported family; a bare {"d", "patterns"} object is explicit."""
    if "patterns" in obj and "kind" not in obj:
        return explicit_from_json(obj)
    kind = obj.get("kind")
    if kind == "explicit":
        return explicit_from_json(obj)
    if kind == "homogeneous_bernoulli":
        return HomogeneousBernoulli(int(obj["d"]), float(obj["epsilon"]))
    if kind == "heterogeneous_bernoulli":
        return HeterogeneousBernoulli(obj["epsilons"])
    if kind == "merge":
        protocols = [MissingPattern.from_string(s) for s in obj["protocols"]]
        return MergeModel(protocols, obj["weights"], float(obj["eta"]))
    if kind == "uniform":
        return UniformPatterns(int(obj["d"]))
    raise ValueError(f"unknown distribution kind {kind!r}")
