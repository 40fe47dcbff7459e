"""Missingness patterns, masked datasets, and per-pattern row indexing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_DIMENSION = 63


class MaskedReadError(RuntimeError):
    """A value cell flagged as missing was read."""


@dataclass(frozen=True)
class MissingPattern:
    """A d-bit missingness mask. Bit j set means coordinate j is missing.

    Bits are packed into one integer (bit j = coordinate j, zero based), so
    patterns hash and compare in O(1). Dimensions above 63 are rejected.
    """

    bits: int
    dimension: int

    def __post_init__(self) -> None:
        if not 1 <= self.dimension <= MAX_DIMENSION:
            raise ValueError(f"dimension must be in [1, {MAX_DIMENSION}], got {self.dimension}")
        if not 0 <= self.bits < (1 << self.dimension):
            raise ValueError(f"bits {self.bits} outside a {self.dimension}-bit pattern")

    @classmethod
    def from_bools(cls, missing) -> "MissingPattern":
        flags = [bool(f) for f in missing]
        bits = 0
        for j, flag in enumerate(flags):
            if flag:
                bits |= 1 << j
        return cls(bits, len(flags))

    @classmethod
    def from_string(cls, text: str) -> "MissingPattern":
        """Parse a mask string such as "0110"; the leftmost character is coordinate 1."""
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"mask string must be a nonempty run of 0/1, got {text!r}")
        return cls.from_bools(c == "1" for c in text)

    @classmethod
    def all_observed(cls, dimension: int) -> "MissingPattern":
        return cls(0, dimension)

    @classmethod
    def all_missing(cls, dimension: int) -> "MissingPattern":
        return cls((1 << dimension) - 1, dimension)

    def to_string(self) -> str:
        return "".join("1" if self.is_missing(j) else "0" for j in range(self.dimension))

    def is_missing(self, j: int) -> bool:
        if not 0 <= j < self.dimension:
            raise IndexError(f"coordinate {j} outside dimension {self.dimension}")
        return bool((self.bits >> j) & 1)

    @property
    def missing_indices(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.dimension) if (self.bits >> j) & 1)

    @property
    def observed_indices(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.dimension) if not (self.bits >> j) & 1)

    @property
    def n_missing(self) -> int:
        return int(self.bits).bit_count()

    @property
    def n_observed(self) -> int:
        return self.dimension - self.n_missing

    def __repr__(self) -> str:
        return f"MissingPattern('{self.to_string()}')"


def pack_mask_rows(mask: np.ndarray) -> np.ndarray:
    """Pack an (n, d) boolean mask matrix into n int64 pattern keys."""
    mask = np.asarray(mask, dtype=bool)
    d = mask.shape[1]
    weights = np.int64(1) << np.arange(d, dtype=np.int64)
    return mask.astype(np.int64) @ weights


def unpack_masks(keys: np.ndarray, dimension: int) -> np.ndarray:
    """Expand int64 pattern keys back into an (n, d) boolean mask matrix."""
    keys = np.asarray(keys, dtype=np.int64)
    shifts = np.arange(dimension, dtype=np.int64)
    return ((keys[:, None] >> shifts) & 1).astype(bool)


def group_rows_by_key(keys: np.ndarray) -> list:
    """(key, ascending row indices) pairs, keys ascending; one sort, no scans."""
    keys = np.asarray(keys)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    boundaries = np.flatnonzero(np.diff(sorted_keys)) + 1
    return [(int(keys[chunk[0]]), np.sort(chunk)) for chunk in np.split(order, boundaries)]


class MaskedDataset:
    """n rows of covariates with a missingness mask and a response.

    Masked cells of ``values`` hold NaN as a sentinel and must never be read;
    ``value_at`` raises on such reads and per-row access goes through
    ``observed_values``. All arrays are frozen after construction.
    """

    def __init__(self, values, mask, responses):
        values = np.array(values, dtype=float)
        mask = np.asarray(mask)
        responses = np.array(responses, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d matrix")
        n, d = values.shape
        if d > MAX_DIMENSION:
            raise ValueError(f"at most {MAX_DIMENSION} covariates supported, got {d}")
        if mask.shape != (n, d):
            raise ValueError(f"mask shape {mask.shape} does not match values shape {(n, d)}")
        if responses.shape != (n,):
            raise ValueError(f"responses shape {responses.shape} does not match row count {n}")
        if mask.dtype != np.bool_ and not ((mask == 0) | (mask == 1)).all():
            raise ValueError("mask entries must be 0/1")
        mask = mask.astype(bool)
        values[mask] = np.nan
        for arr in (values, mask, responses):
            arr.setflags(write=False)
        self._values = values
        self._mask = mask
        self._responses = responses

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    @property
    def responses(self) -> np.ndarray:
        return self._responses

    @property
    def n(self) -> int:
        return self._values.shape[0]

    @property
    def d(self) -> int:
        return self._values.shape[1]

    def pattern(self, i: int) -> MissingPattern:
        return MissingPattern.from_bools(self._mask[i])

    def mask_keys(self) -> np.ndarray:
        return pack_mask_rows(self._mask)

    def value_at(self, i: int, j: int) -> float:
        if self._mask[i, j]:
            raise MaskedReadError(f"cell ({i}, {j}) is masked")
        return float(self._values[i, j])

    def observed_values(self, i: int) -> np.ndarray:
        """Values of row i at its observed coordinates, ascending coordinate order."""
        return self._values[i][~self._mask[i]]

    def __repr__(self) -> str:
        return f"MaskedDataset(n={self.n}, d={self.d})"


@dataclass(frozen=True)
class PatternIndex:
    """Rows of a dataset grouped by their missingness pattern.

    groups maps each observed pattern to the ascending row indices carrying
    it; frequencies holds the matching empirical probabilities.
    """

    groups: dict
    frequencies: dict
    n: int


def build_pattern_index(data: MaskedDataset) -> PatternIndex:
    """Partition the rows of ``data`` by pattern and record group frequencies."""
    if data.n < 1:
        raise ValueError("dataset is empty")
    groups = {}
    frequencies = {}
    for key, rows in group_rows_by_key(data.mask_keys()):
        pattern = MissingPattern(key, data.d)
        rows.setflags(write=False)
        groups[pattern] = rows
        frequencies[pattern] = rows.size / data.n
    return PatternIndex(groups=groups, frequencies=frequencies, n=data.n)
