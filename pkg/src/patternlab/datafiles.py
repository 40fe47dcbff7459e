"""JSON round trips for generated samples and fitted models."""

from __future__ import annotations

import numpy as np

from .estimators import ConstantImputeRegression, IterativeImputeRegression, PbpRegression
from .patterns import MaskedDataset
from .simulate import LabeledSample


def labeled_sample_to_json(sample: LabeledSample) -> dict:
    dataset = sample.dataset
    values = [
        [None if dataset.mask[i, j] else float(dataset.values[i, j]) for j in range(dataset.d)]
        for i in range(dataset.n)
    ]
    masks = ["".join("1" if m else "0" for m in row) for row in dataset.mask]
    return {
        "d": dataset.d,
        "n": dataset.n,
        "values": values,
        "mask": masks,
        "responses": [float(y) for y in dataset.responses],
        "full_values": [[float(v) for v in row] for row in sample.full_values],
        "bayes_values": None
        if sample.bayes_values is None
        else [float(v) for v in sample.bayes_values],
    }


def dataset_from_json(obj: dict) -> MaskedDataset:
    n, d = int(obj["n"]), int(obj["d"])
    mask = np.array([[c == "1" for c in row] for row in obj["mask"]])
    if mask.shape != (n, d):
        raise ValueError(f"mask shape {mask.shape} does not match n={n}, d={d}")
    values = np.array(
        [[0.0 if cell is None else float(cell) for cell in row] for row in obj["values"]]
    )
    return MaskedDataset(values, mask, np.asarray(obj["responses"], dtype=float))


def model_to_json(model) -> dict:
    return model.to_json()


def model_from_json(obj: dict):
    """Detect the estimator family from the payload and rebuild it."""
    kind = obj.get("kind")
    if kind is None and "models" in obj:
        return PbpRegression.from_json(obj)
    if kind == "constant_impute":
        return ConstantImputeRegression.from_json(obj)
    if kind == "iterative_impute":
        return IterativeImputeRegression.from_json(obj)
    raise ValueError(f"unrecognized model payload (kind={kind!r})")
