"""Embedded example datasets: daily relative humidity (as fractions) for May.

Both series have 31 observations, stored exactly as published to two
decimals and in ascending order.
"""

from __future__ import annotations

import hashlib

import numpy as np

DATASETS: dict[str, tuple[float, ...]] = {
    "may2007": (
        0.40, 0.44, 0.50, 0.55, 0.58, 0.62, 0.65, 0.69,
        0.72, 0.72, 0.73, 0.75, 0.77, 0.80, 0.81, 0.81,
        0.83, 0.83, 0.85, 0.85, 0.85, 0.85, 0.86, 0.86,
        0.87, 0.87, 0.89, 0.92, 0.94, 0.94, 0.97,
    ),
    "may2008": (
        0.39, 0.40, 0.42, 0.43, 0.43, 0.43, 0.44, 0.46,
        0.48, 0.49, 0.51, 0.52, 0.53, 0.54, 0.56, 0.59,
        0.62, 0.64, 0.66, 0.73, 0.75, 0.76, 0.83, 0.85,
        0.88, 0.91, 0.92, 0.92, 0.95, 0.97, 0.98,
    ),
}


def load_dataset(name: str) -> np.ndarray:
    """Return a copy of an embedded dataset as a float array."""
    try:
        return np.array(DATASETS[name.lower()], dtype=float)
    except KeyError:
        known = ", ".join(sorted(DATASETS))
        raise KeyError(f"unknown dataset {name!r} (available: {known})") from None


def dataset_digest(name: str) -> str:
    """SHA-256 of the dataset rendered as two-decimal lines; pins the values."""
    text = "\n".join(f"{v:.2f}" for v in DATASETS[name.lower()])
    return hashlib.sha256(text.encode("ascii")).hexdigest()
