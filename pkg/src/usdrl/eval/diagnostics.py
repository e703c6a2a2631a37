"""Collapse diagnostics: effective rank and correlation matrices."""

from __future__ import annotations

import numpy as np


def effective_rank(z: np.ndarray) -> float:
    """Exponential Shannon entropy of the normalized singular-value spectrum
    of the column-centered matrix. 1.0 for rank-1 data, D for a flat spectrum.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError(f"expected [N, D] matrix, got shape {z.shape}")
    if z.shape[0] < 2:
        raise ValueError(f"need N >= 2 rows, got {z.shape[0]}")
    centered = z - z.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    total = s.sum()
    if total <= 0.0:
        return 0.0
    p = s / total
    p = p[p > 0]
    return float(np.exp(-np.sum(p * np.log(p))))


def correlation_matrix(z: np.ndarray) -> np.ndarray:
    """Column correlation matrix with degenerate columns mapped to zero."""
    z = np.asarray(z, dtype=np.float64)
    centered = z - z.mean(axis=0)
    std = centered.std(axis=0)
    safe = np.where(std > 0, std, 1.0)
    hat = centered / safe
    corr = hat.T @ hat / z.shape[0]
    corr[std == 0, :] = 0.0
    corr[:, std == 0] = 0.0
    return corr
