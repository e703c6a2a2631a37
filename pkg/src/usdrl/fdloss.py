"""Multi-grained feature-decorrelation objective.

Per domain, the loss combines an intra-sample consistency pair (similarity of
each view to the view mean, plus a cross-correlation-diagonal invariance term)
with an inter-sample separability triple (variance hinge, auto-covariance,
cross-correlation off-diagonals). The grand total sums the instance domain
with tau times the spatial and temporal domains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import torch

from .config import ModelConfig
from .errors import BatchSizeError, ShapeError
from .projection import ProjectionBatch

TERMS = ("similarity", "invariance", "variance", "autocov", "xcorr")


def _as_matrix(view) -> torch.Tensor:
    z = view.Z if isinstance(view, ProjectionBatch) else view
    if z.dim() != 2:
        raise ShapeError(f"expected [N, D] matrix, got {tuple(z.shape)}")
    return z


def _check_views(views: Sequence) -> list[torch.Tensor]:
    if len(views) < 2:
        raise ValueError(f"need K >= 2 views, got {len(views)}")
    mats = [_as_matrix(v) for v in views]
    shape = mats[0].shape
    for m in mats[1:]:
        if m.shape != shape:
            raise ShapeError(f"view shapes differ: {tuple(m.shape)} vs {tuple(shape)}")
    if shape[0] < 2:
        raise BatchSizeError(f"need N >= 2 rows, got {shape[0]}")
    return mats


def standardize_columns(z: torch.Tensor, eps_norm: float = 1e-8) -> torch.Tensor:
    """Zero-mean, unit-std columns (population variance, floored under the
    square root so constant columns map to zero instead of NaN).
    """
    z = _as_matrix(z)
    if z.shape[0] < 2:
        raise BatchSizeError(f"need N >= 2 rows, got {z.shape[0]}")
    centered = z - z.mean(dim=0)
    var = centered.pow(2).mean(dim=0)
    return centered / torch.sqrt(var + eps_norm)


def cross_correlation(z_a: torch.Tensor, z_b: torch.Tensor,
                      eps_norm: float = 1e-8) -> torch.Tensor:
    """D x D cross-correlation matrix of column-standardized batches."""
    z_a, z_b = _as_matrix(z_a), _as_matrix(z_b)
    if z_a.shape != z_b.shape:
        raise ShapeError(f"shape mismatch: {tuple(z_a.shape)} vs {tuple(z_b.shape)}")
    n = z_a.shape[0]
    return standardize_columns(z_a, eps_norm).T @ standardize_columns(z_b, eps_norm) / n


def consistency_loss(views: Sequence, kappa: float, eta: float,
                     eps_norm: float = 1e-8) -> tuple[torch.Tensor, torch.Tensor]:
    """Weighted (similarity, invariance) addends of the consistency term.

    Similarity: mean euclidean distance of each view to the per-sample view
    mean, averaged over views, times kappa. Invariance: sum over ordered view
    pairs of sum_j (1 - C_jj) on the standardized cross-correlation, averaged
    over views, times eta.
    """
    mats = _check_views(views)
    k = len(mats)
    stack = torch.stack(mats)  # [K, N, D]
    centroid = stack.mean(dim=0)
    similarity = torch.linalg.vector_norm(stack - centroid, dim=-1).mean(dim=1).sum() / k

    hats = [standardize_columns(m, eps_norm) for m in mats]
    n = mats[0].shape[0]
    invariance = stack.new_zeros(())
    for a in range(k):
        for b in range(k):
            if a == b:
                continue
            diag = (hats[a] * hats[b]).sum(dim=0) / n  # diagonal of C(a, b)
            invariance = invariance + (1.0 - diag).sum()
    invariance = invariance / k
    return kappa * similarity, eta * invariance


def variance_term(z: torch.Tensor, gamma: float, epsilon: float,
                  ddof: int = 0) -> torch.Tensor:
    """Hinge pushing every column's std above gamma (population variance)."""
    z = _as_matrix(z)
    n = z.shape[0]
    if n < 2:
        raise BatchSizeError(f"need N >= 2 rows, got {n}")
    centered = z - z.mean(dim=0)
    var = centered.pow(2).sum(dim=0) / (n - ddof)
    return torch.relu(gamma - torch.sqrt(var + epsilon)).mean()


def autocov_term(z: torch.Tensor, ddof: int = 1) -> torch.Tensor:
    """Mean squared off-diagonal of the auto-covariance matrix (divisor N-1)."""
    z = _as_matrix(z)
    n, d = z.shape
    if n < 2:
        raise BatchSizeError(f"need N >= 2 rows, got {n}")
    centered = z - z.mean(dim=0)
    cov = centered.T @ centered / (n - ddof)
    off = ~torch.eye(d, dtype=torch.bool, device=z.device)
    return cov[off].pow(2).sum() / d


def xcorr_term(z_a: torch.Tensor, z_b: torch.Tensor,
               eps_norm: float = 1e-8) -> torch.Tensor:
    """Sum of squared off-diagonals of the view cross-correlation matrix."""
    corr = cross_correlation(z_a, z_b, eps_norm)
    d = corr.shape[0]
    off = ~torch.eye(d, dtype=torch.bool, device=corr.device)
    return corr[off].pow(2).sum()


def separability_loss(views: Sequence, mu: float, lambda_: float, gamma: float,
                      epsilon: float, eps_norm: float = 1e-8,
                      var_ddof: int = 0, cov_ddof: int = 1) -> torch.Tensor:
    """Sum over views of mu*variance + autocov, plus lambda times the
    cross-correlation term over unordered view pairs.
    """
    mats = _check_views(views)
    total = mats[0].new_zeros(())
    for a, z_a in enumerate(mats):
        total = total + mu * variance_term(z_a, gamma, epsilon, var_ddof)
        total = total + autocov_term(z_a, cov_ddof)
        for z_b in mats[a + 1:]:
            total = total + lambda_ * xcorr_term(z_a, z_b, eps_norm)
    return total


@dataclass
class DomainTerms:
    """Weighted loss addends for one domain; ``total`` is their sum."""

    similarity: float = 0.0
    invariance: float = 0.0
    variance: float = 0.0
    autocov: float = 0.0
    xcorr: float = 0.0

    @property
    def total(self) -> float:
        return self.similarity + self.invariance + self.variance + self.autocov + self.xcorr

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in TERMS} | {"total": self.total}


@dataclass
class LossBreakdown:
    """Itemized loss values per domain plus the grand total."""

    instance: DomainTerms = field(default_factory=DomainTerms)
    spatial: DomainTerms = field(default_factory=DomainTerms)
    temporal: DomainTerms = field(default_factory=DomainTerms)
    tau: float = 0.0
    total: float = 0.0

    def domain(self, name: str) -> DomainTerms:
        return {"instance": self.instance, "spatial": self.spatial,
                "temporal": self.temporal}[name]

    def log_lines(self, step: int) -> list[str]:
        lines = []
        for name in ("instance", "spatial", "temporal"):
            for term, value in self.domain(name).as_dict().items():
                lines.append(f"step={step} domain={name} term={term} value={value!r}")
        lines.append(f"step={step} domain=total term=total value={self.total!r}")
        return lines


def _fd_terms(views: Sequence, cfg: ModelConfig) -> dict[str, torch.Tensor]:
    mats = _check_views(views)
    similarity, invariance = consistency_loss(mats, cfg.kappa, cfg.eta, cfg.eps_norm)
    variance = mats[0].new_zeros(())
    autocov = mats[0].new_zeros(())
    xcorr = mats[0].new_zeros(())
    for a, z_a in enumerate(mats):
        variance = variance + cfg.mu * variance_term(z_a, cfg.gamma, cfg.epsilon,
                                                     cfg.var_ddof)
        autocov = autocov + autocov_term(z_a, cfg.cov_ddof)
        for z_b in mats[a + 1:]:
            xcorr = xcorr + cfg.lambda_ * xcorr_term(z_a, z_b, cfg.eps_norm)
    return {"similarity": similarity, "invariance": invariance,
            "variance": variance, "autocov": autocov, "xcorr": xcorr}


def fd_loss(views: Sequence, cfg: ModelConfig) -> torch.Tensor:
    """Single-domain feature-decorrelation loss: consistency + separability."""
    terms = _fd_terms(views, cfg)
    return sum(terms.values())


def total_loss(instance_views: Sequence, spatial_views: Sequence,
               temporal_views: Sequence, cfg: ModelConfig
               ) -> tuple[torch.Tensor, LossBreakdown]:
    """Grand total: instance + tau * (spatial + temporal), with a breakdown."""
    breakdown = LossBreakdown(tau=cfg.tau)
    domain_totals = {}
    for name, views in (("instance", instance_views), ("spatial", spatial_views),
                        ("temporal", temporal_views)):
        terms = _fd_terms(views, cfg)
        domain_totals[name] = sum(terms.values())
        target = breakdown.domain(name)
        for term, value in terms.items():
            setattr(target, term, float(value.detach()))
    total = domain_totals["instance"] + cfg.tau * (domain_totals["spatial"]
                                                   + domain_totals["temporal"])
    breakdown.total = float(total.detach())
    return total, breakdown
