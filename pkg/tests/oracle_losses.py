"""Independent brute-force implementation of the decorrelation objective.

Written directly from the defining formulas with explicit Python loops, on
purpose sharing no code with the package implementation. Used as the oracle
for the loss tests and the acceptance suite.
"""

import math

import numpy as np


def standardize(Z, eps_norm=1e-8):
    Z = np.asarray(Z, dtype=np.float64)
    N, D = Z.shape
    out = np.zeros((N, D))
    for j in range(D):
        mean = sum(Z[n, j] for n in range(N)) / N
        var = sum((Z[n, j] - mean) ** 2 for n in range(N)) / N
        denom = math.sqrt(var + eps_norm)
        for n in range(N):
            out[n, j] = (Z[n, j] - mean) / denom
    return out


def xcorr_matrix(Za, Zb, eps_norm=1e-8):
    Za_hat = standardize(Za, eps_norm)
    Zb_hat = standardize(Zb, eps_norm)
    N, D = Za_hat.shape
    C = np.zeros((D, D))
    for i in range(D):
        for j in range(D):
            C[i, j] = sum(Za_hat[n, i] * Zb_hat[n, j] for n in range(N)) / N
    return C


def consistency(views, kappa, eta, eps_norm=1e-8):
    K = len(views)
    N, D = np.asarray(views[0]).shape
    zbar = sum(np.asarray(v, dtype=np.float64) for v in views) / K
    sim = 0.0
    for a in range(K):
        Za = np.asarray(views[a], dtype=np.float64)
        total = 0.0
        for n in range(N):
            total += math.sqrt(sum((Za[n, j] - zbar[n, j]) ** 2 for j in range(D)))
        sim += total / N
    sim /= K

    inv = 0.0
    for a in range(K):
        for b in range(K):
            if a == b:
                continue
            C = xcorr_matrix(views[a], views[b], eps_norm)
            inv += sum(1.0 - C[j, j] for j in range(D))
    inv /= K
    return kappa * sim, eta * inv


def variance(Z, gamma, epsilon):
    Z = np.asarray(Z, dtype=np.float64)
    N, D = Z.shape
    total = 0.0
    for j in range(D):
        mean = sum(Z[n, j] for n in range(N)) / N
        var = sum((Z[n, j] - mean) ** 2 for n in range(N)) / N
        total += max(0.0, gamma - math.sqrt(var + epsilon))
    return total / D


def autocov(Z):
    Z = np.asarray(Z, dtype=np.float64)
    N, D = Z.shape
    means = [sum(Z[n, j] for n in range(N)) / N for j in range(D)]
    total = 0.0
    for i in range(D):
        for j in range(D):
            if i == j:
                continue
            cov = sum((Z[n, i] - means[i]) * (Z[n, j] - means[j])
                      for n in range(N)) / (N - 1)
            total += cov ** 2
    return total / D


def xcorr(Za, Zb, eps_norm=1e-8):
    C = xcorr_matrix(Za, Zb, eps_norm)
    D = C.shape[0]
    return sum(C[i, j] ** 2 for i in range(D) for j in range(D) if i != j)


def separability(views, mu, lam, gamma, epsilon, eps_norm=1e-8):
    K = len(views)
    total = 0.0
    for a in range(K):
        total += mu * variance(views[a], gamma, epsilon) + autocov(views[a])
        for b in range(a + 1, K):
            total += lam * xcorr(views[a], views[b], eps_norm)
    return total


def fd(views, kappa, eta, mu, lam, gamma, epsilon, eps_norm=1e-8):
    sim, inv = consistency(views, kappa, eta, eps_norm)
    return sim + inv + separability(views, mu, lam, gamma, epsilon, eps_norm)


def total(instance_views, spatial_views, temporal_views, tau, kappa, eta, mu,
          lam, gamma, epsilon, eps_norm=1e-8):
    args = (kappa, eta, mu, lam, gamma, epsilon, eps_norm)
    return (fd(instance_views, *args)
            + tau * (fd(spatial_views, *args) + fd(temporal_views, *args)))
