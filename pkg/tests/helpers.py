"""Shared instance builders for the test suites."""

import numpy as np

from l0cert import ProblemInstance


def random_instance(seed, n=10, m=6, k_true=2, noise=0.1, coeff_scale=2.0):
    """Random standardized instance with a planted sparse signal."""
    rng = np.random.default_rng(seed)
    phi = rng.standard_normal((n, m))
    phi /= np.linalg.norm(phi, axis=0)
    x = np.zeros(m)
    chosen = rng.choice(m, size=k_true, replace=False)
    x[chosen] = coeff_scale * rng.uniform(0.5, 1.5, size=k_true) * rng.choice([-1.0, 1.0], k_true)
    y = phi @ x + noise * rng.standard_normal(n)
    return ProblemInstance.from_arrays(phi, y)


def near_orthonormal_instance(seed, n=12, m=6, k_true=3, perturb=0.02, noise=0.05):
    """Orthonormal columns nudged by a small perturbation, then re-normalized;
    coherence stays tiny so the correlation-based tests can fire."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, m)))
    q = q * np.sign(np.diag(r))
    phi = q + perturb * rng.standard_normal((n, m))
    phi /= np.linalg.norm(phi, axis=0)
    x = np.zeros(m)
    magnitudes = np.sort(rng.uniform(1.0, 3.0, size=k_true))[::-1]
    x[:k_true] = magnitudes * rng.choice([-1.0, 1.0], k_true)
    y = phi @ x + noise * rng.standard_normal(n)
    return ProblemInstance.from_arrays(phi, y)
