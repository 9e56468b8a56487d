"""Independent cyclic coordinate-descent solver for RSS + lam * ||x||_1.

Deliberately self-contained (numpy only, no package imports): it referees the
homotopy solver and the exact optimality test, so it must not share code with
either.
"""

import numpy as np


def soft_threshold(value, cut):
    if value > cut:
        return value - cut
    if value < -cut:
        return value + cut
    return 0.0


def lasso_cd(phi, y, lam, x0=None, max_sweeps=20000, tol=1e-13):
    """Minimize ||y - phi x||^2 + lam * sum|x_i| by cyclic coordinate descent.

    Runs until the largest coefficient move in a full sweep drops below
    tol * max(1, ||x||_inf).
    """
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = phi.shape
    col_sq = np.einsum("ij,ij->j", phi, phi)
    x = np.zeros(m) if x0 is None else np.array(x0, dtype=float)
    resid = y - phi @ x
    for _ in range(max_sweeps):
        biggest = 0.0
        for j in range(m):
            if col_sq[j] == 0.0:
                continue
            old = x[j]
            rho = phi[:, j] @ resid + col_sq[j] * old
            new = soft_threshold(rho, lam / 2.0) / col_sq[j]
            if new != old:
                x[j] = new
                resid += phi[:, j] * (old - new)
                biggest = max(biggest, abs(new - old))
        if biggest <= tol * max(1.0, np.max(np.abs(x))):
            break
    return x


def lasso_objective(phi, y, x, lam):
    resid = y - phi @ x
    return float(resid @ resid + lam * np.sum(np.abs(x)))
