"""Numerical kernels: least-squares fitting and random 2x2 PSD matrices."""

from __future__ import annotations

import numpy as np
import scipy.linalg

DEFAULT_RIDGE = 1e-9


def ols_fit(X, y, ridge_epsilon: float = DEFAULT_RIDGE):
    """Fit intercept + X @ w to y by ordinary least squares.

    Solves the normal equations of the intercept-augmented system with a
    Cholesky factorization. When the system is singular or underdetermined
    (n < p + 1), Tikhonov damping `ridge_epsilon` is added to the diagonal
    (the intercept is never damped) so a solution always exists.

    Returns (intercept, w) with w of length p.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D design matrix")
    n, p = X.shape
    if n == 0:
        raise ValueError("cannot fit on zero examples")
    if len(y) != n or not np.isfinite(y).all():
        raise ValueError("y must be finite and match the number of rows of X")

    Z = np.empty((n, p + 1))
    Z[:, 0] = 1.0
    Z[:, 1:] = X
    G = Z.T @ Z
    b = Z.T @ y

    coef = None
    if n >= p + 1:
        try:
            coef = scipy.linalg.cho_solve(scipy.linalg.cho_factor(G), b)
        except scipy.linalg.LinAlgError:
            coef = None
        if coef is not None and not np.isfinite(coef).all():
            coef = None
    if coef is None:
        damped = G.copy()
        damped[1:, 1:] += ridge_epsilon * np.eye(p)
        try:
            coef = np.linalg.solve(damped, b)
        except np.linalg.LinAlgError:
            # Only reachable with ridge_epsilon = 0 on a singular system.
            coef = np.linalg.lstsq(damped, b, rcond=None)[0]
    return float(coef[0]), coef[1:]


def normal_equations_fit(X, y):
    """Reference OLS via explicitly assembled normal equations.

    Independent of :func:`ols_fit` (no factorization reuse, no damping);
    intended as a cross-check for full-rank systems.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(X)
    Z = np.hstack([np.ones((n, 1)), X])
    coef = np.linalg.solve(Z.T @ Z, Z.T @ y)
    return float(coef[0]), coef[1:]


def random_psd_2x2(rng: np.random.Generator, eig_low: float, eig_high: float) -> np.ndarray:
    """Draw a random symmetric PSD 2x2 matrix.

    Eigenvalues are uniform in [eig_low, eig_high] and the eigenbasis is a
    rotation by a uniform angle in [0, 2*pi). Draw order is fixed
    (eigenvalues first, then the angle) so instances built from a seeded
    generator are reproducible.
    """
    if not (0.0 <= eig_low <= eig_high):
        raise ValueError("need 0 <= eig_low <= eig_high")
    lam = rng.uniform(eig_low, eig_high, size=2)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    m = rot @ np.diag(lam) @ rot.T
    return (m + m.T) / 2.0
