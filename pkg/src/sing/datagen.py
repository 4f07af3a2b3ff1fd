"""Reproducible sample generators for the benchmark experiments.

All generators draw from a counter-based Philox stream seeded per call, so
identical (parameters, seed) give bit-identical samples.  Draw orders are
fixed and documented per generator; changing them is a breaking change.

Each generator returns a :class:`Dataset`: the raw (unstandardized) sample
matrix, the ground-truth conditional-independence graph implied by the
sampling factorization (one clique per factor), and column names.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NotPositiveDefiniteError
from .graphops import Graph


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class Dataset:
    data: np.ndarray
    truth: Graph
    names: tuple


def gen_modified_rademacher(r: int, n: int, seed: int) -> Dataset:
    """r independent pairs (X, Y) with X ~ N(0,1), W ~ N(0,1), Y = W X.

    X and Y are uncorrelated but dependent (the dependence lives in the
    squares), so each pair contributes one edge.  Draw order: a single
    standard-normal block of shape (n, 2r); column 2i holds X_i and column
    2i+1 holds W_i.  Emitted columns are (X1, Y1, ..., Xr, Yr).
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    g = _rng(seed)
    z = g.standard_normal((n, 2 * r))
    data = np.empty((n, 2 * r))
    names = []
    edges = []
    for i in range(r):
        x = z[:, 2 * i]
        w = z[:, 2 * i + 1]
        data[:, 2 * i] = x
        data[:, 2 * i + 1] = w * x
        names += [f"X{i + 1}", f"Y{i + 1}"]
        edges.append((2 * i + 1, 2 * i + 2))
    return Dataset(data, Graph.from_edges(2 * r, edges), tuple(names))


def gen_stochastic_volatility(
    T: int, n: int, seed: int, phi_value: float | None = None
) -> Dataset:
    """Joint prior samples of an AR(1) log-volatility model.

    Per sample: mu ~ N(0,1); phi* ~ N(3,1); phi = 2 e^{phi*}/(1+e^{phi*}) - 1
    (computed as tanh(phi*/2), the same function); Z_0 ~ N(mu, 1/(1-phi^2));
    then Z_{t+1} = mu + phi (Z_t - mu) + eps_t with eps_t ~ N(0,1).  Draw
    order: mu, phi*, the Z_0 innovation, then eps_1..eps_T.  Emitted columns
    are (mu, phi, Z_1..Z_T); Z_0 is generated but not emitted.

    ``phi_value`` fixes phi to a constant for diagnostics; the phi column is
    then dropped (a constant column cannot be standardized) and the truth
    graph shrinks accordingly.
    """
    if T < 2:
        raise ValueError("T must be >= 2")
    g = _rng(seed)
    mu = g.standard_normal(n)
    phi_star = 3.0 + g.standard_normal(n)
    if phi_value is None:
        phi = np.tanh(phi_star / 2.0)
    else:
        if not -1.0 < phi_value < 1.0:
            raise ValueError("phi_value must lie in (-1, 1)")
        phi = np.full(n, float(phi_value))
    if np.any(np.abs(phi) >= 1.0):
        raise ValueError("autoregression coefficient left (-1, 1)")
    z = mu + g.standard_normal(n) / np.sqrt(1.0 - phi**2)
    states = np.empty((n, T))
    for t in range(T):
        z = mu + phi * (z - mu) + g.standard_normal(n)
        states[:, t] = z

    if phi_value is None:
        data = np.column_stack([mu, phi, states])
        names = ("mu", "phi") + tuple(f"Z{t + 1}" for t in range(T))
        edges = [(1, 2)]
        edges += [(1, t + 3) for t in range(T)]  # mu - Z_t
        edges += [(2, t + 3) for t in range(T)]  # phi - Z_t
        edges += [(t + 3, t + 4) for t in range(T - 1)]  # chain
        return Dataset(data, Graph.from_edges(T + 2, edges), names)

    data = np.column_stack([mu, states])
    names = ("mu",) + tuple(f"Z{t + 1}" for t in range(T))
    edges = [(1, t + 2) for t in range(T)]
    if phi_value != 0.0:
        edges += [(t + 2, t + 3) for t in range(T - 1)]
    return Dataset(data, Graph.from_edges(T + 1, edges), names)


def grid_precision(side: int, gamma: float = 0.3) -> np.ndarray:
    """SPD precision I + gamma * L for the side x side lattice Laplacian L;
    its off-diagonal support is exactly the grid edges."""
    if side < 2:
        raise ValueError("side must be >= 2")
    p = side * side
    lap = np.zeros((p, p))

    def node(i, j):
        return i * side + j

    for i in range(side):
        for j in range(side):
            a = node(i, j)
            for di, dj in ((0, 1), (1, 0)):
                ii, jj = i + di, j + dj
                if ii < side and jj < side:
                    b = node(ii, jj)
                    lap[a, b] = lap[b, a] = -1.0
    deg = -lap.sum(axis=1)
    lap[np.diag_indices(p)] = deg
    return np.eye(p) + gamma * lap


def gen_gaussian(theta: np.ndarray, n: int, seed: int) -> Dataset:
    """N(0, theta^{-1}) samples via the Cholesky factor of theta; the truth
    graph is the off-diagonal support of theta."""
    theta = np.asarray(theta, dtype=float)
    p = theta.shape[0]
    if theta.shape != (p, p) or not np.allclose(theta, theta.T):
        raise NotPositiveDefiniteError("precision matrix must be symmetric")
    try:
        chol = np.linalg.cholesky(theta)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("precision matrix is not positive definite")
    g = _rng(seed)
    z = g.standard_normal((n, p))
    data = solve_triangular(chol, z.T, lower=True, trans="T").T
    edges = [
        (j + 1, k + 1)
        for j in range(p)
        for k in range(j + 1, p)
        if abs(theta[j, k]) > 1e-12
    ]
    names = tuple(f"X{i + 1}" for i in range(p))
    return Dataset(np.ascontiguousarray(data), Graph.from_edges(p, edges), names)


def gen_gaussian_grid(side: int, n: int, seed: int, gamma: float = 0.3) -> Dataset:
    return gen_gaussian(grid_precision(side, gamma), n, seed)
