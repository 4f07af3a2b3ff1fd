"""Polynomial bases for triangular map components.

Two one-dimensional families are used:

* ``polynomial``: probabilists' Hermite polynomials He_n (He_0 = 1,
  He_1 = x, He_{n+1} = x He_n - n He_{n-1}), natural for a standard-normal
  reference measure.  Used for the non-monotone part of a map component.
* ``function-with-constant``: degree 0 is the constant function 1; degree
  d >= 1 is the normalized Hermite function
  psi_{d-1}(x) = (2^n n! sqrt(pi))^{-1/2} H_n(x) exp(-x^2/2) (physicists'
  H_n).  Used inside the exponential that makes components monotone; the
  constant element is what lets the map represent arbitrary diagonal
  scaling, since the Hermite functions themselves decay to zero.

Multivariate bases are tensor products over a total-order multi-index set
{m : sum(m) <= beta}, enumerated in graded lexicographic order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_PI_QUARTER = math.pi ** (-0.25)

POLYNOMIAL = "polynomial"
FUNCTION_WITH_CONSTANT = "function-with-constant"

_FAMILIES = (POLYNOMIAL, FUNCTION_WITH_CONSTANT)


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def hermite_poly(degree: int, x, deriv: int = 0):
    """Probabilists' Hermite polynomial He_degree at x (vectorized).

    ``deriv`` selects the function itself (0) or its first or second
    derivative, computed from He_n' = n He_{n-1}.
    """
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    if deriv not in (0, 1, 2):
        raise ValueError(f"deriv must be 0, 1 or 2, got {deriv}")
    arr, scalar = _as_array(x)
    if deriv == 0:
        out = _he_value(degree, arr)
    elif deriv == 1:
        out = degree * _he_value(degree - 1, arr) if degree >= 1 else np.zeros_like(arr)
    else:
        if degree >= 2:
            out = degree * (degree - 1) * _he_value(degree - 2, arr)
        else:
            out = np.zeros_like(arr)
    return float(out[0]) if scalar else out


def _he_value(degree: int, x: np.ndarray) -> np.ndarray:
    prev = np.ones_like(x)
    if degree == 0:
        return prev
    cur = x.copy()
    for n in range(1, degree):
        prev, cur = cur, x * cur - n * prev
    return cur


def _psi_table(x: np.ndarray, max_degree: int) -> np.ndarray:
    """Hermite functions psi_0..psi_max_degree, stacked along the last axis.

    The recurrence runs on the psi themselves, so the Gaussian envelope
    never overflows even far in the tails.
    """
    shape = x.shape + (max_degree + 1,)
    out = np.empty(shape, dtype=float)
    out[..., 0] = _PI_QUARTER * np.exp(-0.5 * x * x)
    if max_degree >= 1:
        out[..., 1] = math.sqrt(2.0) * x * out[..., 0]
    for n in range(1, max_degree):
        out[..., n + 1] = (
            x * math.sqrt(2.0 / (n + 1)) * out[..., n]
            - math.sqrt(n / (n + 1.0)) * out[..., n - 1]
        )
    return out


def hermite_func(degree: int, x, deriv: int = 0):
    """Normalized Hermite function psi_degree at x (vectorized).

    psi_n' uses the ladder identity
    psi_n' = sqrt(n/2) psi_{n-1} - sqrt((n+1)/2) psi_{n+1}, and
    psi_n'' = (x^2 - 2n - 1) psi_n from the harmonic-oscillator equation.
    """
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    if deriv not in (0, 1, 2):
        raise ValueError(f"deriv must be 0, 1 or 2, got {deriv}")
    arr, scalar = _as_array(x)
    if deriv == 0:
        out = _psi_table(arr, degree)[..., degree]
    elif deriv == 1:
        table = _psi_table(arr, degree + 1)
        out = -math.sqrt((degree + 1) / 2.0) * table[..., degree + 1]
        if degree >= 1:
            out = out + math.sqrt(degree / 2.0) * table[..., degree - 1]
    else:
        psi = _psi_table(arr, degree)[..., degree]
        out = (arr * arr - (2 * degree + 1)) * psi
    return float(out[0]) if scalar else out


def multiindex_count(dimension: int, beta: int) -> int:
    """Size of the total-order set {m : sum(m) <= beta} in ``dimension`` variables."""
    return math.comb(dimension + beta, beta)


@lru_cache(maxsize=None)
def multiindex_set(dimension: int, beta: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of total degree <= beta, in graded lexicographic order.

    Within each total degree, indices are ordered with earlier coordinates
    carrying higher degree first, e.g. (2, 1) yields ((0, 0), (1, 0), (0, 1)).
    A zero-dimensional set contains the single empty index; beta = 0 gives
    the all-zero index alone (a constant-only basis).
    """
    if dimension < 0:
        raise ValueError(f"dimension must be >= 0, got {dimension}")
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    out: list[tuple[int, ...]] = []
    for grade in range(beta + 1):
        out.extend(_compositions(grade, dimension))
        if dimension == 0:
            break  # only the empty index exists
    return tuple(out)


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    if parts == 0:
        return [()] if total == 0 else []
    if parts == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        out.extend((first,) + rest for rest in _compositions(total - first, parts - 1))
    return out


@dataclass(frozen=True)
class BasisSpec:
    """Tensor-product basis: a family, input dimension, and max total degree."""

    dimension: int
    max_degree: int
    family: str

    def __post_init__(self):
        if self.dimension < 0:
            raise ValueError(f"dimension must be >= 0, got {self.dimension}")
        if self.max_degree < 0:
            raise ValueError(f"max_degree must be >= 0, got {self.max_degree}")
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")

    @property
    def indices(self) -> tuple[tuple[int, ...], ...]:
        return multiindex_set(self.dimension, self.max_degree)

    def __len__(self) -> int:
        return multiindex_count(self.dimension, self.max_degree)


def family_tables(family: str, x: np.ndarray, beta: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Value, first- and second-derivative tables of a 1-D family.

    Returns three arrays of shape ``x.shape + (beta + 1,)``; column d holds
    the degree-d basis element (or its derivative) evaluated at x.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape + (beta + 1,)
    val = np.empty(shape)
    d1 = np.zeros(shape)
    d2 = np.zeros(shape)
    if family == POLYNOMIAL:
        val[..., 0] = 1.0
        if beta >= 1:
            val[..., 1] = x
        for n in range(1, beta):
            val[..., n + 1] = x * val[..., n] - n * val[..., n - 1]
        for n in range(1, beta + 1):
            d1[..., n] = n * val[..., n - 1]
        for n in range(2, beta + 1):
            d2[..., n] = n * (n - 1) * val[..., n - 2]
    elif family == FUNCTION_WITH_CONSTANT:
        psi = _psi_table(x, beta)  # psi_0..psi_beta; degree d column is psi_{d-1}
        val[..., 0] = 1.0
        for d in range(1, beta + 1):
            n = d - 1
            val[..., d] = psi[..., n]
            d1[..., d] = -math.sqrt((n + 1) / 2.0) * psi[..., n + 1]
            if n >= 1:
                d1[..., d] += math.sqrt(n / 2.0) * psi[..., n - 1]
            d2[..., d] = (x * x - (2 * n + 1)) * psi[..., n]
    else:
        raise ValueError(f"unknown family {family!r}")
    return val, d1, d2


def tensor_products(
    tables: list[np.ndarray],
    indices: tuple[tuple[int, ...], ...],
    value_like: list[bool] | None = None,
) -> np.ndarray:
    """Products prod_i tables[i][:, m_i] for each multi-index m.

    ``tables[i]`` has shape (n, beta+1).  When ``value_like[i]`` is true the
    degree-0 column is the constant 1 and the factor is skipped for m_i = 0;
    derivative tables have a zero degree-0 column and must not be skipped.
    """
    n = tables[0].shape[0] if tables else 1
    out = np.ones((n, len(indices)))
    if value_like is None:
        value_like = [True] * len(tables)
    for col, m in enumerate(indices):
        acc = None
        for c, deg in enumerate(m):
            if deg == 0 and value_like[c]:
                continue
            factor = tables[c][:, deg]
            acc = factor.copy() if acc is None else acc * factor
        if acc is not None:
            out[:, col] = acc
    return out


def _prepare_points(spec: BasisSpec, points) -> tuple[np.ndarray, bool]:
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if spec.dimension == 0:
        if pts.shape[1] != 0 and pts.size != 0:
            raise ValueError("expected empty points for a 0-dimensional basis")
        pts = pts.reshape(pts.shape[0], 0)
    elif pts.shape[1] != spec.dimension:
        raise ValueError(f"expected {spec.dimension} coordinates, got {pts.shape[1]}")
    return pts, single


def eval_basis(spec: BasisSpec, points) -> np.ndarray:
    """Evaluate all basis elements at ``points`` (shape (n, dim) or (dim,)).

    Returns shape (n, len(spec)) or (len(spec),) for a single point, with
    columns in ``multiindex_set`` order.
    """
    pts, single = _prepare_points(spec, points)
    tables = [family_tables(spec.family, pts[:, c], spec.max_degree)[0] for c in range(spec.dimension)]
    if spec.dimension == 0:
        out = np.ones((pts.shape[0], 1))
    else:
        out = tensor_products(tables, spec.indices)
    return out[0] if single else out


def eval_basis_deriv(spec: BasisSpec, points, coord: int) -> np.ndarray:
    """Partial derivative of each basis element in coordinate ``coord`` (1-based)."""
    return eval_basis_deriv2(spec, points, coord, None)


def eval_basis_deriv2(spec: BasisSpec, points, coord_a: int, coord_b: int | None) -> np.ndarray:
    """First (coord_b None) or second partial derivative of the basis.

    ``coord_a == coord_b`` gives the pure second derivative in that
    coordinate; otherwise the mixed partial.  Coordinates are 1-based.
    """
    pts, single = _prepare_points(spec, points)
    for coord in (coord_a, coord_b):
        if coord is not None and not (1 <= coord <= spec.dimension):
            raise ValueError(f"coordinate {coord} out of range 1..{spec.dimension}")
    tables = []
    value_like = []
    for c in range(spec.dimension):
        val, d1, d2 = family_tables(spec.family, pts[:, c], spec.max_degree)
        order = int(coord_a == c + 1) + int(coord_b == c + 1)
        tables.append((val, d1, d2)[order])
        value_like.append(order == 0)
    if spec.dimension == 0:
        out = np.zeros((pts.shape[0], 1))
    else:
        out = tensor_products(tables, spec.indices, value_like)
    return out[0] if single else out
