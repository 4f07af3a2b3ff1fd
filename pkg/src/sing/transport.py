"""Monotone lower-triangular transport maps with prescribed sparsity.

A map S on R^p has components

    S^k(x_1, ..., x_k) = c_k(x_prev) + int_0^{x_k} exp(h_k(x_prev, t)) dt

where ``x_prev`` are the active inputs of component k below k.  c_k is an
expansion in probabilists' Hermite polynomials of total degree <= beta
over the previous actives; h_k is an expansion in Hermite functions (plus
a constant) of total degree <= beta - 1 over all actives, one degree
lower because h plays the role of the log-derivative of a degree-beta
monotone component.  At beta = 1 the components are exactly affine.
The integral is a fixed-order Gauss-Legendre sum rescaled to
[0, x_k], so every quantity here is an exact finite formula in the
coefficients and admits exact derivatives.

The Jacobian of S is lower triangular with diagonal exp(h_k), which makes
the pullback of a standard normal through S

    log S#eta(x) = sum_k [ -S^k(x)^2 / 2 + h_k(x) ] - (p/2) log(2 pi).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .basis import (
    FUNCTION_WITH_CONSTANT,
    POLYNOMIAL,
    family_tables,
    multiindex_count,
    multiindex_set,
    tensor_products,
)
from .errors import ExponentOverflowError, RootBracketError

EXP_CLAMP = 700.0
LOG_2PI = math.log(2.0 * math.pi)


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    xi, w = leggauss(order)
    return xi, w


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class SparsityPattern:
    """Inactive (j, k) pairs of a lower-triangular map, plus the variable
    permutation in force (``permutation[v-1]`` is the 1-based map position
    of original variable v)."""

    dimension: int
    inactive_pairs: frozenset
    permutation: tuple

    def __post_init__(self):
        p = self.dimension
        if p < 1:
            raise ValueError("dimension must be >= 1")
        for j, k in self.inactive_pairs:
            if not (1 <= j < k <= p):
                raise ValueError(f"invalid inactive pair ({j}, {k})")
        if sorted(self.permutation) != list(range(1, p + 1)):
            raise ValueError("permutation must be a bijection on 1..p")

    @staticmethod
    def dense(p: int, permutation: tuple | None = None) -> "SparsityPattern":
        return SparsityPattern(p, frozenset(), permutation or tuple(range(1, p + 1)))

    @staticmethod
    def diagonal(p: int, permutation: tuple | None = None) -> "SparsityPattern":
        pairs = frozenset((j, k) for k in range(2, p + 1) for j in range(1, k))
        return SparsityPattern(p, pairs, permutation or tuple(range(1, p + 1)))

    def active_inputs(self, k: int) -> tuple:
        """Active inputs of component k: k itself plus every earlier
        variable not ruled out by the pattern."""
        return tuple(j for j in range(1, k) if (j, k) not in self.inactive_pairs) + (k,)

    def n_active_pairs(self) -> int:
        p = self.dimension
        return p * (p - 1) // 2 - len(self.inactive_pairs)


@dataclass(frozen=True)
class MapComponent:
    """One component S^k: active inputs, degree, and coefficient vectors."""

    index: int
    active_inputs: tuple
    beta: int
    quadrature_order: int
    c_coeffs: np.ndarray
    h_coeffs: np.ndarray

    def __post_init__(self):
        k = self.index
        act = self.active_inputs
        if len(act) == 0 or act[-1] != k or list(act) != sorted(set(act)):
            raise ValueError(f"active inputs of component {k} must be sorted and end with {k}")
        if act[0] < 1:
            raise ValueError("active inputs must be >= 1")
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        if self.quadrature_order < 1:
            raise ValueError("quadrature order must be >= 1")
        nc = multiindex_count(len(act) - 1, self.beta)
        nh = multiindex_count(len(act), self.beta - 1)
        if self.c_coeffs.shape != (nc,) or self.h_coeffs.shape != (nh,):
            raise ValueError(
                f"component {k}: expected coefficient lengths ({nc}, {nh}), "
                f"got ({self.c_coeffs.shape}, {self.h_coeffs.shape})"
            )
        if not (np.all(np.isfinite(self.c_coeffs)) and np.all(np.isfinite(self.h_coeffs))):
            raise ValueError(f"component {k}: coefficients must be finite")

    @property
    def n_coeffs(self) -> int:
        return self.c_coeffs.size + self.h_coeffs.size


def make_component(
    index: int,
    active_inputs,
    beta: int,
    quadrature_order: int = 32,
    c_coeffs=None,
    h_coeffs=None,
) -> MapComponent:
    act = tuple(active_inputs)
    nc = multiindex_count(len(act) - 1, beta)
    nh = multiindex_count(len(act), beta - 1)
    c = np.zeros(nc) if c_coeffs is None else np.asarray(c_coeffs, dtype=float).copy()
    h = np.zeros(nh) if h_coeffs is None else np.asarray(h_coeffs, dtype=float).copy()
    return MapComponent(index, act, beta, quadrature_order, c, h)


@dataclass(frozen=True)
class TriangularMap:
    dimension: int
    components: tuple
    pattern: SparsityPattern

    def __post_init__(self):
        if len(self.components) != self.dimension:
            raise ValueError("need one component per dimension")
        for k, comp in enumerate(self.components, start=1):
            if comp.index != k:
                raise ValueError(f"component {k} has index {comp.index}")
            if comp.active_inputs != self.pattern.active_inputs(k):
                raise ValueError(f"component {k} actives disagree with the pattern")

    @property
    def beta(self) -> int:
        return self.components[0].beta

    @property
    def quadrature_order(self) -> int:
        return self.components[0].quadrature_order

    def n_coeffs(self) -> int:
        return sum(c.n_coeffs for c in self.components)

    def coeff_slices(self) -> list:
        """Per-component (c_slice, h_slice) into the concatenated vector."""
        out = []
        off = 0
        for comp in self.components:
            nc, nh = comp.c_coeffs.size, comp.h_coeffs.size
            out.append((slice(off, off + nc), slice(off + nc, off + nc + nh)))
            off += nc + nh
        return out

    def coeff_vector(self) -> np.ndarray:
        return np.concatenate([np.concatenate([c.c_coeffs, c.h_coeffs]) for c in self.components])

    def with_coeff_vector(self, alpha: np.ndarray) -> "TriangularMap":
        comps = []
        for comp, (sc, sh) in zip(self.components, self.coeff_slices()):
            comps.append(
                MapComponent(
                    comp.index,
                    comp.active_inputs,
                    comp.beta,
                    comp.quadrature_order,
                    np.asarray(alpha[sc], dtype=float).copy(),
                    np.asarray(alpha[sh], dtype=float).copy(),
                )
            )
        return TriangularMap(self.dimension, tuple(comps), self.pattern)


def identity_map(
    p: int,
    beta: int,
    quadrature_order: int = 32,
    pattern: SparsityPattern | None = None,
) -> TriangularMap:
    """Zero-coefficient map (S(x) = x) respecting ``pattern``."""
    pattern = pattern or SparsityPattern.dense(p)
    comps = tuple(
        make_component(k, pattern.active_inputs(k), beta, quadrature_order)
        for k in range(1, p + 1)
    )
    return TriangularMap(p, comps, pattern)


# ---------------------------------------------------------------------------
# evaluation workspace


def _as_rows(x, p: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.shape[1] != p:
        raise ValueError(f"expected {p} columns, got {arr.shape[1]}")
    return arr, single


class ComponentWorkspace:
    """Coefficient-independent tables for one component on a fixed sample set.

    Everything expensive (basis tables at sample points and quadrature
    nodes, prefix tensor products) is computed once here; states for
    specific coefficient vectors are cheap by comparison.
    """

    def __init__(self, comp: MapComponent, X: np.ndarray):
        self.comp = comp
        self.beta = comp.beta
        act = comp.active_inputs
        self.prev = act[:-1]
        self.n = X.shape[0]
        self.xk = np.ascontiguousarray(X[:, comp.index - 1])
        Xprev = X[:, [v - 1 for v in self.prev]]

        beta = self.beta
        hdeg = beta - 1
        self.hdeg = hdeg
        self.mc = multiindex_set(len(self.prev), beta)
        self.mh = multiindex_set(len(act), hdeg)
        self.mh_prefix = tuple(m[:-1] for m in self.mh)
        self.h_last = np.array([m[-1] if m else 0 for m in self.mh])
        self.h_groups = [np.flatnonzero(self.h_last == d) for d in range(hdeg + 1)]

        # 1-D tables per previous coordinate, for both families
        self.fc = [family_tables(POLYNOMIAL, Xprev[:, c], beta) for c in range(len(self.prev))]
        self.fh = [family_tables(FUNCTION_WITH_CONSTANT, Xprev[:, c], hdeg) for c in range(len(self.prev))]
        # last coordinate at the sample points and at quadrature nodes
        self.vx = family_tables(FUNCTION_WITH_CONSTANT, self.xk, hdeg)
        xi, w = gauss_legendre(comp.quadrature_order)
        self.w = w
        self.halfxk = 0.5 * self.xk
        self.tn = self.halfxk[:, None] * (xi + 1.0)[None, :]
        self.vt = family_tables(FUNCTION_WITH_CONSTANT, self.tn, hdeg)

        self._prod_cache_c: dict = {}
        self._prod_cache_h: dict = {}
        self.phic = self._products_c(())
        self.phipre = self._products_h(())
        self.phih_x = self.phipre * self.vx[0][:, self.h_last]

    # -- tensor products over the two index sets (derivs = 1-based positions
    #    into self.prev, with repetition for second derivatives)

    def _products(self, tables, indices, derivs) -> np.ndarray:
        chosen = []
        value_like = []
        for c in range(len(self.prev)):
            order = derivs.count(c)
            chosen.append(tables[c][order])
            value_like.append(order == 0)
        if not chosen:
            if derivs:
                return np.zeros((self.n, len(indices)))
            return np.ones((self.n, len(indices)))
        return tensor_products(chosen, indices, value_like)

    def _products_c(self, derivs: tuple) -> np.ndarray:
        key = tuple(sorted(derivs))
        if key not in self._prod_cache_c:
            self._prod_cache_c[key] = self._products(self.fc, self.mc, list(derivs))
        return self._prod_cache_c[key]

    def _products_h(self, derivs: tuple) -> np.ndarray:
        """Prefix products of the h-basis (last coordinate excluded)."""
        key = tuple(sorted(derivs))
        if key not in self._prod_cache_h:
            self._prod_cache_h[key] = self._products(self.fh, self.mh_prefix, list(derivs))
        return self._prod_cache_h[key]

    def prev_pos(self, label: int) -> int:
        """0-based position of an active variable label within the previous actives."""
        return self.prev.index(label)

    def state(self, c_coeffs=None, h_coeffs=None, on_overflow: str = "raise") -> "ComponentState":
        a = self.comp.c_coeffs if c_coeffs is None else np.asarray(c_coeffs, dtype=float)
        b = self.comp.h_coeffs if h_coeffs is None else np.asarray(h_coeffs, dtype=float)
        return ComponentState(self, a, b, on_overflow)


class ComponentState:
    """Lazy per-coefficient-vector evaluations on a workspace."""

    def __init__(self, ws: ComponentWorkspace, a: np.ndarray, b: np.ndarray, on_overflow: str):
        self.ws = ws
        self.a = a
        self.b = b
        self.on_overflow = on_overflow
        self.overflowed = False
        self._cache: dict = {}

    def _group_coeffs(self, phipre: np.ndarray) -> np.ndarray:
        """A[:, d] = sum over h-indices with last degree d of b_l * prefix_l."""
        ws = self.ws
        out = np.empty((ws.n, ws.hdeg + 1))
        for d, idx in enumerate(ws.h_groups):
            out[:, d] = phipre[:, idx] @ self.b[idx]
        return out

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    # -- coefficient groupings

    @property
    def A(self) -> np.ndarray:
        return self._get("A", lambda: self._group_coeffs(self.ws.phipre))

    def A_deriv(self, derivs: tuple) -> np.ndarray:
        key = ("A", tuple(sorted(derivs)))
        return self._get(key, lambda: self._group_coeffs(self.ws._products_h(derivs)))

    # -- h and its derivatives

    @property
    def h_nodes(self) -> np.ndarray:
        def build():
            ws = self.ws
            out = np.einsum("nd,nqd->nq", self.A, ws.vt[0])
            if out.size and np.max(out) > EXP_CLAMP:
                self.overflowed = True
                if self.on_overflow == "raise":
                    raise ExponentOverflowError(
                        f"component {ws.comp.index}: h exceeded {EXP_CLAMP} at a quadrature node"
                    )
            return out

        return self._get("h_nodes", build)

    @property
    def exp_h_w(self) -> np.ndarray:
        """exp(h) at nodes, pre-multiplied by the quadrature weights."""

        def build():
            hn = self.h_nodes
            if self.overflowed:
                return None
            return np.exp(hn) * self.ws.w[None, :]

        return self._get("exp_h_w", build)

    @property
    def h_x(self) -> np.ndarray:
        return self._get("h_x", lambda: np.sum(self.A * self.ws.vx[0], axis=1))

    @property
    def exp_h_x(self) -> np.ndarray:
        def build():
            hx = self.h_x
            if hx.size and np.max(hx) > EXP_CLAMP:
                self.overflowed = True
                if self.on_overflow == "raise":
                    raise ExponentOverflowError(
                        f"component {self.ws.comp.index}: h exceeded {EXP_CLAMP} at a sample point"
                    )
                return None
            return np.exp(hx)

        return self._get("exp_h_x", build)

    def dh_nodes(self, u: int | None) -> np.ndarray:
        """d h / d coordinate at the nodes; u is a previous-active label,
        None meaning the last coordinate."""
        if u is None:
            return self._get(("dh_nodes", None), lambda: np.einsum("nd,nqd->nq", self.A, self.ws.vt[1]))
        pos = self.ws.prev_pos(u)
        return self._get(
            ("dh_nodes", u), lambda: np.einsum("nd,nqd->nq", self.A_deriv((pos,)), self.ws.vt[0])
        )

    def d2h_nodes(self, u: int, v: int) -> np.ndarray:
        pos = tuple(sorted((self.ws.prev_pos(u), self.ws.prev_pos(v))))
        return np.einsum("nd,nqd->nq", self.A_deriv(pos), self.ws.vt[0])

    def dh_x(self, u: int | None) -> np.ndarray:
        if u is None:
            return self._get(("dh_x", None), lambda: np.sum(self.A * self.ws.vx[1], axis=1))
        pos = self.ws.prev_pos(u)
        return self._get(
            ("dh_x", u), lambda: np.sum(self.A_deriv((pos,)) * self.ws.vx[0], axis=1)
        )

    def d2h_x(self, u: int | None, v: int | None) -> np.ndarray:
        """Mixed second partial of h at the sample points; None = last coord."""
        if u is None and v is None:
            return np.sum(self.A * self.ws.vx[2], axis=1)
        if u is None or v is None:
            lab = u if u is not None else v
            pos = self.ws.prev_pos(lab)
            return np.sum(self.A_deriv((pos,)) * self.ws.vx[1], axis=1)
        pos = tuple(sorted((self.ws.prev_pos(u), self.ws.prev_pos(v))))
        return np.sum(self.A_deriv(pos) * self.ws.vx[0], axis=1)

    # -- quadrature helpers

    def integral(self, g: np.ndarray | None = None) -> np.ndarray:
        """int_0^{x_k} exp(h) g dt (g given at the nodes; g = 1 if None)."""
        ehw = self.exp_h_w
        if ehw is None:
            raise ExponentOverflowError("overflowed state")
        if g is None:
            return self.ws.halfxk * np.sum(ehw, axis=1)
        return self.ws.halfxk * np.sum(ehw * g, axis=1)

    def r_matrix(self, g: np.ndarray | None = None) -> np.ndarray:
        """R[:, d] = int exp(h) g V_d dt for each last-coordinate degree d."""
        ehw = self.exp_h_w
        if ehw is None:
            raise ExponentOverflowError("overflowed state")
        weight = ehw if g is None else ehw * g
        return self.ws.halfxk[:, None] * np.einsum("nq,nqd->nd", weight, self.ws.vt[0])

    # -- component values and x-derivatives

    @property
    def c_x(self) -> np.ndarray:
        return self._get("c_x", lambda: self.ws.phic @ self.a)

    @property
    def S(self) -> np.ndarray:
        return self._get("S", lambda: self.c_x + self.integral())

    def dS(self, u: int | None) -> np.ndarray:
        """dS^k/dx_u; u = None (or k itself) means the last coordinate."""
        if u is None:
            return self.exp_h_x
        key = ("dS", u)

        def build():
            pos = self.ws.prev_pos(u)
            dc = self.ws._products_c((pos,)) @ self.a
            return dc + self.integral(self.dh_nodes(u))

        return self._get(key, build)

    def d2S(self, u: int, v: int | None) -> np.ndarray:
        """Mixed second partial of S^k; v = None means the last coordinate."""
        if v is None:
            return self.dh_x(u) * self.exp_h_x
        pos = tuple(sorted((self.ws.prev_pos(u), self.ws.prev_pos(v))))
        d2c = self.ws._products_c(pos) @ self.a
        g = self.d2h_nodes(u, v) + self.dh_nodes(u) * self.dh_nodes(v)
        return d2c + self.integral(g)

    def d2S_last_last(self) -> np.ndarray:
        return self.dh_x(None) * self.exp_h_x


class MapEval:
    """Shared per-sample-set workspaces for every component of a map."""

    def __init__(self, tmap: TriangularMap, X: np.ndarray, on_overflow: str = "raise"):
        self.tmap = tmap
        self.X = X
        self.workspaces = [ComponentWorkspace(c, X) for c in tmap.components]
        self.states = [ws.state(on_overflow=on_overflow) for ws in self.workspaces]

    def state(self, k: int) -> ComponentState:
        return self.states[k - 1]


# ---------------------------------------------------------------------------
# public operations


def eval_component(comp: MapComponent, x) -> np.ndarray | float:
    """S^k at x; x supplies all map coordinates (shape (p,) or (n, p) with
    p >= the component index)."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    st = ComponentWorkspace(comp, arr).state()
    out = st.S
    return float(out[0]) if single else out


def diag_deriv(comp: MapComponent, x) -> np.ndarray | float:
    """dS^k/dx_k = exp(h_k) > 0."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    out = ComponentWorkspace(comp, arr).state().exp_h_x
    return float(out[0]) if single else out


def eval_map(tmap: TriangularMap, x) -> np.ndarray:
    arr, single = _as_rows(x, tmap.dimension)
    out = np.empty_like(arr)
    for k, comp in enumerate(tmap.components, start=1):
        out[:, k - 1] = ComponentWorkspace(comp, arr).state().S
    return out[0] if single else out


def pullback_logdensity(tmap: TriangularMap, x) -> np.ndarray | float:
    """log of the pullback of N(0, I_p) through the map."""
    arr, single = _as_rows(x, tmap.dimension)
    total = np.full(arr.shape[0], -0.5 * tmap.dimension * LOG_2PI)
    for comp in tmap.components:
        st = ComponentWorkspace(comp, arr).state()
        total += -0.5 * st.S**2 + st.h_x
    return float(total[0]) if single else total


def _pair_term(st: ComponentState, j: int, k: int, m: int) -> np.ndarray:
    """Contribution of component m to d^2_{jk} log S#eta, for j < k <= m."""
    if k == m:
        ehx = st.exp_h_x
        return -(st.dS(j) * ehx + st.S * st.dh_x(j) * ehx) + st.d2h_x(j, None)
    return -(st.dS(j) * st.dS(k) + st.S * st.d2S(j, k)) + st.d2h_x(j, k)


def _diag_term(st: ComponentState, j: int, m: int) -> np.ndarray:
    """Contribution of component m to d^2_{jj} log S#eta, for j <= m."""
    if j == m:
        ehx = st.exp_h_x
        return -(ehx**2 + st.S * st.d2S_last_last()) + st.d2h_x(None, None)
    return -(st.dS(j) ** 2 + st.S * st.d2S(j, j)) + st.d2h_x(j, j)


def mixed_partial_logpullback(tmap: TriangularMap, x, j: int, k: int) -> np.ndarray | float:
    """d^2 log S#eta / dx_j dx_k, j != k (1-based map-ordering labels)."""
    if j == k:
        raise ValueError("use distinct coordinates")
    lo, hi = min(j, k), max(j, k)
    arr, single = _as_rows(x, tmap.dimension)
    total = np.zeros(arr.shape[0])
    for m in range(hi, tmap.dimension + 1):
        comp = tmap.components[m - 1]
        act = set(comp.active_inputs)
        if lo not in act or hi not in act:
            continue
        st = ComponentWorkspace(comp, arr).state()
        total += _pair_term(st, lo, hi, m)
    return float(total[0]) if single else total


def diag_second_logpullback(tmap: TriangularMap, x, j: int) -> np.ndarray | float:
    """d^2 log S#eta / dx_j^2 (used for the reporting-only diagonal)."""
    arr, single = _as_rows(x, tmap.dimension)
    total = np.zeros(arr.shape[0])
    for m in range(j, tmap.dimension + 1):
        comp = tmap.components[m - 1]
        if j not in comp.active_inputs:
            continue
        st = ComponentWorkspace(comp, arr).state()
        total += _diag_term(st, j, m)
    return float(total[0]) if single else total


def invert_map(tmap: TriangularMap, y, tol: float = 1e-10) -> np.ndarray:
    """Solve S(x) = y component by component (bisection bracket + Newton).

    Monotonicity of each component guarantees a unique root; the bracket
    doubles outward from [-1, 1] and fails past |x| = 1e6.
    """
    arr, single = _as_rows(y, tmap.dimension)
    n = arr.shape[0]
    out = np.zeros_like(arr)

    for k, comp in enumerate(tmap.components, start=1):
        target = arr[:, k - 1]

        def f(xk: np.ndarray) -> np.ndarray:
            pts = out.copy()
            pts[:, k - 1] = xk
            st = ComponentWorkspace(comp, pts).state()
            return st.S - target

        lo = np.full(n, -1.0)
        hi = np.full(n, 1.0)
        for _ in range(64):
            need_lo = f(lo) > 0
            need_hi = f(hi) < 0
            if not (need_lo.any() or need_hi.any()):
                break
            lo[need_lo] *= 2.0
            hi[need_hi] *= 2.0
            if np.max(np.abs(lo)) > 1e6 or np.max(np.abs(hi)) > 1e6:
                raise RootBracketError(
                    f"component {k}: root not bracketed within |x| <= 1e6"
                )
        else:
            raise RootBracketError(f"component {k}: bracket expansion did not terminate")

        while np.max(hi - lo) > 1e-6:
            mid = 0.5 * (lo + hi)
            pos = f(mid) > 0
            hi = np.where(pos, mid, hi)
            lo = np.where(pos, lo, mid)

        xk = 0.5 * (lo + hi)
        for _ in range(50):
            pts = out.copy()
            pts[:, k - 1] = xk
            st = ComponentWorkspace(comp, pts).state()
            resid = st.S - target
            if np.max(np.abs(resid)) < tol:
                break
            xk = xk - resid / st.exp_h_x
        out[:, k - 1] = xk

    return out[0] if single else out


# ---------------------------------------------------------------------------
# serialization


def map_to_json_dict(tmap: TriangularMap, standardization: dict | None = None) -> dict:
    doc = {
        "dimension": tmap.dimension,
        "permutation": list(tmap.pattern.permutation),
        "components": [
            {
                "k": c.index,
                "active_inputs": list(c.active_inputs),
                "beta": c.beta,
                "c_coeffs": [float(v) for v in c.c_coeffs],
                "h_coeffs": [float(v) for v in c.h_coeffs],
                "quadrature_order": c.quadrature_order,
            }
            for c in tmap.components
        ],
        "standardization": standardization,
    }
    return doc


def map_from_json_dict(doc: dict) -> tuple[TriangularMap, dict | None]:
    p = int(doc["dimension"])
    comps = []
    inactive = set()
    for entry in doc["components"]:
        comp = MapComponent(
            int(entry["k"]),
            tuple(int(v) for v in entry["active_inputs"]),
            int(entry["beta"]),
            int(entry["quadrature_order"]),
            np.asarray(entry["c_coeffs"], dtype=float),
            np.asarray(entry["h_coeffs"], dtype=float),
        )
        comps.append(comp)
        for j in range(1, comp.index):
            if j not in comp.active_inputs:
                inactive.add((j, comp.index))
    pattern = SparsityPattern(p, frozenset(inactive), tuple(int(v) for v in doc["permutation"]))
    tmap = TriangularMap(p, tuple(comps), pattern)
    return tmap, doc.get("standardization")


def save_map(path, tmap: TriangularMap, standardization: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(map_to_json_dict(tmap, standardization), fh, sort_keys=True)
        fh.write("\n")


def load_map(path) -> tuple[TriangularMap, dict | None]:
    with open(path) as fh:
        return map_from_json_dict(json.load(fh))
