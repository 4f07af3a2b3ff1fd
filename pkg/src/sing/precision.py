"""Generalized precision estimation and thresholding.

The conditional-independence score of a pair (j, k) is the average
absolute mixed partial of the fitted log-density,

    omega_jk = (1/n) sum_i | d^2_{jk} log S#eta(x_i) |,

whose zeros certify conditional independence.  Coefficient uncertainty
from the fit propagates to omega by the delta method, with two robustness
choices baked in: the coefficient covariance is the sandwich form
I^{-1} J I^{-1} / n (consistent even though a finite-degree map never
contains the sampling density exactly), and the quadratic form is
averaged per sample, which makes rho the root-mean-square null scale of
omega rather than just its standard deviation.  Both reduce to the plain
delta method for degree-1 maps on well-specified data.  The covariance is
block-diagonal across components because the likelihood separates.  An
edge survives thresholding iff omega_jk > delta * rho_jk (strict: ties
drop the edge).

Everything is computed on the standardized sample scale; the reported
matrices carry the standardization record of the fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from .estimate import FitResult
from .graphops import Graph
from .transport import ComponentState, MapEval, TriangularMap

Adjacency = Graph


def _ordered_pairs(p: int) -> list:
    return [(j, k) for j in range(1, p + 1) for k in range(j + 1, p + 1)]


def _pair_contribution(st: ComponentState, j: int, k: int, m: int) -> np.ndarray:
    """Component m's additive term of d^2_{jk} log S#eta, for j < k <= m."""
    if k == m:
        ehx = st.exp_h_x
        return -(st.dS(j) * ehx + st.S * st.dh_x(j) * ehx) + st.d2h_x(j, None)
    return -(st.dS(j) * st.dS(k) + st.S * st.d2S(j, k)) + st.d2h_x(j, k)


def mixed_partial_matrix(me: MapEval) -> tuple[np.ndarray, list]:
    """All pairwise mixed partials at every sample: (n, p(p-1)/2) matrix."""
    p = me.tmap.dimension
    pairs = _ordered_pairs(p)
    index = {pair: i for i, pair in enumerate(pairs)}
    out = np.zeros((me.X.shape[0], len(pairs)))
    for m in range(1, p + 1):
        st = me.state(m)
        act = me.tmap.components[m - 1].active_inputs
        for a, j in enumerate(act[:-1]):
            for k in act[a + 1 :]:
                out[:, index[(j, k)]] += _pair_contribution(st, j, k, m)
    return out, pairs


def diag_second_matrix(me: MapEval) -> np.ndarray:
    """d^2_{jj} log S#eta at every sample, for the reporting-only diagonal."""
    p = me.tmap.dimension
    out = np.zeros((me.X.shape[0], p))
    for m in range(1, p + 1):
        st = me.state(m)
        act = me.tmap.components[m - 1].active_inputs
        ehx = st.exp_h_x
        out[:, m - 1] += -(ehx**2 + st.S * st.d2S_last_last()) + st.d2h_x(None, None)
        for j in act[:-1]:
            out[:, j - 1] += -(st.dS(j) ** 2 + st.S * st.d2S(j, j)) + st.d2h_x(j, j)
    return out


def omega_hat(tmap: TriangularMap, X: np.ndarray) -> np.ndarray:
    """Symmetric matrix of averaged absolute mixed partials; the diagonal
    holds the own-coordinate analogue and is never thresholded."""
    me = MapEval(tmap, np.asarray(X, dtype=float))
    G, pairs = mixed_partial_matrix(me)
    p = tmap.dimension
    omega = np.zeros((p, p))
    means = np.abs(G).mean(axis=0)
    for (j, k), val in zip(pairs, means):
        omega[j - 1, k - 1] = omega[k - 1, j - 1] = val
    omega[np.diag_indices(p)] = np.abs(diag_second_matrix(me)).mean(axis=0)
    return omega


def _pair_gradient_matrices(
    st: ComponentState, j: int, k: int, m: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample alpha-gradients of component m's mixed-partial term.

    Returns (n, n_c) and (n, n_h) matrices whose row i is
    dT_m(x_i)/dalpha_m.
    """
    ws = st.ws
    pj = ws.prev_pos(j)
    last = ws.h_last
    pre = ws.phipre
    r0 = st.r_matrix()
    pre_dj = ws._products_h((pj,))
    rj = st.r_matrix(st.dh_nodes(j))
    q0 = pre * r0[:, last]
    qj = pre_dj * r0[:, last] + pre * rj[:, last]

    if k == m:
        ehx = st.exp_h_x
        dsj = st.dS(j)
        dhj = st.dh_x(j)
        S = st.S
        # c-part: T depends on c through dS_j (via d_j c) and S (via c)
        mc = -(ws._products_c((pj,)) * ehx[:, None] + ws.phic * (dhj * ehx)[:, None])
        vx0 = ws.vx[0][:, last]
        vx1 = ws.vx[1][:, last]
        dphi_j_x = pre_dj * vx0
        d2phi_jt_x = pre_dj * vx1
        phih_x = ws.phih_x
        mh = (
            -(
                qj * ehx[:, None]
                + phih_x * (dsj * ehx)[:, None]
                + q0 * (dhj * ehx)[:, None]
                + dphi_j_x * (S * ehx)[:, None]
                + phih_x * (S * dhj * ehx)[:, None]
            )
            + d2phi_jt_x
        )
        return mc, mh

    pk = ws.prev_pos(k)
    dsj = st.dS(j)
    dsk = st.dS(k)
    d2s = st.d2S(j, k)
    S = st.S
    pre_dk = ws._products_h((pk,))
    pre_djk = ws._products_h(tuple(sorted((pj, pk))))
    rk = st.r_matrix(st.dh_nodes(k))
    rjk = st.r_matrix(st.d2h_nodes(j, k) + st.dh_nodes(j) * st.dh_nodes(k))
    qk = pre_dk * r0[:, last] + pre * rk[:, last]
    qjk = (
        pre_djk * r0[:, last]
        + pre_dj * rk[:, last]
        + pre_dk * rj[:, last]
        + pre * rjk[:, last]
    )
    mc = -(
        ws._products_c((pj,)) * dsk[:, None]
        + ws._products_c((pk,)) * dsj[:, None]
        + ws.phic * d2s[:, None]
        + ws._products_c(tuple(sorted((pj, pk)))) * S[:, None]
    )
    d2phi_jk_x = pre_djk * ws.vx[0][:, last]
    mh = (
        -(
            qj * dsk[:, None]
            + qk * dsj[:, None]
            + q0 * d2s[:, None]
            + qjk * S[:, None]
        )
        + d2phi_jk_x
    )
    return mc, mh


def grad_alpha_omega(tmap: TriangularMap, X: np.ndarray, j: int, k: int) -> np.ndarray:
    """Gradient of omega_jk in all map coefficients, with the subgradient
    convention sign(0) = 0 for the absolute value."""
    if j == k:
        raise ValueError("use distinct coordinates")
    lo, hi = min(j, k), max(j, k)
    me = MapEval(tmap, np.asarray(X, dtype=float))
    G, pairs = mixed_partial_matrix(me)
    signs = np.sign(G[:, pairs.index((lo, hi))]) / G.shape[0]
    out = np.zeros(tmap.n_coeffs())
    for (sc, sh), m in zip(tmap.coeff_slices(), range(1, tmap.dimension + 1)):
        if m < hi:
            continue
        act = set(tmap.components[m - 1].active_inputs)
        if lo not in act or hi not in act:
            continue
        mc, mh = _pair_gradient_matrices(me.state(m), lo, hi, m)
        out[sc] = signs @ mc
        out[sh] = signs @ mh
    return out


def pair_quadratic_forms(
    tmap: TriangularMap, X: np.ndarray, cov_blocks
) -> tuple[np.ndarray, np.ndarray]:
    """(omega, q) where q_jk is the per-sample delta-method quadratic form
    averaged over samples:

        q_jk = (1/n) sum_i  sum_m  grad_m(x_i)^T C_m grad_m(x_i),

    with grad_m(x_i) the coefficient gradient of the pair's mixed partial
    at sample i (the sign of the absolute value squares away) and C_m the
    per-sample coefficient covariance of component m (n times the
    covariance of the fitted coefficients).  Then rho_jk = sqrt(q_jk / n).
    Averaging the quadratic forms instead of the gradients makes rho the
    root-mean-square scale of omega_jk under a zero true score; when the
    mixed partial is constant across samples (degree-1 maps) this
    coincides exactly with the quadratic form of the averaged gradient,
    and in general it dominates it, which keeps the threshold conservative
    for higher-degree fits where many coefficient directions contribute
    absolute-value noise.
    """
    X = np.asarray(X, dtype=float)
    me = MapEval(tmap, X)
    n = X.shape[0]
    p = tmap.dimension
    G, pairs = mixed_partial_matrix(me)

    omega = np.zeros((p, p))
    means = np.abs(G).mean(axis=0)
    for (j, k), val in zip(pairs, means):
        omega[j - 1, k - 1] = omega[k - 1, j - 1] = val
    omega[np.diag_indices(p)] = np.abs(diag_second_matrix(me)).mean(axis=0)

    q = np.zeros((p, p))
    for m in range(1, p + 1):
        st = me.state(m)
        act = tmap.components[m - 1].active_inputs
        cov = np.asarray(cov_blocks[m - 1])
        for a, j in enumerate(act[:-1]):
            for k in act[a + 1 :]:
                mat = np.hstack(_pair_gradient_matrices(st, j, k, m))
                contrib = float(np.sum((mat @ cov) * mat) / n)
                q[j - 1, k - 1] += contrib
                q[k - 1, j - 1] += contrib
    return omega, q


def rho(tmap: TriangularMap, X: np.ndarray, cov_blocks) -> np.ndarray:
    """Delta-method scale of the omega entries (off-diagonal; the diagonal
    is zero).  ``cov_blocks`` are per-component coefficient covariances
    times n (see FitResult.covariance_blocks)."""
    _, q = pair_quadratic_forms(tmap, X, cov_blocks)
    return np.sqrt(np.maximum(q, 0.0) / np.asarray(X).shape[0])


@dataclass(frozen=True)
class PrecisionEstimate:
    """omega with companion rho, on the standardized sample scale."""

    omega: np.ndarray
    rho: np.ndarray
    n: int
    transport_map: TriangularMap
    standardization: dict | None = None
    used_pinv: bool = False


def estimate_precision(fit: FitResult) -> PrecisionEstimate:
    X = fit.sample_set.data
    cov_blocks, used_pinv = fit.covariance_blocks()
    omega, q = pair_quadratic_forms(fit.transport_map, X, cov_blocks)
    rho_mat = np.sqrt(np.maximum(q, 0.0) / X.shape[0])
    np.fill_diagonal(rho_mat, 0.0)
    return PrecisionEstimate(
        omega,
        rho_mat,
        X.shape[0],
        fit.transport_map,
        fit.sample_set.standardization_record(),
        used_pinv,
    )


def threshold(estimate: PrecisionEstimate, delta: float) -> Graph:
    """Edge (j, k) survives iff omega_jk > delta * rho_jk, strictly."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    p = estimate.omega.shape[0]
    edges = {
        (j, k)
        for j, k in _ordered_pairs(p)
        if estimate.omega[j - 1, k - 1] > delta * estimate.rho[j - 1, k - 1]
    }
    return Graph(p, frozenset(edges))


def matrix_csv_lines(mat: np.ndarray, names) -> list:
    lines = [",".join(names)]
    lines.extend(",".join(repr(float(v)) for v in row) for row in mat)
    return lines
