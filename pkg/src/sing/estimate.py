"""Per-component maximum-likelihood fitting of map coefficients.

For component k the negative average log-likelihood, up to an additive
constant, is

    J_k(alpha) = (1/n) sum_i [ S^k(x_i)^2 / 2 - h_k(x_i) ],

and the full-map objective separates across components, so each one is
fitted independently.  The quadrature makes S^k a finite weighted sum of
smooth terms, so J_k, its gradient, and its Hessian in the coefficients
are all exact formulas.  Fitting is Newton's method with an Armijo
backtracking line search from the identity map (all coefficients zero),
with Levenberg damping escalation when a Hessian solve fails.

The Hessian of J_k at the fitted coefficients is the observed information
per sample; its inverse over n estimates the coefficient covariance and is
what downstream uncertainty propagation consumes.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import (
    DataError,
    ExponentOverflowError,
    InsufficientSamplesError,
    NonConvergenceError,
    SingularHessianError,
)
from .transport import (
    ComponentWorkspace,
    MapComponent,
    SparsityPattern,
    TriangularMap,
    identity_map,
)

GRAD_TOL = 1e-6
MAX_ITER = 200
ARMIJO_C = 1e-4
BACKTRACK = 0.5
LEVENBERG_START = 1e-8
LEVENBERG_MAX = 1e-2


@dataclass(frozen=True)
class SampleSet:
    """A sample matrix plus the standardization applied to it (if any)."""

    data: np.ndarray
    mean: np.ndarray | None = None
    scale: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    @property
    def is_standardized(self) -> bool:
        return self.mean is not None

    def standardization_record(self) -> dict | None:
        if self.mean is None:
            return None
        return {"mean": [float(v) for v in self.mean], "scale": [float(v) for v in self.scale]}


def validate_samples(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DataError(f"samples must be a 2-D array, got shape {X.shape}")
    if X.shape[0] < 2:
        raise DataError(f"need at least 2 samples, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise DataError(f"non-finite sample entry at row {bad[0]}, column {bad[1]}")
    return X


def standardize(X) -> SampleSet:
    """Center and scale each column to unit sample variance (ddof = 1)."""
    X = validate_samples(X)
    mean = X.mean(axis=0)
    scale = X.std(axis=0, ddof=1)
    if np.any(scale <= 0):
        col = int(np.argmin(scale))
        raise DataError(f"column {col} is constant; cannot standardize")
    return SampleSet((X - mean) / scale, mean, scale)


def as_sample_set(samples) -> SampleSet:
    """Pass through a SampleSet, or standardize a raw matrix."""
    if isinstance(samples, SampleSet):
        return samples
    return standardize(samples)


class ComponentProblem:
    """Objective/gradient/Hessian of one component on fixed samples."""

    def __init__(self, comp: MapComponent, X: np.ndarray):
        self.ws = ComponentWorkspace(comp, X)
        self.n = X.shape[0]
        self.nc = comp.c_coeffs.size
        self.nh = comp.h_coeffs.size
        self.mean_phih = self.ws.phih_x.mean(axis=0)
        self._haa = self.ws.phic.T @ self.ws.phic / self.n

    def split(self, alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return alpha[: self.nc], alpha[self.nc :]

    def score_matrix(self, alpha: np.ndarray) -> np.ndarray:
        """Per-sample objective gradients, one row per sample.

        Row i is the gradient of (S^k(x_i)^2 / 2 - h_k(x_i)) in the
        coefficients; its empirical outer product is the score covariance
        used for the sandwich (misspecification-robust) estimate of the
        coefficient covariance.
        """
        a, b = self.split(alpha)
        st = self.ws.state(a, b, on_overflow="raise")
        S = st.S
        G = self.ws.phipre * st.r_matrix()[:, self.ws.h_last]
        return np.hstack(
            [self.ws.phic * S[:, None], G * S[:, None] - self.ws.phih_x]
        )

    def objective(self, alpha: np.ndarray, order: int = 2, on_overflow: str = "inf"):
        """Returns (J, grad, hess); grad/hess are None below the requested order
        or when the exponent clamp triggered (J = inf then)."""
        a, b = self.split(alpha)
        st = self.ws.state(a, b, on_overflow=on_overflow)
        st.h_nodes
        if st.overflowed:
            return np.inf, None, None
        S = st.S
        hx = st.h_x
        J = 0.5 * float(S @ S) / self.n - float(hx.mean())
        if order == 0:
            return J, None, None

        G = self.ws.phipre * st.r_matrix()[:, self.ws.h_last]
        grad = np.empty(self.nc + self.nh)
        grad[: self.nc] = self.ws.phic.T @ S / self.n
        grad[self.nc :] = G.T @ S / self.n - self.mean_phih
        if order == 1:
            return J, grad, None

        hess = np.empty((self.nc + self.nh, self.nc + self.nh))
        hess[: self.nc, : self.nc] = self._haa
        hab = self.ws.phic.T @ G / self.n
        hess[: self.nc, self.nc :] = hab
        hess[self.nc :, : self.nc] = hab.T
        hbb = G.T @ G / self.n
        # curvature of S in the h-coefficients: int exp(h) phi_l phi_l' dt,
        # contracted against S and folded over last-coordinate degrees
        vt0 = self.ws.vt[0]
        c_full = np.einsum("nq,nqd,nqe->nde", st.exp_h_w, vt0, vt0, optimize=True)
        c_full *= (self.ws.halfxk * S / self.n)[:, None, None]
        phipre = self.ws.phipre
        for d, idx_d in enumerate(self.ws.h_groups):
            if idx_d.size == 0:
                continue
            for e, idx_e in enumerate(self.ws.h_groups):
                if idx_e.size == 0:
                    continue
                block = (phipre[:, idx_d] * c_full[:, d, e][:, None]).T @ phipre[:, idx_e]
                hbb[np.ix_(idx_d, idx_e)] += block
        hess[self.nc :, self.nc :] = hbb
        return J, grad, hess


def component_objective(comp: MapComponent, samples, coeffs: np.ndarray | None = None):
    """Public objective evaluation: J, gradient, Hessian at ``coeffs`` (the
    component's own coefficients when None).  Overflow raises."""
    ss = as_sample_set(samples)
    prob = ComponentProblem(comp, ss.data)
    if coeffs is None:
        coeffs = np.concatenate([comp.c_coeffs, comp.h_coeffs])
    J, g, h = prob.objective(np.asarray(coeffs, dtype=float), order=2, on_overflow="raise")
    return J, g, h


@dataclass
class ComponentFit:
    """Diagnostics for one fitted component.

    ``information`` is the observed information (Hessian of the average
    objective); ``score_outer`` is the empirical covariance of per-sample
    scores.  Together they give the sandwich coefficient covariance
    I^{-1} J I^{-1} / n, which stays consistent when the map family does
    not contain the sampling density.
    """

    index: int
    converged: bool
    objective: float
    grad_norm: float
    iterations: int
    information: np.ndarray
    score_outer: np.ndarray
    objective_history: list = field(default_factory=list)

    def covariance_per_sample(self) -> tuple[np.ndarray, bool]:
        """Sandwich covariance of the coefficients, times n; the flag marks
        a pseudo-inverse fallback for a singular information matrix."""
        try:
            factor = cho_factor(self.information)
            half = cho_solve(factor, self.score_outer)
            cov = cho_solve(factor, half.T).T
            used_pinv = False
        except LinAlgError:
            inv = np.linalg.pinv(self.information)
            cov = inv @ self.score_outer @ inv
            used_pinv = True
        return 0.5 * (cov + cov.T), used_pinv


def _newton_direction(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    lam = 0.0
    while True:
        try:
            h = hess if lam == 0.0 else hess + lam * np.eye(hess.shape[0])
            factor = cho_factor(h)
            step = -cho_solve(factor, grad)
            if grad @ step < 0:
                return step
        except LinAlgError:
            pass
        lam = LEVENBERG_START if lam == 0.0 else lam * 10.0
        if lam > LEVENBERG_MAX:
            raise SingularHessianError(
                f"Hessian solve failed with damping up to {LEVENBERG_MAX}"
            )


def fit_component(
    comp_spec: MapComponent,
    samples,
    init: np.ndarray | None = None,
    gtol: float = GRAD_TOL,
    max_iter: int = MAX_ITER,
    keep_history: bool = False,
) -> tuple[MapComponent, ComponentFit]:
    """Fit one component by Newton iteration from the identity map.

    ``comp_spec`` provides the structure (index, actives, degree,
    quadrature order); its coefficients are ignored unless passed as
    ``init``.
    """
    ss = as_sample_set(samples)
    n_coeffs = comp_spec.n_coeffs
    if ss.n < n_coeffs:
        raise InsufficientSamplesError(
            f"component {comp_spec.index}: {ss.n} samples < {n_coeffs} coefficients"
        )
    prob = ComponentProblem(comp_spec, ss.data)
    alpha = np.zeros(n_coeffs) if init is None else np.asarray(init, dtype=float).copy()

    J, grad, hess = prob.objective(alpha, order=2)
    if not np.isfinite(J):
        raise ExponentOverflowError(
            f"component {comp_spec.index}: objective overflowed at the starting point"
        )
    history = [J]
    for it in range(max_iter):
        gnorm = float(np.max(np.abs(grad)))
        if gnorm < gtol:
            scores = prob.score_matrix(alpha)
            score_outer = scores.T @ scores / ss.n
            info = ComponentFit(
                comp_spec.index,
                True,
                J,
                gnorm,
                it,
                hess,
                score_outer,
                history if keep_history else [],
            )
            fitted = MapComponent(
                comp_spec.index,
                comp_spec.active_inputs,
                comp_spec.beta,
                comp_spec.quadrature_order,
                alpha[: prob.nc].copy(),
                alpha[prob.nc :].copy(),
            )
            return fitted, info

        try:
            step = _newton_direction(hess, grad)
        except SingularHessianError as exc:
            raise SingularHessianError(f"component {comp_spec.index}: {exc}") from None
        slope = grad @ step
        t = 1.0
        while True:
            trial = alpha + t * step
            J_trial, _, _ = prob.objective(trial, order=0)
            if J_trial <= J + ARMIJO_C * t * slope:
                break
            t *= BACKTRACK
            if t < 1e-14:
                raise NonConvergenceError(
                    f"component {comp_spec.index}: line search stalled "
                    f"(gradient norm {gnorm:.3e})"
                )
        alpha = alpha + t * step
        J, grad, hess = prob.objective(alpha, order=2)
        history.append(J)

    raise NonConvergenceError(
        f"component {comp_spec.index}: no convergence in {max_iter} iterations "
        f"(gradient norm {float(np.max(np.abs(grad))):.3e})"
    )


def observed_information(comp: MapComponent, samples) -> np.ndarray:
    """Per-sample observed information: the Hessian of J_k at the fitted
    coefficients.  Raises if it is not positive semi-definite (a sign the
    fit did not converge)."""
    _, _, hess = component_objective(comp, samples)
    eigs = np.linalg.eigvalsh(hess)
    if eigs[0] < -1e-8 * max(1.0, abs(eigs[-1])):
        raise NonConvergenceError(
            f"component {comp.index}: information matrix not PSD "
            f"(min eigenvalue {eigs[0]:.3e})"
        )
    return hess


@dataclass
class FitResult:
    """A fitted map plus per-component diagnostics and the samples used."""

    transport_map: TriangularMap
    components: list
    sample_set: SampleSet

    def information_blocks(self) -> list:
        return [c.information for c in self.components]

    def covariance_blocks(self) -> tuple[list, bool]:
        """Per-component sandwich coefficient covariances (times n) and a
        flag marking any pseudo-inverse fallback."""
        pairs = [c.covariance_per_sample() for c in self.components]
        return [c for c, _ in pairs], any(flag for _, flag in pairs)

    def converged(self) -> bool:
        return all(c.converged for c in self.components)


def n_workers() -> int:
    env = os.environ.get("SING_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return 1


def fit_map(
    samples,
    pattern: SparsityPattern,
    beta: int,
    quadrature_order: int = 32,
    n_jobs: int | None = None,
) -> FitResult:
    """Fit all components of a map with the given sparsity pattern.

    Components are independent problems; with ``n_jobs > 1`` they are
    fitted in a thread pool (results are identical either way).
    """
    ss = as_sample_set(samples)
    skeleton = identity_map(pattern.dimension, beta, quadrature_order, pattern)
    jobs = n_workers() if n_jobs is None else max(1, n_jobs)

    def fit_one(comp: MapComponent):
        return fit_component(comp, ss)

    if jobs > 1 and pattern.dimension > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(fit_one, skeleton.components))
    else:
        results = [fit_one(c) for c in skeleton.components]

    fitted = TriangularMap(
        pattern.dimension, tuple(r[0] for r in results), pattern
    )
    return FitResult(fitted, [r[1] for r in results], ss)
