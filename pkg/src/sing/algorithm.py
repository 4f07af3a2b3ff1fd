"""Iterative sparsity identification.

One pass fits a triangular map under the current sparsity pattern, scores
every pair with the generalized precision, thresholds at delta * rho, and
counts edges.  While the edge count keeps strictly decreasing, a fresh
elimination ordering of the thresholded graph is computed, the induced
graph supplies the next (sparser) map pattern, and the loop repeats.  The
first pass always uses the dense lower-triangular pattern, so the initial
edge budget is p(p-1)/2.

Stopping: an unchanged count returns the current graph; an increased
count returns the previous (sparser) one, since thresholding noise can
reactivate variables; a safety cap on iterations guards against
oscillation.  All user-facing edges are reported in original variable
labels no matter how often the loop permuted them internally.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .estimate import FitResult, SampleSet, as_sample_set, fit_map
from .graphops import (
    ORDERING_HEURISTICS,
    Graph,
    Ordering,
    induced_graph,
    permute_columns,
    sparsity_pattern,
)
from .precision import estimate_precision, threshold
from .transport import SparsityPattern

STOP_STABLE = "edge-count-stable"
STOP_INCREASED = "edge-count-increased"
STOP_MAX_ITERATIONS = "max-iterations"


@dataclass(frozen=True)
class SingConfig:
    beta: int
    delta: float
    ordering: str = "reverse-cholesky"
    quadrature_order: int = 32
    max_iterations: int = 20
    seed: int | None = None  # provenance echo; the pipeline itself is deterministic

    def __post_init__(self):
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        if self.delta <= 0:
            raise ValueError("delta must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.ordering not in ORDERING_HEURISTICS:
            raise ValueError(
                f"unknown ordering {self.ordering!r}; choose from {sorted(ORDERING_HEURISTICS)}"
            )


@dataclass
class SingIteration:
    """State of one loop pass.  Matrices are in the iteration's own variable
    ordering; edges are mapped back to original labels."""

    l: int
    permutation: tuple
    fresh_ordering: tuple | None
    pattern_inactive: frozenset
    omega: np.ndarray
    rho: np.ndarray
    edges_original: frozenset
    edge_count: int
    fit_summary: list
    fit: FitResult
    wall_time_s: float


@dataclass
class SingResult:
    adjacency: Graph
    trace: list
    stopped: str
    final_fit: FitResult
    final_permutation: Ordering
    config: SingConfig

    @property
    def hit_max_iterations(self) -> bool:
        return self.stopped == STOP_MAX_ITERATIONS


def _edges_to_original(graph: Graph, sigma: Ordering) -> frozenset:
    inv = sigma.inverse()
    return frozenset(
        tuple(sorted((inv.position(a), inv.position(b)))) for a, b in graph.edges
    )


def _fit_summary(fit: FitResult) -> list:
    return [
        {
            "index": c.index,
            "converged": bool(c.converged),
            "iterations": int(c.iterations),
            "objective": float(c.objective),
            "grad_norm": float(c.grad_norm),
        }
        for c in fit.components
    ]


def run_sing(
    samples,
    config: SingConfig,
    initial_pattern: SparsityPattern | None = None,
    initial_permutation: Ordering | None = None,
    n_jobs: int | None = None,
) -> SingResult:
    """Run the full loop on raw or standardized samples.

    ``initial_pattern``/``initial_permutation`` override the dense identity
    start (used to resume from a known state; the defaults implement the
    standard algorithm).
    """
    ss = as_sample_set(samples)
    p = ss.p
    if p < 2:
        raise ValueError("need at least 2 variables")
    heuristic = ORDERING_HEURISTICS[config.ordering]

    sigma = initial_permutation or Ordering.identity(p)
    pattern = initial_pattern or SparsityPattern.dense(p, sigma.positions)
    if pattern.permutation != sigma.positions:
        raise ValueError("initial pattern and permutation disagree")
    prev_count = p * (p - 1) // 2
    trace: list = []
    l = 1

    while True:
        started = time.perf_counter()
        data = permute_columns(ss.data, sigma)
        mean = np.asarray(ss.mean)[[v - 1 for v in sigma.inverse().positions]] if ss.mean is not None else None
        scale = np.asarray(ss.scale)[[v - 1 for v in sigma.inverse().positions]] if ss.scale is not None else None
        fit = fit_map(
            SampleSet(data, mean, scale),
            pattern,
            config.beta,
            config.quadrature_order,
            n_jobs=n_jobs,
        )
        est = estimate_precision(fit)
        current = threshold(est, config.delta)
        count = current.n_edges
        record = SingIteration(
            l=l,
            permutation=sigma.positions,
            fresh_ordering=None,
            pattern_inactive=pattern.inactive_pairs,
            omega=est.omega,
            rho=est.rho,
            edges_original=_edges_to_original(current, sigma),
            edge_count=count,
            fit_summary=_fit_summary(fit),
            fit=fit,
            wall_time_s=0.0,
        )
        trace.append(record)

        if count >= prev_count:
            record.wall_time_s = time.perf_counter() - started
            if count == prev_count or len(trace) == 1:
                stopped = STOP_STABLE
                final = record
            else:
                stopped = STOP_INCREASED
                final = trace[-2]
            return SingResult(
                Graph(p, final.edges_original),
                trace,
                stopped,
                final.fit,
                Ordering(final.permutation),
                config,
            )

        if l >= config.max_iterations:
            record.wall_time_s = time.perf_counter() - started
            return SingResult(
                Graph(p, record.edges_original),
                trace,
                STOP_MAX_ITERATIONS,
                fit,
                sigma,
                config,
            )

        phi = heuristic(current)
        record.fresh_ordering = phi.positions
        sigma = phi.compose_after(sigma)
        induced = induced_graph(current, phi)
        pattern = sparsity_pattern(induced, permutation=sigma)
        prev_count = count
        record.wall_time_s = time.perf_counter() - started
        l += 1


# ---------------------------------------------------------------------------
# trace serialization


def omega_checksum(omega: np.ndarray) -> str:
    arr = np.ascontiguousarray(omega, dtype="<f8")
    digest = hashlib.sha256()
    digest.update(str(arr.shape).encode())
    digest.update(arr.tobytes())
    return digest.hexdigest()


def trace_record_dict(record: SingIteration) -> dict:
    """Canonical (timing-free) JSON form of one iteration; byte-identical
    across reruns with the same inputs and configuration."""
    return {
        "l": record.l,
        "permutation": list(record.permutation),
        "ordering": list(record.fresh_ordering) if record.fresh_ordering else None,
        "pattern_size": len(record.pattern_inactive),
        "edge_count": record.edge_count,
        "edges": [list(e) for e in sorted(record.edges_original)],
        "omega_checksum": omega_checksum(record.omega),
    }


def trace_to_jsonl(trace) -> str:
    lines = [
        json.dumps(trace_record_dict(rec), sort_keys=True, separators=(",", ":"))
        for rec in trace
    ]
    return "\n".join(lines) + "\n" if lines else ""
