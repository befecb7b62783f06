"""Vector relaxation ``sdp_inf(A)`` by low-rank block-coordinate ascent.

Each unit vector ``u_i`` is replaced in turn by the normalized partial
gradient ``g_i = sum_{j != i} A_ij u_j``, which maximizes every term of the
objective that involves ``u_i``. The objective is therefore non-decreasing
along the sweep.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInput
from .matrix import DEFAULT_TOL_PSD, PsdMatrix, validate_psd

log = logging.getLogger(__name__)


def default_rank(m: int) -> int:
    return min(m, math.ceil(math.sqrt(2 * m)) + 1)


@dataclass(frozen=True)
class SolverConfig:
    k: Optional[int] = None
    tol: float = 1e-10
    max_sweeps: int = 10000
    restarts: int = 5
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.k is not None and self.k < 1:
            raise InvalidInput("k must be >= 1")
        if not self.tol > 0:
            raise InvalidInput("tol must be positive")
        if self.max_sweeps < 1 or self.restarts < 1:
            raise InvalidInput("max_sweeps and restarts must be >= 1")

    def rank_for(self, m: int) -> int:
        return self.k if self.k is not None else default_rank(m)

    def as_dict(self, m: Optional[int] = None) -> dict:
        d = {
            "k": self.k if m is None else self.rank_for(m),
            "tol": self.tol,
            "max_sweeps": self.max_sweeps,
            "restarts": self.restarts,
            "seed": self.seed,
        }
        return d


@dataclass(frozen=True, eq=False)
class GramSolution:
    """Unit vectors ``u_1..u_m`` in ``R^k``, stored as the rows of ``vectors``."""

    matrix: PsdMatrix
    vectors: np.ndarray
    objective: float
    iterations: int = 0
    converged: bool = True
    restart: int = 0
    history: tuple = field(default=(), repr=False)

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def k(self) -> int:
        return self.vectors.shape[1]

    @classmethod
    def from_vectors(cls, A: PsdMatrix, vectors) -> "GramSolution":
        """Wrap externally supplied vectors (normalized here) as a solution of ``A``."""
        U = np.array(vectors, dtype=float, ndmin=2)
        if U.shape[0] != A.m:
            raise InvalidInput(f"expected {A.m} vectors, got {U.shape[0]}")
        norms = np.linalg.norm(U, axis=1)
        if np.any(norms == 0) or not np.all(np.isfinite(norms)):
            raise InvalidInput("vectors must be finite and non-zero")
        U = U / norms[:, None]
        return cls(A, U, objective_value(A, U))


def objective_value(A: PsdMatrix, vectors) -> float:
    """``sum_ij A_ij u_i . u_j``, accumulated row by row in index order."""
    U = np.asarray(vectors, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    if U.shape[0] != A.m:
        raise InvalidInput(f"expected {A.m} vectors, got {U.shape[0]}")
    gram = U @ U.T
    total = 0.0
    for i in range(A.m):
        total += math.fsum(A.entries[i] * gram[i])
    return total


def _ascent(a: np.ndarray, U: np.ndarray, tol: float, max_sweeps: int):
    """In-place coordinate ascent on ``U``; returns (sweeps, converged, history)."""
    m = a.shape[0]
    diag = np.diag(a).copy()
    # G = A U kept up to date with rank-one corrections
    G = a @ U
    obj = float(np.einsum("ij,ij->", G, U))
    history = [obj]
    for sweep in range(1, max_sweeps + 1):
        before = obj
        for i in range(m):
            g = G[i] - diag[i] * U[i]
            norm = math.sqrt(float(g @ g))
            if norm == 0.0:
                continue
            new = g / norm
            delta = new - U[i]
            gain = 2.0 * float(g @ delta)
            if gain <= 0.0:
                # already optimal for this block up to rounding
                continue
            U[i] = new
            G += np.outer(a[:, i], delta)
            obj += gain
        # refresh to shed accumulated drift
        G = a @ U
        obj = float(np.einsum("ij,ij->", G, U))
        history.append(obj)
        improvement = obj - before
        if improvement <= tol * max(abs(before), np.finfo(float).tiny):
            return sweep, True, history
    return max_sweeps, False, history


def _one_restart(a: np.ndarray, k: int, cfg: SolverConfig, restart: int):
    rng = np.random.default_rng(cfg.seed + restart)
    U = rng.standard_normal((a.shape[0], k))
    U /= np.linalg.norm(U, axis=1)[:, None]
    sweeps, converged, history = _ascent(a, U, cfg.tol, cfg.max_sweeps)
    return U, sweeps, converged, history


def solve_sdp_relaxation(
    A: PsdMatrix,
    cfg: Optional[SolverConfig] = None,
    check_psd: bool = True,
    tol_psd: float = DEFAULT_TOL_PSD,
) -> GramSolution:
    """Best-of-restarts coordinate ascent for ``max sum_ij A_ij u_i.u_j``.

    The returned objective is a certified lower bound on ``sdp_inf(A)``;
    with the default embedding rank it is taken as the optimum up to ``tol``.
    """
    cfg = cfg or SolverConfig()
    if check_psd and not A.psd_certified:
        report = validate_psd(A, tol_psd)
        if not report.passed:
            raise InvalidInput(f"matrix is not PSD (lambda_min = {report.min_eigenvalue:.3e})")
    a = np.asarray(A.entries)
    k = cfg.rank_for(A.m)

    if cfg.workers > 1 and cfg.restarts > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            runs = list(pool.map(lambda r: _one_restart(a, k, cfg, r), range(cfg.restarts)))
    else:
        runs = [_one_restart(a, k, cfg, r) for r in range(cfg.restarts)]

    best = None
    for r, (U, sweeps, converged, history) in enumerate(runs):
        value = objective_value(A, U)
        log.debug("restart %d: objective %.12g after %d sweeps", r, value, sweeps)
        if best is None or value > best.objective:
            best = GramSolution(A, U, value, sweeps, converged, r, tuple(history))
    best.vectors.setflags(write=False)
    if not best.converged:
        log.warning("coordinate ascent hit max_sweeps=%d without converging", cfg.max_sweeps)
    return best
