"""Gaussian projection rounding from a vector solution down to rank ``n``.

A standard normal ``n x k`` matrix ``X`` maps each ``u_i`` to
``x_i = X u_i / |X u_i|``. For ``n = 1`` this is sign rounding by a random
hyperplane.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateInstance, InvalidInput, NumericalError
from .matrix import PsdMatrix
from .sdp_solver import GramSolution, objective_value
from .special_functions import gamma_n

TINY_NORM = 1e-300
CLAMP_TOL = 1e-12
CHUNK = 4096


def mix(seed: int, index: int) -> int:
    """Derive an independent 64-bit seed for stream ``index`` of ``seed``."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class RoundedSolution:
    n: int
    vectors: np.ndarray
    objective: float
    seed_used: Optional[int] = None

    @property
    def m(self) -> int:
        return self.vectors.shape[0]


def _normalize(P: np.ndarray, n: int) -> np.ndarray:
    """Normalize projections ``P`` of shape ``(..., m, n)`` along the last axis."""
    if n == 1:
        return np.where(P >= 0, 1.0, -1.0)
    return P / np.linalg.norm(P, axis=-1, keepdims=True)


def _project(U: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        X = rng.standard_normal((n, U.shape[1]))
        P = U @ X.T
        if np.all(np.linalg.norm(P, axis=1) >= TINY_NORM):
            return _normalize(P, n)


def round_rank_n(G: GramSolution, n: int, seed: int) -> RoundedSolution:
    """Round ``G`` to unit vectors in ``R^n`` with one Gaussian draw from ``seed``."""
    if int(n) != n or n < 1:
        raise InvalidInput(f"target rank must be a positive integer, got {n!r}")
    x = _project(np.asarray(G.vectors), int(n), np.random.default_rng(seed))
    x.setflags(write=False)
    return RoundedSolution(int(n), x, objective_value(G.matrix, x), seed)


def best_of_rounds(A: PsdMatrix, G: GramSolution, n: int, R: int, seed: int) -> RoundedSolution:
    """Best of ``R`` roundings; trial ``r`` uses seed ``mix(seed, r)``, ties go to the lowest ``r``."""
    if R < 1:
        raise InvalidInput("R must be >= 1")
    if G.matrix is not A:
        G = GramSolution(A, G.vectors, objective_value(A, G.vectors))
    best = None
    for r in range(R):
        cand = round_rank_n(G, n, mix(seed, r))
        if best is None or cand.objective > best.objective:
            best = cand
    return best


def _ratio_chunk(a: np.ndarray, U: np.ndarray, n: int, size: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((size, n, U.shape[1]))
    P = np.einsum("mk,snk->smn", U, X)
    norms = np.linalg.norm(P, axis=2)
    # measure-zero event: redraw the affected trial
    for s in np.flatnonzero(np.any(norms < TINY_NORM, axis=1)):
        while True:
            X[s] = rng.standard_normal((n, U.shape[1]))
            P[s] = U @ X[s].T
            if np.all(np.linalg.norm(P[s], axis=1) >= TINY_NORM):
                break
    x = _normalize(P, n)
    # objective per trial: sum_ij A_ij x_i . x_j
    return np.einsum("ij,sin,sjn->s", a, x, x)


def rounded_objectives(
    A: PsdMatrix, G: GramSolution, n: int, N: int, seed: int, workers: int = 1
) -> np.ndarray:
    """Objectives of ``N`` independent roundings, in trial order.

    Trials are drawn in fixed chunks of ``CHUNK``; chunk ``c`` uses seed
    ``mix(seed, c)``, so results do not depend on ``workers``.
    """
    if int(n) != n or n < 1:
        raise InvalidInput(f"target rank must be a positive integer, got {n!r}")
    a = np.asarray(A.entries)
    U = np.asarray(G.vectors)
    jobs = [(c, min(CHUNK, N - c * CHUNK)) for c in range(math.ceil(N / CHUNK))]
    run = lambda job: _ratio_chunk(a, U, int(n), job[1], mix(seed, job[0]))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    return np.concatenate(parts)


def expected_ratio_estimate(
    A: PsdMatrix, G: GramSolution, n: int, N: int, seed: int, workers: int = 1
) -> tuple[float, float]:
    """Monte Carlo mean and standard error of ``objective(rounded) / G.objective``."""
    if N < 2:
        raise InvalidInput("N must be >= 2")
    if not G.objective > 0:
        raise DegenerateInstance(f"ratio undefined for SDP value {G.objective!r}")
    ratios = rounded_objectives(A, G, n, N, seed, workers) / G.objective
    mean = math.fsum(ratios) / N
    if np.all(ratios == ratios[0]):
        return float(ratios[0]), 0.0
    std = math.sqrt(math.fsum((ratios - mean) ** 2) / (N - 1))
    return mean, std / math.sqrt(N)


def clamped_gram(vectors) -> np.ndarray:
    """Inner-product matrix clamped to ``[-1, 1]``; raise if an entry is off by more than 1e-12."""
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    T = V @ V.T
    worst = float(np.max(np.abs(T))) if T.size else 0.0
    if worst > 1 + CLAMP_TOL:
        raise NumericalError(f"inner product {worst!r} exceeds 1 beyond tolerance")
    return np.clip(T, -1.0, 1.0)


@dataclass(frozen=True)
class ReductionReport:
    n: int
    lhs: float
    rhs: float
    margin: float
    min_eig: float
    margin_tol: float
    eig_tol: float

    @property
    def passed(self) -> bool:
        return self.margin >= -self.margin_tol and self.min_eig >= -self.eig_tol

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "min_eig": self.min_eig,
            "margin_tol": self.margin_tol,
            "eig_tol": self.eig_tol,
            "passed": self.passed,
        }


def hardness_reduction_check(A: PsdMatrix, S: RoundedSolution, tol: float = 1e-8) -> ReductionReport:
    """Check that sign rounding of a rank-``n`` solution keeps a ``2/(pi gamma(n))`` fraction.

    ``lhs = (2/pi) sum A_ij arcsin(x_i.x_j)`` is the expected value after
    hyperplane rounding, ``rhs = 2/(pi gamma(n)) sum A_ij x_i.x_j``. Both the
    margin and the smallest eigenvalue of the kernel matrix
    ``(2/pi)(arcsin(x_i.x_j) - x_i.x_j / gamma(n))`` should be non-negative.
    """
    T = clamped_gram(S.vectors)
    g = gamma_n(S.n)
    a = np.asarray(A.entries)
    asin = np.arcsin(T)
    lhs = 2 / math.pi * math.fsum((a * asin).ravel())
    rhs = 2 / (math.pi * g) * math.fsum((a * T).ravel())
    M = 2 / math.pi * (asin - T / g)
    min_eig = float(np.linalg.eigvalsh(M)[0])
    return ReductionReport(S.n, lhs, rhs, lhs - rhs, min_eig, tol * A.m * A.scale, tol)
