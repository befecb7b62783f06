"""Exhaustive ground truth for tiny instances.

``brute_force_sdp1`` is exact for ``sdp_1``; ``grid_search_rank2`` gives a
certified lower bound on ``sdp_2`` from planar configurations on an angular
grid.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import TooLarge
from .matrix import PsdMatrix
from .sdp_solver import objective_value

MAX_SIGN_M = 22
MAX_GRID_M = 6
MAX_GRID_K = 720
GRID_BUDGET = 10**9


@dataclass(frozen=True, eq=False)
class OracleResult:
    value: float
    argmax: np.ndarray
    method: str
    work: int


def brute_force_sdp1(A: PsdMatrix, chunk: int = 1 << 16) -> OracleResult:
    """``max x^T A x`` over ``x in {-1, +1}^m`` with ``x_1 = +1``."""
    m = A.m
    if m > MAX_SIGN_M:
        raise TooLarge(f"m={m} exceeds the exhaustive limit {MAX_SIGN_M}")
    a = np.asarray(A.entries)
    total = 1 << (m - 1)
    bits = np.arange(m - 1, dtype=np.int64)
    best_val, best_idx = -math.inf, 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        # bit b of the pattern index sets the sign of x_{b+2}
        X = np.ones((idx.size, m))
        X[:, 1:] = 1 - 2 * ((idx[:, None] >> bits) & 1)
        vals = np.einsum("si,ij,sj->s", X, a, X)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best_idx = float(vals[j]), int(idx[j])
    x = np.ones(m)
    x[1:] = 1 - 2 * ((best_idx >> np.arange(m - 1)) & 1)
    return OracleResult(objective_value(A, x), x, "exhaustive", total)


def grid_search_rank2(A: PsdMatrix, K: int) -> OracleResult:
    """Best planar configuration ``u_i = (cos 2 pi k_i / K, sin 2 pi k_i / K)`` with ``k_1 = 0``."""
    m = A.m
    if m > MAX_GRID_M:
        raise TooLarge(f"m={m} exceeds the grid limit {MAX_GRID_M}")
    if K < 1 or K > MAX_GRID_K:
        raise TooLarge(f"K={K} outside 1..{MAX_GRID_K}")
    work = K ** (m - 1)
    if work > GRID_BUDGET:
        raise TooLarge(f"K^(m-1) = {work} exceeds the budget {GRID_BUDGET}")
    a = np.asarray(A.entries)
    cos_table = np.cos(2 * math.pi * np.arange(K) / K)
    base = float(np.trace(a))
    if m == 1:
        return OracleResult(objective_value(A, np.array([[1.0, 0.0]])), np.zeros(1, dtype=int), "grid", 1)

    # objective = trace + 2 sum_{i<j} A_ij cos(theta_i - theta_j); the last two
    # angles are vectorized as a K x K block, the rest enumerated
    k = np.arange(K)
    diff = (k[:, None] - k[None, :]) % K
    last_pair = 2 * a[m - 2, m - 1] * cos_table[diff] if m >= 3 else None
    best_val, best_k = -math.inf, None
    for head in itertools.product(range(K), repeat=max(m - 3, 0)):
        ks = (0,) + head
        fixed = base
        for i in range(len(ks)):
            for j in range(i + 1, len(ks)):
                fixed += 2 * a[i, j] * cos_table[(ks[i] - ks[j]) % K]
        if m == 2:
            vals = fixed + 2 * a[0, 1] * cos_table[k]
            j = int(np.argmax(vals))
            if vals[j] > best_val:
                best_val, best_k = float(vals[j]), ks + (j,)
            continue
        # contributions of the two free angles against the enumerated ones
        lin_a = np.zeros(K)
        lin_b = np.zeros(K)
        for i, ki in enumerate(ks):
            c = cos_table[(k - ki) % K]
            lin_a += 2 * a[i, m - 2] * c
            lin_b += 2 * a[i, m - 1] * c
        vals = fixed + lin_a[:, None] + lin_b[None, :] + last_pair
        flat = int(np.argmax(vals))
        if vals.flat[flat] > best_val:
            best_val = float(vals.flat[flat])
            best_k = ks + divmod(flat, K)
    best_k = np.array(best_k, dtype=int)
    theta = 2 * math.pi * best_k / K
    U = np.column_stack([np.cos(theta), np.sin(theta)])
    return OracleResult(objective_value(A, U), best_k, "grid", work)
