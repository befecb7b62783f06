"""The rounding kernel ``E_n(t)`` and positive-type expansions.

``E_n(t)`` is the expected inner product of ``Xu/|Xu|`` and ``Xv/|Xv|`` for
a standard normal ``n``-row matrix ``X`` and unit vectors with ``u.v = t``.
For ``n >= 2`` it is evaluated from the polar double integral

    E_n(t) = (n-1)/(2 pi) int_0^1 int_0^{2pi}
             (t + r cos phi) r (1-r^2)^((n-3)/2)
             / sqrt((1 + r t cos phi)^2 - r^2 (1-t^2) sin^2 phi)  dphi dr

and for ``n = 1`` from ``(2/pi) arcsin t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import golden

from .errors import InvalidInput, NumericalError
from .special_functions import (
    DEFAULT_ORDER,
    angular_rule,
    evaluate,
    gamma_n,
    jacobi_poly,
    sphere_alpha,
)

EN_ORDER = 200
GRADING = 3
EN_GATE = 1e-8


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise InvalidInput(f"n must be a positive integer, got {n!r}")
    return int(n)


def _check_t(t) -> float:
    t = float(t)
    if not -1.0 <= t <= 1.0:
        raise InvalidInput(f"t must lie in [-1, 1], got {t!r}")
    return t


@lru_cache(maxsize=16)
def _graded_rule(order: int, q: int):
    """Gauss-Legendre on ``[0, 1]`` pushed through ``u^q / (u^q + (1-u)^q)``.

    Returns (g, 1 - g, weights); ``1 - g`` is formed directly so it keeps
    full relative precision near the right end.
    """
    x, w = leggauss(order)
    u = (x + 1) / 2
    a = u**q
    b = (1 - u) ** q
    d = a + b
    g = a / d
    h = b / d
    dg = q * (u ** (q - 1) * b + a * (1 - u) ** (q - 1)) / d**2
    return g, h, w / 2 * dg


def en_integral(n: int, t: float, order: int = EN_ORDER, check: bool = False) -> float:
    """``E_n(t)`` by tensor Gauss-Legendre quadrature.

    With ``r = sin(psi)`` the radial weight becomes ``sin(psi) cos(psi)^(n-2)``.
    The denominator equals ``(t + r cos phi)^2 + (1 - t^2)(1 - r^2)``, so at
    ``r = 1`` the integrand jumps where ``cos phi = -t``; the angular range
    is split there and both variables are graded toward that corner.
    ``check=True`` also evaluates at ``2 * order`` and raises
    :class:`NumericalError` if the two differ by more than 1e-8.
    """
    n = _check_n(n)
    t = _check_t(t)
    if n == 1:
        return 2 / math.pi * math.asin(t)
    if abs(t) == 1.0:
        return t
    value = _en_quad(n, t, order)
    if check:
        fine = _en_quad(n, t, 2 * order)
        if abs(fine - value) > EN_GATE:
            raise NumericalError(f"E_{n}({t}) quadrature not converged: {value!r} vs {fine!r}")
        value = fine
    return value


def _en_quad(n: int, t: float, order: int) -> float:
    g, h, w = _graded_rule(order, GRADING)
    psi = (math.pi / 2) * g
    r = np.sin(psi)
    cos_psi = np.sin((math.pi / 2) * h)
    radial = (math.pi / 2) * w * r * cos_psi ** (n - 2)
    eps2 = ((1 - t) * (1 + t)) * cos_psi**2
    split = math.acos(-t)
    total = 0.0
    # the integrand is even in phi about pi: integrate [0, pi] twice
    for lo, hi in ((0.0, split), (split, math.pi)):
        if hi <= lo:
            continue
        # the graded map clusters nodes at both ends, including the split
        phi = lo + (hi - lo) * g
        phi_w = (hi - lo) * w
        s = t + np.outer(r, np.cos(phi))
        den = np.sqrt(s * s + eps2[:, None])
        f = np.divide(s, den, out=np.zeros_like(s), where=den > 0)
        total += radial @ f @ phi_w
    return float((n - 1) / math.pi * total)


def en_monte_carlo(n: int, t: float, N: int, seed: int, chunk: int = 1 << 18) -> tuple[float, float]:
    """Sample ``E_n(t)`` directly: ``u = (cos a, sin a)``, ``v = (cos a, -sin a)``, ``cos 2a = t``.

    Returns (estimate, standard error). ``|t| = 1`` is returned exactly.
    """
    n = _check_n(n)
    t = _check_t(t)
    if N < 2:
        raise InvalidInput("N must be >= 2")
    if abs(t) == 1.0:
        return t, 0.0
    half = math.acos(t) / 2
    c, s = math.cos(half), math.sin(half)
    total = 0.0
    total_sq = 0.0
    done = 0
    block = 0
    while done < N:
        size = min(chunk, N - done)
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), block]))
        X = rng.standard_normal((size, n, 2))
        a = c * X[:, :, 0] + s * X[:, :, 1]
        b = c * X[:, :, 0] - s * X[:, :, 1]
        if n == 1:
            vals = np.where(a[:, 0] >= 0, 1.0, -1.0) * np.where(b[:, 0] >= 0, 1.0, -1.0)
        else:
            vals = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        total += math.fsum(vals)
        total_sq += math.fsum(vals * vals)
        done += size
        block += 1
    mean = total / N
    var = max(total_sq - N * mean * mean, 0.0) / (N - 1)
    return mean, math.sqrt(var / N)


def f1_extract(n: int, h: float = 1e-3, order: int = EN_ORDER) -> float:
    """Linear coefficient of ``E_n`` at 0: Richardson extrapolation of central differences."""
    n = _check_n(n)

    def central(step):
        return (en_integral(n, step, order) - en_integral(n, -step, order)) / (2 * step)

    return (4 * central(h / 2) - central(h)) / 3


@dataclass(frozen=True)
class RatioCurvePoint:
    t: float
    en_value: float
    ratio: Optional[float]


def ratio_curve(n: int, ts, order: int = EN_ORDER) -> list[RatioCurvePoint]:
    """``(t, E_n(t), (1 - E_n(t)) / (1 - t))``; the ratio is ``None`` at ``t = 1``."""
    points = []
    for t in ts:
        e = en_integral(n, float(t), order)
        points.append(RatioCurvePoint(float(t), e, None if t == 1 else float((1 - e) / (1 - t))))
    return points


@dataclass(frozen=True)
class VnResult:
    n: int
    value: float
    minimizer: float
    second_minimum: Optional[float] = None
    second_minimizer: Optional[float] = None

    @property
    def ambiguous(self) -> bool:
        return self.second_minimum is not None


def v_n(n: int, step: float = 1e-3, xtol: float = 1e-8, order: int = EN_ORDER) -> VnResult:
    """``min (1 - E_n(t)) / (1 - t)`` over ``t in [-1, 1)``.

    Coarse grid on ``[-1, 1 - 1e-6]`` followed by golden-section refinement
    inside the bracket around the best grid point. Any other local grid
    minimum within 1e-4 of the global one is reported alongside it.
    """
    n = _check_n(n)
    ts = np.append(np.arange(-1.0, 1.0 - 1e-6, step), 1.0 - 1e-6)
    ratio = lambda t: (1 - en_integral(n, t, order)) / (1 - t)
    vals = np.array([ratio(t) for t in ts])
    i = int(np.argmin(vals))
    if 0 < i < len(ts) - 1:
        # golden()'s tol is relative to |x|
        rel = xtol / max(abs(ts[i]), 1e-3)
        t0 = float(golden(ratio, brack=(ts[i - 1], ts[i], ts[i + 1]), tol=rel))
        best = ratio(t0)
        if best > vals[i]:
            t0, best = float(ts[i]), float(vals[i])
    else:
        t0, best = float(ts[i]), float(vals[i])

    interior = np.flatnonzero((vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:])) + 1
    others = [j for j in interior if abs(j - i) > 1 and vals[j] - best <= 1e-4]
    if others:
        j = min(others, key=lambda k: vals[k])
        return VnResult(n, best, t0, float(vals[j]), float(ts[j]))
    return VnResult(n, best, t0)


# --- positive-type expansions ---------------------------------------------

@dataclass(frozen=True, eq=False)
class PositiveTypeExpansion:
    """Coefficients ``f_0..f_d`` of a kernel.

    ``basis="jacobi"``: ``f(t) = sum f_i P_i^{(alpha,alpha)}(t)`` with
    ``alpha = (m-3)/2``, the positive-type criterion on ``S^{m-1}``.
    ``basis="taylor"``: power series ``sum f_i t^i``, the criterion on every
    sphere at once; ``m`` is ``None``.
    """

    m: Optional[int]
    max_degree: int
    coefficients: np.ndarray
    residual: float
    basis: str = "jacobi"
    norms: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def min_coefficient(self) -> float:
        return float(np.min(self.coefficients))

    def is_positive_type(self, tol: float = 1e-8) -> bool:
        return self.min_coefficient >= -tol


def _jacobi_coefficients(fx: np.ndarray, alpha: float, max_degree: int, order: int):
    t, w = angular_rule(float(alpha), int(order))
    coeffs = np.empty(max_degree + 1)
    norms = np.empty(max_degree + 1)
    for i in range(max_degree + 1):
        p = jacobi_poly(i, alpha, t)
        norms[i] = float(np.dot(w, p * p))
        coeffs[i] = float(np.dot(w, fx * p)) / norms[i]
    return coeffs, norms, float(np.dot(w, fx * fx))


def positive_type_expand(
    f: Callable,
    m: int,
    max_degree: int,
    order: int = DEFAULT_ORDER,
    tol: float = 1e-8,
) -> PositiveTypeExpansion:
    """Jacobi coefficients ``(f, P_i)_alpha / (P_i, P_i)_alpha`` for the sphere ``S^{m-1}``.

    Each coefficient is computed at ``order`` and ``2 * order``; a
    disagreement above ``tol`` raises :class:`NumericalError`.
    """
    alpha = sphere_alpha(m)
    if max_degree < 0:
        raise InvalidInput("max_degree must be >= 0")
    fine_order = 2 * order
    t_lo, _ = angular_rule(float(alpha), int(order))
    t_hi, _ = angular_rule(float(alpha), fine_order)
    lo, _, _ = _jacobi_coefficients(evaluate(f, np.array(t_lo)), alpha, max_degree, order)
    hi, norms, ff = _jacobi_coefficients(evaluate(f, np.array(t_hi)), alpha, max_degree, fine_order)
    gap = float(np.max(np.abs(hi - lo)))
    if gap > tol:
        raise NumericalError(f"expansion quadrature not converged (max gap {gap:.2e} at order {order})")
    residual = ff - float(np.dot(hi * hi, norms))
    if residual < -1e-10 * max(1.0, ff):
        raise NumericalError(f"negative tail mass {residual!r}")
    return PositiveTypeExpansion(int(m), int(max_degree), hi, max(residual, 0.0), "jacobi", norms)


def taylor_expand(f: Callable, max_degree: int, radius: float = 0.5, points: int = 128) -> PositiveTypeExpansion:
    """Power-series coefficients from samples of ``f`` on the circle ``|z| = radius``.

    ``f`` must accept complex arrays and be analytic on the closed disk.
    ``residual`` is ``f(1) - sum f_i``, the tail mass left after ``max_degree``.
    """
    if points <= max_degree:
        raise InvalidInput("points must exceed max_degree")
    z = radius * np.exp(2j * math.pi * np.arange(points) / points)
    c = np.fft.fft(np.asarray(f(z), dtype=complex)) / points
    k = np.arange(max_degree + 1)
    coeffs = (c[: max_degree + 1] / radius**k).real
    tail = float(np.real(f(np.array([1.0 + 0j]))[0])) - float(np.sum(coeffs))
    return PositiveTypeExpansion(None, int(max_degree), coeffs, max(tail, 0.0), "taylor")


def check_positive_type_matrix(f: Callable, vectors) -> float:
    """Smallest eigenvalue of the kernel matrix ``(f(v_i . v_j))``."""
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    T = np.clip(V @ V.T, -1.0, 1.0)
    K = evaluate(f, T)
    K = (K + K.T) / 2
    return float(np.linalg.eigvalsh(K)[0])


def en_kernel(n: int, order: int = EN_ORDER) -> Callable:
    """``E_n`` as a vectorized callable on ``[-1, 1]``."""
    n = _check_n(n)

    def kernel(t):
        t = np.asarray(t, dtype=float)
        out = np.array([en_integral(n, float(v), order) for v in t.ravel()]).reshape(t.shape)
        return out if out.ndim else float(out)

    return kernel


def arcsin_minus_linear(m: int) -> Callable:
    """``t -> arcsin t - t / gamma(m)``."""
    g = gamma_n(m)
    return lambda t: np.arcsin(t) - np.asarray(t) / g
