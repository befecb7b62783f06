"""Closed-form constants, equal-parameter Jacobi polynomials and quadrature."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln

from .errors import InvalidInput, NumericalError

DEFAULT_ORDER = 400


def gamma_n(n: int) -> float:
    """Approximation ratio ``(2/n) (Gamma((n+1)/2) / Gamma(n/2))**2``.

    Evaluated in log space so it stays finite for very large ``n``.
    """
    if int(n) != n or n < 1:
        raise InvalidInput(f"n must be a positive integer, got {n!r}")
    return math.exp(math.log(2.0) - math.log(n) + 2.0 * (gammaln((n + 1) / 2) - gammaln(n / 2)))


def c_m(m: int) -> float:
    """Largest ``c`` with ``arcsin t - c t`` of positive type on ``S^{m-1}``."""
    return 1.0 / gamma_n(m)


def sphere_alpha(m: int) -> float:
    """Jacobi parameter ``(m - 3) / 2`` attached to the sphere ``S^{m-1}``."""
    if int(m) != m or m < 2:
        raise InvalidInput(f"sphere parameter m must be an integer >= 2, got {m!r}")
    return (m - 3) / 2


def jacobi_poly(i: int, alpha: float, t):
    """``P_i^{(alpha, alpha)}(t)`` by the three-term recurrence.

    Accepts scalar or array ``t``; the return has the same shape.
    """
    if i < 0:
        raise InvalidInput("degree must be >= 0")
    if alpha <= -1:
        raise InvalidInput("alpha must be > -1")
    t = np.asarray(t, dtype=float)
    p_prev = np.ones_like(t)
    if i == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = (alpha + 1) * t
    a = alpha
    for n in range(2, i + 1):
        s = 2 * n + 2 * a
        lead = 2 * n * (n + 2 * a) * (s - 2)
        mid = (s - 1) * s * (s - 2)
        back = 2 * (n + a - 1) ** 2 * s
        p_prev, p = p, (mid * t * p - back * p_prev) / lead
    return p if p.ndim else float(p)


def jacobi_norm_sq(i: int, alpha: float) -> float:
    """Closed form of ``(P_i, P_i)_alpha``; only defined when ``2i + 2alpha + 1 != 0``."""
    a = alpha
    if 2 * i + 2 * a + 1 == 0:
        # i = 0, alpha = -1/2: the weight integrates to pi
        return math.pi
    log_h = (
        (2 * a + 1) * math.log(2)
        + 2 * gammaln(i + a + 1)
        - math.log(2 * i + 2 * a + 1)
        - gammaln(i + 1)
        - gammaln(i + 2 * a + 1)
    )
    return math.exp(log_h)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@lru_cache(maxsize=32)
def _leggauss(order: int):
    x, w = leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(order: int) -> QuadratureRule:
    """Gauss-Legendre rule on ``[-1, 1]``, exact for degree ``<= 2 order - 1``."""
    if order < 1:
        raise InvalidInput("order must be >= 1")
    x, w = _leggauss(int(order))
    return QuadratureRule(x, w, int(order))


def evaluate(f, x: np.ndarray) -> np.ndarray:
    """Apply ``f`` to an array, falling back to elementwise calls for scalar-only callables."""
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape == x.shape:
            return y
        if y.ndim == 0:
            return np.full_like(x, float(y))
    except (TypeError, ValueError):
        pass
    return np.array([float(f(float(v))) for v in x.ravel()]).reshape(x.shape)


@lru_cache(maxsize=64)
def angular_rule(alpha: float, order: int):
    """Nodes ``t = cos(theta)`` and weights for ``int_{-1}^1 h(t) (1-t^2)^alpha dt``.

    Uses ``t = cos(theta)`` and Gauss-Legendre in ``theta`` on ``[0, pi]``, so
    the weight becomes ``sin(theta)^(2 alpha + 1)`` and the endpoint
    singularity for ``alpha < 0`` disappears.
    """
    x, w = _leggauss(order)
    theta = (x + 1) * (math.pi / 2)
    t = np.cos(theta)
    wt = w * (math.pi / 2) * np.sin(theta) ** (2 * alpha + 1)
    t.setflags(write=False)
    wt.setflags(write=False)
    return t, wt


def inner_product_alpha(f, g, alpha: float, order: int = DEFAULT_ORDER) -> float:
    """``(f, g)_alpha = int_{-1}^1 f(t) g(t) (1 - t^2)^alpha dt``."""
    if alpha <= -1:
        raise InvalidInput(f"alpha must be > -1, got {alpha}")
    t, w = angular_rule(float(alpha), int(order))
    return float(np.dot(w, evaluate(f, t) * evaluate(g, t)))


def inner_product_checked(f, g, alpha: float, order: int = DEFAULT_ORDER, tol: float = 1e-10) -> float:
    """Like :func:`inner_product_alpha`, but also at ``2 * order``; raise if they disagree."""
    lo = inner_product_alpha(f, g, alpha, order)
    hi = inner_product_alpha(f, g, alpha, 2 * order)
    if abs(hi - lo) > tol * max(1.0, abs(hi)):
        raise NumericalError(f"quadrature not converged: {lo!r} vs {hi!r} at order {order}")
    return hi


# closed forms for the two inner products that define c(m)

def linear_norm_sq(alpha: float) -> float:
    """``(t, t)_alpha = Gamma(3/2) Gamma(alpha+1) / Gamma(alpha+5/2)``."""
    return math.exp(gammaln(1.5) + gammaln(alpha + 1) - gammaln(alpha + 2.5))


def arcsin_linear(alpha: float) -> float:
    """``(arcsin t, t)_alpha = Gamma(1/2) Gamma(alpha+3/2) / ((2 alpha + 2) Gamma(alpha+2))``."""
    return math.exp(gammaln(0.5) + gammaln(alpha + 1.5) - gammaln(alpha + 2)) / (2 * alpha + 2)


def c_m_quadrature(m: int, order: int = DEFAULT_ORDER) -> float:
    """``c(m)`` as the ratio ``(arcsin t, t)_alpha / (t, t)_alpha`` by quadrature."""
    alpha = sphere_alpha(m)
    ident = lambda t: t
    return inner_product_alpha(np.arcsin, ident, alpha, order) / inner_product_alpha(ident, ident, alpha, order)
