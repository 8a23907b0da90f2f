"""Monic Laguerre and Bessel orthogonal polynomials.

The Bessel weight is ``x^(-nu-2N) exp(-2/x)`` on (0, inf). Only the first N
moments-worth of polynomials exist for it (degrees 0..N-1), so the recurrence
is built from closed-form moments with the Chebyshev algorithm carried out in
multiprecision arithmetic and then rounded to float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import mpmath
import numpy as np
from numpy.typing import ArrayLike, NDArray

EPS_FLOOR = 1e-300
BESSEL_MAX_N = 20

_LOG_MAX = math.log(np.finfo(float).max)


class PrecisionError(ArithmeticError):
    """Hankel positivity was lost while building a recurrence."""


def _check_nu(nu: float) -> None:
    if not nu > -1:
        raise ValueError(f"nu must be > -1, got {nu}")


def pochhammer(a: float, k: int) -> float:
    """Rising factorial (a)_k = a (a+1) ... (a+k-1), with (a)_0 = 1."""
    out = 1.0
    for i in range(k):
        out *= a + i
    return out


# ---------------------------------------------------------------------------
# weights


def laguerre_weight(nu: float, x: ArrayLike) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x > 0, np.exp(nu * np.log(np.where(x > 0, x, 1.0)) - x), 0.0)


def bessel_weight(nu: float, N: int, x: ArrayLike) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=float)
    xs = np.where(x > 0, x, 1.0)
    return np.where(x > 0, np.exp(-(nu + 2 * N) * np.log(xs) - 2.0 / xs), 0.0)


def bessel_weight_moment(nu: float, N: int, k: int) -> float:
    """Integral of x^k against the Bessel weight: 2^(k-nu-2N+1) Gamma(nu+2N-1-k)."""
    if int(k) != k:
        raise ValueError(f"moment index must be an integer, got {k}")
    if not k < nu + 2 * N - 1:
        raise ValueError(f"moment k={k} diverges; need k < nu + 2N - 1 = {nu + 2 * N - 1}")
    return 2.0 ** (k - nu - 2 * N + 1) * math.gamma(nu + 2 * N - 1 - k)


# ---------------------------------------------------------------------------
# recurrence container


@dataclass(frozen=True, eq=False)
class MonicOPS:
    """Monic orthogonal polynomials p_0..p_{degree_max} by three-term recurrence.

    ``p_{k+1}(x) = (x - a[k]) p_k(x) - b[k] p_{k-1}(x)``; ``b[0]`` holds the
    total mass so that ``||p_k||^2 = b[0] * b[1] * ... * b[k]``.
    """

    family: Literal["laguerre", "bessel"]
    nu: float
    N: int | None
    a: NDArray[np.float64]
    b: NDArray[np.float64]

    @property
    def degree_max(self) -> int:
        return len(self.a)

    def eval(self, n: int, x: ArrayLike) -> NDArray[np.float64]:
        if not 0 <= n <= self.degree_max:
            raise ValueError(f"degree {n} outside 0..{self.degree_max}")
        x = np.asarray(x, dtype=float)
        prev = np.zeros_like(x)
        cur = np.ones_like(x)
        for k in range(n):
            prev, cur = cur, (x - self.a[k]) * cur - self.b[k] * prev
        return cur

    def eval_abs(self, n: int, x: ArrayLike) -> NDArray[np.float64]:
        """The recurrence run on absolute values: an upper bound on the size of p_n's terms."""
        if not 0 <= n <= self.degree_max:
            raise ValueError(f"degree {n} outside 0..{self.degree_max}")
        x = np.asarray(x, dtype=float)
        prev = np.zeros_like(x)
        cur = np.ones_like(x)
        for k in range(n):
            prev, cur = cur, np.abs(x - self.a[k]) * cur + abs(self.b[k]) * prev
        return cur

    def eval_all(self, x: ArrayLike) -> NDArray[np.float64]:
        """Rows p_0(x), ..., p_{degree_max}(x)."""
        x = np.asarray(x, dtype=float)
        out = np.empty((self.degree_max + 1, *x.shape))
        out[0] = 1.0
        if self.degree_max:
            out[1] = x - self.a[0]
        for k in range(1, self.degree_max):
            out[k + 1] = (x - self.a[k]) * out[k] - self.b[k] * out[k - 1]
        return out

    def norm_sq(self, n: int) -> float:
        if not 0 <= n <= self.degree_max:
            raise ValueError(f"degree {n} outside 0..{self.degree_max}")
        return float(np.prod(self.b[: n + 1]))

    def coefficient_rows(self) -> list[tuple[int, float, float]]:
        """``(k, a_k, b_k)`` rows; a_k is blank (nan) past the last step."""
        rows = []
        for k in range(self.degree_max + 1):
            a_k = float(self.a[k]) if k < self.degree_max else math.nan
            rows.append((k, a_k, float(self.b[k])))
        return rows


# ---------------------------------------------------------------------------
# Laguerre


def laguerre_ops(nu: float, degree_max: int) -> MonicOPS:
    _check_nu(nu)
    k = np.arange(degree_max + 1, dtype=float)
    a = (2 * k + nu + 1)[:degree_max]
    b = k * (k + nu)
    b[0] = math.gamma(nu + 1)
    return MonicOPS("laguerre", nu, None, a, b)


def laguerre_monic_eval(nu: float, n: int, x: ArrayLike) -> NDArray[np.float64] | float:
    """Monic Laguerre polynomial of degree n at x."""
    _check_nu(nu)
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    out = laguerre_ops(nu, n).eval(n, x)
    return float(out) if np.ndim(out) == 0 else out


def laguerre_norm_sq(nu: float, n: int) -> float:
    """n! Gamma(n + nu + 1), evaluated through logarithms."""
    _check_nu(nu)
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    log_val = math.lgamma(n + 1) + math.lgamma(n + nu + 1)
    if log_val > _LOG_MAX:
        raise OverflowError(f"||L_n||^2 overflows float for n={n}, nu={nu}")
    return math.exp(log_val)


# ---------------------------------------------------------------------------
# Bessel


def _chebyshev_algorithm(moments: list, steps: int) -> tuple[list, list]:
    """Recurrence coefficients from ordinary moments (Gautschi's Chebyshev algorithm).

    Returns alpha_0..alpha_{steps-1} and beta_0..beta_steps, using moments
    mu_0..mu_{2*steps}.
    """
    mu = moments
    alpha, beta = [mu[1] / mu[0]], [mu[0]]
    sig_prev = [mpmath.mpf(0)] * len(mu)
    sig = list(mu)
    for k in range(1, steps + 1):
        new = [mpmath.mpf(0)] * len(mu)
        for l in range(k, len(mu) - k):
            new[l] = sig[l + 1] - alpha[k - 1] * sig[l] - beta[k - 1] * sig_prev[l]
        if new[k] <= 0:
            raise PrecisionError(f"Hankel positivity lost at degree {k}")
        beta.append(new[k] / sig[k - 1])
        if k < steps:
            alpha.append(new[k + 1] / new[k] - sig[k] / sig[k - 1])
        sig_prev, sig = sig, new
    return alpha, beta


def bessel_monic_construct(nu: float, N: int) -> MonicOPS:
    """Monic orthogonal polynomials p_0..p_{N-1} for the Bessel weight."""
    _check_nu(nu)
    if not 1 <= N <= BESSEL_MAX_N:
        raise ValueError(f"N must be in 1..{BESSEL_MAX_N}, got {N}")
    with mpmath.workdps(60 + 6 * N):
        s = mpmath.mpf(nu) + 2 * N
        moments = [mpmath.mpf(2) ** (k - s + 1) * mpmath.gamma(s - 1 - k) for k in range(2 * N - 1)]
        if N == 1:
            return MonicOPS("bessel", nu, N, np.empty(0), np.array([float(moments[0])]))
        alpha, beta = _chebyshev_algorithm(moments, N - 1)
        a = np.array([float(v) for v in alpha[: N - 1]])
        b = np.array([float(v) for v in beta])
    return MonicOPS("bessel", nu, N, a, b)


def bessel_norm_sq(nu: float, N: int, n: int) -> float:
    """Closed-form squared norm of the degree-n monic Bessel polynomial.

    -2^(2n-nu-2N+1) Gamma(nu+2N-n) n! / ((n-nu-2N+1)_n^2 (2n-nu-2N+1))
    """
    _check_nu(nu)
    if not 0 <= n <= N - 1:
        raise ValueError(f"degree n={n} outside 0..{N - 1}")
    s = nu + 2 * N
    poch = pochhammer(n - s + 1, n)
    log_mag = (
        (2 * n - s + 1) * math.log(2.0)
        + math.lgamma(s - n)
        + math.lgamma(n + 1)
        - 2 * math.log(abs(poch))
        - math.log(abs(2 * n - s + 1))
    )
    sign = -math.copysign(1.0, 2 * n - s + 1)
    return sign * math.exp(log_mag)


def shift_constant(n: int, nu: float, N: int) -> float:
    """Constant in d/dx[w_N p_n(.;N)] = c w_{N+1} p_{n+1}(.;N+1).

    Comparing leading coefficients gives c = n - nu - 2N. This equals the
    Pochhammer ratio (n+1-nu-2(N+1)+1)_{n+1} / (n-nu-2N+1)_n.
    """
    return n - nu - 2 * N


def printed_shift_constant(n: int, nu: float, N: int) -> float:
    """The Pochhammer ratio (n+1-nu-2N+1)_{n+1} / (n-nu-2N+1)_n read literally."""
    return pochhammer(n + 1 - nu - 2 * N + 1, n + 1) / pochhammer(n - nu - 2 * N + 1, n)


def _shift_lhs(nu: float, N: int, n: int, x: float, step: float | None, ops: MonicOPS) -> float:
    h = 1e-6 * max(1.0, x) if step is None else step

    def g(t: float) -> float:
        return float(bessel_weight(nu, N, t) * ops.eval(n, t))

    return (g(x + h) - g(x - h)) / (2 * h)


def backward_shift_ratio(
    nu: float, N: int, n: int, x: float, step: float | None = None,
    ops_n: MonicOPS | None = None, ops_n1: MonicOPS | None = None,
) -> float:
    """Numerically determined shift constant: finite-difference LHS / (w_{N+1} p_{n+1})."""
    ops_n = ops_n or bessel_monic_construct(nu, N)
    ops_n1 = ops_n1 or bessel_monic_construct(nu, N + 1)
    rhs_unit = float(bessel_weight(nu, N + 1, x) * ops_n1.eval(n + 1, x))
    return _shift_lhs(nu, N, n, x, step, ops_n) / rhs_unit


def backward_shift_residual(
    nu: float, N: int, n: int, x: float, step: float | None = None,
    ops_n: MonicOPS | None = None, ops_n1: MonicOPS | None = None,
) -> float:
    """Scaled residual of the backward shift identity at x.

    The left side is a central difference with step ``1e-6 * max(1, x)``
    unless ``step`` is given. The difference is divided by
    ``|c| w_{N+1}(x) |p|~_{n+1}(x)``, where ``|p|~`` runs the recurrence on
    absolute values. Away from zeros of p_{n+1} this is the relative residual;
    at a zero it stays finite instead of dividing round-off by zero.
    """
    if not 0 <= n <= N - 1:
        raise ValueError(f"degree n={n} outside 0..{N - 1}")
    if not x > 0:
        raise ValueError(f"x must be positive, got {x}")
    ops_n = ops_n or bessel_monic_construct(nu, N)
    ops_n1 = ops_n1 or bessel_monic_construct(nu, N + 1)
    lhs = _shift_lhs(nu, N, n, x, step, ops_n)
    c = shift_constant(n, nu, N)
    w = float(bessel_weight(nu, N + 1, x))
    rhs = c * w * float(ops_n1.eval(n + 1, x))
    scale = abs(c) * w * float(ops_n1.eval_abs(n + 1, x))
    return abs(lhs - rhs) / (max(abs(rhs), scale) + EPS_FLOOR)
