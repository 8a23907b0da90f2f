"""Correlation kernels: Laguerre, its 2/(Nx) rescaling, the Bessel kernel and its 8/x image.

Laguerre-side evaluation goes through orthonormal wavefunctions
``psi_k(x) = p_k(x) sqrt(x^nu e^-x) / ||p_k||`` generated by their own
three-term recurrence with a per-point logarithmic scale, so nothing
overflows for N in the hundreds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from .quadrature import adaptive_gl, integrate_to_infinity

DIAG_RTOL = 1e-8
_RESCALE_AT = 1e120


def _check(nu: float, N: int | None = None) -> None:
    if not nu > -1:
        raise ValueError(f"nu must be > -1, got {nu}")
    if N is not None and (int(N) != N or N < 1):
        raise ValueError(f"N must be a positive integer, got {N}")


def bessel_j(nu: float, z: ArrayLike) -> NDArray[np.float64] | float:
    """Bessel function of the first kind J_nu(z) for real order and z >= 0."""
    out = special.jv(nu, z)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Laguerre side


def laguerre_wavefunctions(nu: float, N: int, x: ArrayLike, extra: int = 0) -> NDArray[np.float64]:
    """Rows psi_0(x), ..., psi_{N-1+extra}(x) for positive x (any shape)."""
    _check(nu, N)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("wavefunctions need x > 0")
    flat = x.ravel()
    n_rows = N + extra
    mant = np.empty((n_rows, flat.size))
    logs = np.empty((n_rows, flat.size))
    scale = 0.5 * (nu * np.log(flat) - flat - math.lgamma(nu + 1))
    prev = np.zeros_like(flat)
    cur = np.ones_like(flat)
    mant[0], logs[0] = cur, scale
    for k in range(n_rows - 1):
        # sqrt(b_{k+1}) psi_{k+1} = (x - a_k) psi_k - sqrt(b_k) psi_{k-1}
        a_k = 2 * k + nu + 1
        nxt = ((flat - a_k) * cur - math.sqrt(k * (k + nu)) * prev) / math.sqrt((k + 1) * (k + 1 + nu))
        big = np.abs(nxt) > _RESCALE_AT
        if np.any(big):
            f = np.where(big, 1.0 / _RESCALE_AT, 1.0)
            nxt = nxt * f
            cur = cur * f
            scale = scale - np.log(f)
        prev, cur = cur, nxt
        mant[k + 1], logs[k + 1] = cur, scale
    with np.errstate(divide="ignore", under="ignore"):
        psi = np.sign(mant) * np.exp(np.log(np.abs(mant)) + logs)
    return psi.reshape((n_rows, *x.shape))


def laguerre_kernel_matrix(nu: float, N: int, xs: ArrayLike, ys: ArrayLike | None = None) -> NDArray[np.float64]:
    """Matrix [L_N(x_i, y_j)] as a Gram product of wavefunction columns."""
    px = laguerre_wavefunctions(nu, N, np.ravel(xs))
    py = px if ys is None else laguerre_wavefunctions(nu, N, np.ravel(ys))
    return px.T @ py


def laguerre_kernel_diag(nu: float, N: int, x: ArrayLike) -> NDArray[np.float64]:
    psi = laguerre_wavefunctions(nu, N, x)
    return np.sum(psi * psi, axis=0)


def laguerre_kernel(nu: float, N: int, x: ArrayLike, y: ArrayLike) -> NDArray[np.float64] | float:
    """Laguerre correlation kernel L_N(x, y), elementwise over broadcast x, y.

    Evaluated as the finite sum of wavefunction products; that sum is also the
    diagonal formula, so no Christoffel-Darboux quotient is ever taken.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    px = laguerre_wavefunctions(nu, N, x)
    py = laguerre_wavefunctions(nu, N, y)
    out = np.sum(px * py, axis=0)
    return float(out) if out.ndim == 0 else out


def laguerre_kernel_cd(nu: float, N: int, x: float, y: float) -> float:
    """Christoffel-Darboux quotient sqrt(b_N) (psi_N(x) psi_{N-1}(y) - psi_{N-1}(x) psi_N(y)) / (x - y).

    Off-diagonal only; falls back to the wavefunction sum near the diagonal.
    """
    if abs(x - y) <= DIAG_RTOL * max(x, 1.0):
        return float(laguerre_kernel_diag(nu, N, np.array(x)))
    px = laguerre_wavefunctions(nu, N, np.array([x, y]), extra=1)
    num = px[N, 0] * px[N - 1, 1] - px[N - 1, 0] * px[N, 1]
    return float(math.sqrt(N * (N + nu)) * num / (x - y))


# ---------------------------------------------------------------------------
# rescaled (scaled inverse-Wishart spectrum) kernel


def rescaled_kernel(nu: float, N: int, x: ArrayLike, y: ArrayLike) -> NDArray[np.float64] | float:
    """K_N(x, y) = 2 / (N x y) * L_N(2 / (N x), 2 / (N y))."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = 2.0 / (N * x * y) * np.asarray(laguerre_kernel(nu, N, 2.0 / (N * x), 2.0 / (N * y)))
    return float(out) if out.ndim == 0 else out


def rescaled_kernel_diag(nu: float, N: int, x: ArrayLike) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=float)
    return 2.0 / (N * x * x) * laguerre_kernel_diag(nu, N, 2.0 / (N * x))


def rescaled_kernel_matrix(nu: float, N: int, xs: ArrayLike, ys: ArrayLike | None = None) -> NDArray[np.float64]:
    xs = np.ravel(np.asarray(xs, dtype=float))
    ys = xs if ys is None else np.ravel(np.asarray(ys, dtype=float))
    lag = laguerre_kernel_matrix(nu, N, 2.0 / (N * xs), 2.0 / (N * ys))
    return 2.0 / N * lag / xs[:, None] / ys[None, :]


# ---------------------------------------------------------------------------
# Bessel kernel and the limit kernel


def bessel_kernel(nu: float, x: ArrayLike, y: ArrayLike) -> NDArray[np.float64] | float:
    """Hard-edge Bessel kernel.

    (sqrt(x) J_{nu+1}(sqrt x) J_nu(sqrt y) - sqrt(y) J_{nu+1}(sqrt y) J_nu(sqrt x)) / (2 (x - y)),
    with the diagonal (J_nu^2 - J_{nu+1} J_{nu-1}) / 4 at sqrt(x) used when
    |x - y| <= 1e-8 max(x, 1).
    """
    _check(nu)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    sx, sy = np.sqrt(x), np.sqrt(y)
    jx, jy = special.jv(nu, sx), special.jv(nu, sy)
    jx1, jy1 = special.jv(nu + 1, sx), special.jv(nu + 1, sy)
    near = np.abs(x - y) <= DIAG_RTOL * np.maximum(x, 1.0)
    diff = np.where(near, 1.0, x - y)
    off = (sx * jx1 * jy - sy * jy1 * jx) / (2.0 * diff)
    if np.any(near):
        # J_{nu-1} via the recurrence J_{nu-1} = (2 nu / z) J_nu - J_{nu+1}, valid for all nu
        diag = 0.25 * (jx * jx - jx1 * (2 * nu / sx * jx - jx1))
        off = np.where(near, diag, off)
    return float(off) if off.ndim == 0 else off


def limit_kernel(nu: float, x: ArrayLike, y: ArrayLike) -> NDArray[np.float64] | float:
    """K_inf(x, y) = 8 / (x y) * J_nu-kernel(8 / x, 8 / y)."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = 8.0 / (x * y) * np.asarray(bessel_kernel(nu, 8.0 / x, 8.0 / y))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# kernel specs and grids

Family = Literal["laguerre", "rescaled", "bessel", "k-infinity"]
FAMILIES: tuple[str, ...] = ("laguerre", "rescaled", "bessel", "k-infinity")


@dataclass(frozen=True)
class KernelSpec:
    family: Family
    nu: float
    N: int | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        _check(self.nu, self.N if self.family in ("laguerre", "rescaled") else None)
        if self.family in ("laguerre", "rescaled") and self.N is None:
            raise ValueError(f"{self.family} kernel needs N")

    def __call__(self, x: ArrayLike, y: ArrayLike) -> NDArray[np.float64] | float:
        if self.family == "laguerre":
            return laguerre_kernel(self.nu, self.N, x, y)
        if self.family == "rescaled":
            return rescaled_kernel(self.nu, self.N, x, y)
        if self.family == "bessel":
            return bessel_kernel(self.nu, x, y)
        return limit_kernel(self.nu, x, y)

    def diagonal(self, x: ArrayLike) -> NDArray[np.float64] | float:
        return self(x, x)

    def matrix(self, xs: ArrayLike) -> NDArray[np.float64]:
        xs = np.ravel(np.asarray(xs, dtype=float))
        if self.family == "laguerre":
            return laguerre_kernel_matrix(self.nu, self.N, xs)
        if self.family == "rescaled":
            return rescaled_kernel_matrix(self.nu, self.N, xs)
        return np.asarray(self(xs[:, None], xs[None, :]))


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing positive points."""

    points: NDArray[np.float64]

    def __post_init__(self) -> None:
        p = np.array(self.points, dtype=float, copy=True).ravel()
        if p.size == 0 or np.any(p <= 0) or np.any(np.diff(p) <= 0):
            raise ValueError("grid points must be positive and strictly increasing")
        p.flags.writeable = False
        object.__setattr__(self, "points", p)

    @classmethod
    def parse(cls, spec: str) -> Grid:
        """Parse ``lo:hi:count`` (inclusive, evenly spaced)."""
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec {spec!r} is not lo:hi:count")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ValueError(f"grid spec {spec!r} is not lo:hi:count") from exc
        if count < 1 or (count > 1 and not hi > lo) or not lo > 0:
            raise ValueError(f"grid spec {spec!r} needs 0 < lo < hi and count >= 1")
        return cls(np.linspace(lo, hi, count) if count > 1 else np.array([lo]))


def kernel_table(spec: KernelSpec, grid: Grid, diagonal: bool = False) -> list[tuple[float, ...]]:
    """Rows ``(x, value)`` for the diagonal or ``(x, y, value)`` for all pairs."""
    pts = grid.points
    if diagonal:
        vals = np.asarray(spec.diagonal(pts))
        return [(float(x), float(v)) for x, v in zip(pts, vals)]
    mat = spec.matrix(pts)
    return [(float(x), float(y), float(mat[i, j])) for i, x in enumerate(pts) for j, y in enumerate(pts)]


def sup_distance(nu: float, N: int, lo: float = 0.5, hi: float = 10.0, count: int = 20) -> float:
    """Max over a count x count grid on [lo, hi]^2 of |K_N - K_inf|."""
    pts = np.linspace(lo, hi, count)
    kn = rescaled_kernel_matrix(nu, N, pts)
    kinf = np.asarray(limit_kernel(nu, pts[:, None], pts[None, :]))
    return float(np.max(np.abs(kn - kinf)))


# ---------------------------------------------------------------------------
# tail integrals


def _laguerre_cutoff(nu: float, N: int) -> float:
    # beyond the soft edge 4N the wavefunctions decay like an Airy tail
    return 4.0 * N + 4.0 * abs(nu) + 40.0 * N ** (1.0 / 3.0) + 50.0


def laguerre_tail_integral(nu: float, N: int, R: float, atol: float = 1e-11) -> float:
    """Integral over y > R/N of (1/N) L_N(y, y) / y."""
    _check(nu, N)
    lo = R / N
    hi = max(_laguerre_cutoff(nu, N), 2 * lo)

    def f(y: NDArray) -> NDArray:
        return laguerre_kernel_diag(nu, N, y) / (N * y)

    edges = np.unique(np.concatenate([np.geomspace(lo, hi, 12), np.linspace(lo, hi, 12)]))
    body, _ = adaptive_gl(f, lo, hi, atol=atol, rtol=1e-12, initial=edges)
    tail, _ = integrate_to_infinity(f, hi, scale=N ** (1.0 / 3.0) * 4.0, atol=atol, rtol=1e-12)
    return body + tail


def tail_integral_K(nu: float, N: int, delta: float, atol: float = 1e-8) -> float:
    """Integral over (0, delta) of x K_N(x, x).

    Computed on the Laguerre side: with x = 2/(N y) the integral equals
    2 * laguerre_tail_integral(nu, N, R=2/delta).
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return 2.0 * laguerre_tail_integral(nu, N, 2.0 / delta, atol=min(atol, 1e-11) / 2)


def tail_integral_K_direct(nu: float, N: int, delta: float, atol: float = 1e-11) -> float:
    """The same integral evaluated directly in the x variable."""
    _check(nu, N)
    lo = 2.0 / (N * _laguerre_cutoff(nu, N))
    if delta <= lo:
        return 0.0

    def f(x: NDArray) -> NDArray:
        return x * rescaled_kernel_diag(nu, N, x)

    edges = np.geomspace(lo, delta, 24)
    val, _ = adaptive_gl(f, lo, delta, atol=atol, rtol=1e-12, initial=edges)
    return val
