"""Ergodic-parameter extraction from matrix corners and the related diagnostics.

For a spectrum of an N x N corner, ``alpha_plus`` are the positive parts of
lambda_i / N, ``alpha_minus`` the positive parts of -lambda_{N+1-i} / N,
``gamma1`` the scaled trace and ``delta`` the scaled trace of the square.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .ensembles import (
    RngStream,
    batched,
    inverse_wishart_matrices,
    mu_spectra,
    replicate,
    wishart_matrices,
)
from .hermitian import HermitianMatrix, Spectrum, eigenvalues
from .kernels import tail_integral_K
from .stats import TestReport

BIAS_ALLOWANCE = 0.05
K_TOP = 30


@dataclass(frozen=True, eq=False)
class OmegaPoint:
    """A point (alpha+, alpha-, gamma1, delta) of the ergodic parameter space."""

    alpha_plus: NDArray[np.float64]
    alpha_minus: NDArray[np.float64]
    gamma1: float
    delta: float

    def __post_init__(self) -> None:
        ap = np.array(self.alpha_plus, dtype=float, copy=True).ravel()
        am = np.array(self.alpha_minus, dtype=float, copy=True).ravel()
        for name, arr in (("alpha_plus", ap), ("alpha_minus", am)):
            if np.any(arr < 0) or np.any(np.diff(arr) > 0):
                raise ValueError(f"{name} must be nonnegative and weakly decreasing")
        if self.delta < 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")
        sq = self._square_sum(ap, am)
        if sq > self.delta * (1 + 1e-12) + 1e-300:
            raise ValueError(f"sum of squared alphas {sq} exceeds delta {self.delta}")
        ap.flags.writeable = False
        am.flags.writeable = False
        object.__setattr__(self, "alpha_plus", ap)
        object.__setattr__(self, "alpha_minus", am)

    @staticmethod
    def _square_sum(ap: NDArray, am: NDArray) -> float:
        return float(np.sum(ap * ap) + np.sum(am * am))

    @property
    def gamma2(self) -> float:
        return self.delta - self._square_sum(self.alpha_plus, self.alpha_minus)


@dataclass(frozen=True, eq=False)
class CornerTrajectory:
    dims: tuple[int, ...]
    omega_points: tuple[OmegaPoint, ...]
    nu: float | None = None

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.dims, self.dims[1:])):
            raise ValueError(f"dims must be strictly increasing, got {self.dims}")
        if len(self.dims) != len(self.omega_points):
            raise ValueError("one OmegaPoint per dim is required")


# ---------------------------------------------------------------------------
# extraction


def extract_omega(spectrum: Spectrum | ArrayLike) -> OmegaPoint:
    lam = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum, dtype=float)
    n = lam.size
    if n < 1:
        raise ValueError("empty spectrum")
    scaled = lam / n
    ap = scaled[scaled > 0]
    am = -scaled[::-1][scaled[::-1] < 0]
    gamma1 = float(np.sum(ap) - np.sum(am))
    delta = OmegaPoint._square_sum(ap, am)
    return OmegaPoint(ap, am, gamma1, delta)


def corner_trajectory(x: HermitianMatrix | NDArray, dims: Sequence[int], nu: float | None = None) -> CornerTrajectory:
    a = x.entries if isinstance(x, HermitianMatrix) else np.asarray(x)
    n_max = a.shape[0]
    dims = tuple(int(d) for d in dims)
    if not dims or dims[0] < 1 or dims[-1] > n_max:
        raise ValueError(f"dims must lie in 1..{n_max}, got {dims}")
    points = tuple(extract_omega(eigenvalues(a[:d, :d])) for d in dims)
    return CornerTrajectory(dims, points, nu)


def sample_trajectories(
    nu: float, n_max: int, dims: Sequence[int], samples: int, rng: RngStream, workers: int = 1
) -> list[CornerTrajectory]:
    """Corner trajectories of independent inverse-Wishart draws of size n_max."""

    def one_chunk(stream: RngStream, n: int) -> list[CornerTrajectory]:
        mats = inverse_wishart_matrices(stream, nu, n_max, n)
        return [corner_trajectory(m, dims, nu) for m in mats]

    chunks = replicate(one_chunk, rng, samples, chunk=25, workers=workers)
    return [t for chunk in chunks for t in chunk]


# ---------------------------------------------------------------------------
# characteristic function


def evaluate_F_omega(omega: OmegaPoint, x: ArrayLike, truncation: int | None = None) -> NDArray[np.complex128] | complex:
    """Characteristic function of the ergodic measure indexed by omega.

    exp(i gamma1 x - gamma2 x^2 / 2) * prod exp(-i a x) / (1 - i a x)
    * prod exp(i b x) / (1 + i b x), over a in alpha+, b in alpha-.
    The linear phases are collected into one drift term before exponentiating.
    """
    ap, am = omega.alpha_plus, omega.alpha_minus
    if truncation is not None:
        if truncation < max(np.count_nonzero(ap), np.count_nonzero(am)):
            raise ValueError("truncation is smaller than the number of stored alphas")
        ap, am = ap[:truncation], am[:truncation]
    x = np.asarray(x, dtype=float)
    drift = omega.gamma1 - np.sum(ap) + np.sum(am)
    xs = x[..., None]
    log_f = (
        1j * drift * x
        - 0.5 * omega.gamma2 * x * x
        - np.sum(np.log1p(-1j * ap * xs), axis=-1)
        - np.sum(np.log1p(1j * am * xs), axis=-1)
    )
    out = np.exp(log_f)
    return complex(out) if out.ndim == 0 else out


def F_from_alphas(alphas: NDArray, r: float) -> NDArray[np.complex128]:
    """F at r for a batch of gamma2 = 0, gamma1 = sum(alpha) points (rows of alphas)."""
    return np.exp(-np.sum(np.log1p(-1j * alphas * r), axis=-1))


# ---------------------------------------------------------------------------
# diagnostics


def _top_mass_fraction(omega: OmegaPoint, k_top: int) -> float:
    ap = omega.alpha_plus
    if omega.delta == 0:
        return 1.0
    return float(np.sum(ap[:k_top] ** 2) / omega.delta)


def tail_sum(omega: OmegaPoint, k_top: int) -> float:
    """Sum of alpha+_i over i > k_top."""
    return float(np.sum(omega.alpha_plus[k_top:]))


def tail_sum_below(omega: OmegaPoint, level: float) -> float:
    """Sum of the alpha+ values lying below ``level``."""
    ap = omega.alpha_plus
    return float(np.sum(ap[ap < level]))


def gamma_diagnostics(
    trajectories: Sequence[CornerTrajectory],
    k_top: int = K_TOP,
    delta: float = 0.05,
    nu: float | None = None,
    seed: tuple[int, int] = (0, 0),
) -> list[TestReport]:
    """Finite-N diagnostics for vanishing gamma2 and gamma1 = sum(alpha+).

    gamma2: mean top-k_top share of d^(N) at the largest dim exceeds 0.99.
    gamma1: at every dim, the mean sum of alpha+ below ``delta`` matches the
    tail integral of x K_N(x, x) over (0, delta) within 3 standard errors.
    c-stability: mean |c^(N_{k+1}) - c^(N_k)| decreases along the dims.
    """
    if not trajectories:
        raise ValueError("no trajectories")
    if k_top < 1:
        raise ValueError(f"k_top must be >= 1, got {k_top}")
    dims = trajectories[0].dims
    if any(t.dims != dims for t in trajectories):
        raise ValueError("all trajectories must share the same dims")
    nu = trajectories[0].nu if nu is None else nu
    if nu is None:
        raise ValueError("nu is required to evaluate the tail integrals")
    s = len(trajectories)

    frac = np.array([_top_mass_fraction(t.omega_points[-1], k_top) for t in trajectories])
    mean_frac = float(frac.mean())
    r_gamma2 = TestReport(
        f"gamma2/top{k_top}-mass/N={dims[-1]}", mean_frac, 0.99, mean_frac > 0.99, s, seed
    )

    zs, rows = [], []
    for j, n in enumerate(dims):
        sums = np.array([tail_sum_below(t.omega_points[j], delta) for t in trajectories])
        mean = float(sums.mean())
        se = float(sums.std(ddof=1) / np.sqrt(s)) if s > 1 else np.inf
        quad = tail_integral_K(nu, n, delta)
        z = abs(mean - quad) / se if se > 0 else np.inf
        zs.append(z)
        ktail = [float(np.mean([tail_sum(t.omega_points[j], k) for t in trajectories])) for k in (k_top // 2, k_top, 2 * k_top)]
        rows.append({"dim": n, "mean": mean, "se": se, "quadrature": quad, "z": z, "k_tail_means": ktail})
    monotone = all(r["k_tail_means"][0] >= r["k_tail_means"][1] >= r["k_tail_means"][2] for r in rows)
    zmax = float(max(zs))
    r_gamma1 = TestReport(
        f"gamma1/tail-sum-below-{delta:g}", zmax, 3.0, zmax <= 3.0 and monotone, s, seed, {"rows": rows}
    )

    cs = np.array([[p.gamma1 for p in t.omega_points] for t in trajectories])
    steps = np.mean(np.abs(np.diff(cs, axis=1)), axis=0) if len(dims) > 1 else np.zeros(0)
    shrinking = bool(np.all(np.diff(steps) < 0)) if steps.size > 1 else True
    last = float(steps[-1]) if steps.size else 0.0
    r_c = TestReport("c-stability/mean-successive-diff", last, float("nan"), shrinking, s, seed, {"steps": steps.tolist()})
    return [r_gamma2, r_gamma1, r_c]


def alpha_minus_report(trajectories: Sequence[CornerTrajectory], seed: tuple[int, int] = (0, 0)) -> TestReport:
    """Positive-definite corners have no negative spectrum: alpha- must be empty everywhere."""
    empty = [all(p.alpha_minus.size == 0 for p in t.omega_points) for t in trajectories]
    frac = float(np.mean(empty))
    return TestReport("alpha-minus/empty-fraction", frac, 1.0, frac == 1.0, len(trajectories), seed)


def alpha1_stability(trajectories: Sequence[CornerTrajectory], last: int = 3, rel: float = 0.25) -> float:
    """Fraction of draws whose alpha+_1 varies by less than ``rel`` over the last dims."""
    ok = 0
    for t in trajectories:
        a1 = np.array([p.alpha_plus[0] if p.alpha_plus.size else 0.0 for p in t.omega_points[-last:]])
        ok += (a1.max() - a1.min()) < rel * a1.max()
    return ok / len(trajectories)


def count_above(trajectories: Sequence[CornerTrajectory], level: float) -> NDArray[np.int64]:
    """Per draw and per dim, the number of alpha+ exceeding ``level``: shape (draws, dims)."""
    return np.array([[int(np.sum(p.alpha_plus > level)) for p in t.omega_points] for t in trajectories])


# ---------------------------------------------------------------------------
# ergodic decomposition cross-check


def _x11_chunk(stream: RngStream, nu: float, n: int, size: int) -> NDArray:
    # X_11 = 2 (Y^{-1})_11; one solve against e_1 instead of a full inverse
    y = wishart_matrices(stream, nu, n, size)
    e1 = np.zeros((size, n, 1), dtype=complex)
    e1[:, 0, 0] = 1.0
    return 2.0 * np.linalg.solve(y, e1)[:, 0, 0].real


def _alpha_chunk(stream: RngStream, nu: float, n: int, size: int) -> NDArray:
    return mu_spectra(stream, nu, n, size) / n


def decomposition_check(
    nu: float,
    N: int,
    samples: int,
    r_grid: Sequence[float],
    rng: RngStream,
    alpha_scale: float = 1.0,
    bias_allowance: float = BIAS_ALLOWANCE,
    workers: int = 1,
) -> TestReport:
    """Compare E exp(i r X_11) with the mixture of F over sampled corner parameters.

    Side A uses fresh inverse-Wishart matrices. Side B evaluates F at the
    parameters extracted from independent dim-N spectra (with gamma2 = 0 and
    gamma1 = sum(alpha+), as the extraction gives exactly); ``alpha_scale``
    perturbs those alphas for sensitivity checks. Passes iff for every r,
    |A - B| <= 3 (SE_A + SE_B) + bias_allowance.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    x11 = batched(_x11_chunk, rng.spawn(0), nu, N, samples, chunk=100, workers=workers)
    alphas = batched(_alpha_chunk, rng.spawn(1), nu, N, samples, chunk=250, workers=workers) * alpha_scale
    rows, worst, ok = [], -np.inf, True
    for r in r_grid:
        fa = np.exp(1j * r * x11)
        fb = F_from_alphas(alphas, r)
        a, b = complex(fa.mean()), complex(fb.mean())
        se_a = float(np.sqrt((fa.real.var(ddof=1) + fa.imag.var(ddof=1)) / samples)) if samples > 1 else 0.0
        se_b = float(np.sqrt((fb.real.var(ddof=1) + fb.imag.var(ddof=1)) / samples)) if samples > 1 else 0.0
        gap = abs(a - b)
        bound = 3 * (se_a + se_b) + bias_allowance
        passed = gap <= bound
        ok &= passed
        worst = max(worst, gap - 3 * (se_a + se_b))
        rows.append(
            {"r": float(r), "empirical": a, "predicted": b, "gap": gap, "bound": bound, "pass": passed}
        )
    return TestReport(
        f"decomposition/nu={nu:g}/N={N}", worst, bias_allowance, ok, samples, tuple(rng.key), {"rows": rows}
    )
