"""Monte Carlo verification harness: intensity histograms, KS and chi-square tests.

The chi-square statistics here use the empirical covariance of per-draw
count vectors (a Mahalanobis form). Draws are i.i.d., so the mean count
vector is asymptotically Gaussian even though points within one draw are
strongly correlated, which rules out the Poisson-variance Pearson form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special, stats

from .ensembles import (
    RngStream,
    batched,
    corner_spectra,
    inverse_wishart_matrices,
    mu_spectra,
)
from .hermitian import Spectrum, eigenvalues
from .io import dumps
from .kernels import rescaled_kernel_diag, rescaled_kernel_matrix
from .quadrature import adaptive_gl, gauss_legendre

ALPHA = 0.01
MIN_EXPECTED = 5.0


@dataclass
class TestReport:
    """Outcome of one statistical or numerical check."""

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    p_value: float
    passed: bool
    samples: int
    seed: tuple[int, int] = (0, 0)
    details: dict[str, Any] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "pass": self.passed,
            "samples": self.samples,
            "seed": list(self.seed),
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<44} statistic={self.statistic:.6g}  p={self.p_value:.4g}  n={self.samples}"


# ---------------------------------------------------------------------------
# histograms


@dataclass
class Histogram:
    edges: NDArray[np.float64]
    counts: NDArray[np.int64]
    total_samples: int

    def __post_init__(self) -> None:
        self.edges = np.asarray(self.edges, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.size != self.edges.size - 1:
            raise ValueError("need len(counts) == len(edges) - 1")
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")

    @property
    def widths(self) -> NDArray[np.float64]:
        return np.diff(self.edges)

    @property
    def density(self) -> NDArray[np.float64]:
        """Points per draw per unit length in each bin."""
        return self.counts / (self.total_samples * self.widths)

    def merge(self, other: Histogram) -> Histogram:
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("cannot merge histograms with different edges")
        return Histogram(self.edges, self.counts + other.counts, self.total_samples + other.total_samples)

    def rows(self) -> list[tuple[float, float, int, float]]:
        """``(lo, hi, count, density)`` rows."""
        d = self.density
        return [
            (float(lo), float(hi), int(c), float(v))
            for lo, hi, c, v in zip(self.edges[:-1], self.edges[1:], self.counts, d)
        ]


def _as_batch(spectra: Sequence[Spectrum] | ArrayLike) -> NDArray[np.float64]:
    if isinstance(spectra, np.ndarray):
        batch = spectra
    else:
        items = list(spectra)
        if not items:
            raise ValueError("empty batch of spectra")
        batch = np.array([s.values if isinstance(s, Spectrum) else np.asarray(s) for s in items])
    if batch.ndim != 2 or batch.shape[0] == 0:
        raise ValueError("expected a non-empty batch of equal-dimension spectra")
    return np.asarray(batch, dtype=float)


def empirical_rho1(spectra: Sequence[Spectrum] | ArrayLike, edges: ArrayLike) -> Histogram:
    """One-point intensity histogram; ``density`` integrates to about dim over the support."""
    batch = _as_batch(spectra)
    edges = np.asarray(edges, dtype=float)
    counts, _ = np.histogram(batch.ravel(), bins=edges)
    return Histogram(edges, counts, batch.shape[0])


def per_draw_counts(batch: NDArray, edges: NDArray) -> NDArray[np.int64]:
    """Counts of points in each bin, per draw: shape (draws, bins)."""
    idx = np.searchsorted(edges, batch, side="right") - 1
    nb = edges.size - 1
    inside = (idx >= 0) & (idx < nb) & (batch < edges[-1])
    rows = np.broadcast_to(np.arange(batch.shape[0])[:, None], batch.shape)
    out = np.zeros((batch.shape[0], nb), dtype=np.int64)
    np.add.at(out, (rows[inside], idx[inside]), 1)
    return out


# ---------------------------------------------------------------------------
# tests


def ks_two_sample(
    a: ArrayLike, b: ArrayLike, name: str = "ks", seed: tuple[int, int] = (0, 0), alpha: float = ALPHA
) -> TestReport:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.

    Uses the effective size n m / (n + m) and Stephens' correction
    (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) D.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("KS test needs two non-empty samples")
    both = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, both, side="right") / a.size
    cdf_b = np.searchsorted(b, both, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    ne = a.size * b.size / (a.size + b.size)
    lam = (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne)) * d
    p = float(min(1.0, special.kolmogorov(lam)))
    return TestReport(name, d, p, p > alpha, int(a.size + b.size), seed)


def _merge_small(expected: NDArray, min_expected: float) -> list[list[int]]:
    """Group consecutive cells until each group's expected total reaches the floor."""
    groups: list[list[int]] = []
    cur: list[int] = []
    acc = 0.0
    for i, e in enumerate(expected):
        cur.append(i)
        acc += e
        if acc >= min_expected:
            groups.append(cur)
            cur, acc = [], 0.0
    if cur:
        if groups:
            groups[-1].extend(cur)
        else:
            groups.append(cur)
    return groups


def chi_square_mean_test(
    per_draw: NDArray, expected_per_draw: NDArray, min_expected: float = MIN_EXPECTED
) -> tuple[float, int, float]:
    """Chi-square test that the mean of i.i.d. vectors equals ``expected_per_draw``.

    Cells whose expected total over all draws is below ``min_expected`` are
    merged with their neighbours. Returns ``(statistic, dof, p_value)``.
    """
    per_draw = np.asarray(per_draw, dtype=float)
    s = per_draw.shape[0]
    groups = _merge_small(np.asarray(expected_per_draw) * s, min_expected)
    t = np.stack([per_draw[:, g].sum(axis=1) for g in groups], axis=1)
    e = np.array([expected_per_draw[g].sum() for g in groups])
    diff = t.mean(axis=0) - e
    cov = np.atleast_2d(np.cov(t, rowvar=False)) / s
    w, v = np.linalg.eigh(cov)
    keep = w > w.max() * 1e-12
    proj = v[:, keep].T @ diff
    stat = float(np.sum(proj**2 / w[keep]))
    dof = int(keep.sum())
    return stat, dof, float(stats.chi2.sf(stat, dof))


# ---------------------------------------------------------------------------
# consistency of the corner maps


def _per_coordinate_ks(a: NDArray, b: NDArray) -> tuple[float, float]:
    """Max KS distance and Bonferroni-adjusted min p over ordered coordinates."""
    ds, ps = [], []
    for i in range(a.shape[1]):
        rep = ks_two_sample(a[:, i], b[:, i])
        ds.append(rep.statistic)
        ps.append(rep.p_value)
    return max(ds), min(1.0, a.shape[1] * min(ps))


def _corner_route_matrix(rng: RngStream, nu: float, N: int, n: int) -> NDArray:
    x = inverse_wishart_matrices(rng, nu, N + 1, n)
    return eigenvalues(x[:, :N, :N])


def _corner_route_kernel(rng: RngStream, nu: float, N: int, n: int) -> NDArray:
    gen = rng.generator()
    return corner_spectra(gen, mu_spectra(gen, nu, N + 1, n))


def consistency_test(
    nu: float,
    N: int,
    samples: int,
    rng: RngStream,
    workers: int = 1,
    alpha: float = ALPHA,
    min_samples: int = 1000,
) -> list[TestReport]:
    """Corner consistency of the inverse-Wishart family, three KS experiments.

    (a) eigenvalues of the N-corner of an (N+1)-dim matrix vs the dim-N law,
    (b) the corner kernel applied to (N+1)-dim spectra vs the dim-N law,
    (c) routes (a) and (b) against each other.
    Each compares every ordered eigenvalue, Bonferroni-corrected at ``alpha``.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if samples < max(min_samples, 2):
        raise ValueError(f"consistency_test needs samples >= {max(min_samples, 2)}, got {samples}")
    route_a = batched(_corner_route_matrix, rng.spawn(0), nu, N, samples, workers=workers)
    route_b = batched(_corner_route_kernel, rng.spawn(1), nu, N, samples, workers=workers)
    ref_a = batched(mu_spectra, rng.spawn(2), nu, N, samples, workers=workers)
    ref_b = batched(mu_spectra, rng.spawn(3), nu, N, samples, workers=workers)
    reports = []
    for label, x, y in (
        ("matrix-corner-vs-mu", route_a, ref_a),
        ("kernel-corner-vs-mu", route_b, ref_b),
        ("matrix-corner-vs-kernel-corner", route_a, route_b),
    ):
        d, p = _per_coordinate_ks(x, y)
        reports.append(
            TestReport(f"consistency/{label}/nu={nu:g}/N={N}", d, p, p > alpha, samples, tuple(rng.key))
        )
    return reports


# ---------------------------------------------------------------------------
# determinantal structure of the scaled spectrum

DEFAULT_EDGES_1PT = np.linspace(0.01, 5.0, 31)
DEFAULT_EDGES_2PT = np.geomspace(0.02, 2.0, 7)


def expected_bin_counts(nu: float, N: int, edges: NDArray, sub: int = 8, rtol: float = 1e-10) -> NDArray:
    """Integral of K_N(x, x) over each bin (expected points per draw)."""
    f = lambda x: rescaled_kernel_diag(nu, N, x)
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        # geometric starting panels, refined adaptively where the kernel peaks
        start = np.geomspace(lo, hi, sub + 1) if lo > 0 else np.linspace(lo, hi, sub + 1)
        out.append(adaptive_gl(f, lo, hi, atol=1e-14, rtol=rtol, initial=start)[0])
    return np.array(out)


def expected_pair_counts(nu: float, N: int, edges: NDArray, sub: int = 4, order: int = 16) -> NDArray:
    """Integral of det[[K(x,x), K(x,y)], [K(y,x), K(y,y)]] over each pair of bins."""
    x, w = gauss_legendre(order)
    nodes, weights, owner = [], [], []
    for b, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        fine = np.geomspace(lo, hi, sub + 1)
        for plo, phi in zip(fine[:-1], fine[1:]):
            half = 0.5 * (phi - plo)
            nodes.append(plo + half * (x + 1))
            weights.append(half * w)
            owner.append(np.full(order, b))
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    owner = np.concatenate(owner)
    k = rescaled_kernel_matrix(nu, N, nodes)
    diag = np.diag(k)
    rho2 = np.outer(diag, diag) - k * k
    ww = np.outer(weights, weights) * rho2
    nb = edges.size - 1
    onehot = np.zeros((nodes.size, nb))
    onehot[np.arange(nodes.size), owner] = 1.0
    return onehot.T @ ww @ onehot


def _pair_vectors(counts: NDArray) -> tuple[NDArray, list[tuple[int, int]]]:
    nb = counts.shape[1]
    cells = [(a, b) for a in range(nb) for b in range(a, nb)]
    cols = [
        counts[:, a] * (counts[:, a] - 1) if a == b else counts[:, a] * counts[:, b]
        for a, b in cells
    ]
    return np.stack(cols, axis=1).astype(float), cells


def onepoint_chi_square(scaled: NDArray, expected: NDArray, edges: NDArray) -> tuple[float, int, float]:
    return chi_square_mean_test(per_draw_counts(scaled, edges), expected)


def _scaled_mu(rng: RngStream, nu: float, N: int, n: int) -> NDArray:
    return mu_spectra(rng, nu, N, n) / N


def dpp_correlation_reports(
    nu: float,
    N: int,
    samples: int,
    rng: RngStream,
    edges_1pt: ArrayLike | None = None,
    edges_2pt: ArrayLike | None = None,
    workers: int = 1,
    alpha: float = ALPHA,
    min_samples: int = 10_000,
) -> list[TestReport]:
    """One-point and coarse two-point checks of the scaled spectrum against K_N."""
    if N < 10:
        raise ValueError(f"dpp correlation test needs N >= 10, got {N}")
    if samples < max(min_samples, 2):
        raise ValueError(f"dpp correlation test needs samples >= {max(min_samples, 2)}, got {samples}")
    e1 = DEFAULT_EDGES_1PT if edges_1pt is None else np.asarray(edges_1pt, dtype=float)
    e2 = DEFAULT_EDGES_2PT if edges_2pt is None else np.asarray(edges_2pt, dtype=float)
    scaled = batched(_scaled_mu, rng, nu, N, samples, workers=workers)

    exp1 = expected_bin_counts(nu, N, e1)
    stat1, dof1, p1 = onepoint_chi_square(scaled, exp1, e1)

    counts2 = per_draw_counts(scaled, e2)
    pairs, cells = _pair_vectors(counts2)
    exp2_full = expected_pair_counts(nu, N, e2)
    # both n_a (n_a - 1) and n_a n_b count ordered pairs of distinct points
    exp2 = np.array([exp2_full[a, b] for a, b in cells])
    stat2, dof2, p2 = chi_square_mean_test(pairs, exp2)

    key = tuple(rng.key)
    tag = f"nu={nu:g}/N={N}"
    return [
        TestReport(
            f"dpp/one-point/{tag}", stat1, p1, p1 > alpha, samples, key,
            {"dof": dof1, "histogram": empirical_rho1(scaled, e1)},
        ),
        TestReport(f"dpp/two-point/{tag}", stat2, p2, p2 > alpha, samples, key, {"dof": dof2}),
    ]


def dpp_correlation_test(
    nu: float, N: int, samples: int, rng: RngStream, workers: int = 1, **kwargs
) -> TestReport:
    """Combined report: passes iff both the one- and two-point chi-squares pass."""
    one, two = dpp_correlation_reports(nu, N, samples, rng, workers=workers, **kwargs)
    p = min(one.p_value, two.p_value)
    return TestReport(
        f"dpp/combined/nu={nu:g}/N={N}",
        max(one.statistic, two.statistic),
        p,
        one.passed and two.passed,
        samples,
        tuple(rng.key),
        {"one_point": one, "two_point": two},
    )
