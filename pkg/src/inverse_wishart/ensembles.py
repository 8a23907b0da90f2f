"""Samplers for Ginibre, Haar, Wishart, inverse-Wishart and the related eigenvalue laws.

Every sampler takes an ``rng`` that is either an :class:`RngStream` (a
reproducible value: the same stream always yields the same draw) or an
already-running ``numpy.random.Generator`` (used when composing samplers).

Batch variants (``size=...``) return stacked arrays; spectra batches are
shaped ``(size, N)`` with each row weakly decreasing.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, TypeVar

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import eigvalsh_tridiagonal

from .hermitian import HermitianMatrix, Spectrum, eigenvalues

T = TypeVar("T")

MAX_CONDITION = 1e14
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by ``(seed, stream_id)``.

    Streams with different keys are independent (Philox keyed through
    ``SeedSequence`` spawn keys). ``spawn(i)`` derives child stream ``i``,
    used for per-replica substreams.
    """

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        for v in (self.seed, self.stream_id, *self.path):
            if not 0 <= v <= _MASK64:
                raise ValueError(f"stream key component {v} is not a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.Philox(ss))

    def spawn(self, index: int) -> RngStream:
        return RngStream(self.seed, self.stream_id, (*self.path, index))

    @property
    def key(self) -> list[int]:
        return [self.seed, self.stream_id]


RngLike = RngStream | np.random.Generator


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class EnsembleParams:
    nu: float
    dim: int

    def __post_init__(self) -> None:
        if not self.nu > -1:
            raise ValueError(f"nu must be > -1, got {self.nu}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")

    @property
    def integer_nu(self) -> bool:
        return float(self.nu).is_integer() and self.nu >= 0


def _check_size(size: int | None) -> None:
    if size is not None and size < 1:
        raise ValueError(f"size must be >= 1, got {size}")


# ---------------------------------------------------------------------------
# building blocks


def sample_ginibre(rng: RngLike, rows: int, cols: int, size: int | None = None) -> NDArray[np.complex128]:
    """Standard complex Gaussian matrix, E|g|^2 = 1."""
    if rows < 1 or cols < 1:
        raise ValueError(f"rows and cols must be >= 1, got {rows}x{cols}")
    _check_size(size)
    gen = as_generator(rng)
    shape = (rows, cols) if size is None else (size, rows, cols)
    z = gen.standard_normal((*shape, 2)) * math.sqrt(0.5)
    return z[..., 0] + 1j * z[..., 1]


def sample_haar_unitary(rng: RngLike, dim: int, size: int | None = None) -> NDArray[np.complex128]:
    """Haar unitary via QR of a Ginibre matrix with the R-diagonal phase fix."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    z = sample_ginibre(rng, dim, dim, size)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def _conjugate_diag(u: NDArray, x: NDArray) -> NDArray:
    """U* diag(x) U for stacked U and x."""
    a = np.swapaxes(u.conj(), -1, -2) @ (x[..., :, None] * u)
    return 0.5 * (a + np.swapaxes(a.conj(), -1, -2))


# ---------------------------------------------------------------------------
# eigenvalue laws


def laguerre_spectra(rng: RngLike, nu: float, dim: int, size: int) -> NDArray[np.float64]:
    """Batch of Laguerre-ensemble spectra, shape (size, dim), rows decreasing.

    Bidiagonal chi model: B has diagonal sqrt(Gamma(nu + dim - i)) for
    i = 0..dim-1 and subdiagonal sqrt(Gamma(dim - 1 - i)); the eigenvalues of
    B B^T follow x^nu e^{-x} Delta(x)^2.
    """
    EnsembleParams(nu, dim)
    _check_size(size)
    gen = as_generator(rng)
    diag_shape = nu + dim - np.arange(dim)
    sub_shape = dim - 1 - np.arange(dim - 1)
    d = np.sqrt(gen.standard_gamma(diag_shape, size=(size, dim)))
    s = np.sqrt(gen.standard_gamma(sub_shape, size=(size, dim - 1))) if dim > 1 else None
    out = np.empty((size, dim))
    if dim == 1:
        out[:, 0] = d[:, 0] ** 2
        return out
    for k in range(size):
        main = d[k] ** 2
        main[1:] += s[k] ** 2
        off = d[k, :-1] * s[k]
        w = eigvalsh_tridiagonal(main, off)
        out[k] = w[::-1]
    # the tridiagonal form is positive definite; clip solver round-off at 0
    np.maximum(out, np.finfo(float).tiny, out=out)
    return out


def sample_laguerre_spectrum(rng: RngLike, params: EnsembleParams) -> Spectrum:
    return Spectrum(laguerre_spectra(rng, params.nu, params.dim, 1)[0], positive=True)


def mu_spectra(rng: RngLike, nu: float, dim: int, size: int) -> NDArray[np.float64]:
    """Batch of inverse-Wishart eigenvalue draws: x_i = 2 / l_{N+1-i}."""
    lag = laguerre_spectra(rng, nu, dim, size)
    return 2.0 / lag[:, ::-1]


def sample_mu_spectrum(rng: RngLike, params: EnsembleParams) -> Spectrum:
    return Spectrum(mu_spectra(rng, params.nu, params.dim, 1)[0], positive=True)


# ---------------------------------------------------------------------------
# matrix ensembles


def wishart_matrices(rng: RngLike, nu: float, dim: int, size: int) -> NDArray[np.complex128]:
    """Stack of complex Wishart matrices with density det(Y)^nu e^{-Tr Y}."""
    params = EnsembleParams(nu, dim)
    _check_size(size)
    gen = as_generator(rng)
    if params.integer_nu:
        g = sample_ginibre(gen, dim, dim + int(nu), size)
        y = g @ np.swapaxes(g.conj(), -1, -2)
        return 0.5 * (y + np.swapaxes(y.conj(), -1, -2))
    spec = laguerre_spectra(gen, nu, dim, size)
    u = sample_haar_unitary(gen, dim, size)
    return _conjugate_diag(u, spec)


def sample_wishart(rng: RngLike, params: EnsembleParams) -> HermitianMatrix:
    return HermitianMatrix(wishart_matrices(rng, params.nu, params.dim, 1)[0])


def inverse_wishart_matrices(rng: RngLike, nu: float, dim: int, size: int) -> NDArray[np.complex128]:
    """Stack of inverse-Wishart matrices X = 2 Y^{-1}.

    A draw whose Wishart factor has condition number above 1e14 is redrawn
    once; a second failure raises ``FloatingPointError``.
    """
    gen = as_generator(rng)
    y = wishart_matrices(gen, nu, dim, size)
    yinv = np.linalg.inv(y)
    bad = np.flatnonzero(_cond1(y, yinv) > MAX_CONDITION)
    if bad.size:
        y[bad] = wishart_matrices(gen, nu, dim, bad.size)
        yinv[bad] = np.linalg.inv(y[bad])
        if np.any(_cond1(y[bad], yinv[bad]) > MAX_CONDITION):
            raise FloatingPointError(
                f"Wishart draw of dim {dim} is near-singular after a resample; check the RNG"
            )
    x = 2.0 * yinv
    return 0.5 * (x + np.swapaxes(x.conj(), -1, -2))


def _cond1(a: NDArray, ainv: NDArray) -> NDArray:
    """1-norm condition numbers of a stack, given the inverses."""
    return np.abs(a).sum(axis=-2).max(axis=-1) * np.abs(ainv).sum(axis=-2).max(axis=-1)


def sample_inverse_wishart(rng: RngLike, params: EnsembleParams) -> HermitianMatrix:
    return HermitianMatrix(inverse_wishart_matrices(rng, params.nu, params.dim, 1)[0])


# ---------------------------------------------------------------------------
# corner kernel


def corner_spectra(rng: RngLike, x: NDArray[np.float64]) -> NDArray[np.float64]:
    """Eigenvalues of the N x N corner of U* diag(x) U for Haar U.

    ``x`` is a batch of shape (size, N+1) (or a single vector). Output rows are
    clipped into the interlacing intervals to remove round-off.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    n1 = xb.shape[1]
    if n1 < 2:
        raise ValueError("corner kernel needs a spectrum of dim >= 2")
    u = sample_haar_unitary(rng, n1, xb.shape[0])
    a = _conjugate_diag(u, xb)[..., :-1, :-1]
    y = eigenvalues(a)
    y = np.clip(y, xb[:, 1:], xb[:, :-1])
    return y[0] if single else y


def sample_corner_given_spectrum(rng: RngLike, x: Spectrum) -> Spectrum:
    if x.dim < 2:
        raise ValueError("corner kernel needs a spectrum of dim >= 2")
    return Spectrum(corner_spectra(rng, x.values))


def interlaces(y: NDArray, x: NDArray, slack: float = 1e-10) -> bool:
    """True when x_1 >= y_1 >= x_2 >= ... >= y_N >= x_{N+1} (up to slack)."""
    y, x = np.asarray(y), np.asarray(x)
    return bool(np.all(y <= x[..., :-1] + slack) and np.all(y >= x[..., 1:] - slack))


# ---------------------------------------------------------------------------
# replicas


def replicate(
    fn: Callable[[RngStream, int], T],
    rng: RngStream,
    samples: int,
    chunk: int = 1000,
    workers: int = 1,
) -> list[T]:
    """Run ``fn(rng.spawn(i), n_i)`` over replica chunks, results in index order.

    Chunk boundaries depend only on ``samples`` and ``chunk``, so the result is
    independent of ``workers``.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    sizes = [min(chunk, samples - lo) for lo in range(0, samples, chunk)]
    jobs = [(rng.spawn(i), n) for i, n in enumerate(sizes)]
    if workers <= 1 or len(jobs) == 1:
        return [fn(s, n) for s, n in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def batched(
    sampler: Callable[[RngLike, float, int, int], NDArray],
    rng: RngStream,
    nu: float,
    dim: int,
    samples: int,
    chunk: int = 1000,
    workers: int = 1,
) -> NDArray:
    """Concatenate a batch sampler's output over replica substreams."""
    parts = replicate(lambda s, n: sampler(s, nu, dim, n), rng, samples, chunk, workers)
    return np.concatenate(parts, axis=0)


def spectra_rows(spectra: Sequence[NDArray] | NDArray) -> list[tuple[int, int, float]]:
    """Flatten a batch of spectra to ``(sample_id, i, value)`` rows, i from 1."""
    rows = []
    for sid, spec in enumerate(spectra):
        for i, v in enumerate(np.asarray(spec).ravel(), start=1):
            rows.append((sid, i, float(v)))
    return rows
