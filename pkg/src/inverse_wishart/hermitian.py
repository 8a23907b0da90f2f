"""Dense complex Hermitian matrices: eigen-decomposition, corners, conjugation."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

HERMITIAN_ATOL = 1e-12
UNITARY_ATOL = 1e-10


class ConvergenceError(RuntimeError):
    """The eigensolver failed to converge."""


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """An N x N complex Hermitian matrix.

    Construction checks ``|A - A*| <= 1e-12`` entrywise and then replaces the
    entries by ``(A + A*) / 2`` so the stored array is exactly Hermitian.
    """

    entries: NDArray[np.complex128]

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=np.complex128, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
        asym = np.max(np.abs(a - a.conj().T))
        if asym > HERMITIAN_ATOL:
            raise ValueError(f"matrix is not Hermitian: max |A - A*| = {asym:.3e}")
        a = 0.5 * (a + a.conj().T)
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @classmethod
    def symmetrized(cls, a: ArrayLike) -> HermitianMatrix:
        """Build from an almost-Hermitian array, skipping the asymmetry check."""
        a = np.asarray(a, dtype=np.complex128)
        return cls(0.5 * (a + a.conj().T))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def trace_sq(self) -> float:
        """Tr A^2, i.e. the squared Frobenius norm."""
        return float(np.sum(np.abs(self.entries) ** 2))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "re": self.entries.real.ravel().tolist(),
                "im": self.entries.imag.ravel().tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> HermitianMatrix:
        obj = json.loads(text)
        n = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float).reshape(n, n)
        im = np.asarray(obj["im"], dtype=float).reshape(n, n)
        return cls(re + 1j * im)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in weakly decreasing order (a point of the Weyl chamber)."""

    values: NDArray[np.float64]
    positive: bool = False

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if v.size == 0:
            raise ValueError("spectrum must be non-empty")
        if np.any(np.diff(v) > 0):
            raise ValueError("spectrum values must be weakly decreasing")
        if self.positive and not v[-1] > 0:
            raise ValueError(f"positive spectrum has smallest value {v[-1]!r}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    spectrum: Spectrum
    basis: NDArray[np.complex128]

    def reconstruct(self) -> NDArray[np.complex128]:
        u = self.basis
        return (u * self.spectrum.values) @ u.conj().T


def _descending(values: NDArray) -> NDArray[np.intp]:
    # stable, so exact ties keep the solver's order
    return np.argsort(-values, kind="stable")


def eigen_decompose(a: HermitianMatrix) -> EigenDecomposition:
    """Eigenvalues (weakly decreasing) and matching unitary eigenvector columns."""
    try:
        w, v = np.linalg.eigh(a.entries)
    except np.linalg.LinAlgError as exc:
        off = a.entries - np.diag(np.diag(a.entries))
        raise ConvergenceError(
            f"eigensolver did not converge for dim {a.dim}; "
            f"off-diagonal residual {np.max(np.abs(off)):.3e}"
        ) from exc
    order = _descending(w)
    w, v = w[order], v[:, order]
    return EigenDecomposition(Spectrum(w, positive=bool(w[-1] > 0)), v)


def eigenvalues(a: HermitianMatrix | NDArray) -> NDArray[np.float64]:
    """Weakly decreasing eigenvalues. Accepts a stack of matrices as well."""
    arr = a.entries if isinstance(a, HermitianMatrix) else np.asarray(a)
    try:
        w = np.linalg.eigvalsh(arr)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver did not converge for shape {arr.shape}") from exc
    return w[..., ::-1]


def corner(a: HermitianMatrix, m: int) -> HermitianMatrix:
    """Top-left m x m submatrix."""
    if not 1 <= m <= a.dim:
        raise ValueError(f"corner size m={m} outside 1..{a.dim}")
    return HermitianMatrix(a.entries[:m, :m])


def is_unitary(u: NDArray, atol: float = UNITARY_ATOL) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= atol)


def conjugate(a: HermitianMatrix, u: ArrayLike) -> HermitianMatrix:
    """Return U* A U."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (a.dim, a.dim):
        raise ValueError(f"unitary of shape {u.shape} does not match dim {a.dim}")
    if not is_unitary(u):
        raise ValueError("U is not unitary within 1e-10")
    return HermitianMatrix.symmetrized(u.conj().T @ a.entries @ u)
