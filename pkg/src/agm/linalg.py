"""Dense symmetric and PSD matrix foundation.

Eigenvalues come from a cyclic Jacobi solver that works on stacks of
matrices (shape ``(..., d, d)``), so callers can certify or take norms of
thousands of small products in one vectorised pass.  Norms of nonsymmetric
matrices are obtained from the symmetric eigenproblem of the Gram matrix.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = [
    "EIG_TOL",
    "PSD_TOL",
    "ASYMMETRY_TOL",
    "InvalidInputError",
    "SymmetricMatrix",
    "PsdMatrix",
    "PsdCheck",
    "jacobi_eigh",
    "eigvalsh",
    "spectral_norm",
    "min_max_eigenvalues",
    "is_psd",
]

EIG_TOL = 1e-10
PSD_TOL = 1e-10
ASYMMETRY_TOL = 1e-8

_JACOBI_RTOL = 1e-14
_JACOBI_MAX_SWEEPS = 100


class InvalidInputError(ValueError):
    """Raised for malformed matrices (non-finite entries or bad shape or symmetry)."""


def _as_float_array(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    return a


def _check_square(a: np.ndarray) -> None:
    if a.ndim < 2 or a.shape[-1] != a.shape[-2] or a.shape[-1] < 1:
        raise InvalidInputError(f"expected square matrices, got shape {a.shape}")


def jacobi_eigh(m, vectors: bool = False):
    """Eigen-decomposition of symmetric matrices by cyclic Jacobi rotations.

    Parameters
    ----------
    m : array_like, shape (..., d, d)
        Symmetric input; only the symmetric part is meaningful.
    vectors : bool
        Also accumulate the orthogonal eigenvector matrices.

    Returns
    -------
    w : ndarray, shape (..., d)
        Eigenvalues in ascending order.
    v : ndarray, shape (..., d, d)
        Returned only when ``vectors`` is true; column ``j`` pairs with
        ``w[..., j]``.
    """
    a = _as_float_array(m)
    _check_square(a)
    batch_shape = a.shape[:-2]
    d = a.shape[-1]
    a = a.reshape((-1, d, d)).copy()
    v = np.broadcast_to(np.eye(d), a.shape).copy() if vectors else None

    scale = np.sqrt(np.einsum("bij,bij->b", a, a))
    off_mask = ~np.eye(d, dtype=bool)
    active = np.arange(a.shape[0])
    for _ in range(_JACOBI_MAX_SWEEPS):
        sub = a[active]
        off = np.sqrt(np.sum(sub[:, off_mask] ** 2, axis=1))
        active = active[off > _JACOBI_RTOL * scale[active]]
        if active.size == 0:
            break
        sub = a[active]
        vsub = v[active] if vectors else None
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = sub[:, p, q]
                nz = apq != 0.0
                with np.errstate(over="ignore"):  # tiny apq: tau = inf gives t = 0
                    tau = np.divide(sub[:, q, q] - sub[:, p, p], 2.0 * apq,
                                    out=np.zeros_like(apq), where=nz)
                sign = np.where(tau >= 0.0, 1.0, -1.0)
                t = np.where(nz, sign / (np.abs(tau) + np.hypot(1.0, tau)), 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                cc, ss = c[:, None], s[:, None]
                colp, colq = sub[:, :, p].copy(), sub[:, :, q].copy()
                sub[:, :, p] = cc * colp - ss * colq
                sub[:, :, q] = ss * colp + cc * colq
                rowp, rowq = sub[:, p, :].copy(), sub[:, q, :].copy()
                sub[:, p, :] = cc * rowp - ss * rowq
                sub[:, q, :] = ss * rowp + cc * rowq
                if vectors:
                    vp, vq = vsub[:, :, p].copy(), vsub[:, :, q].copy()
                    vsub[:, :, p] = cc * vp - ss * vq
                    vsub[:, :, q] = ss * vp + cc * vq
        a[active] = sub
        if vectors:
            v[active] = vsub

    w = np.diagonal(a, axis1=1, axis2=2).copy()
    order = np.argsort(w, axis=1)
    w = np.take_along_axis(w, order, axis=1).reshape(batch_shape + (d,))
    if not vectors:
        return w
    v = np.take_along_axis(v, order[:, None, :], axis=2).reshape(batch_shape + (d, d))
    return w, v


def eigvalsh(m) -> np.ndarray:
    """Ascending eigenvalues of symmetric matrices (batched)."""
    a = _as_float_array(m)
    _check_square(a)
    return jacobi_eigh(0.5 * (a + np.swapaxes(a, -1, -2)))


def spectral_norm(m):
    """Operator 2-norm (largest singular value), batched over leading axes.

    Symmetric inputs use the largest absolute eigenvalue directly; other
    inputs take the square root of the top eigenvalue of the smaller Gram
    matrix.
    """
    a = _as_float_array(m)
    if a.ndim < 2:
        raise InvalidInputError(f"expected a matrix, got shape {a.shape}")
    rows, cols = a.shape[-2:]
    if rows == cols and np.array_equal(a, np.swapaxes(a, -1, -2)):
        w = jacobi_eigh(a)
        out = np.maximum(np.abs(w[..., 0]), np.abs(w[..., -1]))
    else:
        at = np.swapaxes(a, -1, -2)
        gram = at @ a if cols <= rows else a @ at
        gram = 0.5 * (gram + np.swapaxes(gram, -1, -2))
        out = np.sqrt(np.maximum(jacobi_eigh(gram)[..., -1], 0.0))
    return float(out) if out.ndim == 0 else out


def min_max_eigenvalues(m) -> tuple[float, float]:
    """``(lambda_min, lambda_max)`` of a symmetric matrix."""
    w = eigvalsh(m)
    if w.ndim != 1:
        raise InvalidInputError("min_max_eigenvalues expects a single matrix")
    return float(w[0]), float(w[-1])


class PsdCheck(NamedTuple):
    holds: bool
    min_eig: float


def is_psd(m, tol: float = PSD_TOL) -> PsdCheck:
    """PSD test with the smallest eigenvalue returned as witness.

    Passes when ``lambda_min >= -tol * max(1, ||m||)``.
    """
    w = eigvalsh(m)
    lo, hi = float(w[0]), float(w[-1])
    scale = max(1.0, abs(lo), abs(hi))
    return PsdCheck(lo >= -tol * scale, lo)


def _asymmetry(a: np.ndarray, label: str = "matrix") -> float:
    asym = float(np.linalg.norm(0.5 * (a - a.T)))
    if asym > ASYMMETRY_TOL * float(np.linalg.norm(a)):
        raise InvalidInputError(f"{label} is not symmetric (asymmetry {asym:.3g})")
    return asym


class SymmetricMatrix:
    """Immutable real symmetric matrix.

    Input is symmetrised as ``(M + M^T) / 2``; the discarded antisymmetric
    part is kept in :attr:`asymmetry` (Frobenius norm) and must not exceed
    ``ASYMMETRY_TOL * ||M||_F``.
    """

    __slots__ = ("_entries", "asymmetry")

    def __init__(self, entries):
        a = _as_float_array(entries)
        if a.ndim != 2:
            raise InvalidInputError(f"expected a 2-D matrix, got shape {a.shape}")
        _check_square(a)
        asym = _asymmetry(a)
        sym = 0.5 * (a + a.T)
        sym.setflags(write=False)
        self._entries = sym
        self.asymmetry = asym

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._entries
        return self._entries.astype(dtype)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymmetricMatrix):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    __hash__ = None


class PsdMatrix(SymmetricMatrix):
    """Symmetric matrix certified positive semidefinite at construction."""

    __slots__ = ("certified_min_eig",)

    def __init__(self, entries, tol: float = PSD_TOL):
        super().__init__(entries)
        check = is_psd(self.entries, tol=tol)
        if not check.holds:
            raise InvalidInputError(
                f"matrix is not positive semidefinite (min eigenvalue {check.min_eig:.3g})"
            )
        self.certified_min_eig = check.min_eig

    @classmethod
    def _certified(cls, entries: np.ndarray, min_eig: float) -> "PsdMatrix":
        # Used by MatrixTuple, which certifies whole stacks in one batch.
        obj = cls.__new__(cls)
        obj._entries = entries
        obj.asymmetry = 0.0
        obj.certified_min_eig = float(min_eig)
        return obj
