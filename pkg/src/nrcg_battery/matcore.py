"""Dense complex matrix helpers and a batched cyclic Jacobi eigensolver.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Every routine
that can reasonably accept a stack of matrices does so: the last two axes
are the matrix axes and any leading axes are batch axes.  Registers never
exceed three qubits, so the largest matrix handled here is 8x8.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit

OFF_DIAGONAL_TOL = 1e-12
MAX_SWEEPS = 1000


class NotHermitianError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, residual: float, sweeps: int):
        super().__init__(
            f"Jacobi iteration did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {residual:.3e})"
        )
        self.residual = residual
        self.sweeps = sweeps


class HermitianEigenDecomposition(NamedTuple):
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite square complex matrix (or stack of them)."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or infinite entries")
    return m


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return np.conj(np.swapaxes(as_matrix(a), -1, -2))


def trace(a) -> complex:
    return np.trace(as_matrix(a), axis1=-2, axis2=-1)


def hermiticity_error(a) -> np.ndarray:
    a = np.asarray(a)
    return np.max(np.abs(a - np.conj(np.swapaxes(a, -1, -2))), axis=(-2, -1))


@njit(cache=True)
def _off_norm(a):
    n = a.shape[0]
    acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += a[i, j].real ** 2 + a[i, j].imag ** 2
    return np.sqrt(acc)


@njit(cache=True)
def _jacobi_one(a, v, want_vectors, threshold, max_sweeps):
    """Cyclic Jacobi on one Hermitian matrix, in place.

    Each 2x2 rotation first strips the phase of a[p, q] and then applies the
    real symmetric Jacobi rotation.  Returns ``(sweeps, residual)``; sweeps is
    -1 when the budget ran out.
    """
    n = a.shape[0]
    sweeps = 0
    off = _off_norm(a)
    while off >= threshold:
        if sweeps >= max_sweeps:
            return -1, off
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                cph = phase.conjugate()
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):  # A <- A G
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * cph * akq
                    a[k, q] = s * akp + c * cph * akq
                for k in range(n):  # A <- G^H A
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * phase * aqk
                    a[q, k] = s * apk + c * phase * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if want_vectors:
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = c * vkp - s * cph * vkq
                        v[k, q] = s * vkp + c * cph * vkq
        sweeps += 1
        off = _off_norm(a)
    return sweeps, off


@njit(cache=True)
def _jacobi_batch(a, v, want_vectors, tol, max_sweeps, out):
    for b in range(a.shape[0]):
        m = a[b]
        scale = max(1.0, np.sqrt(np.sum(np.abs(m) ** 2)))
        sweeps, off = _jacobi_one(m, v[b], want_vectors, tol * scale, max_sweeps)
        if sweeps < 0:
            return b, off / scale
        for i in range(m.shape[0]):
            out[b, i] = m[i, i].real
    return -1, 0.0


def _jacobi(a: np.ndarray, want_vectors: bool, tol: float, max_sweeps: int):
    batch, n, _ = a.shape
    a = np.ascontiguousarray(a, dtype=np.complex128).copy()
    if want_vectors:
        v = np.broadcast_to(np.eye(n, dtype=np.complex128), a.shape).copy()
    else:
        v = np.empty((batch, 0, 0), dtype=np.complex128)
    w = np.empty((batch, n))
    failed, residual = _jacobi_batch(a, v, want_vectors, tol, max_sweeps, w)
    if failed >= 0:
        raise ConvergenceError(float(residual), max_sweeps)
    return w, (v if want_vectors else None)


def _prepare(a, tol: float) -> tuple[np.ndarray, tuple]:
    m = as_matrix(a)
    err = hermiticity_error(m)
    if np.any(err > tol):
        raise NotHermitianError(f"input is not Hermitian (max deviation {np.max(err):.3e})")
    lead = m.shape[:-2]
    n = m.shape[-1]
    flat = m.reshape(-1, n, n)
    # symmetrise so the rotations see an exactly Hermitian matrix
    flat = 0.5 * (flat + np.conj(np.swapaxes(flat, -1, -2)))
    return flat, lead


def hermitian_eig(a, tol: float = 1e-10, *, max_sweeps: int = MAX_SWEEPS) -> HermitianEigenDecomposition:
    """Eigendecomposition of a Hermitian matrix (or stack) by cyclic Jacobi.

    Raises ``NotHermitianError`` if ``a`` deviates from Hermitian by more than
    ``tol`` and ``ConvergenceError`` when the sweep budget runs out.
    """
    flat, lead = _prepare(a, tol)
    n = flat.shape[-1]
    w, v = _jacobi(flat, True, OFF_DIAGONAL_TOL, max_sweeps)
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return HermitianEigenDecomposition(w.reshape(lead + (n,)), v.reshape(lead + (n, n)))


def hermitian_eigvals(a, tol: float = 1e-10, *, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Ascending eigenvalues only; cheaper than :func:`hermitian_eig`."""
    flat, lead = _prepare(a, tol)
    n = flat.shape[-1]
    w, _ = _jacobi(flat, False, OFF_DIAGONAL_TOL, max_sweeps)
    return np.sort(w, axis=-1).reshape(lead + (n,))


def is_density_matrix(a, tol: float = 1e-10) -> tuple[bool, str]:
    """Return ``(ok, diagnostic)`` for Hermiticity, unit trace and positivity."""
    m = as_matrix(a)
    herm = float(np.max(hermiticity_error(m)))
    if herm > tol:
        return False, f"not Hermitian: max |a - a^H| = {herm:.3e}"
    tr = trace(m)
    dev = float(np.max(np.abs(tr - 1.0)))
    if dev > tol:
        return False, f"trace deviates from 1 by {dev:.3e}"
    lam = float(np.min(hermitian_eigvals(m, tol)))
    if lam < -tol:
        return False, f"negative eigenvalue {lam:.3e}"
    return True, "ok"


def is_unitary(a, tol: float = 1e-12) -> bool:
    m = as_matrix(a)
    n = m.shape[-1]
    return bool(np.max(np.abs(m @ adjoint(m) - np.eye(n))) <= tol)
