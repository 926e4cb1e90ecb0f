"""Complex-matrix and Hermitian-operator algebra.

Operators are plain ``numpy`` arrays of dtype ``complex128``.  Functions in
this module validate their inputs, never mutate them, and return read-only
arrays where the result is a new operator.

Tolerances are relative: a quantity is "zero" when it is at most
``tol * max(1, ||A||)`` with ``||.||`` the operator (spectral) norm.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import InputError

DEFAULT_TOL = 1e-9
HERMITICITY_REJECT = 1e-6

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate a square finite complex matrix and return a read-only copy."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InputError(f"{name} must be a nonempty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} has non-finite entries")
    return _frozen(m)


def opnorm(a) -> float:
    """Spectral norm; 0 for the zero matrix."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def scale_of(a) -> float:
    return max(1.0, opnorm(a))


def hermitian(a, name: str = "operator") -> np.ndarray:
    """Return the Hermitian part ``(A + A^dagger)/2`` of ``a``.

    Inputs whose anti-Hermitian part exceeds ``1e-6 * ||A||`` are rejected
    rather than silently projected.
    """
    m = as_matrix(a, name)
    skew = opnorm(m - m.conj().T)
    if skew > HERMITICITY_REJECT * max(opnorm(m), np.finfo(float).tiny):
        raise InputError(f"{name} is not Hermitian: ||A - A^dagger|| = {skew:.3e}")
    return _frozen((m + m.conj().T) / 2)


def hs_inner(a, b) -> float:
    """Hilbert-Schmidt product Tr(AB) of two Hermitian operators."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # Tr(AB) = sum_ij A_ij B_ji
    return float(np.real(np.sum(a * b.T)))


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first largest-modulus entry is real and >= 0."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    # first index within rounding of the maximum, so ties resolve deterministically
    k = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-12))[0])
    if mags[k] == 0:
        return v.copy()
    return v * (np.conj(v[k]) / mags[k])


def spectral_decompose(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and orthonormal eigenvectors as columns.

    Each eigenvector is phase-fixed with :func:`fix_phase`.
    """
    h = hermitian(a)
    w, v = np.linalg.eigh(h)
    w = w[::-1]
    v = v[:, ::-1]
    v = np.column_stack([fix_phase(v[:, i]) for i in range(v.shape[1])])
    return _frozen(w.copy()), _frozen(v)


class PsdReport(NamedTuple):
    is_psd: bool
    min_eigenvalue: float
    numeric_rank: int


def psd_report(a, tol: float = DEFAULT_TOL) -> PsdReport:
    if not tol > 0:
        raise InputError(f"tol must be positive, got {tol}")
    h = hermitian(a)
    w = np.linalg.eigvalsh(h)
    scale = max(1.0, float(np.max(np.abs(w))))
    return PsdReport(
        is_psd=bool(w[0] >= -tol * scale),
        min_eigenvalue=float(w[0]),
        numeric_rank=int(np.sum(np.abs(w) > tol * scale)),
    )


@lru_cache(maxsize=16)
def _basis(n: int) -> tuple[np.ndarray, ...]:
    out = [np.eye(n, dtype=complex) / np.sqrt(n)]
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((n, n), dtype=complex)
            a[j, k] = -1j / np.sqrt(2)
            a[k, j] = 1j / np.sqrt(2)
            out += [s, a]
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1.0
        d[l] = -l
        out.append(np.diag(d / np.sqrt(l * (l + 1))).astype(complex))
    return tuple(_frozen(b) for b in out)


def hermitian_basis(n: int) -> list[np.ndarray]:
    """Orthonormal basis of the n*n Hermitian matrices under Tr(AB).

    The first element is ``I/sqrt(n)``; then for each pair j<k the symmetric
    and antisymmetric off-diagonal elements; then the traceless diagonals
    (generalized Gell-Mann order).  For n=2 this is (I, X, Y, Z)/sqrt(2).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InputError(f"basis dimension must be a positive integer, got {n!r}")
    return list(_basis(int(n)))


def basis_stack(n: int) -> np.ndarray:
    """hermitian_basis(n) as an (n*n, n, n) array."""
    return np.stack(hermitian_basis(n))


def transpose_in_basis(a) -> np.ndarray:
    """Entrywise transpose in the standard basis (not the conjugate transpose)."""
    return _frozen(as_matrix(a).T.copy())


def matrix_to_dict(a) -> dict:
    a = as_matrix(a)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_dict(d: dict, name: str = "matrix") -> np.ndarray:
    try:
        dim = int(d["dim"])
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{name}: expected fields 'dim', 're', 'im' ({exc})") from None
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise InputError(f"{name}: declared dim {dim} but re/im have shapes {re.shape}/{im.shape}")
    return as_matrix(re + 1j * im, name)
