"""Kraus channels, Choi matrices and superoperator matrices.

Convention ("dagger-left"): a Kraus list ``V`` acts as

    A(rho) = sum_i V_i^dagger rho V_i

so A is trace-preserving iff sum V_i V_i^dagger = I and unital iff
sum V_i^dagger V_i = I.

Choi matrices use column-stacking ``vec`` over the matrix units
E_jk = |j><k|.  With K_i = V_i^dagger the Choi matrix is

    C = sum_i |vec K_i><vec K_i| = sum_jk E_jk (x) A(E_jk),

i.e. ``C[j*n + a, k*n + b] = A(E_jk)[a, b]``.  This is the usual
(I (x) A)|Omega><Omega| layout with the input factor first.

Every map type here exposes ``dim`` and ``act(X)``, the complex-linear
action on arbitrary n*n matrices.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError, NotCompletelyPositive
from .operators import (
    DEFAULT_TOL,
    _frozen,
    as_matrix,
    basis_stack,
    hermitian,
    matrix_from_dict,
    matrix_to_dict,
    opnorm,
)

CONVENTIONS = ("dagger-left", "dagger-right")


@dataclass(frozen=True)
class KrausChannel:
    kraus_ops: tuple

    def __post_init__(self):
        ops = [as_matrix(v, f"Kraus operator #{i}") for i, v in enumerate(self.kraus_ops)]
        if not ops:
            raise InputError("a channel needs at least one Kraus operator")
        n = ops[0].shape[0]
        for i, v in enumerate(ops):
            if v.shape != (n, n):
                raise InputError(f"Kraus operator #{i} has shape {v.shape}, expected {(n, n)}")
        if all(not np.any(v) for v in ops):
            raise InputError("all Kraus operators are zero")
        object.__setattr__(self, "kraus_ops", tuple(ops))

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    @property
    def stack(self) -> np.ndarray:
        return np.stack(self.kraus_ops)

    def act(self, x) -> np.ndarray:
        v = self.stack
        return np.einsum("iba,bc,icd->ad", v.conj(), np.asarray(x, dtype=complex), v)


def kraus(*ops) -> KrausChannel:
    return KrausChannel(tuple(ops))


@dataclass(frozen=True)
class ChoiMatrix:
    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = hermitian(self.matrix, "Choi matrix")
        if m.shape != (self.dim**2, self.dim**2):
            raise InputError(f"Choi matrix for n={self.dim} must be {self.dim**2}x{self.dim**2}, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    def act(self, x) -> np.ndarray:
        n = self.dim
        c = self.matrix.reshape(n, n, n, n)  # [j, a, k, b]
        return np.einsum("jakb,jk->ab", c, np.asarray(x, dtype=complex))


@dataclass(frozen=True)
class SuperOpMatrix:
    """Real matrix of a map on Hermitian operators in the hermitian_basis ordering."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (self.dim**2, self.dim**2):
            raise InputError(f"superoperator for n={self.dim} must be {self.dim**2}x{self.dim**2}, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InputError("superoperator has non-finite entries")
        object.__setattr__(self, "matrix", _frozen(m))

    def act(self, x) -> np.ndarray:
        # complex-linear extension: expand x in the Hermitian basis with complex coefficients
        b = basis_stack(self.dim)
        coeff = np.einsum("mab,ba->m", b, np.asarray(x, dtype=complex))
        return np.einsum("m,mab->ab", self.matrix @ coeff, b)


@dataclass(frozen=True)
class TransposeComposed:
    """rho -> inner(rho^T)."""

    inner: object

    @property
    def dim(self) -> int:
        return self.inner.dim

    def act(self, x) -> np.ndarray:
        return self.inner.act(np.asarray(x).T)


@dataclass(frozen=True)
class ExplicitMap:
    """A linear map given by a Python callable on n*n complex matrices."""

    dim: int
    func: Callable[[np.ndarray], np.ndarray]

    def act(self, x) -> np.ndarray:
        return np.asarray(self.func(np.asarray(x, dtype=complex)), dtype=complex)


def transposition_map(n: int) -> ExplicitMap:
    return ExplicitMap(n, lambda x: x.T)


def depolarizing_map(n: int) -> ExplicitMap:
    """rho -> Tr(rho) I/n."""
    return ExplicitMap(n, lambda x: np.trace(x) * np.eye(n) / n)


def identity_channel(n: int) -> KrausChannel:
    return kraus(np.eye(n))


def apply(ch, rho) -> np.ndarray:
    rho = hermitian(rho, "input state")
    if rho.shape[0] != ch.dim:
        raise InputError(f"dimension mismatch: map acts on n={ch.dim}, input has n={rho.shape[0]}")
    out = ch.act(rho)
    return _frozen((out + out.conj().T) / 2)


def vec(m) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(m).T.reshape(-1)


def unvec(x, n: int) -> np.ndarray:
    return np.asarray(x).reshape(n, n).T


def choi_of(ch) -> ChoiMatrix:
    """Choi matrix of a channel, or of any map exposing ``act``."""
    n = ch.dim
    if isinstance(ch, KrausChannel):
        ks = np.array([vec(v.conj().T) for v in ch.kraus_ops])
        return ChoiMatrix(n, ks.T @ ks.conj())
    if isinstance(ch, ChoiMatrix):
        return ch
    c = np.zeros((n, n, n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = 1
            c[j, :, k, :] = ch.act(e)
    return ChoiMatrix(n, c.reshape(n * n, n * n))


def kraus_from_choi(c: ChoiMatrix, tol: float = DEFAULT_TOL) -> KrausChannel:
    """Spectral (Hilbert-Schmidt orthogonal) Kraus decomposition of a psd Choi matrix.

    Eigenvalues below ``tol * Tr(C)`` are dropped.
    """
    if not isinstance(c, ChoiMatrix):
        c = choi_of(c)
    n = c.dim
    w, x = np.linalg.eigh(c.matrix)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -tol * scale:
        raise NotCompletelyPositive(w[0])
    cut = tol * max(float(np.trace(c.matrix).real), np.finfo(float).tiny)
    keep = np.flatnonzero(w > cut)[::-1]
    if keep.size == 0:
        raise InputError("Choi matrix is zero within tolerance")
    ops = [np.sqrt(w[i]) * unvec(x[:, i], n).conj().T for i in keep]
    return KrausChannel(tuple(ops))


def canonical_kraus(ch, tol: float = DEFAULT_TOL) -> KrausChannel:
    """Reduce any CP map to its spectral Kraus set."""
    return kraus_from_choi(choi_of(ch), tol)


class TraceInvariants(NamedTuple):
    op_trace: float
    kraus_trace_sum: float
    spectral_trace: float


def operator_trace(ch) -> float:
    """Trace of the map as an operator on gl(n), summed over matrix units."""
    n = ch.dim
    total = 0j
    for j in range(n):
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = 1
            total += ch.act(e)[j, k]
    return float(total.real)


def trace_invariants(ch: KrausChannel) -> TraceInvariants:
    v = ch.stack
    return TraceInvariants(
        op_trace=operator_trace(ch),
        kraus_trace_sum=float(np.sum(np.abs(np.trace(v, axis1=1, axis2=2)) ** 2)),
        spectral_trace=spectral_trace(ch),
    )


def spectral_trace(ch: KrausChannel) -> float:
    """Tr(sum V_i^dagger V_i), equal to the trace of the Choi matrix."""
    return float(np.sum(np.abs(ch.stack) ** 2))


def normalize(ch: KrausChannel) -> KrausChannel:
    st = spectral_trace(ch)
    if not st > 0:
        raise InputError("cannot normalize the zero map")
    return KrausChannel(tuple(v / np.sqrt(st) for v in ch.kraus_ops))


class TpUnitalReport(NamedTuple):
    trace_preserving: bool
    unital: bool
    tp_residual: float
    unital_residual: float


def tp_unital_report(ch: KrausChannel, tol: float = DEFAULT_TOL) -> TpUnitalReport:
    v = ch.stack
    eye = np.eye(ch.dim)
    tp = opnorm(np.einsum("iab,icb->ac", v, v.conj()) - eye)
    un = opnorm(np.einsum("iba,ibc->ac", v.conj(), v) - eye)
    return TpUnitalReport(tp <= tol, un <= tol, tp, un)


def is_trace_preserving(ch, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """TP check for any map: the dual map must send I to I."""
    if isinstance(ch, KrausChannel):
        r = tp_unital_report(ch, tol)
        return r.trace_preserving, r.tp_residual
    n = ch.dim
    # Tr(A(E_jk)) = delta_jk for every matrix unit
    res = 0.0
    for j in range(n):
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = 1
            res = max(res, abs(np.trace(ch.act(e)) - (j == k)))
    return res <= tol, float(res)


def superop_matrix(ch) -> SuperOpMatrix:
    """Entry (a, b) is Tr(B_a map(B_b)) over hermitian_basis(n)."""
    if isinstance(ch, SuperOpMatrix):
        return ch
    n = ch.dim
    b = basis_stack(n)
    images = np.stack([ch.act(bb) for bb in b])
    s = np.einsum("aij,bji->ab", b, images)
    return SuperOpMatrix(n, s.real)


def channel_to_dict(ch: KrausChannel) -> dict:
    return {
        "dim": ch.dim,
        "convention": "dagger-left",
        "kraus": [matrix_to_dict(v) for v in ch.kraus_ops],
    }


def channel_from_dict(d: dict) -> KrausChannel:
    try:
        n = int(d["dim"])
        mats = d["kraus"]
    except (KeyError, TypeError, ValueError):
        raise InputError("channel file needs fields 'dim' and 'kraus'") from None
    conv = d.get("convention", "dagger-left")
    if conv not in CONVENTIONS:
        raise InputError(f"unknown convention {conv!r}; expected one of {CONVENTIONS}")
    ops = []
    for i, m in enumerate(mats):
        v = matrix_from_dict(m, f"kraus[{i}]")
        if v.shape != (n, n):
            raise InputError(f"kraus[{i}] is {v.shape[0]}x{v.shape[0]} but the file declares dim {n}")
        ops.append(v if conv == "dagger-left" else v.conj().T)
    return KrausChannel(tuple(ops))


def choi_to_dict(c: ChoiMatrix) -> dict:
    return {"type": "choi", "n": c.dim, **matrix_to_dict(c.matrix)}


def choi_from_dict(d: dict) -> ChoiMatrix:
    m = matrix_from_dict(d, "choi")
    size = m.shape[0]
    n = int(d.get("n", round(np.sqrt(size))))
    if n * n != size:
        raise InputError(f"Choi matrix for n={n} must be of size n^2={n * n}, got {size}")
    return ChoiMatrix(n, hermitian(m, "Choi matrix"))


def superop_to_dict(s: SuperOpMatrix) -> dict:
    return {"type": "superop", "basis": "hermitian", "n": s.dim, "matrix": s.matrix.tolist()}


def superop_from_dict(d: dict) -> SuperOpMatrix:
    try:
        n = int(d["n"])
        m = np.asarray(d["matrix"], dtype=float)
    except (KeyError, TypeError, ValueError):
        raise InputError("superop file needs fields 'n' and 'matrix'") from None
    if m.shape != (n * n, n * n):
        raise InputError(f"superop for n={n} must be {n * n}x{n * n}, got {m.shape}")
    return SuperOpMatrix(n, m)
