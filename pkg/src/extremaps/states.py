"""Density states, pure states and the geometry of families of states."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import InputError
from .operators import (
    DEFAULT_TOL,
    _frozen,
    hermitian,
    matrix_from_dict,
    matrix_to_dict,
    psd_report,
    spectral_decompose,
)

RANK_ONE_RATIO = 1e-8


@dataclass(frozen=True)
class DensityState:
    op: np.ndarray

    def __post_init__(self):
        op = hermitian(self.op, "density state")
        tr = float(np.trace(op).real)
        if abs(tr - 1) > 1e-10:
            raise InputError(f"density state has trace {tr!r}, expected 1")
        rep = psd_report(op)
        if not rep.is_psd:
            raise InputError(f"density state is not psd (min eigenvalue {rep.min_eigenvalue:.3e})")
        object.__setattr__(self, "op", op)

    @property
    def dim(self) -> int:
        return self.op.shape[0]


@dataclass(frozen=True)
class PureState:
    vector: np.ndarray
    op: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.array(self.vector, dtype=complex).ravel()
        nrm = np.linalg.norm(x)
        if not np.all(np.isfinite(x)) or nrm == 0:
            raise InputError("pure state needs a finite nonzero vector")
        x = x / nrm
        object.__setattr__(self, "vector", _frozen(x))
        object.__setattr__(self, "op", _frozen(np.outer(x, x.conj())))

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    def as_density(self) -> DensityState:
        return DensityState(self.op)


def pure_from_vector(x) -> PureState:
    """The projector |x><x| / <x|x>; invariant under x -> c*x."""
    return PureState(x)


def purity(rho) -> float:
    op = rho.op if isinstance(rho, (DensityState, PureState)) else hermitian(rho)
    return float(np.real(np.sum(op * op.T)))


def rank_one_vector(op, name: str = "operator") -> np.ndarray:
    """Representative vector of a rank-one psd operator (scaled by sqrt of its eigenvalue).

    Raises InputError if the second eigenvalue exceeds 1e-8 times the first.
    """
    w, v = spectral_decompose(op)
    if w[0] <= 0 or (len(w) > 1 and abs(w[1]) > RANK_ONE_RATIO * w[0]) or w[-1] < -RANK_ONE_RATIO * w[0]:
        raise InputError(f"{name} is not rank one (eigenvalues {np.round(w, 12).tolist()})")
    return np.sqrt(w[0]) * v[:, 0]


def general_position(ops, tol: float = DEFAULT_TOL) -> bool:
    """True iff every n of the representative vectors form a basis of C^n.

    ``ops`` are rank-one psd operators (or PureStates).  Each subset
    determinant is computed on unit-normalized vectors, so the test is
    scale-invariant.
    """
    ops = list(ops)
    if not ops:
        raise InputError("general_position needs at least one operator")
    vecs = []
    for i, o in enumerate(ops):
        m = o.op if isinstance(o, PureState) else o
        x = rank_one_vector(m, name=f"operator #{i}")
        vecs.append(x / np.linalg.norm(x))
    n = vecs[0].shape[0]
    if len(vecs) < n:
        raise InputError(f"general position needs at least n={n} operators, got {len(vecs)}")
    X = np.column_stack(vecs)
    return all(abs(np.linalg.det(X[:, list(idx)])) > tol for idx in combinations(range(len(vecs)), n))


def affine_rank(points, tol: float = DEFAULT_TOL) -> int:
    """Maximal number of affinely independent points among ``points``."""
    pts = [np.asarray(p) for p in points]
    if not pts:
        raise InputError("affine_rank of an empty point set")
    shape = pts[0].shape
    if any(p.shape != shape for p in pts):
        raise InputError("affine_rank: points have different shapes")
    if len(pts) == 1:
        return 1
    flat = np.array([p.ravel() for p in pts])
    if np.iscomplexobj(flat):
        flat = np.hstack([flat.real, flat.imag])
    diffs = flat[1:] - flat[0]
    s = np.linalg.svd(diffs, compute_uv=False)
    scale = max(1.0, float(np.max(np.abs(flat))))
    return 1 + int(np.sum(s > tol * scale))


def haar_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_decomposition(rho: DensityState, k: int, seed: int) -> list[tuple[float, PureState]]:
    """A random k-term pure-state decomposition of ``rho``.

    Mixes the spectral ensemble sqrt(mu_j)|z_j> by a Haar-random k*k unitary;
    every k-term pure decomposition arises this way.  Terms of zero weight
    (possible when k exceeds the rank) are dropped.
    """
    if not isinstance(rho, DensityState):
        rho = DensityState(rho)
    mu, z = spectral_decompose(rho.op)
    rank = psd_report(rho.op).numeric_rank
    if k < rank:
        raise InputError(f"k={k} is smaller than the rank {rank} of the state")
    n = rho.dim
    mu = np.clip(mu, 0, None)
    # spectral ensemble padded with zero-weight vectors up to k terms
    amps = np.zeros((k, n), dtype=complex)
    m = min(k, n)
    amps[:m] = (np.sqrt(mu[:m])[:, None] * z[:, :m].T)
    rng = np.random.default_rng(seed)
    u = haar_unitary(k, rng)
    w = u.T @ amps  # w_i = sum_j U_ji sqrt(mu_j) z_j
    out = []
    for vec in w:
        weight = float(np.vdot(vec, vec).real)
        if weight > 1e-15:
            out.append((weight, PureState(vec)))
    return out


def density_to_dict(rho: DensityState) -> dict:
    return {"type": "density", **matrix_to_dict(rho.op)}


def density_from_dict(d: dict) -> DensityState:
    if d.get("type") != "density":
        raise InputError(f"expected a document tagged type='density', got {d.get('type')!r}")
    return DensityState(matrix_from_dict(d, "density state"))
