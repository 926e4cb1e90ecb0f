"""Extremality certificates for positive and completely positive maps.

* :func:`choi_extremality` -- Choi's linear-independence criteria for unital,
  trace-preserving and bistochastic CP maps, plus single-Kraus extremality in
  the cone of CP maps.
* :func:`find_pure_images` -- seeded multistart search for pure states whose
  image is again (proportional to) a pure state.
* :func:`invertible_extreme_report` -- the equivalent characterizations of
  invertible extreme CP maps, checked independently of each other.
* :func:`fix_extreme_certificate` -- extremality from enough affinely
  independent pure states in the image.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .channels import (
    SuperOpMatrix,
    canonical_kraus,
    choi_of,
    is_trace_preserving,
    kraus_from_choi,
    superop_matrix,
    tp_unital_report,
)
from .errors import InputError, ModeError, NotCompletelyPositive
from .operators import DEFAULT_TOL, psd_report
from .states import PureState, affine_rank, rank_one_vector

MODES = ("unital", "trace_preserving", "bistochastic", "cone")
MODE_ALIASES = {"tp": "trace_preserving", "trace-preserving": "trace_preserving"}
INDEPENDENCE_RTOL = 1e-8
WITNESS_RESIDUAL = 1e-8
WITNESS_FIDELITY = 1 - 1e-4
# witnesses are accurate to about sqrt(WITNESS_RESIDUAL) in the state, so
# determinant tests on them need a matching tolerance
WITNESS_GP_TOL = 1e-3
NOT_FOUND = "not found within budget"


@dataclass(frozen=True)
class ExtremalityReport:
    mode: str
    extreme: bool
    gram_rank: int
    gram_size: int
    min_singular_value: float

    def as_dict(self) -> dict:
        return asdict(self)


def _family(v: np.ndarray, mode: str) -> np.ndarray:
    s = v.shape[0]
    vd = v.conj().transpose(0, 2, 1)
    rows = []
    for i in range(s):
        for j in range(s):
            if mode == "unital":
                rows.append((vd[i] @ v[j]).ravel())
            elif mode == "trace_preserving":
                rows.append((v[i] @ vd[j]).ravel())
            else:
                # V_i^dag V_j (+) V_i V_j^dag; off-diagonal blocks are zero
                rows.append(np.concatenate([(vd[i] @ v[j]).ravel(), (v[i] @ vd[j]).ravel()]))
    return np.array(rows)


def choi_extremality(ch, mode: str = "trace_preserving", tol: float = DEFAULT_TOL) -> ExtremalityReport:
    """Decide extremality of a CP map within the convex set selected by ``mode``.

    The map is first reduced to its spectral Kraus set, so the answer does
    not depend on the Kraus representation passed in.  For the three
    normalized modes the s^2 operators of the relevant family must be
    linearly independent; in ``cone`` mode the Choi matrix must have rank 1.
    """
    mode = MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise InputError(f"unknown mode {mode!r}; expected one of {MODES}")
    canon = canonical_kraus(ch, tol)
    if mode == "cone":
        w = np.linalg.eigvalsh(choi_of(canon).matrix)[::-1]
        rank = psd_report(choi_of(ch).matrix, tol).numeric_rank
        second = float(w[1]) if len(w) > 1 else 0.0
        return ExtremalityReport(mode, rank == 1, rank, 1, max(second, 0.0))

    rep = tp_unital_report(canon, tol)
    if mode in ("unital", "bistochastic") and not rep.unital:
        raise ModeError("unital", rep.unital_residual)
    if mode in ("trace_preserving", "bistochastic") and not rep.trace_preserving:
        raise ModeError("trace-preserving", rep.tp_residual)

    fam = _family(canon.stack, mode)
    size = fam.shape[0]
    sv = np.linalg.svd(fam, compute_uv=False)
    rank = int(np.sum(sv > INDEPENDENCE_RTOL * sv[0]))
    smin = float(sv[-1]) if len(sv) == size else 0.0
    return ExtremalityReport(mode, rank == size, rank, size, smin)


# --- pure-image search -------------------------------------------------------


def liouville_matrix(ch) -> np.ndarray:
    """Matrix M with ``A(X).ravel() == M @ X.ravel()`` (row-major vec)."""
    n = ch.dim
    m = np.zeros((n * n, n * n), dtype=complex)
    for j in range(n):
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = 1
            m[:, j * n + k] = np.asarray(ch.act(e)).ravel()
    return m


class Witness(NamedTuple):
    state: PureState
    image: np.ndarray  # unnormalized image; rank one within the residual
    residual: float


class PureImageResult(NamedTuple):
    witnesses: list
    best_residual: float
    diagnostics: list


def mixedness(y: np.ndarray) -> np.ndarray:
    """1 - Tr(y^2)/Tr(y)^2 from eigenvalues, for one matrix or a stack.

    Uses sum_{i<j} lam_i lam_j directly, avoiding the cancellation in
    1 - Tr(y^2)/Tr(y)^2 near pure states.
    """
    y = np.asarray(y)
    lam = np.linalg.eigvalsh((y + np.swapaxes(y, -1, -2).conj()) / 2)[..., ::-1]
    t = lam.sum(axis=-1)
    rest = lam[..., 1:].sum(axis=-1)
    cross = lam[..., 0] * rest + (rest**2 - np.sum(lam[..., 1:] ** 2, axis=-1)) / 2
    return 2 * cross / (t * t)


class _PurityProblem:
    """Batched 1 - purity of normalized images, and its sphere-projected gradient."""

    def __init__(self, ch):
        self.n = ch.dim
        self.m = liouville_matrix(ch)
        self.mc = self.m.conj()
        # A*(I), the dual map applied to the identity
        self.dual_eye = (np.eye(self.n).ravel() @ self.mc).reshape(self.n, self.n)
        self.tfloor = 1e-14 * max(1.0, float(np.max(np.abs(np.linalg.eigvalsh(self.dual_eye)))))

    def images(self, x):
        n = self.n
        proj = x[:, :, None] * x.conj()[:, None, :]
        return (proj.reshape(len(x), -1) @ self.m.T).reshape(-1, n, n)

    def __call__(self, x):
        n = self.n
        y = self.images(x)
        t = np.einsum("rii->r", y).real
        dead = t <= self.tfloor
        ts = np.where(dead, 1.0, t)
        P = np.sum(np.abs(y) ** 2, axis=(1, 2))
        r = np.where(dead, 1.0, 1 - P / ts**2)
        ad = (y.reshape(len(x), -1) @ self.mc).reshape(-1, n, n)
        # complex gradient g with dr = 2 Re <delta, g>
        g = -2 * np.einsum("rab,rb->ra", ad, x) / ts[:, None] ** 2 + 2 * (P / ts**3)[:, None] * (x @ self.dual_eye.T)
        g = g - np.real(np.sum(x.conj() * g, axis=1))[:, None] * x
        g[dead] = 0
        return r, g, dead


POLISH_BELOW = 1e-6
# first-order descent hands rows below this residual to the Newton polish
HANDOFF_RESIDUAL = 1e-8


def _horizontal_basis(x):
    """Real orthonormal bases of the tangent directions orthogonal to x and i*x, one per row."""
    z = np.concatenate([x.real, x.imag], axis=1)
    jz = np.concatenate([-x.imag, x.real], axis=1)
    _, _, vt = np.linalg.svd(np.stack([z, jz], axis=1), full_matrices=True)
    return vt[:, 2:, :]  # (rows, 2n-2, 2n)


def _newton_polish(problem, x, iters=60, h=1e-6):
    """Riemannian Newton steps on the residual with a finite-difference Hessian.

    Pure-image minima are often degenerate (the residual is quartic in some
    directions), where first-order descent slows to a crawl; Newton still
    contracts the error by a constant factor per step there.  Values are
    compared through ``mixedness``, which stays accurate near zero.
    """
    n = x.shape[1]

    def tangent(v):
        return v[..., :n] + 1j * v[..., n:]

    def rgrad(pts, basis):
        _, g, _ = problem(pts)
        gr = 2 * np.concatenate([g.real, g.imag], axis=1)
        return np.einsum("rkd,rd->rk", basis, gr)

    def retract(pts, v):
        y = pts + v
        return y / np.linalg.norm(y, axis=1, keepdims=True)

    val = mixedness(problem.images(x))
    active = np.ones(len(x), dtype=bool)
    for _ in range(iters):
        idx = np.flatnonzero(active & (val > 0))
        if idx.size == 0:
            break
        xa = x[idx]
        basis = _horizontal_basis(xa)
        grad = rgrad(xa, basis)
        k = basis.shape[1]
        hess = np.empty((len(idx), k, k))
        for j in range(k):
            d = h * tangent(basis[:, j, :])
            hess[:, :, j] = (rgrad(retract(xa, d), basis) - rgrad(retract(xa, -d), basis)) / (2 * h)
        hess = (hess + np.swapaxes(hess, 1, 2)) / 2
        w, v = np.linalg.eigh(hess)
        floor = 1e-12 * np.maximum(np.abs(w).max(axis=1, keepdims=True), 1e-300)
        coef = np.einsum("rkj,rk->rj", v, grad) / np.maximum(np.abs(w), floor)
        step = -np.einsum("rkj,rj->rk", v, coef)
        moved = np.zeros(len(idx), dtype=bool)
        t = 1.0
        for _ in range(30):
            todo = np.flatnonzero(~moved)
            if todo.size == 0:
                break
            trial = retract(xa[todo], t * tangent(np.einsum("rk,rkd->rd", step[todo], basis[todo])))
            tv = mixedness(problem.images(trial))
            ok = tv < val[idx[todo]]
            x[idx[todo[ok]]] = trial[ok]
            val[idx[todo[ok]]] = tv[ok]
            moved[todo[ok]] = True
            t *= 0.5
        active[idx[~moved]] = False
    return x


def _descend(problem, x, maxiter=3000, stall=60):
    """Riemannian gradient descent on the unit sphere, Barzilai-Borwein steps with monotone backtracking.

    Every row of ``x`` is an independent restart; rows never interact, so
    the result for a row does not depend on the rest of the batch.
    """
    r, g, dead = problem(x)
    eta = np.full(len(x), 0.1)
    active = ~dead & (np.linalg.norm(g, axis=1) > 0)
    since = np.zeros(len(x), dtype=int)
    best = r.copy()
    x_prev = g_prev = None
    for _ in range(maxiter):
        if not active.any():
            break
        if x_prev is not None:
            s = x - x_prev
            d = g - g_prev
            sy = np.real(np.sum(s.conj() * d, axis=1))
            ss = np.real(np.sum(s.conj() * s, axis=1))
            eta = np.clip(np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), 2 * eta), 1e-8, 1e4)
        x_prev, g_prev = x.copy(), g.copy()
        todo = active.copy()
        for _ in range(50):
            if not todo.any():
                break
            idx = np.flatnonzero(todo)
            xt = x[idx] - eta[idx, None] * g[idx]
            xt /= np.linalg.norm(xt, axis=1, keepdims=True)
            rt, gt, _ = problem(xt)
            ok = rt <= r[idx]
            acc = idx[ok]
            x[acc], r[acc], g[acc] = xt[ok], rt[ok], gt[ok]
            todo[acc] = False
            eta[todo] *= 0.5
        # rows whose line search failed outright have converged to rounding level
        improved = r < best - np.maximum(1e-6 * np.abs(best), 1e-18)
        since = np.where(improved, 0, since + 1)
        best = np.minimum(best, r)
        active &= ~todo & (since < stall) & (np.linalg.norm(g, axis=1) > 1e-15) & (r > HANDOFF_RESIDUAL)
    return x, dead


def find_pure_images(ch, restarts: int = 64, seed: int = 0) -> PureImageResult:
    """Seeded multistart search for pure states with (proportionally) pure images.

    Minimizes 1 - purity(A(|x><x|)/Tr A(|x><x|)) over unit vectors x, one
    restart per child of ``SeedSequence(seed)``: projected gradient descent
    first, then Newton polishing of the rows that got close to zero.
    Minima with residual <= 1e-8 become witnesses, merged by single-linkage
    on fidelity >= 1 - 1e-4.  Candidates are sorted by (residual,
    coordinates) first, so the output does not depend on restart order.
    """
    if restarts < 1:
        raise InputError("restarts must be >= 1")
    problem = _PurityProblem(ch)
    n = problem.n
    x0 = []
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x0.append(v / np.linalg.norm(v))
    x, dead = _descend(problem, np.array(x0))
    r, _, dead = problem(x)
    near = np.flatnonzero(~dead & (r <= POLISH_BELOW))
    if near.size:
        x[near] = _newton_polish(problem, x[near].copy())
    _, _, dead = problem(x)
    diagnostics = [f"restart {k}: converged to a pure state annihilated by the map; excluded" for k in np.flatnonzero(dead)]
    live = np.flatnonzero(~dead)
    if live.size == 0:
        return PureImageResult([], 1.0, diagnostics)
    x = np.array([_canonical_phase(v) for v in x[live]])
    y = problem.images(x)
    res = np.clip(mixedness(y), 0.0, None)
    order = sorted(range(len(x)), key=lambda i: (res[i], *np.round(x[i].view(float), 12)))
    good = [i for i in order if res[i] <= WITNESS_RESIDUAL]
    witnesses = []
    for i in fidelity_representatives(x[good]):
        k = good[i]
        witnesses.append(Witness(PureState(x[k]), (y[k] + y[k].conj().T) / 2, float(res[k])))
    return PureImageResult(witnesses, float(res.min()), diagnostics)


def fidelity_representatives(vectors, threshold: float = WITNESS_FIDELITY) -> list[int]:
    """Indices of the first member of each single-linkage cluster under |<x|y>|^2 >= threshold.

    Linkage is transitive so that a chain of near-identical minima (common at
    degenerate minimizers, where double precision pins the location only to
    about 1e-3) collapses to one witness.
    """
    v = np.asarray(vectors)
    if len(v) == 0:
        return []
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    close = np.abs(v.conj() @ v.T) ** 2 >= threshold
    label = list(range(len(v)))

    def root(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i, j in zip(*np.nonzero(np.triu(close, 1))):
        a, b = root(i), root(j)
        label[max(a, b)] = min(a, b)
    return sorted({root(i) for i in range(len(v))})


def _canonical_phase(x):
    x = np.asarray(x, dtype=complex)
    k = int(np.argmax(np.abs(x) > np.abs(x).max() * (1 - 1e-9)))
    return x * np.conj(x[k]) / abs(x[k]) / np.linalg.norm(x)


# --- invertible extreme maps ---------------------------------------------------


@dataclass
class InvertibleExtremeReport:
    """Independent checks of the equivalent conditions for invertible extreme CP maps.

    ``cond_de_status`` is ``"found"`` or ``"not found within budget"``; a
    failed search is never reported as a disproof.
    """

    cond_a_inverse_cp: bool
    cond_b_single_invertible_kraus: bool
    cond_de_rank_one_images: bool
    cond_de_status: str
    witnesses: list = field(default_factory=list)
    consistent: bool = True
    seed: int = 0
    budget: int = 0

    def as_dict(self) -> dict:
        return {
            "cond_a_inverse_cp": self.cond_a_inverse_cp,
            "cond_b_single_invertible_kraus": self.cond_b_single_invertible_kraus,
            "cond_de_rank_one_images": self.cond_de_rank_one_images,
            "cond_de_status": self.cond_de_status,
            "witnesses": [
                {"state": w.state.vector, "image": w.image, "residual": w.residual} for w in self.witnesses
            ],
            "consistent": self.consistent,
            "seed": self.seed,
            "budget": self.budget,
        }


def inverse_is_cp(ch, tol: float = DEFAULT_TOL) -> bool:
    s = superop_matrix(ch).matrix
    sv = np.linalg.svd(s, compute_uv=False)
    if sv[-1] <= INDEPENDENCE_RTOL * sv[0]:
        return False
    inv = SuperOpMatrix(superop_matrix(ch).dim, np.linalg.inv(s))
    try:
        kraus_from_choi(choi_of(inv), tol)
    except NotCompletelyPositive:
        return False
    return True


def single_invertible_kraus(ch, tol: float = DEFAULT_TOL) -> bool:
    c = choi_of(ch)
    rep = psd_report(c.matrix, tol)
    if not rep.is_psd or rep.numeric_rank != 1:
        return False
    v = kraus_from_choi(c, tol).kraus_ops[0]
    sv = np.linalg.svd(v, compute_uv=False)
    return bool(sv[-1] > INDEPENDENCE_RTOL * sv[0])


def _unit_rank_one(op):
    try:
        x = rank_one_vector(op)
    except InputError:
        return None
    return x / np.linalg.norm(x)


def general_position_witnesses(witnesses, n: int, max_sets: int = 5000, tol: float = WITNESS_GP_TOL):
    """First n+1 witnesses (in list order) that are in general position, together with their images."""
    states, images, keep = [], [], []
    for i, w in enumerate(witnesses):
        y = _unit_rank_one(w.image / np.trace(w.image).real)
        if y is not None:
            states.append(w.state.vector)
            images.append(y)
            keep.append(i)
    if len(keep) < n + 1:
        return None
    states, images = np.array(states).T, np.array(images).T

    def spread(mat, idx):
        return all(abs(np.linalg.det(mat[:, list(sub)])) > tol for sub in combinations(idx, n))

    for count, idx in enumerate(combinations(range(len(keep)), n + 1)):
        if count >= max_sets:
            break
        if spread(states, idx) and spread(images, idx):
            return [witnesses[keep[i]] for i in idx]
    return None


def invertible_extreme_report(ch, budget: int = 256, seed: int = 0, tol: float = DEFAULT_TOL) -> InvertibleExtremeReport:
    n = ch.dim
    a = inverse_is_cp(ch, tol)
    b = single_invertible_kraus(ch, tol)
    search = find_pure_images(ch, restarts=budget, seed=seed)
    chosen = general_position_witnesses(search.witnesses, n)
    de = chosen is not None
    return InvertibleExtremeReport(
        cond_a_inverse_cp=a,
        cond_b_single_invertible_kraus=b,
        cond_de_rank_one_images=de,
        cond_de_status="found" if de else NOT_FOUND,
        witnesses=chosen or [],
        consistent=(a == b == de),
        seed=seed,
        budget=budget,
    )


# --- fix-extreme certificate --------------------------------------------------------


class FixExtremeCertificate(NamedTuple):
    pure_image_count: int
    image_affine_rank: int
    certified: bool


def fix_extreme_certificate(ch, restarts: int = 64, seed: int = 0, tol: float = DEFAULT_TOL) -> FixExtremeCertificate:
    """Certify extremality of a positive trace-preserving map from its pure images.

    Trace-one Hermitian n*n matrices form an affine space of dimension
    n^2 - 1, so n^2 affinely independent pure images are required.
    """
    ok, res = is_trace_preserving(ch, tol)
    if not ok:
        raise ModeError("trace-preserving", res)
    n = ch.dim
    found = find_pure_images(ch, restarts=restarts, seed=seed)
    tops = np.array([_top_vector(w.image) for w in found.witnesses]).reshape(-1, n)
    # distinct inputs can share an image; count distinct pure images
    distinct = [PureState(tops[i]).op for i in fidelity_representatives(tops)]
    rank = affine_rank(distinct, WITNESS_GP_TOL) if distinct else 0
    return FixExtremeCertificate(len(distinct), rank, rank >= n * n)


def _top_vector(y):
    _, v = np.linalg.eigh((y + y.conj().T) / 2)
    return v[:, -1]
