"""Wigner maps: constructors, classification and consequences.

A Wigner map acts on states as rho -> U rho U^dagger (unitary branch) or
rho -> U rho^T U^dagger (antiunitary branch).  Among linear maps of the
Hermitian operators these are exactly the positive maps that are
orthogonal for Tr(AB).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channels import (
    KrausChannel,
    TransposeComposed,
    choi_of,
    is_trace_preserving,
    kraus_from_choi,
    superop_matrix,
)
from .errors import InputError, ModeError
from .operators import (
    DEFAULT_TOL,
    as_matrix,
    fix_phase,
    matrix_to_dict,
    opnorm,
    psd_report,
)
from .states import DensityState, PureState, haar_unitary, purity, random_decomposition

UNITARY = "Unitary"
ANTIUNITARY = "Antiunitary"
NOT_WIGNER = "NotWigner"
BRANCHES = (UNITARY, ANTIUNITARY)
UNITARY_TOL = 1e-9


def _check_unitary(u) -> np.ndarray:
    u = as_matrix(u, "U")
    dev = opnorm(u.conj().T @ u - np.eye(u.shape[0]))
    if dev > UNITARY_TOL:
        raise InputError(f"U is not unitary: ||U^dagger U - I|| = {dev:.3e}")
    return u


def wigner_channel(u, branch: str = UNITARY):
    """rho -> U rho U^dagger, or rho -> U rho^T U^dagger for the antiunitary branch."""
    u = _check_unitary(u)
    unitary = KrausChannel((u.conj().T,))
    if branch == UNITARY:
        return unitary
    if branch == ANTIUNITARY:
        return TransposeComposed(unitary)
    raise InputError(f"branch must be one of {BRANCHES}, got {branch!r}")


def is_orthogonal_superop(s, tol: float = 1e-10) -> tuple[bool, float]:
    m = np.asarray(getattr(s, "matrix", s), dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"superoperator must be square, got {m.shape}")
    residual = float(np.linalg.norm(m.T @ m - np.eye(m.shape[0]), 2))
    return residual <= tol, residual


@dataclass
class WignerClassification:
    branch: str
    recovered_U: np.ndarray | None
    orthogonality_residual: float
    positivity_witness: PureState | None = None
    seed: int = 0

    def as_dict(self) -> dict:
        return {
            "branch": self.branch,
            "seed": self.seed,
            "U": None if self.recovered_U is None else matrix_to_dict(self.recovered_U),
            "residuals": {"orthogonality": self.orthogonality_residual},
            "positivity_witness": None if self.positivity_witness is None else self.positivity_witness.vector,
        }


def _single_unitary_kraus(m, tol):
    c = choi_of(m)
    rep = psd_report(c.matrix, tol)
    if not rep.is_psd or rep.numeric_rank != 1:
        return None
    v = kraus_from_choi(c, tol).kraus_ops[0]
    u = v.conj().T
    if opnorm(u.conj().T @ u - np.eye(u.shape[0])) > UNITARY_TOL:
        return None
    # global phase: largest-modulus entry real positive
    return fix_phase(u.ravel()).reshape(u.shape)


def classify_wigner(m, tol: float = DEFAULT_TOL, samples: int = 200, seed: int = 0) -> WignerClassification:
    """Unitary / antiunitary / not-Wigner, with the implementing U recovered up to phase."""
    ok, res = is_trace_preserving(m, max(tol, 1e-9))
    if not ok:
        raise ModeError("trace-preserving", res)
    _, orth = is_orthogonal_superop(superop_matrix(m))
    u = _single_unitary_kraus(m, tol)
    if u is not None:
        return WignerClassification(UNITARY, u, orth, seed=seed)
    u = _single_unitary_kraus(TransposeComposed(m), tol)
    if u is not None:
        return WignerClassification(ANTIUNITARY, u, orth, seed=seed)
    return WignerClassification(NOT_WIGNER, None, orth, positivity_violation(m, samples, seed, tol), seed)


def positivity_violation(m, samples: int = 200, seed: int = 0, tol: float = DEFAULT_TOL) -> PureState | None:
    """A sampled pure state with a non-psd image, if one is found."""
    rng = np.random.default_rng(seed)
    n = m.dim
    for _ in range(samples):
        st = random_pure(n, rng)
        if not psd_report(_herm(m.act(st.op)), tol).is_psd:
            return st
    return None


def random_pure(n: int, rng: np.random.Generator) -> PureState:
    return PureState(rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _herm(y):
    y = np.asarray(y)
    return (y + y.conj().T) / 2


class TransitionReport(NamedTuple):
    preserved: bool
    max_deviation: float


def preserves_transition_probs(m, samples: int = 200, seed: int = 0, tol: float = 1e-9) -> TransitionReport:
    """Sampled check of Tr(A(r1) A(r2)) = Tr(r1 r2) over random pure pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        a = random_pure(m.dim, rng).op
        b = random_pure(m.dim, rng).op
        before = np.real(np.sum(a * b.T))
        fa, fb = _herm(m.act(a)), _herm(m.act(b))
        after = np.real(np.sum(fa * fb.T))
        worst = max(worst, abs(after - before))
    return TransitionReport(worst <= tol, float(worst))


class NormLemmaReport(NamedTuple):
    max_score: float
    purity: float
    gap_at_spectral: float


def norm_lemma_check(rho, trials: int = 100, seed: int = 0) -> NormLemmaReport:
    """Largest sum of squared weights over random pure decompositions vs Tr(rho^2).

    Term counts cycle through rank, rank+1, ..., n+1 so that both minimal and
    overcomplete decompositions are sampled.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    if not isinstance(rho, DensityState):
        rho = DensityState(rho)
    pur = purity(rho)
    rank = psd_report(rho.op).numeric_rank
    ks = list(range(rank, rho.dim + 2))
    seeds = np.random.SeedSequence(seed).generate_state(trials)
    best = 0.0
    for i in range(trials):
        dec = random_decomposition(rho, ks[i % len(ks)], int(seeds[i]))
        best = max(best, sum(w * w for w, _ in dec))
    spectral = np.clip(np.linalg.eigvalsh(rho.op), 0, None)
    return NormLemmaReport(float(best), pur, float(abs(np.sum(spectral**2) - pur)))


def random_unitary(n: int, seed: int) -> np.ndarray:
    return haar_unitary(n, np.random.default_rng(seed))
