"""Concrete maps: the Pauli-diagonal qubit families and a 3x3 Kraus triple.

A qubit state (I + x X + y Y + z Z)/2 is identified with its Bloch vector
(x, y, z).  The Pauli-diagonal map sends it to

    (lambda1 x, lambda2 y, lambda3 z + t).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ballmaps import AffineBallMap
from .channels import KrausChannel, SuperOpMatrix, choi_of, kraus_from_choi
from .errors import InputError, NotCompletelyPositive
from .operators import DEFAULT_TOL, PAULIS, psd_report


@dataclass(frozen=True)
class PauliDiagonalMap:
    lambda1: float
    lambda2: float
    lambda3: float
    t: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.lambda1, self.lambda2, self.lambda3, self.t])):
            raise InputError("qubit map parameters must be finite")

    def params(self) -> tuple[float, float, float, float]:
        return (self.lambda1, self.lambda2, self.lambda3, self.t)


def qubit_family(case: int, u: float, v: float | None = None) -> PauliDiagonalMap:
    """Extreme qubit maps touching the Bloch sphere in two points (1), one point (2) or a circle (3)."""
    cu, su = np.cos(u), np.sin(u)
    if case == 1:
        if v is None or not 0 < u < v:
            raise InputError(f"case 1 needs 0 < u < v, got u={u}, v={v}")
        cv, sv = np.cos(v), np.sin(v)
        return PauliDiagonalMap(cu, cv, cu * cv, su * sv)
    if case == 2:
        return PauliDiagonalMap(cu, cu, cu**2, su**2)
    if case == 3:
        if v is None:
            raise InputError("case 3 needs both u and v")
        cv, sv = np.cos(v), np.sin(v)
        r = np.sqrt(1 - cu**2 * cv**2)
        return PauliDiagonalMap(r, r, su * r, su * sv**2)
    raise InputError(f"case must be 1, 2 or 3, got {case!r}")


def to_bloch_affine(m: PauliDiagonalMap) -> AffineBallMap:
    return AffineBallMap(np.diag([m.lambda1, m.lambda2, m.lambda3]), [0.0, 0.0, m.t])


def pauli_superop(m: PauliDiagonalMap) -> SuperOpMatrix:
    """Matrix in the (I, X, Y, Z)/sqrt(2) basis; the shift t sits in the I column."""
    s = np.diag([1.0, m.lambda1, m.lambda2, m.lambda3])
    s[3, 0] = m.t
    return SuperOpMatrix(2, s)


class QubitChannel(NamedTuple):
    superop: SuperOpMatrix
    kraus: KrausChannel | None
    completely_positive: bool
    min_choi_eigenvalue: float


def to_channel(m: PauliDiagonalMap, tol: float = DEFAULT_TOL) -> QubitChannel:
    """Superoperator of the map, plus a Kraus form when the Choi matrix is psd."""
    s = pauli_superop(m)
    c = choi_of(s)
    rep = psd_report(c.matrix, tol)
    ch = None
    if rep.is_psd:
        try:
            ch = kraus_from_choi(c, tol)
        except NotCompletelyPositive:
            ch = None
    return QubitChannel(s, ch, ch is not None, rep.min_eigenvalue)


def bloch_vector(rho) -> np.ndarray:
    rho = np.asarray(rho)
    return np.array([np.real(np.trace(rho @ p)) for p in PAULIS])


def state_from_bloch(r) -> np.ndarray:
    x, y, z = r
    return (np.eye(2) + x * PAULIS[0] + y * PAULIS[1] + z * PAULIS[2]) / 2


def example33(alpha: float) -> KrausChannel:
    """Three 3x3 Kraus operators with sum V_i V_i^dagger = I for every alpha.

    At alpha = 0 the products V_i V_j^dagger span all 3x3 matrices; for
    alpha != 0 no pure state is sent to a pure state.
    """
    if not np.isfinite(alpha):
        raise InputError("alpha must be finite")
    s = np.sqrt(1 + alpha**2)
    v1 = np.diag([1 / np.sqrt(3), 1 / np.sqrt(2), 1 / s])
    v2 = np.zeros((3, 3))
    v2[0, 1] = 1 / np.sqrt(3)
    v2[1, 2] = 1 / np.sqrt(2)
    v2[2, 0] = alpha / s
    v3 = np.zeros((3, 3))
    v3[0, 2] = 1 / np.sqrt(3)
    return KrausChannel((v1, v2, v3))


def ellipsoid_samples(m: PauliDiagonalMap, count: int = 2000) -> np.ndarray:
    """Fibonacci points on the Bloch sphere and their images, columns x,y,z,x',y',z'."""
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    r = np.sqrt(1 - z * z)
    phi = np.pi * (3 - np.sqrt(5)) * i
    pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    return np.hstack([pts, to_bloch_affine(m)(pts)])
