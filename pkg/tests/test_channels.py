import numpy as np
import pytest
from helpers import (
    rand_channel,
    rand_density,
    rand_hermitian,
    rand_tp_channel,
    rand_unitary,
)
from hypothesis import given, settings
from hypothesis import strategies as st

from extremaps.catalog import example33
from extremaps.channels import (
    ChoiMatrix,
    KrausChannel,
    SuperOpMatrix,
    TransposeComposed,
    apply,
    channel_from_dict,
    channel_to_dict,
    choi_from_dict,
    choi_of,
    choi_to_dict,
    depolarizing_map,
    identity_channel,
    is_trace_preserving,
    kraus,
    kraus_from_choi,
    normalize,
    spectral_trace,
    superop_from_dict,
    superop_matrix,
    superop_to_dict,
    tp_unital_report,
    trace_invariants,
    transposition_map,
    unvec,
    vec,
)
from extremaps.errors import InputError, NotCompletelyPositive
from extremaps.operators import SIGMA_X, SIGMA_Z, matrix_to_dict, psd_report


def test_apply_examples():
    rho = rand_density(np.random.default_rng(0), 2)
    assert np.allclose(apply(kraus(np.eye(2)), rho), rho)
    assert np.allclose(apply(kraus(SIGMA_X), np.diag([1.0, 0])), np.diag([0, 1.0]))
    out = apply(example33(0.2), np.eye(3) / 3)
    assert np.trace(out).real == pytest.approx(1, abs=1e-12)
    assert psd_report(out).is_psd


def test_apply_dimension_mismatch():
    with pytest.raises(InputError, match="dimension"):
        apply(identity_channel(2), np.eye(3) / 3)


def test_apply_uses_dagger_left_convention():
    v = np.array([[0, 1], [0, 0]], dtype=complex)
    rho = np.diag([1.0, 0])
    # V^dagger rho V with V = |0><1| maps |0><0| to |1><1|
    assert np.allclose(apply(kraus(v), rho), np.diag([0, 1.0]))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_apply_linear_hermitian_positive(n, s, seed):
    rng = np.random.default_rng(seed)
    ch = rand_channel(rng, n, s)
    a, b = rand_hermitian(rng, n), rand_hermitian(rng, n)
    out = apply(ch, a)
    assert np.array_equal(out, out.conj().T)
    assert np.allclose(apply(ch, 2 * a - b), 2 * out - apply(ch, b), atol=1e-10)
    assert psd_report(apply(ch, rand_density(rng, n))).is_psd


def test_vec_is_column_stacking():
    m = np.array([[1, 2], [3, 4]])
    assert np.array_equal(vec(m), [1, 3, 2, 4])
    assert np.array_equal(unvec(vec(m), 2), m)


def test_choi_of_examples():
    c = choi_of(kraus(np.eye(2)))
    rep = psd_report(c.matrix)
    assert rep.is_psd and rep.numeric_rank == 1
    assert np.trace(c.matrix).real == pytest.approx(2)
    c = choi_of(kraus(SIGMA_X, SIGMA_Z))
    assert psd_report(c.matrix).numeric_rank == 2
    assert np.trace(c.matrix).real == pytest.approx(4)


def test_choi_of_matches_matrix_unit_images():
    rng = np.random.default_rng(5)
    ch = rand_channel(rng, 3, 2)
    from_kraus = choi_of(ch).matrix
    generic = choi_of(ChoiMatrix(3, from_kraus)).matrix
    via_act = choi_of(TransposeComposed(TransposeComposed(ch))).matrix
    assert np.allclose(from_kraus, via_act, atol=1e-12)
    assert np.array_equal(from_kraus, generic)


@pytest.mark.parametrize("seed", range(5))
def test_choi_trace_is_spectral_trace(seed):
    rng = np.random.default_rng(seed)
    ch = rand_channel(rng, 3, 1 + seed % 4)
    assert np.trace(choi_of(ch).matrix).real == pytest.approx(spectral_trace(ch), rel=1e-12)


def test_choi_act_reproduces_channel():
    rng = np.random.default_rng(6)
    ch = rand_channel(rng, 3, 3)
    rho = rand_hermitian(rng, 3)
    assert np.allclose(choi_of(ch).act(rho), ch.act(rho), atol=1e-12)


def test_kraus_from_choi_identity():
    ch = kraus_from_choi(choi_of(kraus(np.eye(2))))
    assert len(ch.kraus_ops) == 1
    v = ch.kraus_ops[0]
    assert np.allclose(v / v[0, 0], np.eye(2))


def test_kraus_from_choi_swap_not_cp():
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(choi_of(transposition_map(2)).matrix, swap)
    with pytest.raises(NotCompletelyPositive) as exc:
        kraus_from_choi(ChoiMatrix(2, swap))
    assert exc.value.min_eigenvalue == pytest.approx(-1)


@pytest.mark.parametrize("seed", range(10))
def test_kraus_from_choi_roundtrip_and_orthogonal(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 2
    g = rng.standard_normal((n * n, 3)) + 1j * rng.standard_normal((n * n, 3))
    c = ChoiMatrix(n, g @ g.conj().T)
    ch = kraus_from_choi(c)
    assert len(ch.kraus_ops) == 3
    assert np.linalg.norm(choi_of(ch).matrix - c.matrix, 2) <= 1e-9
    gram = np.einsum("iab,jab->ij", ch.stack.conj(), ch.stack)
    assert np.allclose(gram - np.diag(np.diag(gram)), 0, atol=1e-10)


def test_trace_invariants_examples():
    assert trace_invariants(kraus(np.eye(2))) == pytest.approx((4, 4, 2))
    assert trace_invariants(kraus(np.diag([1.0, 2.0]))) == pytest.approx((9, 9, 5))
    assert trace_invariants(kraus(SIGMA_X)) == pytest.approx((0, 0, 2), abs=1e-14)


def test_op_trace_independent_oracle():
    # row-major Liouville matrix sum_i V_i^dagger (x) V_i^T, built without matrix units
    rng = np.random.default_rng(8)
    ch = rand_channel(rng, 3, 3)
    liou = sum(np.kron(v.conj().T, v.T) for v in ch.kraus_ops)
    assert trace_invariants(ch).op_trace == pytest.approx(np.trace(liou).real, rel=1e-12)


def test_normalize_examples():
    v = normalize(kraus(np.eye(2))).kraus_ops[0]
    assert np.allclose(v, np.eye(2) / np.sqrt(2))
    v = normalize(kraus(2 * np.eye(3))).kraus_ops[0]
    assert np.allclose(v, np.eye(3) * 2 / np.sqrt(12))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_normalize_idempotent(n, s, seed):
    ch = normalize(rand_channel(np.random.default_rng(seed), n, s))
    assert spectral_trace(ch) == pytest.approx(1, abs=1e-12)
    again = normalize(ch)
    assert np.allclose(again.stack, ch.stack, atol=1e-12)


def test_normalize_zero_map():
    with pytest.raises(InputError):
        kraus(np.zeros((2, 2)))


def test_tp_unital_examples():
    for a in (0.0, 0.1, 0.2):
        assert tp_unital_report(example33(a)).trace_preserving
    u = rand_unitary(np.random.default_rng(1), 3)
    r = tp_unital_report(kraus(u))
    assert r.trace_preserving and r.unital
    r = tp_unital_report(kraus(np.diag([1.0, 0])))
    assert not r.trace_preserving and not r.unital


@pytest.mark.parametrize("seed", range(5))
def test_tp_channels_preserve_trace(seed):
    rng = np.random.default_rng(seed)
    ch = rand_tp_channel(rng, 3, 2)
    assert tp_unital_report(ch).trace_preserving
    assert is_trace_preserving(ch)[0]
    rho = rand_hermitian(rng, 3)
    assert abs(np.trace(apply(ch, rho)) - np.trace(rho)) <= 1e-10


def test_is_trace_preserving_generic_maps():
    assert is_trace_preserving(transposition_map(3))[0]
    assert is_trace_preserving(depolarizing_map(2))[0]
    assert not is_trace_preserving(choi_of(kraus(np.diag([1.0, 0]))))[0]


def test_superop_examples():
    assert np.allclose(superop_matrix(identity_channel(3)).matrix, np.eye(9))
    assert np.allclose(superop_matrix(transposition_map(2)).matrix, np.diag([1, 1, -1, 1]))
    dep = superop_matrix(depolarizing_map(3)).matrix
    assert np.linalg.matrix_rank(dep) == 1


def test_superop_act_matches_channel():
    rng = np.random.default_rng(3)
    ch = rand_channel(rng, 3, 2)
    s = superop_matrix(ch)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.allclose(s.act(x), ch.act(x), atol=1e-12)
    # channel equality is superoperator equality: a Kraus rotation gives the same map
    u = rand_unitary(rng, 2)
    mixed = KrausChannel(tuple(np.einsum("ij,jab->iab", u, ch.stack)))
    assert np.allclose(superop_matrix(mixed).matrix, s.matrix, atol=1e-12)


def test_channel_file_roundtrip():
    ch = example33(0.1)
    back = channel_from_dict(channel_to_dict(ch))
    assert np.array_equal(back.stack, ch.stack)


def test_channel_file_dagger_right():
    v = np.array([[0, 1], [0, 0]], dtype=complex)
    d = {"dim": 2, "convention": "dagger-right", "kraus": [matrix_to_dict(v)]}
    assert np.allclose(channel_from_dict(d).kraus_ops[0], v.conj().T)


def test_channel_file_dimension_diagnostic():
    d = {"dim": 2, "kraus": [matrix_to_dict(np.eye(3))]}
    with pytest.raises(InputError, match="dim 2"):
        channel_from_dict(d)
    with pytest.raises(InputError, match="convention"):
        channel_from_dict({"dim": 2, "convention": "left", "kraus": [matrix_to_dict(np.eye(2))]})


def test_choi_file_roundtrip_and_diagnostics():
    c = choi_of(example33(0.0))
    back = choi_from_dict(choi_to_dict(c))
    assert back.dim == 3 and np.array_equal(back.matrix, c.matrix)
    with pytest.raises(InputError, match="n\\^2=4"):
        choi_from_dict({"type": "choi", "n": 2, **matrix_to_dict(np.eye(3))})
    bad = np.eye(4, dtype=complex)
    bad[0, 1] = 0.5
    with pytest.raises(InputError, match="Hermitian"):
        choi_from_dict({"type": "choi", "n": 2, **matrix_to_dict(bad)})


def test_superop_file_roundtrip():
    s = superop_matrix(transposition_map(2))
    back = superop_from_dict(superop_to_dict(s))
    assert isinstance(back, SuperOpMatrix) and np.array_equal(back.matrix, s.matrix)
    with pytest.raises(InputError):
        superop_from_dict({"type": "superop", "n": 2, "matrix": np.eye(3).tolist()})
