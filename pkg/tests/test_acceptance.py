"""The twelve acceptance criteria, one test each; every test records a PASS/FAIL line."""

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES
from helpers import (
    rand_channel,
    rand_complex,
    rand_contraction_map,
    rand_density,
    rand_orthogonal,
    rand_unitary,
    sphere_max_oracle,
    unitary_fidelity,
)

from extremaps.ballmaps import (
    AffineBallMap,
    contact_points,
    max_norm_on_sphere,
    planar_example_check,
    planar_transform,
)
from extremaps.catalog import example33, qubit_family, to_bloch_affine, to_channel
from extremaps.channels import (
    ChoiMatrix,
    KrausChannel,
    choi_of,
    depolarizing_map,
    identity_channel,
    kraus_from_choi,
    superop_matrix,
    transposition_map,
)
from extremaps.extremality import (
    choi_extremality,
    find_pure_images,
    fix_extreme_certificate,
    invertible_extreme_report,
)
from extremaps.operators import psd_report
from extremaps.states import general_position, random_decomposition
from extremaps.wigner import (
    ANTIUNITARY,
    UNITARY,
    classify_wigner,
    is_orthogonal_superop,
    norm_lemma_check,
    preserves_transition_probs,
    wigner_channel,
)


def verdict(k, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_01_trace_formula():
    rng = np.random.default_rng(101)
    worst = 0.0
    ok = True
    for i in range(200):
        n, s = (2, 3, 4)[i % 3], 1 + i % 4
        ch = rand_channel(rng, n, s)
        sup = np.trace(superop_matrix(ch).matrix).real
        direct = sum(abs(np.trace(v)) ** 2 for v in ch.kraus_ops)
        err = abs(sup - direct)
        worst = max(worst, err / n**2)
        ok &= err <= 1e-8 * n**2
    verdict(1, ok, f"superoperator trace vs sum |Tr V|^2 on 200 channels, worst error/n^2 = {worst:.2e}")


def test_criterion_02_choi_roundtrip():
    rng = np.random.default_rng(102)
    worst = 0.0
    for i in range(100):
        n = 2 + i % 2
        r = 1 + rng.integers(n * n)
        g = rand_complex(rng, n * n, r)
        c = ChoiMatrix(n, g @ g.conj().T)
        worst = max(worst, np.linalg.norm(choi_of(kraus_from_choi(c)).matrix - c.matrix, 2))
    verdict(2, worst <= 1e-9, f"Choi -> Kraus -> Choi on 100 psd matrices, worst error = {worst:.2e}")


def test_criterion_03_three_by_three_example():
    ok = True
    parts = []
    for alpha in (0.0, 0.1, 0.2):
        ch = example33(alpha)
        tp_err = np.abs(sum(v @ v.conj().T for v in ch.kraus_ops) - np.eye(3)).max()
        rep = choi_extremality(ch, "trace_preserving")
        ok &= tp_err <= 1e-12 and rep.gram_rank == 9 and rep.extreme
        parts.append(f"a={alpha}: tp_err={tp_err:.1e} rank={rep.gram_rank}")
    res = find_pure_images(example33(0.2), restarts=256, seed=0)
    ok &= res.witnesses == [] and res.best_residual > 1e-3
    parts.append(f"a=0.2: {len(res.witnesses)} witnesses, best residual {res.best_residual:.4f}")
    verdict(3, ok, "; ".join(parts))


def test_criterion_04_qubit_case_one():
    m = qubit_family(1, np.pi / 6, np.pi / 3)
    q = to_channel(m)
    cp = psd_report(choi_of(q.superop).matrix).is_psd
    clusters = len(contact_points(to_bloch_affine(m)).clusters)
    extreme = q.kraus is not None and choi_extremality(q.kraus, "trace_preserving").extreme
    verdict(4, cp and clusters == 2 and extreme, f"CP={cp}, contact clusters={clusters}, extreme={extreme}")


def test_criterion_05_qubit_case_two():
    m = qubit_family(2, np.pi / 4)
    q = to_channel(m)
    rep = contact_points(to_bloch_affine(m))
    dist = np.linalg.norm(rep.clusters[0] - [0, 0, 1]) if rep.clusters else np.inf
    extreme = q.kraus is not None and choi_extremality(q.kraus, "trace_preserving").extreme
    ok = len(rep.clusters) == 1 and dist <= 1e-6 and q.completely_positive and extreme
    verdict(5, ok, f"clusters={len(rep.clusters)}, distance to (0,0,1)={dist:.1e}, CP={q.completely_positive}, extreme={extreme}")


def test_criterion_06_qubit_case_three():
    m = qubit_family(3, np.pi / 4, np.pi / 4)
    phi = to_bloch_affine(m)
    mx = max_norm_on_sphere(phi)[0]
    rank = contact_points(phi).affine_rank
    q = to_channel(m)
    tp = preserves_transition_probs(q.superop).preserved
    ok = mx <= 1 + 1e-9 and rank == 3 and q.min_choi_eigenvalue <= -1e-6 and not tp
    verdict(6, ok, f"max norm={mx:.12f}, contact affine rank={rank}, min Choi eigenvalue={q.min_choi_eigenvalue:.4f}, transition probs preserved={tp}")


def test_criterion_07_wigner_suite():
    rng = np.random.default_rng(107)
    worst_fid, worst_orth = 1.0, 0.0
    ok = True
    for n in (2, 3):
        for _ in range(100):
            u = rand_unitary(rng, n)
            cls = classify_wigner(wigner_channel(u))
            fid = unitary_fidelity(cls.recovered_U, u) if cls.recovered_U is not None else 0.0
            worst_fid = min(worst_fid, fid)
            ok &= cls.branch == UNITARY and fid >= 1 - 1e-9
            res = is_orthogonal_superop(superop_matrix(wigner_channel(u)))[1]
            worst_orth = max(worst_orth, res)
            ok &= res <= 1e-10
    cls = classify_wigner(transposition_map(2))
    t_ok = cls.branch == ANTIUNITARY and np.allclose(cls.recovered_U, np.eye(2), atol=1e-12)
    t_res = is_orthogonal_superop(superop_matrix(transposition_map(2)))[1]
    ok &= t_ok and t_res <= 1e-10
    verdict(7, ok, f"200 unitaries: worst fidelity 1-{1 - worst_fid:.1e}, worst orthogonality residual {max(worst_orth, t_res):.1e}; transposition antiunitary with U=I: {t_ok}")


def test_criterion_08_invertible_extreme_consistency():
    rng = np.random.default_rng(108)
    inv_ok = 0
    for i in range(50):
        n = 2 + i % 2
        v = rand_complex(rng, n, n)
        rep = invertible_extreme_report(KrausChannel((v,)), budget=256, seed=i)
        ws = [w.state for w in rep.witnesses]
        good = (
            rep.cond_a_inverse_cp
            and rep.cond_b_single_invertible_kraus
            and rep.cond_de_rank_one_images
            and len(ws) == n + 1
            and general_position(ws, tol=1e-3)
        )
        inv_ok += good
    rank2_ok = 0
    for i in range(50):
        n = 2 + i % 2
        rep = invertible_extreme_report(rand_channel(rng, n, 2), budget=256, seed=i)
        rank2_ok += (not rep.cond_b_single_invertible_kraus) and (not rep.cond_de_rank_one_images)
    verdict(8, inv_ok == 50 and rank2_ok == 50, f"invertible single-Kraus {inv_ok}/50 with general-position witnesses; Choi rank 2 {rank2_ok}/50 without")


def test_criterion_09_norm_lemma():
    rng = np.random.default_rng(109)
    worst_excess, worst_gap = -np.inf, 0.0
    for i in range(100):
        rank = 2 + i % 2
        rho = rand_density(rng, 3, rank)
        pur = np.trace(rho @ rho).real
        for t in range(100):
            dec = random_decomposition(rho, rank + t % 3, seed=1000 * i + t)
            worst_excess = max(worst_excess, sum(w * w for w, _ in dec) - pur)
        worst_gap = max(worst_gap, norm_lemma_check(rho, trials=1, seed=i).gap_at_spectral)
        spectral = np.sum(np.linalg.eigvalsh(rho) ** 2)
        worst_gap = max(worst_gap, abs(spectral - pur))
    ok = worst_excess <= 1e-10 and worst_gap <= 1e-12
    verdict(9, ok, f"10^4 decompositions: max(sum w^2 - purity) = {worst_excess:.2e}; spectral gap = {worst_gap:.1e}")


def test_criterion_10_planar_example():
    one = planar_example_check(1.0, 10_000)
    above = planar_example_check(1.01, 10_000)
    pts = planar_transform(np.array([[-1.0, 0.0], [1.0, 0.0]]))
    t_ok = np.array_equal(pts, [[1.0, 0.0], [-1.0, 0.0]])
    ok = (
        one.min_value >= -1e-12
        and one.f_concave
        and above.min_value < 0
        and -1 < above.argmin < -0.9
        and t_ok
    )
    verdict(10, ok, f"min(f-g)={one.min_value:.2e}, min(f-1.01g)={above.min_value:.2e} at x={above.argmin:.4f}, concave={one.f_concave}, T swaps (+-1,0)={t_ok}")


def test_criterion_11_ball_maps():
    rng = np.random.default_rng(111)
    ok = True
    worst = 0.0
    ranks = []
    for i in range(100):
        o = rand_orthogonal(rng, 3)
        rep = contact_points(AffineBallMap(o), samples=40, seed=i)
        ok &= rep.affine_rank == 4 and rep.is_orthogonal
        _, oracle = sphere_max_oracle(o, np.zeros(3), 10**6, rng)
        worst = max(worst, abs(rep.max_norm - oracle))
    for i in range(100):
        a, b = rand_contraction_map(rng, 3)
        phi = AffineBallMap(a, b)
        rep = contact_points(phi, seed=i)
        ranks.append(rep.affine_rank)
        ok &= rep.affine_rank <= 3 and not rep.is_orthogonal
        _, oracle = sphere_max_oracle(a, b, 10**6, rng)
        worst = max(worst, abs(max_norm_on_sphere(phi)[0] - oracle))
    ok &= worst <= 1e-6
    verdict(11, ok, f"orthogonal maps rank 4 and non-orthogonal max rank {max(ranks)}; worst |max_norm - oracle| = {worst:.1e}")


def test_criterion_12_fix_extreme():
    ident = fix_extreme_certificate(identity_channel(2))
    dep = fix_extreme_certificate(depolarizing_map(2))
    case1 = fix_extreme_certificate(to_channel(qubit_family(1, np.pi / 6, np.pi / 3)).kraus)
    ok = (
        ident.image_affine_rank >= 4
        and ident.certified
        and dep.pure_image_count == 0
        and case1.pure_image_count == 2
        and not case1.certified
    )
    verdict(12, ok, f"identity {tuple(ident)}, depolarizing {tuple(dep)}, case 1 {tuple(case1)}")


@pytest.mark.parametrize("branch", [UNITARY, ANTIUNITARY])
def test_wigner_maps_are_the_only_orthogonal_positive_maps_sampled(branch):
    # companion to criterion 7: antiunitary maps are orthogonal but their Choi matrix is not psd
    u = rand_unitary(np.random.default_rng(7), 2)
    m = wigner_channel(u, branch)
    assert is_orthogonal_superop(superop_matrix(m))[0]
    assert psd_report(choi_of(m).matrix).is_psd == (branch == UNITARY)
