"""Operators on l2(O_n x O_n): construction, norms, Fourier law, identities."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaplab import (AdditiveCharacter, ResidueRing, RingElem, build_S_chi,
                    build_S_delta, char_eval, classify_character,
                    fourier_diagonalize_S_delta, hausdorff_young_ratio,
                    operator_norm, stamp_s_chi, stamp_s_delta,
                    verify_S_decomposition, verify_kdelta_conjugation,
                    valuation)
from gaplab.finite_models import hausdorff_young_report


def _direct_s_delta(p, n, delta):
    """Loop-level oracle straight from the defining average."""
    m = p ** n
    D = np.zeros((m * m, m * m))
    for y in range(m):
        for t in range(m):
            for x in range(m):
                s = (t + delta + x * y) % m
                D[y * m + t, x * m + s] += 1.0 / m
    return D


def _direct_s_chi(p, n, chi):
    m = p ** n
    h = chi.ring.n
    step = p ** (n - h)
    D = np.zeros((m * m, m * m), dtype=complex)
    for y in range(m):
        for t in range(m):
            for x in range(m):
                for z in range(p ** h):
                    s = (t + step * z + x * y) % m
                    D[y * m + t, x * m + s] += char_eval(chi, z) / (m * p ** h)
    return D


# ---------------------------------------------------------------------------
# construction


@pytest.mark.parametrize("p,n,delta", [(2, 1, 0), (2, 2, 3), (3, 1, 2), (3, 2, 5)])
def test_s_delta_matches_definition(p, n, delta):
    R = ResidueRing(p, n)
    got = build_S_delta(R, delta).matrix
    assert np.array_equal(got, _direct_s_delta(p, n, delta))


def test_s_delta_small_explicit():
    # p=2, n=1, delta=0: the 4x4 average over x of f(x, t + x*y)
    R = ResidueRing(2, 1)
    S = build_S_delta(R, 0).matrix
    assert set(np.unique(S.real)) == {0.0, 0.5}
    assert np.allclose(np.abs(S).sum(axis=1), 1.0)  # absolute row sums


def test_s_chi_small_explicit():
    # p=2, n=1, h=1: entries are +-1/4 where s = t + z + x*y
    R = ResidueRing(2, 1)
    chi = AdditiveCharacter(ResidueRing(2, 1), 1)
    S = build_S_chi(R, chi).matrix
    assert np.array_equal(S, _direct_s_chi(2, 1, chi))
    assert set(np.unique(S.real)) <= {-0.25, 0.0, 0.25}


@pytest.mark.parametrize("p,n,h,idx", [(2, 3, 2, 1), (3, 2, 1, 2), (3, 2, 2, 4)])
def test_s_chi_matches_definition(p, n, h, idx):
    R = ResidueRing(p, n)
    chi = AdditiveCharacter(ResidueRing(p, h), idx)
    got = build_S_chi(R, chi).matrix
    assert np.max(np.abs(got - _direct_s_chi(p, n, chi))) < 1e-15


def test_s_chi_rejects_bad_inputs():
    R = ResidueRing(2, 2)
    with pytest.raises(ValueError):
        build_S_chi(R, AdditiveCharacter(ResidueRing(2, 3), 1))  # h > n
    with pytest.raises(ValueError):
        build_S_chi(R, AdditiveCharacter(ResidueRing(2, 2), 0))  # trivial
    with pytest.raises(ValueError):
        build_S_chi(R, AdditiveCharacter(ResidueRing(3, 1), 1))  # wrong prime


def test_stamp_apply_matches_dense():
    rng = np.random.default_rng(3)
    for (p, n) in [(2, 3), (3, 2)]:
        R = ResidueRing(p, n)
        m = R.modulus
        chi = AdditiveCharacter(ResidueRing(p, n), 1 + p)
        for dense, stamp in [
            (build_S_delta(R, 3), stamp_s_delta(R, 3)),
            (build_S_chi(R, chi), stamp_s_chi(R, chi)),
        ]:
            f = rng.standard_normal(m * m) + 1j * rng.standard_normal(m * m)
            assert np.max(np.abs(stamp.apply(f) - dense.matrix @ f)) < 1e-12
            assert np.max(np.abs(stamp.adjoint_apply(f)
                                 - dense.matrix.conj().T @ f)) < 1e-12


# ---------------------------------------------------------------------------
# norms


def test_operator_norm_identity_and_rank_one():
    eye = np.eye(10, dtype=complex)
    assert operator_norm(eye, method="full-svd").value == pytest.approx(1.0)

    u = np.zeros(8, dtype=complex); u[:4] = 1.0          # norm 2
    v = np.zeros(8, dtype=complex); v[:] = 3 / np.sqrt(8)  # norm 3
    rep = operator_norm(np.outer(u, v.conj()), method="full-svd")
    assert rep.value == pytest.approx(6.0, abs=1e-12)


def test_power_iteration_tracks_svd():
    rng = np.random.default_rng(11)
    for trial in range(100):
        A = (rng.standard_normal((64, 64))
             + 1j * rng.standard_normal((64, 64))) / np.sqrt(64)
        svd = operator_norm(A, method="full-svd")
        pit = operator_norm(A, method="power-iteration", tolerance=1e-10,
                            max_iterations=20000, seed=trial)
        assert pit.converged
        assert pit.value <= svd.value + pit.residual + 1e-12
        assert abs(pit.value - svd.value) < 1e-8


def test_norm_report_fields():
    rep = operator_norm(np.eye(4, dtype=complex), method="full-svd")
    assert rep.method == "full-svd"
    assert rep.residual == 0.0 and rep.converged and rep.dim == 4

    with pytest.raises(ValueError):
        operator_norm(np.eye(4), method="not-a-method")
    with pytest.raises(TypeError):
        operator_norm("nonsense")


def test_exact_decomposition_norm_matches_svd():
    for (p, n) in [(2, 3), (3, 2)]:
        R = ResidueRing(p, n)
        for h in range(1, n + 1):
            for idx in range(1, p ** h):
                chi = AdditiveCharacter(ResidueRing(p, h), idx)
                exact = operator_norm(stamp_s_chi(R, chi),
                                      method="exact-decomposition")
                svd = operator_norm(build_S_chi(R, chi), method="full-svd")
                assert exact.method == "exact-decomposition"
                assert abs(exact.value - svd.value) < 1e-10


def test_contraction_bounds():
    for (p, n) in [(2, 2), (3, 2)]:
        R = ResidueRing(p, n)
        for delta in range(R.modulus):
            assert operator_norm(stamp_s_delta(R, delta)).value <= 1 + 1e-12


def test_nondegenerate_decay_small():
    # ||S_{n,chi}|| <= p^{-(n-h)/2} for nondegenerate chi; equality at v=0
    for (p, n) in [(2, 3), (3, 2)]:
        R = ResidueRing(p, n)
        for h in range(1, n + 1):
            for idx in range(1, p ** h):
                chi = AdditiveCharacter(ResidueRing(p, h), idx)
                v = valuation(p, idx, h)
                got = operator_norm(build_S_chi(R, chi), method="full-svd").value
                assert got == pytest.approx(p ** (-(n - v) / 2), abs=1e-10)
                if chi.is_nondegenerate:
                    assert got <= p ** (-(n - h) / 2) + 1e-9


def test_degenerate_factorization_small():
    # a degenerate character at level n matches its reduction at level n-h+d
    p, n, h = 2, 4, 3
    chi = AdditiveCharacter(ResidueRing(p, h), 2)      # v=1, d=2
    cls = classify_character(chi)
    big = operator_norm(build_S_chi(ResidueRing(p, n), chi),
                        method="full-svd").value
    small = operator_norm(
        build_S_chi(ResidueRing(p, n - h + cls.level), cls.reduced),
        method="full-svd").value
    assert abs(big - small) < 1e-9


# ---------------------------------------------------------------------------
# Fourier law


def test_fourier_reassembly():
    R = ResidueRing(2, 2)
    FB = fourier_diagonalize_S_delta(R)
    for delta in range(4):
        res = np.max(np.abs(FB.reassemble(delta).matrix
                            - build_S_delta(R, delta).matrix))
        assert res < 1e-12


def test_fourier_trivial_block_is_full_average():
    R = ResidueRing(3, 2)
    FB = fourier_diagonalize_S_delta(R)
    m = R.modulus
    assert np.allclose(FB.blocks[0], np.full((m, m), 1 / m))
    assert FB.block_norms[0] == pytest.approx(1.0, abs=1e-12)


def test_fourier_block_norm_profile():
    # ||G_c|| = p^{-(n - v_p(c))/2}, with the c=0 block of norm 1
    for (p, n) in [(2, 3), (3, 2)]:
        R = ResidueRing(p, n)
        FB = fourier_diagonalize_S_delta(R)
        for c in range(R.modulus):
            k = valuation(p, c, n)
            assert FB.block_norms[c] == pytest.approx(p ** (-(n - k) / 2),
                                                      abs=1e-12)


def test_fourier_difference_law_vs_dense():
    R = ResidueRing(3, 2)
    FB = fourier_diagonalize_S_delta(R)
    dense = {}
    for d in range(9):
        dense[d] = build_S_delta(R, d).matrix
    for (d, dp) in [(1, 0), (5, 2), (8, 8), (3, 6)]:
        law = FB.difference_norm(d, dp)
        svd = np.linalg.svd(dense[d] - dense[dp], compute_uv=False)[0]
        assert abs(law - svd) < 1e-9
        assert law <= svd + 1e-9


def test_difference_triangle_bound():
    # ||S_delta - S_delta'|| <= 2 p^h p^{-(n-h)/2} on the embedded grid
    p, n, h = 2, 3, 2
    R = ResidueRing(p, n)
    FB = fourier_diagonalize_S_delta(R)
    step = p ** (n - h)
    bound = 2 * p ** h * p ** (-(n - h) / 2)
    for a in range(p ** h):
        for b in range(p ** h):
            assert FB.difference_norm(step * a, step * b) <= bound + 1e-9


def test_equal_shifts_give_zero():
    R = ResidueRing(2, 2)
    d = build_S_delta(R, 3) - build_S_delta(R, 3)
    assert np.all(d.matrix == 0)


# ---------------------------------------------------------------------------
# decomposition identity


@pytest.mark.parametrize("p,n,h,av,bv", [
    (2, 2, 1, 1, 0), (3, 3, 2, 4, 1), (2, 3, 3, 5, 2), (3, 2, 1, 2, 1),
])
def test_decomposition_identity(p, n, h, av, bv):
    R = ResidueRing(p, n)
    Rh = ResidueRing(p, h)
    res = verify_S_decomposition(R, Rh.elem(av), Rh.elem(bv))
    assert res <= 1e-12


def test_decomposition_identity_equal_pair():
    R = ResidueRing(2, 2)
    Rh = ResidueRing(2, 2)
    assert verify_S_decomposition(R, Rh.elem(3), Rh.elem(3)) == 0.0


def test_decomposition_rejects_mismatch():
    R = ResidueRing(2, 2)
    with pytest.raises(ValueError):
        verify_S_decomposition(R, ResidueRing(2, 3).elem(1),
                               ResidueRing(2, 3).elem(0))  # h > n
    with pytest.raises(ValueError):
        verify_S_decomposition(R, ResidueRing(2, 1).elem(1),
                               ResidueRing(3, 1).elem(0))


# ---------------------------------------------------------------------------
# mean-transform ratio


def test_hausdorff_young_two_point():
    assert hausdorff_young_ratio(2, np.array([1.0, 0.0])) == pytest.approx(
        2 ** -0.5, abs=1e-15)


def test_hausdorff_young_random_and_constant():
    rng = np.random.default_rng(5)
    f = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    assert hausdorff_young_ratio(16, f) == pytest.approx(0.25, abs=1e-12)
    # constant vector: all mass on the trivial character
    assert hausdorff_young_ratio(16, np.full(16, 2.0 + 1j)) == pytest.approx(
        0.25, abs=1e-12)


def test_hausdorff_young_vector_valued():
    rng = np.random.default_rng(6)
    f = rng.standard_normal((27, 5)) + 1j * rng.standard_normal((27, 5))
    assert hausdorff_young_ratio(27, f) == pytest.approx(27 ** -0.5, abs=1e-12)


def test_hausdorff_young_rejects_zero():
    with pytest.raises(ValueError):
        hausdorff_young_ratio(4, np.zeros(4))
    with pytest.raises(ValueError):
        hausdorff_young_ratio(4, np.zeros(5))  # wrong length


def test_hausdorff_young_report_fields():
    rep = hausdorff_young_report(8, np.ones(8))
    assert (rep.C, rep.epsilon, rep.alpha) == (1.0, 0.5, 0.5)
    assert rep.ratio == pytest.approx(8 ** -0.5, abs=1e-12)


@given(st.integers(2, 64), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40)
def test_hausdorff_young_is_parseval(m, seed):
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    assert abs(hausdorff_young_ratio(m, f) - m ** -0.5) < 1e-10


# ---------------------------------------------------------------------------
# rotation-conjugation identity


def test_kdelta_conjugation_frozen_example():
    R = ResidueRing(3, 3)
    r = verify_kdelta_conjugation(1, R.elem(1), R.elem(0), R.elem(1), R.elem(2))
    assert r.ok and r.determinants_ok and r.pattern_ok and r.product_ok
    assert r.delta.value == 1          # 2 - 1*1 - 0
    assert r.precision == 3 + 2 + 4


def test_kdelta_conjugation_omega_unit_case():
    # a=b=x=0 and y a unit: omega = 1 exactly
    R = ResidueRing(5, 2)
    r = verify_kdelta_conjugation(1, R.elem(0), R.elem(0), R.elem(0), R.elem(3))
    assert r.ok
    assert r.omega.value == 1


def test_kdelta_conjugation_random_sweep():
    rng = np.random.default_rng(2)
    checked = 0
    for _ in range(120):
        p = int(rng.choice([2, 3, 5]))
        n = int(rng.integers(2, 5))
        j = int(rng.integers(1, n + 1))
        R = ResidueRing(p, n)
        vals = [int(rng.integers(p ** n)) for _ in range(4)]
        a, b, x, y = (R.elem(v) for v in vals)
        dval = (y.value - a.value * x.value - b.value) % p ** n
        if valuation(p, dval, n) > n - j:
            with pytest.raises(ValueError):
                verify_kdelta_conjugation(j, a, b, x, y)
            continue
        r = verify_kdelta_conjugation(j, a, b, x, y)
        checked += 1
        assert r.ok, (p, n, j, vals)
    assert checked > 40


def test_kdelta_conjugation_rejects_bad_shapes():
    R = ResidueRing(3, 2)
    with pytest.raises(ValueError):
        verify_kdelta_conjugation(0, R.elem(1), R.elem(0), R.elem(1), R.elem(2))
    with pytest.raises(ValueError):
        verify_kdelta_conjugation(1, R.elem(1), R.elem(0), R.elem(1),
                                  ResidueRing(3, 3).elem(2))


@given(st.integers(0, 3 ** 3 - 1), st.integers(0, 3 ** 3 - 1),
       st.integers(0, 3 ** 3 - 1), st.integers(0, 3 ** 3 - 1))
@settings(max_examples=60)
def test_kdelta_conjugation_holds_whenever_claimed(av, bv, xv, yv):
    R = ResidueRing(3, 3)
    a, b, x, y = R.elem(av), R.elem(bv), R.elem(xv), R.elem(yv)
    dval = (yv - av * xv - bv) % 27
    if valuation(3, dval, 3) > 2:
        return
    assert verify_kdelta_conjugation(1, a, b, x, y).ok
