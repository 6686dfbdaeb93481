import math
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinapprox import errors, spin


def dense_commutator(two_lam):
    s = spin.spin_plus(two_lam)
    return s.T @ s - s @ s.T


def test_pauli_algebra():
    s1, s2, s3 = spin.pauli(1), spin.pauli(2), spin.pauli(3)
    assert np.allclose(s1 @ s2 - s2 @ s1, 1j * s3)
    assert np.allclose(s2 @ s3 - s3 @ s2, 1j * s1)
    assert np.allclose(s3 @ s1 - s1 @ s3, 1j * s2)
    for i in (1, 2, 3):
        assert np.linalg.norm(spin.pauli(i), 2) == pytest.approx(0.5)


def test_pauli_coefficients_roundtrip():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        c1, c2, c3, c4 = spin.pauli_coefficients(a)
        rebuilt = (
            c1 * spin.pauli(1)
            + c2 * spin.pauli(2)
            + c3 * spin.pauli(3)
            + 0.5 * c4 * np.eye(2)
        )
        assert np.allclose(rebuilt, a, atol=1e-13)
        assert c4 == pytest.approx(np.trace(a))


def test_pauli_norm_exact_for_hermitian():
    rng = np.random.default_rng(11)
    for _ in range(25):
        c = rng.normal(size=4)
        a = (
            c[0] * spin.pauli(1)
            + c[1] * spin.pauli(2)
            + c[2] * spin.pauli(3)
            + 0.5 * c[3] * np.eye(2)
        )
        # eigenvalues are c4/2 +- |c|/2, so the formula is the exact norm here
        assert spin.pauli_norm(*c) == pytest.approx(np.linalg.norm(a, 2), rel=1e-12)


def test_pauli_coefficient_size_bound():
    # |c_i| <= 2 ||A|| for i = 1, 2, 3: the expansion coefficients of a
    # contraction against the normalized basis never exceed twice the norm.
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        norm = np.linalg.norm(a, 2)
        c1, c2, c3, _ = spin.pauli_coefficients(a)
        assert math.sqrt(abs(c1) ** 2 + abs(c2) ** 2 + abs(c3) ** 2) <= 2 * norm + 1e-12


def test_d_weight_frozen_values():
    assert spin.d_weight(10, -10) == pytest.approx(math.sqrt(10.0))
    assert spin.d_weight(1, -1) == pytest.approx(1.0)
    assert spin.d_weight(200, 0) == pytest.approx(math.sqrt(10100.0))
    assert spin.d_weight_sq(4, -4) == 4
    assert spin.d_weight_sq(4, 2) == 4
    assert spin.d_weight_sq(4, 0) == 6


def test_d_weight_rejects_bad_input():
    with pytest.raises(errors.PreconditionError):
        spin.d_weight(4, 4)  # m = lam has no arrow upward
    with pytest.raises(errors.PreconditionError):
        spin.d_weight(4, 1)  # parity mismatch
    with pytest.raises(errors.PreconditionError):
        spin.d_weight(4, -6)


def test_irrep_generators_spin_two():
    diag, weights = spin.irrep_generators(4)
    assert np.array_equal(diag, [-2.0, -1.0, 0.0, 1.0, 2.0])
    assert np.allclose(weights, [2.0, math.sqrt(6.0), math.sqrt(6.0), 2.0])


def test_irrep_generator_norms():
    for two_lam in (1, 2, 3, 7, 12):
        lam = two_lam / 2.0
        for i in (1, 2, 3):
            m = spin.spin_pauli(two_lam, i)
            assert np.linalg.norm(m, 2) == pytest.approx(lam, rel=1e-12)


def test_irrep_commutation_relations():
    for two_lam in (1, 2, 5):
        s = [spin.spin_pauli(two_lam, i) for i in (1, 2, 3)]
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            assert np.allclose(s[i] @ s[j] - s[j] @ s[i], 1j * s[k], atol=1e-12)


def test_spin_matrix_linearity_and_ladder():
    sp = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert np.allclose(spin.spin_matrix(6, sp), spin.spin_plus(6), atol=1e-13)
    s3 = spin.pauli(3)
    assert np.allclose(spin.spin_matrix(6, s3), spin.spin_z(6), atol=1e-13)


def test_self_commutator_diagonal_pattern():
    # [S(s+)*, S(s+)] is diagonal with entries -2m; the edge entries are 2*lam
    for two_lam in (1, 2, 3, 9, 40):
        c = dense_commutator(two_lam)
        expected = np.diag([float(two_lam - 2 * k) for k in range(two_lam + 1)])
        assert np.allclose(c, expected, atol=1e-10)
        assert np.linalg.norm(c, 2) == pytest.approx(two_lam, rel=1e-12)


def test_square_gap_is_exact_integer_arithmetic():
    for two_lam in range(1, 60):
        sq = [
            spin.d_weight_sq(two_lam, two_m)
            for two_m in range(-two_lam, two_lam, 2)
        ]
        # first and last equal 2*lam, steps change by exactly -2m
        assert sq[0] == two_lam
        assert sq[-1] == two_lam
        for k in range(len(sq) - 1):
            two_m = -two_lam + 2 * k
            assert sq[k + 1] - sq[k] == -(two_m + 2)
            assert abs(sq[k + 1] - sq[k]) <= two_lam


def test_tensor_multiplicity_small_tables():
    assert spin.multiplicity_table(3) == [(1, 2), (3, 1)]
    assert spin.multiplicity_table(4) == [(0, 2), (2, 3), (4, 1)]
    assert spin.tensor_multiplicity(2, 1) == 0  # parity mismatch
    assert spin.tensor_multiplicity(6, 8) == 0  # above N/2


def test_dimension_conservation():
    for n_sites in range(1, 40):
        total = sum(
            n * (two_lam + 1) for two_lam, n in spin.multiplicity_table(n_sites)
        )
        assert total == 2**n_sites


def test_multiplicities_match_casimir_spectrum():
    # independent route: eigenvalues of J1^2 + J2^2 + J3^2 on (C^2)^{x4}
    n_sites = 4

    def site_sum(op):
        total = np.zeros((2**n_sites, 2**n_sites), dtype=complex)
        for pos in range(n_sites):
            acc = np.array([[1.0 + 0j]])
            for k in range(n_sites):
                acc = np.kron(acc, op if k == pos else np.eye(2))
            total += acc
        return total

    j = [site_sum(spin.pauli(i)) for i in (1, 2, 3)]
    casimir = sum(m @ m for m in j)
    eigvals = np.linalg.eigvalsh(casimir)
    vals, counts = np.unique(np.round(eigvals, 9), return_counts=True)
    seen = dict(zip(vals.tolist(), counts.tolist()))
    assert seen == {0.0: 2, 2.0: 9, 6.0: 5}
    for two_lam, n in spin.multiplicity_table(n_sites):
        lam = two_lam / 2.0
        assert seen[lam * (lam + 1)] == n * (two_lam + 1)


def test_turning_point_trichotomy():
    for n_sites in range(2, 80):
        lam_star = spin.multiplicity_turning_point(n_sites)
        table = dict(spin.multiplicity_table(n_sites))
        for two_lam in range(n_sites % 2, n_sites - 1, 2):
            a = table.get(two_lam, 0)
            b = table.get(two_lam + 2, 0)
            if b == 0:
                continue
            lam = two_lam / 2.0
            if lam > lam_star:
                assert a > b
            elif lam + 1 < lam_star:
                assert a < b


def test_turning_point_equality_cases():
    # when lam* lands exactly on the parity ladder the adjacent counts tie
    for n_sites in (2, 7, 14, 23, 34, 47, 62):
        lam_star = spin.multiplicity_turning_point(n_sites)
        two_star = round(2 * lam_star)
        assert abs(2 * lam_star - two_star) < 1e-9
        a = spin.tensor_multiplicity(n_sites, two_star)
        b = spin.tensor_multiplicity(n_sites, two_star + 2)
        assert a == b


def _dw(two_lam, two_m):
    if two_m == two_lam:
        return 0.0
    return spin.d_weight(two_lam, two_m)


@st.composite
def weight_tuples(draw):
    two_lam = draw(st.integers(min_value=1, max_value=400))
    two_mu = draw(st.integers(min_value=0, max_value=two_lam))
    if (two_lam - two_mu) % 2:
        two_mu += 1
    two_mu = min(two_mu, two_lam)
    two_i = draw(st.integers(min_value=-two_mu, max_value=two_mu))
    if (two_mu - two_i) % 2:
        two_i -= 1
    if two_i < -two_mu:
        two_i += 2
    return two_lam, two_mu, two_i


@given(weight_tuples(), st.floats(min_value=0.01, max_value=50.0))
@settings(max_examples=300, deadline=None)
def test_weight_estimate_properties(tup, l):
    two_lam, two_mu, two_i = tup
    L = (two_lam - two_mu) / 2.0
    M = (two_lam - abs(two_i)) / 2.0
    est = spin.weight_estimates(two_lam, two_mu, two_i, L=L, M=M, l=l)
    d_lam = _dw(two_lam, two_i)
    d_mu = _dw(two_mu, two_i)
    tol = 1e-9
    # (i) monotone in lam, capped by lam + 1/2
    assert d_mu <= d_lam + tol
    assert d_lam <= est.monotone_upper + tol
    # (ii) near-edge bound with M = lam - |i|
    assert d_lam <= est.near_edge + tol
    # (iii) plain gap bound
    assert d_lam - d_mu <= est.gap_simple + tol
    # (iv) at least one branch of the pair holds
    assert (d_lam - d_mu <= est.gap_pair[0] + tol) or (
        d_lam <= est.gap_pair[1] + tol
    )
    # (v) squares
    assert d_lam**2 - d_mu**2 <= est.square_gap + tol


@given(weight_tuples(), st.floats(min_value=0.01, max_value=20.0),
       st.floats(min_value=0.0, max_value=2.0))
@settings(max_examples=200, deadline=None)
def test_gap_or_small_dominates_both_routes(tup, l, C):
    two_lam, two_mu, two_i = tup
    L = (two_lam - two_mu) / 2.0
    bound = spin.gap_or_small_bound(two_lam, L, l, C)
    d_lam = _dw(two_lam, two_i)
    d_mu = _dw(two_mu, two_i)
    assert d_lam - d_mu + C * max(d_lam, d_mu) <= bound + 1e-9


def test_weight_estimates_precondition_errors():
    with pytest.raises(errors.PreconditionError):
        spin.weight_estimates(4, 6, 0)  # mu > lam
    with pytest.raises(errors.PreconditionError):
        spin.weight_estimates(4, 2, 4)  # |i| > mu
    with pytest.raises(errors.PreconditionError):
        spin.weight_estimates(4, 3, 1)  # parity
    with pytest.raises(errors.PreconditionError):
        spin.weight_estimates(4, 4, 0, L=1.0, l=0.0)


def test_halfint_display_and_order():
    a = spin.HalfInt.of(1.5)
    assert str(a) == "3/2"
    assert a.as_fraction().numerator == 3
    assert spin.HalfInt(4) < spin.HalfInt(5)
    assert str(spin.HalfInt(4)) == "2"
    with pytest.raises(errors.PreconditionError):
        spin.as_two(0.3)
