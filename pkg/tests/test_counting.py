import math
from fractions import Fraction

import numpy as np
import pytest

from pslab.counting import (
    AffineLinearSystem,
    ConvexBody,
    WeightTable,
    ap_system,
    archimedean_density,
    count_weighted,
    goldbach3_count,
    gowers_norm,
    gowers_norm_direct,
    kap_count,
    lambda_gamma_weight,
    local_density,
    ones_weight,
    predict_main_term,
    von_mangoldt_weight,
    wtricked_difference,
)
from pslab.errors import RangeMismatch
from pslab.ps_core import PSParameter
from pslab.sieve import von_mangoldt_table


class TestSystemValidation:
    def test_dependent_rows_rejected(self):
        with pytest.raises(ValueError):
            AffineLinearSystem(((1, 2), (2, 4)), (0, 1))

    def test_zero_row_rejected_with_partner(self):
        with pytest.raises(ValueError):
            AffineLinearSystem(((0, 0), (1, 2)), (0, 0))

    def test_ap_preset(self):
        s = ap_system(4)
        assert s.matrix == ((1, 0), (1, 1), (1, 2), (1, 3))
        assert s.t == 4 and s.d == 2 and s.L == 3


def nested_loop_oracle(k, X, values):
    total = 0.0
    for n in range(1, X + 1):
        for m in range(1, X + 1):
            if n + (k - 1) * m <= X:
                prod = 1.0
                for i in range(k):
                    prod *= values[n + i * m]
                total += prod
    return total


class TestCountWeighted:
    def test_infeasible_small_box(self):
        w = von_mangoldt_weight(100)
        assert count_weighted(ap_system(3), ConvexBody.ap_simplex(3, 2), w) == 0.0

    def test_matches_nested_loops(self):
        for X in (50, 120, 200):
            w = von_mangoldt_weight(X)
            got = count_weighted(ap_system(3), ConvexBody.ap_simplex(3, X), w)
            want = nested_loop_oracle(3, X, w.values)
            assert got == pytest.approx(want, rel=1e-12)

    def test_ones_weight_counts_lattice(self):
        body = ConvexBody.ap_simplex(3, 30)
        w = ones_weight(100)
        got = count_weighted(ap_system(3), body, w)
        want = sum(1 for n in range(1, 31) for m in range(1, 31) if n + 2 * m <= 30)
        assert got == want

    def test_threaded_identical(self):
        w = von_mangoldt_weight(150)
        a = count_weighted(ap_system(3), ConvexBody.ap_simplex(3, 150), w, threads=1)
        b = count_weighted(ap_system(3), ConvexBody.ap_simplex(3, 150), w, threads=4)
        assert a == b

    def test_range_mismatch(self):
        w = von_mangoldt_weight(50)
        with pytest.raises(RangeMismatch):
            count_weighted(ap_system(3), ConvexBody.ap_simplex(3, 100), w)


class TestKapCount:
    def test_infeasible(self):
        assert kap_count(3, 2, von_mangoldt_weight(10)) == 0.0

    def test_convolution_vs_nested(self):
        X = 1000
        w = von_mangoldt_weight(X)
        got = kap_count(3, X, w, method="convolution")
        want = nested_loop_oracle(3, X, w.values)
        assert got == pytest.approx(want, rel=1e-9)

    def test_scan_vs_nested_k4(self):
        X = 300
        w = von_mangoldt_weight(X)
        got = kap_count(4, X, w, method="scan")
        want = nested_loop_oracle(4, X, w.values)
        assert got == pytest.approx(want, rel=1e-9)

    def test_lattice_path_matches_convolution(self):
        X = 150
        w = von_mangoldt_weight(X)
        a = kap_count(3, X, w, method="lattice")
        b = kap_count(3, X, w, method="convolution")
        assert a == pytest.approx(b, rel=1e-9)


def goldbach_oracle(N, values):
    total = 0.0
    for n1 in range(1, N - 1):
        for n2 in range(1, N - n1):
            n3 = N - n1 - n2
            if n3 >= 1:
                total += values[n1] * values[n2] * values[n3]
    return total


class TestGoldbach3:
    def test_n9_oracle(self):
        w = von_mangoldt_weight(9)
        got = goldbach3_count(9, w)
        assert got == pytest.approx(goldbach_oracle(9, w.values), rel=1e-12)
        # by hand: the prime-power triples summing to 9 are the arrangements
        # of (2,2,5), (2,3,4) and (3,3,3); Lambda(4) = log 2
        l2, l3, l5 = math.log(2), math.log(3), math.log(5)
        hand = 3 * l2 * l2 * l5 + 6 * l2 * l3 * l2 + l3 ** 3
        assert got == pytest.approx(hand, rel=1e-12)

    def test_fft_matches_direct(self):
        N = 4001
        w = von_mangoldt_weight(N)
        assert goldbach3_count(N, w, method="auto") == pytest.approx(
            goldbach3_count(N, w, method="direct"), rel=1e-9)

    def test_even_n_computed(self):
        w = von_mangoldt_weight(100)
        assert goldbach3_count(100, w) > 0.0

    def test_lambda_gamma_comparison(self):
        N = 10 ** 4 + 3
        lam = von_mangoldt_table(N)
        w_l = WeightTable(lam, "lambda")
        w_g = lambda_gamma_weight(N, PSParameter.exact(99, 100), lam=lam)
        c_l = goldbach3_count(N, w_l)
        c_g = goldbach3_count(N, w_g)
        assert abs(c_l - c_g) / c_l < 0.2


def local_density_oracle(sys, p):
    d, t = sys.d, sys.t
    from itertools import product

    good = 0
    for x in product(range(p), repeat=d):
        ok = True
        for row, c in zip(sys.matrix, sys.constants):
            if (sum(a * xi for a, xi in zip(row, x)) + c) % p == 0:
                ok = False
                break
        if ok:
            good += 1
    return Fraction(good * p ** t, p ** d * (p - 1) ** t)


class TestLocalDensity:
    def test_three_ap_small_primes(self):
        s = ap_system(3)
        assert local_density(s, 2) == Fraction(2)
        assert local_density(s, 3) == Fraction(3, 4)

    def test_single_form_is_one(self):
        s = AffineLinearSystem(((1,),), (0,))
        for p in (2, 3, 5, 7, 11):
            assert local_density(s, p) == 1

    @pytest.mark.parametrize("p", [5, 7, 11])
    def test_large_primes_against_oracle(self, p):
        s = ap_system(3)
        beta = local_density(s, p)
        assert beta == local_density_oracle(s, p)
        # beta_p -> 1 at rate 1/(p-1)^2 for the 3-AP system (p(p-2)/(p-1)^2)
        assert abs(beta - 1) <= Fraction(1, (p - 1) ** 2)


class TestArchimedean:
    def test_full_box(self):
        s = AffineLinearSystem(((1, 0), (0, 1)), (0, 0))
        X = 100
        got = archimedean_density(s, ConvexBody.box(X), positivity=False)
        assert got == pytest.approx(4.0, rel=0.05)

    def test_ap_simplex_quarter(self):
        got = archimedean_density(ap_system(3), ConvexBody.ap_simplex(3, 800))
        assert got == pytest.approx(0.25, abs=0.01)

    def test_empty_body(self):
        s = ap_system(3)
        empty = ConvexBody(20, (((0, 0), -1),))  # 0 <= -1: infeasible
        assert archimedean_density(s, empty) == 0.0

    def test_main_term_scale(self):
        X = 400
        w = von_mangoldt_weight(X)
        count = kap_count(3, X, w)
        pred = predict_main_term(ap_system(3), ConvexBody.ap_simplex(3, X))
        assert 0.5 <= count / pred <= 2.0


class TestGowersNorm:
    def test_constant_is_one(self):
        assert gowers_norm(np.ones(97, dtype=complex), 2) == pytest.approx(1.0, abs=1e-12)

    def test_single_character_is_one(self):
        N = 61
        f = np.exp(2j * np.pi * np.arange(N) / N)
        assert gowers_norm(f, 2) == pytest.approx(1.0, abs=1e-10)

    def test_recursion_matches_direct(self):
        rng = np.random.default_rng(5)
        for N in (8, 12, 16):
            f = rng.standard_normal(N) + 1j * rng.standard_normal(N)
            assert gowers_norm(f, 2) == pytest.approx(gowers_norm_direct(f, 2), rel=1e-10)
        f = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        assert gowers_norm(f, 3) == pytest.approx(gowers_norm_direct(f, 3), rel=1e-10)

    def test_u2_fourier_identity(self):
        # ||f||_{U^2}^4 = sum_k |fhat(k)|^4 with fhat(k) = E_x f(x) e(-kx)
        rng = np.random.default_rng(7)
        f = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        fhat = np.fft.fft(f) / 64
        assert gowers_norm(f, 2) ** 4 == pytest.approx(float(np.sum(np.abs(fhat) ** 4)), rel=1e-10)

    def test_monotonicity_sample(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            f = rng.choice([-1.0, 1.0], 64).astype(complex)
            assert gowers_norm(f, 2) <= gowers_norm(f, 3) + 1e-12

    def test_zero_iff_zero(self):
        assert gowers_norm(np.zeros(32, dtype=complex), 2) == 0.0
        rng = np.random.default_rng(13)
        f = rng.standard_normal(32).astype(complex)
        assert gowers_norm(f, 2) > 1e-9

    def test_capacity(self):
        with pytest.raises(ValueError):
            gowers_norm(np.ones(4096, dtype=complex), 3)
        with pytest.raises(ValueError):
            gowers_norm_direct(np.ones(4096, dtype=complex), 2)

    def test_wtricked_at_2048(self):
        # the factored path handles Z_{2^11} at s = 2 comfortably
        p = PSParameter.exact(9, 10)
        f = wtricked_difference(2048, 6, 1, p)
        val = gowers_norm(f, 2)
        assert 0.0 < val < 1.0


class TestWtrickedInput:
    def test_shape_and_mean(self):
        p = PSParameter.exact(9, 10)
        f = wtricked_difference(256, 6, 1, p)
        assert f.shape == (256,)
        assert np.all(np.isfinite(f.real))
        # the difference weight has mean o(1); desk scale just sanity-bounds it
        assert abs(np.mean(f)) < 1.0
