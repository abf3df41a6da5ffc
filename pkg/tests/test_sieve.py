import math

import numpy as np
import pytest

from pslab.errors import CapacityExceeded
from pslab.sieve import (
    CACHE_ENV_KEY,
    build_wtrick,
    prime_flags_table,
    sieve_segment,
    von_mangoldt_table,
)


def trial_division_lambda(n):
    if n < 2:
        return 0.0
    for p in range(2, n + 1):
        if p * p > n:
            return math.log(n)  # n prime
        if n % p == 0:
            m = n
            while m % p == 0:
                m //= p
            return math.log(p) if m == 1 else 0.0
    return 0.0


def test_small_segment_values():
    seg = sieve_segment(1, 10)
    assert [n for n in range(1, 11) if seg.is_prime(n)] == [2, 3, 5, 7]
    assert seg.lam(8) == pytest.approx(math.log(2))
    assert seg.lam(9) == pytest.approx(math.log(3))
    assert seg.lam(6) == 0.0
    assert seg.lam(1) == 0.0


def test_pi_100():
    seg = sieve_segment(1, 100)
    assert int(np.count_nonzero(seg.prime_flags)) == 25


def test_single_point_segment():
    seg = sieve_segment(1, 1)
    assert seg.lam(1) == 0.0 and not seg.is_prime(1)


def test_against_trial_division():
    seg = sieve_segment(1, 2000)
    for n in range(1, 2001):
        assert seg.lam(n) == pytest.approx(trial_division_lambda(n), abs=1e-12), n


def test_offset_segment_consistency():
    lo, hi = 99991, 100100
    seg = sieve_segment(lo, hi)
    full = von_mangoldt_table(hi)
    assert np.allclose(seg.lambda_values, full[lo : hi + 1])


def test_refinement_invariance():
    a = von_mangoldt_table(50000)
    b = von_mangoldt_table(50000, segment_size=4096)
    assert np.array_equal(a, b)
    fa = prime_flags_table(50000)
    fb = prime_flags_table(50000, segment_size=1 << 13)
    assert np.array_equal(fa, fb)


def test_threaded_assembly_identical():
    a = von_mangoldt_table(200000, segment_size=1 << 14, threads=1)
    b = von_mangoldt_table(200000, segment_size=1 << 14, threads=4)
    assert np.array_equal(a, b)


def test_capacity_checks():
    with pytest.raises(CapacityExceeded):
        sieve_segment(1, 1 << 51)
    with pytest.raises(CapacityExceeded):
        sieve_segment(1, 1 << 23, segment_size=1 << 22)


def test_pnt_sanity_at_1e7():
    lam = von_mangoldt_table(10 ** 7)
    assert 0.9 <= float(np.sum(lam)) / 10 ** 7 <= 1.1


class TestCache:
    def test_round_trip(self, tmp_path, monkeypatch):
        monkeypatch.setenv(CACHE_ENV_KEY, str(tmp_path))
        seg1 = sieve_segment(1000, 5000)
        files = list(tmp_path.iterdir())
        assert len(files) == 1
        raw = files[0].read_bytes()
        assert raw[:8] == b"PSLB0001"
        assert len(raw) == 16 + 8 * ((5000 - 1000 + 1 + 63) // 64)
        seg2 = sieve_segment(1000, 5000)
        assert np.array_equal(seg1.prime_flags, seg2.prime_flags)
        assert np.array_equal(seg1.lambda_values, seg2.lambda_values)

    def test_corrupt_cache_ignored(self, tmp_path, monkeypatch):
        monkeypatch.setenv(CACHE_ENV_KEY, str(tmp_path))
        seg1 = sieve_segment(10, 200)
        path = next(tmp_path.iterdir())
        path.write_bytes(b"GARBAGE!" + b"\x00" * 32)
        seg2 = sieve_segment(10, 200)
        assert np.array_equal(seg1.prime_flags, seg2.prime_flags)

    def test_no_cache_without_env(self, tmp_path, monkeypatch):
        monkeypatch.delenv(CACHE_ENV_KEY, raising=False)
        sieve_segment(1, 100)
        assert list(tmp_path.iterdir()) == []


class TestWTrick:
    def test_w3(self):
        wt = build_wtrick(3)
        assert wt.W == 6
        assert wt.residues == (1, 5)

    def test_w5(self):
        wt = build_wtrick(5)
        assert wt.W == 30
        assert len(wt.residues) == 8 == wt.phi

    def test_w7(self):
        wt = build_wtrick(7)
        assert wt.W == 210
        assert wt.phi == 48
        assert len(wt.residues) == 48

    def test_residues_coprime(self):
        wt = build_wtrick(7)
        assert all(math.gcd(b, wt.W) == 1 for b in wt.residues)

    def test_domain(self):
        with pytest.raises(ValueError):
            build_wtrick(1)
        with pytest.raises(ValueError):
            build_wtrick(31)
