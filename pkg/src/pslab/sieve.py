"""Segmented prime sieve, von Mangoldt values, and W-trick scaffolding.

Lambda(n) = log p exactly when n = p^k and 0 otherwise (0 on n <= 0 by
convention).  Segments are sieved with numpy slice assignments after a
2/3/5 pre-cull; results for a range are independent of how it is cut into
segments.  Optionally, prime bitsets are cached on disk under the directory
named by the PSLAB_CACHE_DIR environment variable.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Tuple

import numpy as np

from .errors import CapacityExceeded

__all__ = [
    "Segment",
    "WTrick",
    "sieve_segment",
    "von_mangoldt_table",
    "prime_flags_table",
    "build_wtrick",
    "CACHE_ENV_KEY",
    "SEGMENT_SIZE",
    "RANGE_LIMIT",
]

SEGMENT_SIZE = 1 << 22
RANGE_LIMIT = 1 << 50
CACHE_ENV_KEY = "PSLAB_CACHE_DIR"

_CACHE_MAGIC = b"PSLB0001"
_CACHE_VERSION = 1


@dataclass(frozen=True)
class Segment:
    """Lambda values and primality flags on [lo, hi] (both inclusive)."""

    lo: int
    hi: int
    lambda_values: np.ndarray
    prime_flags: np.ndarray

    def lam(self, n: int) -> float:
        return float(self.lambda_values[n - self.lo])

    def is_prime(self, n: int) -> bool:
        return bool(self.prime_flags[n - self.lo])


def _base_primes(limit: int) -> np.ndarray:
    """All primes <= limit by a plain sieve (limit ~ sqrt of segment tops)."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0].astype(np.int64)


def _sieve_flags(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primality flags for [lo, hi] given base primes up to sqrt(hi)."""
    size = hi - lo + 1
    flags = np.ones(size, dtype=bool)
    if lo <= 1:
        flags[: min(2 - lo, size)] = False
    # pre-cull the mod-30 wheel primes first: densest strides, cheapest wins
    for p in (2, 3, 5):
        if p * p > hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        flags[start - lo :: p] = False
        if lo <= p <= hi:
            flags[p - lo] = True
    for p in base:
        p = int(p)
        if p in (2, 3, 5):
            continue
        if p * p > hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        flags[start - lo :: p] = False
        if lo <= p <= hi:
            flags[p - lo] = True
    return flags


def _lambda_from_flags(lo: int, hi: int, flags: np.ndarray, base: np.ndarray) -> np.ndarray:
    lam = np.zeros(hi - lo + 1, dtype=np.float64)
    idx = np.nonzero(flags)[0]
    primes_here = idx + lo
    lam[idx] = np.log(primes_here.astype(np.float64))
    # proper prime powers p^k, k >= 2: only p <= sqrt(hi) contribute
    for p in base:
        p = int(p)
        if p * p > hi:
            break
        q = p * p
        lp = math.log(p)
        while q <= hi:
            if q >= lo:
                lam[q - lo] = lp
            q *= p
    return lam


def _cache_path(lo: int, hi: int) -> Optional[str]:
    root = os.environ.get(CACHE_ENV_KEY)
    if not root:
        return None
    return os.path.join(root, f"seg_{lo}_{hi}.psb")


def _pack_flags(flags: np.ndarray) -> bytes:
    bits = np.packbits(flags, bitorder="little")
    pad = (-len(bits)) % 8
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    return bits.tobytes()


def _unpack_flags(raw: bytes, size: int) -> np.ndarray:
    bits = np.frombuffer(raw, dtype=np.uint8)
    return np.unpackbits(bits, bitorder="little")[:size].astype(bool)


def _cache_read(lo: int, hi: int) -> Optional[np.ndarray]:
    path = _cache_path(lo, hi)
    if path is None or not os.path.exists(path):
        return None
    size = hi - lo + 1
    nwords = (size + 63) // 64
    try:
        with open(path, "rb") as fh:
            header = fh.read(16)
            if len(header) != 16 or header[:8] != _CACHE_MAGIC:
                return None
            (version,) = struct.unpack("<I", header[8:12])
            if version != _CACHE_VERSION:
                return None
            raw = fh.read(8 * nwords)
            if len(raw) != 8 * nwords:
                return None
            return _unpack_flags(raw, size)
    except OSError:
        return None


def _cache_write(lo: int, hi: int, flags: np.ndarray) -> None:
    path = _cache_path(lo, hi)
    if path is None:
        return
    try:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(_CACHE_MAGIC)
            fh.write(struct.pack("<I", _CACHE_VERSION))
            fh.write(b"\x00\x00\x00\x00")
            fh.write(_pack_flags(flags))
        os.replace(tmp, path)
    except OSError:
        pass  # cache is best-effort


def sieve_segment(lo: int, hi: int, segment_size: int = SEGMENT_SIZE) -> Segment:
    """Exact Lambda and primality on [lo, hi]."""
    if not (1 <= lo <= hi):
        raise ValueError("need 1 <= lo <= hi")
    if hi > RANGE_LIMIT:
        raise CapacityExceeded(f"hi = {hi} beyond configured limit 2^50")
    if hi - lo >= segment_size:
        raise CapacityExceeded(f"segment [{lo}, {hi}] larger than {segment_size}")
    base = _base_primes(math.isqrt(hi))
    flags = _cache_read(lo, hi)
    if flags is None:
        flags = _sieve_flags(lo, hi, base)
        _cache_write(lo, hi, flags)
    lam = _lambda_from_flags(lo, hi, flags, base)
    return Segment(lo, hi, lam, flags)


def _assemble(limit: int, segment_size: int, threads: int) -> Tuple[np.ndarray, np.ndarray]:
    """Flags and Lambda for n in [0, limit], assembled from segments."""
    if limit > RANGE_LIMIT:
        raise CapacityExceeded(f"limit = {limit} beyond configured limit 2^50")
    ranges = [(lo, min(lo + segment_size - 1, limit)) for lo in range(1, limit + 1, segment_size)]
    if threads > 1 and len(ranges) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            segs = list(pool.map(lambda r: sieve_segment(*r, segment_size=segment_size), ranges))
    else:
        segs = [sieve_segment(lo, hi, segment_size=segment_size) for lo, hi in ranges]
    flags = np.zeros(limit + 1, dtype=bool)
    lam = np.zeros(limit + 1, dtype=np.float64)
    for seg in segs:  # deterministic order regardless of worker scheduling
        flags[seg.lo : seg.hi + 1] = seg.prime_flags
        lam[seg.lo : seg.hi + 1] = seg.lambda_values
    return flags, lam


def von_mangoldt_table(limit: int, segment_size: int = SEGMENT_SIZE, threads: int = 1) -> np.ndarray:
    """Lambda(n) for 0 <= n <= limit as a float array (index = n)."""
    return _assemble(limit, segment_size, threads)[1]


def prime_flags_table(limit: int, segment_size: int = SEGMENT_SIZE, threads: int = 1) -> np.ndarray:
    """Primality of n for 0 <= n <= limit as a bool array (index = n)."""
    return _assemble(limit, segment_size, threads)[0]


@dataclass(frozen=True)
class WTrick:
    """W = product of primes <= w and the coprime residue classes mod W.

    The residue list is materialized lazily: phi(W) reaches ~10^9 already
    at w = 29, but every desk experiment uses w <= 7.
    """

    w: int
    W: int
    _residues: Optional[Tuple[int, ...]] = field(default=None, repr=False, compare=False)

    @property
    def residues(self) -> Tuple[int, ...]:
        cached = object.__getattribute__(self, "_residues")
        if cached is None:
            cached = tuple(b for b in range(1, self.W + 1) if math.gcd(b, self.W) == 1)
            object.__setattr__(self, "_residues", cached)
        return cached

    @property
    def phi(self) -> int:
        """phi(W) from the prime factorization, no enumeration needed."""
        primes = [int(p) for p in _base_primes(self.w)]
        return reduce(lambda acc, p: acc * (p - 1), primes, 1)


def build_wtrick(w: int) -> WTrick:
    """Exact W = prod_{p <= w} p with its coprime residues."""
    if not (2 <= w <= 30):
        raise ValueError("w must be in [2, 30]")
    primes = [int(p) for p in _base_primes(w)]
    W = reduce(lambda a, b: a * b, primes, 1)
    return WTrick(w, W)
