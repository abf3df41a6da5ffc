"""Certified membership in the Piatetski-Shapiro set PS_{1/gamma}.

For gamma in (0,1) the set PS_{1/gamma} = { floor(m^(1/gamma)) : m >= 1 }.
An integer n belongs to it iff some integer m lies in [n^gamma, (n+1)^gamma),
i.e. iff ceil(n^gamma) < (n+1)^gamma.  Two evaluation modes are supported:

* exact-rational: gamma = a/b in lowest terms; the test reduces to integer
  b-th roots of n^a, so the answer is unconditionally exact.
* certified-real: n^gamma is enclosed by directed-rounding (MPFR) interval
  evaluation of exp(gamma*log n); precision doubles from 128 bits until both
  floors certify, and PrecisionExhausted is raised at the cap rather than
  guessing.

The module also provides the preimage-range enumeration of PS members and
the normalized weight lambda_gamma(n) = (n^(1-gamma)/gamma) * Lambda(n) * 1_PS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import gmpy2
import numpy as np

from .errors import PrecisionExhausted

__all__ = [
    "PSParameter",
    "MembershipCertificate",
    "integer_nth_root",
    "ps_certificate",
    "ps_indicator",
    "ps_enumerate",
    "lambda_gamma",
    "lambda_gamma_table",
]

_MIN_PRECISION = 128
_DEFAULT_PRECISION_CAP = 4096

# Above this magnitude the float fast path in the enumeration is not trusted
# and every floor is verified with integer arithmetic.
_FLOAT_SAFE_LIMIT = float(1 << 49)


@dataclass(frozen=True)
class PSParameter:
    """The exponent gamma in (0,1) together with its evaluation mode.

    gamma is stored as an exact Fraction in both modes (every float and
    decimal string *is* a rational); the mode decides whether membership is
    settled by integer root arithmetic or by interval certification.
    """

    gamma: Fraction
    mode: str  # "exact" | "certified"
    precision_cap: int = _DEFAULT_PRECISION_CAP

    def __post_init__(self):
        if not isinstance(self.gamma, Fraction):
            object.__setattr__(self, "gamma", Fraction(self.gamma))
        if not (0 < self.gamma < 1):
            raise ValueError(f"gamma must lie strictly in (0,1), got {self.gamma}")
        if self.mode not in ("exact", "certified"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "certified" and self.precision_cap < _MIN_PRECISION:
            raise ValueError("precision cap must be at least 128 bits")

    @classmethod
    def exact(cls, a: int, b: int) -> "PSParameter":
        """gamma = a/b handled with exact integer b-th roots."""
        return cls(Fraction(a, b), "exact")

    @classmethod
    def real(cls, gamma: Union[float, str, Fraction], precision_cap: int = _DEFAULT_PRECISION_CAP) -> "PSParameter":
        """Certified-real mode; gamma converted exactly to a rational."""
        return cls(Fraction(gamma), "certified", precision_cap)

    @property
    def c(self) -> Fraction:
        """The Piatetski-Shapiro exponent c = 1/gamma."""
        return 1 / self.gamma

    def describe(self) -> str:
        g = self.gamma
        return f"{g.numerator}/{g.denominator}({self.mode})"


@dataclass(frozen=True)
class MembershipCertificate:
    """Record of one membership decision.

    witness_m is the integer with floor(m^(1/gamma)) = n when n is a member;
    bits_used is 0 in exact mode and the certifying precision otherwise.
    """

    n: int
    member: bool
    witness_m: Optional[int]
    bits_used: int

    def __post_init__(self):
        assert self.member == (self.witness_m is not None)

    @property
    def indicator(self) -> int:
        return 1 if self.member else 0


def integer_nth_root(x: int, k: int) -> int:
    """floor(x**(1/k)) for integers x >= 0, k >= 1, exact.

    A float seed lands within a few units of the root; the correction loops
    then settle the exact floor with integer comparisons.  Falls back to
    big-integer Newton when the seed is unusable (k large relative to x's
    bit length keeps the root small, so this is rarely taken).
    """
    if x < 0:
        raise ValueError("negative radicand")
    if k < 1:
        raise ValueError("root order must be positive")
    if k == 1 or x < 2:
        return x
    bits = x.bit_length()
    shift = max(bits - 64, 0)
    seed = math.exp((math.log(x >> shift) + shift * math.log(2.0)) / k)
    if math.isfinite(seed) and seed < 2**63:
        g = int(seed)
    else:
        # Newton from a power-of-two upper bound.
        g = 1 << -(-bits // k)
        while True:
            t = ((k - 1) * g + x // g ** (k - 1)) // k
            if t >= g:
                break
            g = t
    if g < 1:
        g = 1
    while g ** k > x:
        g -= 1
    while (g + 1) ** k <= x:
        g += 1
    return g


def _ceil_root(x: int, k: int) -> int:
    """ceil(x**(1/k)) via the exact floor root."""
    r = integer_nth_root(x, k)
    return r if r ** k == x else r + 1


# ---------------------------------------------------------------------------
# Certified-real interval evaluation (directed-rounding MPFR).
# ---------------------------------------------------------------------------

def _pow_bounds(n: int, num: int, den: int, prec: int):
    """Enclosure [lo, hi] of n**(num/den) for n >= 1, num/den > 0.

    All factors of exp((num/den) * log n) are nonnegative, so rounding every
    intermediate down (resp. up) gives a true lower (resp. upper) bound.
    """
    with gmpy2.context(precision=prec, round=gmpy2.RoundDown):
        lo = gmpy2.exp((gmpy2.mpfr(num) / den) * gmpy2.log(gmpy2.mpfr(n)))
    with gmpy2.context(precision=prec, round=gmpy2.RoundUp):
        hi = gmpy2.exp((gmpy2.mpfr(num) / den) * gmpy2.log(gmpy2.mpfr(n)))
    return lo, hi


def _certified_ceil(lo, hi) -> Optional[int]:
    cl = int(gmpy2.ceil(lo))
    ch = int(gmpy2.ceil(hi))
    return cl if cl == ch else None


def _certified_floor(lo, hi) -> Optional[int]:
    fl = int(gmpy2.floor(lo))
    fh = int(gmpy2.floor(hi))
    return fl if fl == fh else None


def _precisions(cap: int):
    p = _MIN_PRECISION
    while p <= cap:
        yield p
        p *= 2


def _certified_certificate(n: int, p: PSParameter) -> MembershipCertificate:
    a = p.gamma.numerator
    b = p.gamma.denominator
    for prec in _precisions(p.precision_cap):
        lo1, hi1 = _pow_bounds(n, a, b, prec)
        m = _certified_ceil(lo1, hi1)
        if m is None:
            continue
        lo2, hi2 = _pow_bounds(n + 1, a, b, prec)
        if m < lo2:
            return MembershipCertificate(n, True, m, prec)
        if m >= hi2:
            return MembershipCertificate(n, False, None, prec)
    raise PrecisionExhausted(n, p.precision_cap, "ceil(n^gamma) vs (n+1)^gamma ambiguous")


def _certified_preimage_floor(m: int, p: PSParameter) -> int:
    """floor(m**(1/gamma)) certified by interval refinement."""
    a = p.gamma.numerator
    b = p.gamma.denominator
    for prec in _precisions(p.precision_cap):
        lo, hi = _pow_bounds(m, b, a, prec)
        f = _certified_floor(lo, hi)
        if f is not None:
            return f
    raise PrecisionExhausted(m, p.precision_cap, "floor(m^(1/gamma)) ambiguous")


# ---------------------------------------------------------------------------
# Public operations.
# ---------------------------------------------------------------------------

def ps_certificate(n: int, p: PSParameter) -> MembershipCertificate:
    """Decide n in PS_{1/gamma} and return the full certificate."""
    if n < 1:
        raise ValueError("n must be positive")
    if p.mode == "exact":
        a = p.gamma.numerator
        b = p.gamma.denominator
        m = _ceil_root(n ** a, b)
        member = m ** b < (n + 1) ** a
        return MembershipCertificate(n, member, m if member else None, 0)
    return _certified_certificate(n, p)


def ps_indicator(n: int, p: PSParameter) -> int:
    """1 iff some integer m satisfies floor(m^(1/gamma)) = n, else 0."""
    return ps_certificate(n, p).indicator


def _exact_preimage_floor(m: int, a: int, b: int, exponent: float) -> int:
    """floor(m**(b/a)) for gamma = a/b, exact.

    The float estimate is accepted outright when its fractional part is far
    from 0/1 relative to the worst-case float error; boundary cases fall
    back to integer power comparisons.
    """
    approx = float(m) ** exponent
    n0 = int(approx)
    if approx < _FLOAT_SAFE_LIMIT:
        frac = approx - n0
        tol = 1e-6 + approx * 1e-13
        if tol < frac < 1.0 - tol:
            return n0
    mb = m ** b
    while n0 > 0 and n0 ** a > mb:
        n0 -= 1
    while (n0 + 1) ** a <= mb:
        n0 += 1
    return n0


def ps_enumerate(lo: int, hi: int, p: PSParameter) -> np.ndarray:
    """All PS members in [lo, hi], strictly increasing.

    Iterates m over the preimage range [ceil(lo^gamma), ceil((hi+1)^gamma)-1];
    since d/dm m^(1/gamma) > 1, the floors are strictly increasing and every
    m in the range produces exactly one member.
    """
    if not (1 <= lo <= hi):
        raise ValueError("need 1 <= lo <= hi")
    a = p.gamma.numerator
    b = p.gamma.denominator
    if p.mode == "exact":
        m_lo = _ceil_root(lo ** a, b)
        m_hi = _ceil_root((hi + 1) ** a, b) - 1
        if m_hi < m_lo:
            return np.empty(0, dtype=np.int64)
        exponent = b / a
        out = np.empty(m_hi - m_lo + 1, dtype=np.int64)
        for i, m in enumerate(range(m_lo, m_hi + 1)):
            out[i] = _exact_preimage_floor(m, a, b, exponent)
        return out
    # certified mode: endpoints and every floor certified individually
    lo_g_lo, lo_g_hi = _pow_bounds(lo, a, b, _MIN_PRECISION)
    m_lo = _certified_ceil(lo_g_lo, lo_g_hi)
    if m_lo is None:
        m_lo = _refine_ceil(lo, a, b, p)
    hi_g = None
    for prec in _precisions(p.precision_cap):
        bounds = _pow_bounds(hi + 1, a, b, prec)
        hi_g = _certified_ceil(*bounds)
        if hi_g is not None:
            break
    if hi_g is None:
        raise PrecisionExhausted(hi + 1, p.precision_cap, "enumeration endpoint")
    m_hi = hi_g - 1
    values = [_certified_preimage_floor(m, p) for m in range(m_lo, m_hi + 1)]
    return np.asarray(values, dtype=np.int64)


def _refine_ceil(n: int, a: int, b: int, p: PSParameter) -> int:
    for prec in _precisions(p.precision_cap):
        m = _certified_ceil(*_pow_bounds(n, a, b, prec))
        if m is not None:
            return m
    raise PrecisionExhausted(n, p.precision_cap, "enumeration endpoint")


def lambda_gamma(n: int, p: PSParameter, vm: float) -> float:
    """Normalized PS-prime weight (n^(1-gamma)/gamma) * Lambda(n) * 1_PS.

    vm is the von Mangoldt value Lambda(n) supplied by the sieve module.
    The weight has average value ~ 1 over [1, N].
    """
    if n < 1:
        raise ValueError("n must be positive")
    if vm == 0.0:
        return 0.0
    if ps_indicator(n, p) == 0:
        return 0.0
    g = float(p.gamma)
    return n ** (1.0 - g) / g * vm


def lambda_gamma_table(limit: int, p: PSParameter, vm_table: np.ndarray) -> np.ndarray:
    """Vector of lambda_gamma(n) for 0 <= n <= limit.

    vm_table[n] must hold Lambda(n) for n in [0, limit].  PS membership is
    filled by one enumeration pass rather than per-n testing.
    """
    if vm_table.shape[0] < limit + 1:
        raise ValueError("von Mangoldt table shorter than limit")
    g = float(p.gamma)
    members = ps_enumerate(1, limit, p)
    out = np.zeros(limit + 1, dtype=np.float64)
    scale = members.astype(np.float64) ** (1.0 - g) / g
    out[members] = scale * vm_table[members]
    return out
