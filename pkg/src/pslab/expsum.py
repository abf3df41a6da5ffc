"""Exponential-sum engine and validators for the analytic inequalities.

Conventions: e(x) = exp(2*pi*i*x); psi(x) = {x} - 1/2 is the sawtooth.
Sums over integer intervals are compensated and chunked at a fixed size, so
results are bit-reproducible across runs and worker counts.  Phase arguments
are reduced mod 1 in double-double arithmetic before any trigonometric call,
which matters once |h * n^gamma| grows past 2^40.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .errors import (
    ApproximationViolation,
    CurvatureAssumptionFailed,
    DegreeTooSmall,
)
from .nilseq import PolynomialPhase, to_monomial_basis
from .ps_core import PSParameter, ps_enumerate

__all__ = [
    "exp_sum",
    "compensated_sum",
    "compensated_complex_sum",
    "e_array",
    "PhaseFunction",
    "SawtoothApprox",
    "vaaler_approx",
    "check_sawtooth",
    "SawtoothReport",
    "vdc_check",
    "VdcReport",
    "erdos_turan_check",
    "ETReport",
    "taylor_phase",
    "StarNormResult",
    "star_norm",
    "DiscorrelationResult",
    "discorrelation",
    "frac_concentration",
]

CHUNK = 1 << 16
_SPLIT = 134217729.0  # 2^27 + 1, Veltkamp splitting constant
_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Double-double products and mod-1 reduction.
# ---------------------------------------------------------------------------

def _two_prod(a, b):
    """p + err == a*b exactly (Dekker), elementwise on arrays."""
    p = a * b
    ah = (_SPLIT * a) - (_SPLIT * a - a)
    al = a - ah
    bh = (_SPLIT * b) - (_SPLIT * b - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _mod1_dd(hi, lo):
    """(hi + lo) mod 1 where |lo| << 1; hi % 1 is exact for floats."""
    return (hi % 1.0 + lo) % 1.0


def e_array(x):
    """e(x) elementwise; x is reduced mod 1 first (exact float operation)."""
    t = _TWO_PI * (np.asarray(x, dtype=np.float64) % 1.0)
    return np.cos(t) + 1j * np.sin(t)


def monomial_phase_mod1(h: float, gamma: float, n) -> np.ndarray:
    """h * n^gamma mod 1 with the product carried in double-double."""
    t = np.asarray(n, dtype=np.float64) ** gamma
    p, err = _two_prod(np.float64(h), t)
    return _mod1_dd(p, err)


# ---------------------------------------------------------------------------
# Compensated, deterministically chunked summation.
# ---------------------------------------------------------------------------

def compensated_sum(values: np.ndarray) -> float:
    """Sum of a float array: pairwise per fixed chunk, then exact fsum."""
    v = np.asarray(values, dtype=np.float64)
    partials = [float(np.sum(v[i : i + CHUNK])) for i in range(0, len(v), CHUNK)]
    return math.fsum(partials)


def compensated_complex_sum(values: np.ndarray) -> complex:
    v = np.asarray(values, dtype=np.complex128)
    re = [float(np.sum(v[i : i + CHUNK].real)) for i in range(0, len(v), CHUNK)]
    im = [float(np.sum(v[i : i + CHUNK].imag)) for i in range(0, len(v), CHUNK)]
    return complex(math.fsum(re), math.fsum(im))


def exp_sum(f: Callable[[np.ndarray], np.ndarray], lo: int, hi: int, threads: int = 1) -> complex:
    """Sum of f(n) over the integers lo <= n <= hi.

    f receives int64 arrays and returns complex terms.  Chunk boundaries are
    fixed (aligned to lo, size 2^16), each chunk is pairwise-summed, and the
    chunk partials are combined with fsum in index order, so the result does
    not depend on the worker count.
    """
    if hi < lo:
        return 0.0 + 0.0j
    if hi - lo + 1 > 1 << 34:
        raise ValueError("range longer than 2^34")
    starts = list(range(lo, hi + 1, CHUNK))

    def one(start: int) -> Tuple[float, float]:
        n = np.arange(start, min(start + CHUNK, hi + 1), dtype=np.int64)
        t = np.asarray(f(n), dtype=np.complex128)
        return float(np.sum(t.real)), float(np.sum(t.imag))

    if threads > 1 and len(starts) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(one, starts))
    else:
        partials = [one(s) for s in starts]
    return complex(math.fsum(p[0] for p in partials), math.fsum(p[1] for p in partials))


# ---------------------------------------------------------------------------
# Phase functions e(h n^gamma + P(n)).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseFunction:
    """Phase g(n) = h * n^gamma + P(n); either part may be absent.

    kind is derived: "monomial" (P absent), "polynomial" (h absent), or
    "mixed".  gamma must be non-integer when the monomial part is present.
    """

    h: float = 0.0
    gamma: Optional[float] = None
    P: Optional[PolynomialPhase] = None
    K: Optional[float] = None  # declared exponent bound: |h| <= N^K

    def __post_init__(self):
        if self.h != 0.0:
            if self.gamma is None:
                raise ValueError("monomial part needs gamma")
            if float(self.gamma) == int(self.gamma):
                raise ValueError("gamma must be non-integer for the monomial part")

    @property
    def kind(self) -> str:
        if self.h != 0.0 and self.P is not None:
            return "mixed"
        if self.h != 0.0:
            return "monomial"
        return "polynomial"

    def describe(self) -> str:
        parts = []
        if self.h != 0.0:
            parts.append(f"{self.h:g}*n^{float(self.gamma):g}")
        if self.P is not None:
            mono = to_monomial_basis(self.P)
            parts.append("P[" + " ".join(f"{float(c):g}" for c in mono.coeffs) + "]")
        return "+".join(parts) if parts else "0"

    def phase_mod1(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=np.float64)
        if self.K is not None and self.h != 0.0:
            if abs(self.h) > float(np.max(n)) ** self.K:
                raise ValueError("|h| exceeds the declared N^K bound")
        total = np.zeros_like(n)
        if self.h != 0.0:
            total = monomial_phase_mod1(self.h, float(self.gamma), n)
        if self.P is not None:
            mono = to_monomial_basis(self.P)
            acc_hi = np.zeros_like(n)
            acc_lo = np.zeros_like(n)
            for j, c in enumerate(mono.coeffs):
                cf = float(c)
                if cf == 0.0:
                    continue
                hi, lo = _two_prod(np.float64(cf), n ** j if j else np.ones_like(n))
                acc_hi = acc_hi + (hi % 1.0)
                acc_lo = acc_lo + lo
            total = (total + _mod1_dd(acc_hi, acc_lo)) % 1.0
        return total

    def terms(self, n: np.ndarray) -> np.ndarray:
        return e_array(self.phase_mod1(n))


# ---------------------------------------------------------------------------
# Vaaler approximation of the sawtooth and its validator.
# ---------------------------------------------------------------------------

def _vaaler_taper(t: float) -> float:
    """pi*t*(1-t)*cot(pi*t) + t on (0,1); tends to 1 at 0+ and 0 at 1-."""
    return math.pi * t * (1.0 - t) / math.tan(math.pi * t) + t


@dataclass(frozen=True)
class SawtoothApprox:
    """Trigonometric approximant psi*(x) = sum_{1<=|h|<=H} a_h e(hx) with the
    nonnegative Fejer majorant sum_{|h|<=H} b_h e(hx) enveloping the error."""

    H: int
    a: Dict[int, complex]
    b: Dict[int, float]
    c_a: float  # recorded max |h * a_h|
    c_b: float  # recorded max H * b_h

    def psi_star(self, x) -> np.ndarray:
        """psi*(x) = -sum_{h=1}^H (V_h / (pi h)) sin(2 pi h x)."""
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for h in range(1, self.H + 1):
            coeff = 2.0 * self.a[h].imag  # a_h = i*V_h/(2 pi h)
            out -= coeff * np.sin(_TWO_PI * ((h * x) % 1.0))
        return out

    def majorant(self, x) -> np.ndarray:
        """sum_{|h|<=H} b_h e(hx) = b_0 + 2 sum_{h>=1} b_h cos(2 pi h x) >= 0."""
        x = np.asarray(x, dtype=np.float64)
        out = np.full_like(x, self.b[0])
        for h in range(1, self.H + 1):
            out += 2.0 * self.b[h] * np.cos(_TWO_PI * ((h * x) % 1.0))
        return out


def vaaler_approx(H: int) -> SawtoothApprox:
    """Vaaler's degree-H approximant to psi(x) = {x} - 1/2.

    a_h = i * V(h/(H+1)) / (2 pi h) with V(t) = pi t (1-t) cot(pi t) + t,
    a_{-h} = conj(a_h); b_h = (1 - |h|/(H+1)) / (2H+2), a Fejer kernel, so
    the majorant is real and nonnegative.  The measured constants
    c_a = max |h a_h| and c_b = max H b_h are recorded, not assumed.
    """
    if not (1 <= H <= 1 << 16):
        raise ValueError("H must be in [1, 2^16]")
    a: Dict[int, complex] = {}
    b: Dict[int, float] = {0: 1.0 / (2 * H + 2)}
    for h in range(1, H + 1):
        v = _vaaler_taper(h / (H + 1))
        ah = 1j * v / (_TWO_PI * h)
        a[h] = ah
        a[-h] = ah.conjugate()
        b[h] = (1.0 - h / (H + 1)) / (2 * H + 2)
        b[-h] = b[h]
    c_a = max(abs(h) * abs(a[h]) for h in a)
    c_b = max(H * bh for bh in b.values())
    return SawtoothApprox(H, a, b, c_a, c_b)


@dataclass(frozen=True)
class SawtoothReport:
    H: int
    points_checked: int
    max_error: float  # max |psi - psi*|; always ~1/2 at the jump itself
    max_error_interior: float  # same, restricted to dist(x, Z) >= 1/H
    max_slack: float  # max (|psi - psi*| - majorant); negative when healthy
    violations: int


def check_sawtooth(s: SawtoothApprox, grid_size: int, extra_random: int = 100,
                   seed: int = 20250809, tol: float = 1e-9) -> SawtoothReport:
    """Assert |psi(x) - psi*(x)| <= sum b_h e(hx) on a grid plus random x.

    The bound is an identity-backed inequality; tol only absorbs the float
    rounding of the two trigonometric sums.  Raises ApproximationViolation
    at the worst offending point if the inequality fails.
    """
    if grid_size < 1000:
        raise ValueError("grid_size must be at least 10^3")
    rng = np.random.default_rng(seed)
    xs = np.concatenate([
        np.arange(grid_size, dtype=np.float64) / grid_size,
        rng.random(extra_random),
    ])
    max_err = 0.0
    max_err_int = 0.0
    max_slack = -math.inf
    worst = (0.0, 0.0, 0.0)
    violations = 0
    for i in range(0, len(xs), CHUNK):
        x = xs[i : i + CHUNK]
        psi = (x % 1.0) - 0.5
        lhs = np.abs(psi - s.psi_star(x))
        rhs = s.majorant(x)
        slack = lhs - rhs
        j = int(np.argmax(slack))
        if slack[j] > max_slack:
            max_slack = float(slack[j])
            worst = (float(x[j]), float(lhs[j]), float(rhs[j]))
        max_err = max(max_err, float(np.max(lhs)))
        frac = x % 1.0
        interior = np.minimum(frac, 1.0 - frac) >= 1.0 / s.H
        if np.any(interior):
            max_err_int = max(max_err_int, float(np.max(lhs[interior])))
        violations += int(np.count_nonzero(slack > tol))
    if violations:
        raise ApproximationViolation(*worst)
    return SawtoothReport(s.H, len(xs), max_err, max_err_int, max_slack, violations)


# ---------------------------------------------------------------------------
# Van der Corput second-derivative test.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VdcReport:
    lhs: float
    rhs: float
    ratio: float
    delta: float
    interval: Tuple[int, int]


def vdc_check(f: Callable[[np.ndarray], np.ndarray], X: float, Y: float, delta: float,
              curvature_samples: int = 32, threads: int = 1) -> VdcReport:
    """|sum_{X < n <= X+Y} e(f(n))| against Y*sqrt(Delta) + 1/sqrt(Delta).

    The caller certifies |f''| within [Delta/4, 4*Delta] on [X, X+Y]; this is
    spot-checked through second differences (which equal f'' at an interior
    point by the mean value theorem).  Returns the measured lhs/rhs ratio;
    the inequality's absolute constant is reported, never asserted.
    """
    if not (X >= Y > 0):
        raise ValueError("need X >= Y > 0")
    if delta <= 0:
        raise CurvatureAssumptionFailed("Delta must be positive")
    t = np.linspace(X + 1.0, X + Y - 1.0, curvature_samples)
    d2 = np.abs(np.asarray(f(t + 1.0)) - 2.0 * np.asarray(f(t)) + np.asarray(f(t - 1.0)))
    slack = 1e-6
    if np.any(d2 < delta / 4.0 * (1 - slack)) or np.any(d2 > 4.0 * delta * (1 + slack)):
        raise CurvatureAssumptionFailed(
            f"sampled |f''| in [{d2.min():.3e}, {d2.max():.3e}] vs band "
            f"[{delta / 4:.3e}, {4 * delta:.3e}]"
        )
    lo = math.floor(X) + 1
    hi = math.floor(X + Y)
    total = exp_sum(lambda n: e_array(np.asarray(f(n.astype(np.float64)))), lo, hi, threads=threads)
    lhs = abs(total)
    rhs = Y * math.sqrt(delta) + 1.0 / math.sqrt(delta)
    return VdcReport(lhs, rhs, lhs / rhs, delta, (lo, hi))


# ---------------------------------------------------------------------------
# Erdos-Turan inequality (explicit constants, holds unconditionally).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ETReport:
    lhs: float
    rhs: float
    count: int
    n_points: int
    J: int


def erdos_turan_check(points: np.ndarray, interval: Tuple[float, float], J: int) -> ETReport:
    """Discrepancy of points in R/Z against an interval, versus the
    Erdos-Turan bound N/(J+1) + 3 sum_{j<=J} (1/j) |sum_n e(j u_n)|.

    interval = (start, length) with 0 <= length <= 1, taken mod 1.
    """
    if J < 1:
        raise ValueError("J must be at least 1")
    start, length = interval
    if not (0.0 <= length <= 1.0):
        raise ValueError("interval length must lie in [0, 1]")
    u = np.asarray(points, dtype=np.float64) % 1.0
    N = len(u)
    count = int(np.count_nonzero((u - start) % 1.0 < length))
    lhs = abs(count - length * N)
    rhs = N / (J + 1)
    for j in range(1, J + 1):
        sj = abs(compensated_complex_sum(e_array(j * u)))
        rhs += 3.0 * sj / j
    return ETReport(lhs, rhs, count, N, J)


# ---------------------------------------------------------------------------
# Taylor expansion of h * n^gamma on a short interval.
# ---------------------------------------------------------------------------

def _binom_real(gamma: float, i: int) -> float:
    out = 1.0
    for j in range(i):
        out *= (gamma - j) / (j + 1)
    return out


def taylor_phase(h: float, gamma: float, n0: int, L: int, k: int) -> Tuple[PolynomialPhase, float]:
    """Degree-(k-1) polynomial Q(l) ~ h (n0+l)^gamma on 0 < l <= L.

    Q(l) = h * sum_{0<=i<k} binom(gamma, i) n0^(gamma-i) l^i; the returned
    error bound |h| |binom(gamma,k)| n0^(gamma-k) L^k 2^(|gamma|+k) dominates
    the alternating binomial tail (for gamma in (0,1) the first omitted term
    alone already does).  DegreeTooSmall when the bound exceeds 1/2.
    """
    if float(gamma) == int(gamma):
        raise ValueError("gamma must be non-integer")
    if not (n0 >= 2 * L >= 2):
        raise ValueError("need n0 >= 2L >= 2")
    if not (1 <= k <= 64):
        raise ValueError("need 1 <= k <= 64")
    coeffs = tuple(h * _binom_real(gamma, i) * n0 ** (gamma - i) for i in range(k))
    bound = abs(h) * abs(_binom_real(gamma, k)) * n0 ** (gamma - k) * float(L) ** k * 2.0 ** (abs(gamma) + k)
    if bound > 0.5:
        raise DegreeTooSmall(f"truncation error bound {bound:.3g} > 0.5; raise k")
    return PolynomialPhase(coeffs, "monomial"), bound


# ---------------------------------------------------------------------------
# The |.|* norm over sub-progressions.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StarNormResult:
    value: float
    progression: Tuple[int, int, int]  # (start, step, length)
    mode: str


def star_norm(values: np.ndarray, mode: str = "exact", start: int = 0) -> StarNormResult:
    """sup over arithmetic progressions P of |sum_{n in P} f(n)|.

    values holds f on consecutive integers start, start+1, ...  Exact mode
    enumerates every (start, step, length) and is capped at 64 points;
    interval-only mode restricts to step 1 (a documented relaxation giving a
    lower bound) via an O(L^2) scan over prefix-sum pairs.
    """
    v = np.asarray(values, dtype=np.complex128)
    L = len(v)
    if L == 0:
        return StarNormResult(0.0, (start, 1, 0), mode)
    if mode == "exact":
        if L > 64:
            raise ValueError("exact mode capped at interval length 64")
        # singletons first, then every progression with at least two terms
        j0 = int(np.argmax(np.abs(v)))
        best = float(np.abs(v[j0]))
        best_prog = (start + j0, 1, 1)
        for step in range(1, L):
            for i0 in range(L - step):
                acc = v[i0]
                length = 1
                j = i0 + step
                while j < L:
                    acc += v[j]
                    length += 1
                    m = abs(acc)
                    if m > best:
                        best = m
                        best_prog = (start + i0, step, length)
                    j += step
        return StarNormResult(best, best_prog, mode)
    if mode != "interval-only":
        raise ValueError(f"unknown mode {mode!r}")
    prefix = np.concatenate([[0.0 + 0.0j], np.cumsum(v)])
    best = -1.0
    bi = bj = 0
    block = 512
    for i in range(0, L + 1, block):
        pi = prefix[i : min(i + block, L + 1)]
        d = np.abs(prefix[None, :] - pi[:, None])
        # only pairs i' < j matter; the diagonal and lower triangle give
        # empty or reversed intervals whose moduli are duplicates anyway
        jj = int(np.argmax(d))
        r, c = divmod(jj, d.shape[1])
        if d[r, c] > best:
            best = float(d[r, c])
            a, bb = sorted((i + r, c))
            bi, bj = a, bb
    if bj == bi:
        # all-zero input: report the trivial single point
        return StarNormResult(0.0, (start, 1, 1), mode)
    return StarNormResult(best, (start + bi, 1, bj - bi), mode)


# ---------------------------------------------------------------------------
# Discorrelation of the weighted PS sum against the plain prime sum.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscorrelationResult:
    N: int
    gamma: str
    descriptor: str
    S1: complex
    S2: complex
    delta: float

    def csv_row(self):
        return (self.N, self.gamma, self.descriptor,
                self.S1.real, self.S1.imag, self.S2.real, self.S2.imag, self.delta)


def _term_values(phase, n: np.ndarray) -> np.ndarray:
    if phase is None:
        return np.ones(len(n), dtype=np.complex128)
    if isinstance(phase, PhaseFunction):
        return phase.terms(n)
    if isinstance(phase, PolynomialPhase):
        return PhaseFunction(P=phase).terms(n)
    if callable(phase):
        out = phase(n)
        return np.asarray(out, dtype=np.complex128)
    raise TypeError(f"unsupported phase object {type(phase).__name__}")


def discorrelation(p: PSParameter, N: int, phase, lam_table: Optional[np.ndarray] = None,
                   threads: int = 1) -> DiscorrelationResult:
    """S1 = (1/gamma) sum_{n<=N, n in PS} n^(1-gamma) Lambda(n) e(g(n)),
    S2 = sum_{n<=N} Lambda(n) e(g(n)), and delta = |S1 - S2| / N.

    Both sums run over the von Mangoldt support only; the terms are chunked
    and compensated so the outputs are reproducible bit for bit.
    """
    if N > 10 ** 8:
        raise ValueError("N capped at 10^8")
    if lam_table is None:
        from .sieve import von_mangoldt_table

        lam_table = von_mangoldt_table(N, threads=threads)
    support = np.nonzero(lam_table[: N + 1] > 0.0)[0]
    terms2 = lam_table[support] * _term_values(phase, support)
    S2 = compensated_complex_sum(terms2)
    members = ps_enumerate(1, N, p)
    members = members[lam_table[members] > 0.0]
    g = float(p.gamma)
    weights = members.astype(np.float64) ** (1.0 - g) / g * lam_table[members]
    S1 = compensated_complex_sum(weights * _term_values(phase, members))
    delta = abs(S1 - S2) / N
    desc = phase.describe() if isinstance(phase, PhaseFunction) else (
        "0" if phase is None else getattr(phase, "describe", lambda: "custom")())
    return DiscorrelationResult(N, p.describe(), desc, S1, S2, delta)


def frac_concentration(A: float, beta: float, P: Optional[PolynomialPhase],
                       N: int, interval: Tuple[float, float]) -> int:
    """#{N < n <= 2N : {A n^beta + P(n)} in interval}.

    Probes the recurrence dichotomy: a count far above |I|*N forces
    |A| N^beta to be small.  interval = (start, length) mod 1.
    """
    if float(beta) == int(beta):
        raise ValueError("beta must be non-integer")
    start, length = interval
    count = 0
    for lo in range(N + 1, 2 * N + 1, CHUNK):
        n = np.arange(lo, min(lo + CHUNK, 2 * N + 1), dtype=np.float64)
        x = monomial_phase_mod1(A, beta, n)
        if P is not None:
            x = (x + PhaseFunction(P=P).phase_mod1(n)) % 1.0
        count += int(np.count_nonzero((x - start) % 1.0 < length))
    return count
