"""GPY sieve weights, the pseudorandom measure nu, and its empirical checks.

Lambda_R(n) = sum_{d | n, d <= R} mu(d) log(R/d) is the truncated divisor
sum; rho(n) = Lambda_R(n)^2 / log R.  On Z_N (N prime),

    nu(n) = (1/gamma) (phi(W)/W) (Wn+b)^(1-gamma) rho(Wn+b) 1[Wn+b in PS]

inside the window [N^(0.9 (1-corr)), N] and 1 outside it.  The asymptotic
window correction is a configuration value (default 0) and the linear-forms
limit is probed at finitely many N, reported rather than asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .counting import AffineLinearSystem
from .errors import MajorizationViolation, SeparationViolated
from .expsum import e_array, monomial_phase_mod1
from .ps_core import PSParameter, ps_enumerate
from .sieve import WTrick, build_wtrick, prime_flags_table

__all__ = [
    "MajorantParams",
    "NuMeasure",
    "squarefree_divisor_coeffs",
    "lambda_R",
    "lambda_R_batch",
    "nu",
    "MajorizationReport",
    "majorization_check",
    "LinearFormsReport",
    "linear_forms_average",
    "PhaseSumReport",
    "multi_linear_phase_sum",
    "VandermondeReport",
    "vandermonde_probe",
]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in range(2, math.isqrt(n) + 1):
        if n % q == 0:
            return False
    return True


@dataclass(frozen=True)
class MajorantParams:
    """Desk-scale parameters of the nu construction.

    eta0 = 1 - gamma and s0 = 2^(m-1) m follow the asymptotic recipe; R is
    stored explicitly along with the exponent it came from (R = N^r_exp),
    and window_exponent/window_correction pin the case-split boundary
    N^(window_exponent * (1 - window_correction)).
    """

    N: int
    R: float
    gamma: PSParameter
    wtrick: WTrick
    b: int
    m: int = 2
    r_exp: Optional[float] = None
    window_exponent: float = 0.9
    window_correction: float = 0.0

    def __post_init__(self):
        if not _is_prime(self.N):
            raise ValueError(f"N = {self.N} must be prime")
        if math.gcd(self.b, self.wtrick.W) != 1:
            raise ValueError("b must be coprime to W")
        if not (1.0 < self.R < self.N):
            raise ValueError("need 1 < R < N")

    @classmethod
    def from_exponent(cls, N: int, r_exp: float, gamma: PSParameter, w: int, b: int,
                      m: int = 2, **kw) -> "MajorantParams":
        return cls(N, float(N) ** r_exp, gamma, build_wtrick(w), b, m, r_exp=r_exp, **kw)

    @property
    def eta0(self) -> float:
        return 1.0 - float(self.gamma.gamma)

    @property
    def s0(self) -> int:
        return (1 << (self.m - 1)) * self.m

    @property
    def window(self) -> Tuple[int, int]:
        """[lo, N-1] inside Z_N where the sieve-weight formula applies."""
        lo = math.ceil(self.N ** (self.window_exponent * (1.0 - self.window_correction)))
        return lo, self.N - 1

    def describe(self) -> str:
        return (f"N={self.N},R={self.R:.6g},gamma={self.gamma.describe()},"
                f"w={self.wtrick.w},b={self.b},m={self.m}")

    def params_hash(self) -> str:
        import hashlib

        return hashlib.sha256(self.describe().encode()).hexdigest()[:16]


def _mu_sieve(limit: int) -> np.ndarray:
    mu = np.ones(limit + 1, dtype=np.int64)
    prime = np.ones(limit + 1, dtype=bool)
    prime[:2] = False
    for p in range(2, limit + 1):
        if prime[p]:
            prime[2 * p :: p] = False
            mu[p::p] *= -1
            sq = p * p
            if sq <= limit:
                mu[sq::sq] = 0
    return mu


def squarefree_divisor_coeffs(R: float) -> List[Tuple[int, float]]:
    """(d, mu(d) * log(R/d)) for squarefree d <= R; the d = 1 term is log R."""
    D = int(R)
    mu = _mu_sieve(max(D, 1))
    out = []
    for d in range(1, D + 1):
        if mu[d] != 0:
            out.append((d, float(mu[d]) * math.log(R / d)))
    return out


def lambda_R(n: int, R: float) -> float:
    """Truncated divisor sum over d | n, d <= R (exact enumeration).

    Only squarefree d matter, so only primes <= R are ever needed from n's
    factorization; n itself may be as large as 2^50.
    """
    if n < 1 or n > 1 << 50:
        raise ValueError("n must be in [1, 2^50]")
    total = 0.0
    for d, coeff in squarefree_divisor_coeffs(R):
        if n % d == 0:
            total += coeff
    return total


def lambda_R_batch(values: np.ndarray, R: float) -> np.ndarray:
    """Lambda_R over an int64 array, one vectorized pass per divisor."""
    out = np.zeros(len(values), dtype=np.float64)
    for d, coeff in squarefree_divisor_coeffs(R):
        if d == 1:
            out += coeff
        else:
            out[np.mod(values, d) == 0] += coeff
    return out


class NuMeasure:
    """The measure nu on Z_N, computed lazily and memoized as one table."""

    def __init__(self, params: MajorantParams, threads: int = 1):
        self.params = params
        self._threads = threads
        self._table: Optional[np.ndarray] = None

    @property
    def table(self) -> np.ndarray:
        if self._table is None:
            self._table = self._build()
        return self._table

    def value(self, n: int) -> float:
        return float(self.table[n % self.params.N])

    def _build(self) -> np.ndarray:
        p = self.params
        out = np.ones(p.N, dtype=np.float64)
        lo, hi = p.window
        if lo > hi:
            return out
        n = np.arange(lo, hi + 1, dtype=np.int64)
        t = p.wtrick.W * n + p.b
        g = float(p.gamma.gamma)
        members = ps_enumerate(int(t[0]), int(t[-1]), p.gamma)
        in_ps = np.zeros(int(t[-1]) - int(t[0]) + 1, dtype=bool)
        in_ps[members - int(t[0])] = True
        ps_mask = in_ps[t - int(t[0])]
        rho = lambda_R_batch(t, p.R) ** 2 / math.log(p.R)
        phi_over_w = p.wtrick.phi / p.wtrick.W
        vals = (1.0 / g) * phi_over_w * t.astype(np.float64) ** (1.0 - g) * rho
        vals[~ps_mask] = 0.0
        out[lo : hi + 1] = vals
        return out

    def mean(self) -> float:
        from .expsum import compensated_sum

        return compensated_sum(self.table) / self.params.N


def nu(n: int, params: MajorantParams, measure: Optional[NuMeasure] = None) -> float:
    """nu(n) for a single n in Z_N (builds or reuses the memoized table)."""
    if measure is None:
        measure = NuMeasure(params)
    return measure.value(n)


@dataclass(frozen=True)
class MajorizationReport:
    checked: int
    min_ratio: float
    argmin: Optional[int]
    c: float


def majorization_check(params: MajorantParams, n_range: Tuple[int, int], c: float = 1.0,
                       measure: Optional[NuMeasure] = None, nu_scale: float = 1.0,
                       threads: int = 1) -> MajorizationReport:
    """Assert nu(n) >= c (phi(W)/W) (Wn+b)^(1-gamma) log R at every n in the
    range with Wn+b in PS cap primes.

    nu_scale exists for negative controls (a deliberately corrupted measure
    must trip MajorizationViolation).  Returns the minimum observed ratio.
    """
    lo, hi = n_range
    wlo, whi = params.window
    if lo < wlo or hi > whi:
        raise ValueError(f"range [{lo}, {hi}] not inside window [{wlo}, {whi}]")
    if measure is None:
        measure = NuMeasure(params, threads=threads)
    if lo > hi:
        return MajorizationReport(0, math.inf, None, c)
    n = np.arange(lo, hi + 1, dtype=np.int64)
    t = params.wtrick.W * n + params.b
    members = ps_enumerate(int(t[0]), int(t[-1]), params.gamma)
    in_ps = np.zeros(int(t[-1]) - int(t[0]) + 1, dtype=bool)
    in_ps[members - int(t[0])] = True
    flags = prime_flags_table(int(t[-1]), threads=threads)
    mask = in_ps[t - int(t[0])] & flags[t]
    if not np.any(mask):
        return MajorizationReport(0, math.inf, None, c)
    g = float(params.gamma.gamma)
    tm = t[mask].astype(np.float64)
    bound = c * (params.wtrick.phi / params.wtrick.W) * tm ** (1.0 - g) * math.log(params.R)
    nu_vals = measure.table[n[mask]] * nu_scale
    ratios = nu_vals / bound
    j = int(np.argmin(ratios))
    if ratios[j] < 1.0 - 1e-12:
        raise MajorizationViolation(int(n[mask][j]), float(nu_vals[j]), float(bound[j]))
    return MajorizationReport(int(np.count_nonzero(mask)), float(ratios[j]), int(n[mask][j]), c)


@dataclass(frozen=True)
class LinearFormsReport:
    average: float
    std_error: float
    exhaustive: bool
    samples: int


def linear_forms_average(sys: AffineLinearSystem, measure: NuMeasure,
                         sample_count: Optional[int] = None, seed: int = 20250809,
                         threads: int = 1) -> LinearFormsReport:
    """(1/N^d) sum_{x in Z_N^d} prod_i nu(psi_i(x)), exhaustively when
    N^d <= 10^8 and by seeded Monte Carlo otherwise.

    The linear forms condition predicts a limit of 1; finite-N values are
    reported with a standard error, never asserted as the limit.
    """
    N = measure.params.N
    d, t = sys.d, sys.t
    if d > 3:
        raise ValueError("d capped at 3")
    table = measure.table
    if N ** d <= 10 ** 8 and sample_count is None:
        if d == 1:
            x = np.arange(N, dtype=np.int64)
            prod = np.ones(N, dtype=np.float64)
            for row, const in zip(sys.matrix, sys.constants):
                prod *= table[np.mod(row[0] * x + const, N)]
            from .expsum import compensated_sum

            return LinearFormsReport(compensated_sum(prod) / N, 0.0, True, N)
        inner = np.arange(N, dtype=np.int64)
        totals = []
        outer_iter = range(N) if d == 2 else (
            (a, b) for a in range(N) for b in range(N))
        for outer in outer_iter:
            xs = ((outer,) if isinstance(outer, int) else tuple(outer)) + (inner,)
            prod = np.ones(N, dtype=np.float64)
            for row, const in zip(sys.matrix, sys.constants):
                v = np.full(N, const, dtype=np.int64)
                for a, x in zip(row, xs):
                    if a:
                        v = v + a * x
                prod *= table[np.mod(v, N)]
            totals.append(float(np.sum(prod)))
        return LinearFormsReport(math.fsum(totals) / N ** d, 0.0, True, N ** d)
    if sample_count is None or sample_count < 10 ** 4:
        raise ValueError("Monte Carlo needs sample_count >= 10^4")
    rng = np.random.default_rng(seed)
    x = rng.integers(0, N, size=(sample_count, d), dtype=np.int64)
    prod = np.ones(sample_count, dtype=np.float64)
    for row, const in zip(sys.matrix, sys.constants):
        v = np.full(sample_count, const, dtype=np.int64)
        for j, a in enumerate(row):
            if a:
                v = v + a * x[:, j]
        prod *= table[np.mod(v, N)]
    mean = float(np.mean(prod))
    stderr = float(np.std(prod, ddof=1) / math.sqrt(sample_count))
    return LinearFormsReport(mean, stderr, False, sample_count)


@dataclass(frozen=True)
class PhaseSumReport:
    value: complex
    normalized: float
    count: int
    s: int


def multi_linear_phase_sum(h: Sequence[float], forms: Sequence[Tuple[int, int]],
                           gamma: float, interval: Tuple[int, int],
                           min_separation: float = 0.0,
                           threads: int = 1) -> PhaseSumReport:
    """sum_{x in I} e(h_1 psi_1(x)^gamma + ... + h_s psi_s(x)^gamma).

    forms are (alpha_i, beta_i) for psi_i(x) = alpha_i x + beta_i; the
    pairwise separation |alpha_i beta_j - alpha_j beta_i| must be positive
    (>= min_separation when given), else SeparationViolated.  Reports
    |sum| / |I| for comparison with the predicted power-saving decay.
    """
    s = len(forms)
    if len(h) != s or s == 0:
        raise ValueError("h and forms must have equal positive length")
    if any(hi == 0 for hi in h):
        raise ValueError("frequencies h_i must be nonzero")
    if any(a == 0 for a, _ in forms):
        raise ValueError("form slopes alpha_i must be nonzero")
    for i in range(s):
        for j in range(i + 1, s):
            det = forms[i][0] * forms[j][1] - forms[j][0] * forms[i][1]
            if abs(det) <= min_separation:
                raise SeparationViolated(
                    f"forms {i}, {j}: |alpha_i beta_j - alpha_j beta_i| = {abs(det)}")
    lo, hi = interval
    if hi - lo + 1 > 10 ** 7:
        raise ValueError("interval capped at 10^7 points")
    for a, b in forms:
        if a * lo + b <= 0 or a * hi + b <= 0:
            raise ValueError("forms must stay positive on the interval")

    from .expsum import exp_sum

    def terms(n: np.ndarray) -> np.ndarray:
        phase = np.zeros(len(n), dtype=np.float64)
        x = n.astype(np.float64)
        for hi_coef, (a, b) in zip(h, forms):
            phase = (phase + monomial_phase_mod1(hi_coef, gamma, a * x + b)) % 1.0
        return e_array(phase)

    total = exp_sum(terms, lo, hi, threads=threads)
    count = hi - lo + 1
    return PhaseSumReport(total, abs(total) / count, count, s)


# ---------------------------------------------------------------------------
# The Vandermonde lower-bound probe.
# ---------------------------------------------------------------------------

def _fraction_inverse(M: List[List[Fraction]]) -> List[List[Fraction]]:
    s = len(M)
    A = [row[:] + [Fraction(int(i == j)) for j in range(s)] for i, row in enumerate(M)]
    for col in range(s):
        piv = next((r for r in range(col, s) if A[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [v * inv for v in A[col]]
        for r in range(s):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [v - f * w for v, w in zip(A[r], A[col])]
    return [row[s:] for row in A]


@dataclass(frozen=True)
class VandermondeReport:
    S: Tuple[float, ...]
    max_S: float
    certified_bound: float


def vandermonde_probe(c: Sequence, v: Sequence) -> VandermondeReport:
    """Power sums S_j = sum_i v_i c_i^j (j = 1..s) against the certified
    lower bound max_j |S_j| >= ||v||_1 / (s ||M^{-1}||_1).

    M is the Vandermonde matrix M[j][i] = c_i^j, so M v = (S_1, ..., S_s)
    and ||v||_1 <= ||M^{-1}||_1 ||S||_1 <= s ||M^{-1}||_1 max_j |S_j|; the
    matrix norm is the induced max-column-sum.  All arithmetic is exact
    rational, so the inequality can never fail.  At s = 1 the bound equals
    |v_1 c_1| exactly.
    """
    s = len(c)
    if len(v) != s or s == 0:
        raise ValueError("c and v must have equal positive length")
    cf = [Fraction(x) for x in c]
    vf = [Fraction(x) for x in v]
    if len(set(cf)) != s:
        raise ValueError("c_i must be pairwise distinct")
    if any(x == 0 for x in cf):
        raise ValueError("c_i must be nonzero (M would be singular)")
    S = [sum(vf[i] * cf[i] ** j for i in range(s)) for j in range(1, s + 1)]
    M = [[cf[i] ** j for i in range(s)] for j in range(1, s + 1)]
    Minv = _fraction_inverse(M)
    inv_norm1 = max(sum(abs(Minv[r][col]) for r in range(s)) for col in range(s))
    V1 = sum(abs(x) for x in vf)
    bound = V1 / (s * inv_norm1) if inv_norm1 != 0 else Fraction(0)
    max_S = max(abs(x) for x in S)
    assert max_S >= bound, "certified bound exceeded the computed maximum"
    return VandermondeReport(tuple(float(x) for x in S), float(max_S), float(bound))
