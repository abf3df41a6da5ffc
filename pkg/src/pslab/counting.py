"""Weighted counts over affine-linear systems, local densities, Gowers norms.

The central object is sum_{n in K cap Z^d} prod_i w(psi_i(n)) for a
finite-complexity system Psi and a weight w in {1, Lambda, Lambda_gamma, nu}.
Counts are exact lattice enumerations (d <= 3) with compensated accumulation;
the k-AP and ternary-sum specializations switch to convolution identities at
large scale, which the small-scale nested-loop oracle cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import RangeMismatch
from .expsum import compensated_sum
from .ps_core import PSParameter, lambda_gamma_table
from .sieve import von_mangoldt_table

__all__ = [
    "AffineLinearSystem",
    "ConvexBody",
    "WeightTable",
    "ap_system",
    "ones_weight",
    "von_mangoldt_weight",
    "lambda_gamma_weight",
    "count_weighted",
    "kap_count",
    "goldbach3_count",
    "local_density",
    "archimedean_density",
    "singular_series",
    "predict_main_term",
    "gowers_norm",
    "gowers_norm_direct",
    "wtricked_difference",
]


@dataclass(frozen=True)
class AffineLinearSystem:
    """Forms psi_i(x) = row_i . x + constant_i on Z^d.

    Finite complexity is enforced at construction: no two linear parts may
    be proportional (all 2x2 minors vanishing), which also rules out zero
    rows once t >= 2.
    """

    matrix: Tuple[Tuple[int, ...], ...]
    constants: Tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        if len(self.matrix) == 0 or len(self.matrix) != len(self.constants):
            raise ValueError("matrix rows and constants must match and be nonempty")
        d = len(self.matrix[0])
        if any(len(r) != d for r in self.matrix):
            raise ValueError("ragged matrix")
        for i in range(len(self.matrix)):
            for j in range(i + 1, len(self.matrix)):
                if _proportional(self.matrix[i], self.matrix[j]):
                    raise ValueError(f"rows {i} and {j} are linearly dependent")

    @property
    def d(self) -> int:
        return len(self.matrix[0])

    @property
    def t(self) -> int:
        return len(self.matrix)

    @property
    def L(self) -> int:
        return max(max(abs(v) for v in row) for row in self.matrix)

    def describe(self) -> str:
        if self.name:
            return self.name
        rows = ";".join(",".join(str(v) for v in r) for r in self.matrix)
        consts = ",".join(str(c) for c in self.constants)
        return f"[{rows}]+[{consts}]"


def _proportional(u: Sequence[int], v: Sequence[int]) -> bool:
    for i in range(len(u)):
        for j in range(i + 1, len(u)):
            if u[i] * v[j] - u[j] * v[i] != 0:
                return False
    return True


def ap_system(k: int) -> AffineLinearSystem:
    """The k-term progression forms (n, n+m, ..., n+(k-1)m) on Z^2."""
    if k < 2:
        raise ValueError("k must be at least 2")
    return AffineLinearSystem(tuple((1, i) for i in range(k)), tuple([0] * k), name=f"{k}-AP")


@dataclass(frozen=True)
class ConvexBody:
    """Lattice membership region inside [-X, X]^d.

    constraints is a list of (coeffs, rhs) standing for coeffs . x <= rhs;
    membership tests are exact integer arithmetic.
    """

    X: int
    constraints: Tuple[Tuple[Tuple[int, ...], int], ...] = ()

    @classmethod
    def box(cls, X: int) -> "ConvexBody":
        return cls(X)

    @classmethod
    def ap_simplex(cls, k: int, X: int) -> "ConvexBody":
        """{n >= 1, m >= 1, n + (k-1) m <= X} in the (n, m) plane."""
        return cls(X, (((-1, 0), -1), ((0, -1), -1), ((1, k - 1), X)))

    def mask(self, coords: Sequence[np.ndarray]) -> np.ndarray:
        out = np.ones(np.broadcast(*coords).shape if len(coords) > 1 else coords[0].shape, dtype=bool)
        for coeffs, rhs in self.constraints:
            acc = np.zeros_like(coords[0], dtype=np.int64)
            for c, x in zip(coeffs, coords):
                if c:
                    acc = acc + c * x
            out &= acc <= rhs
        return out


@dataclass(frozen=True)
class WeightTable:
    """Weight values indexed by the integer argument.

    Non-modular tables apply the convention w(n) = 0 for n <= 0 and raise
    RangeMismatch past their precomputed limit; modular tables (nu on Z_N)
    reduce the argument first.
    """

    values: np.ndarray
    kind: str
    modulus: Optional[int] = None

    @property
    def limit(self) -> int:
        return len(self.values) - 1

    def lookup(self, v: np.ndarray) -> np.ndarray:
        if self.modulus is not None:
            return self.values[np.mod(v, self.modulus)]
        out = np.zeros(v.shape, dtype=np.float64)
        good = (v >= 1) & (v <= self.limit)
        high = v > self.limit
        if np.any(high):
            raise RangeMismatch(
                f"form value {int(v[high][0])} beyond precomputed weight limit {self.limit}")
        out[good] = self.values[v[good]]
        return out


def ones_weight(limit: int) -> WeightTable:
    vals = np.ones(limit + 1, dtype=np.float64)
    vals[0] = 0.0
    return WeightTable(vals, "ones")


def von_mangoldt_weight(limit: int, threads: int = 1) -> WeightTable:
    return WeightTable(von_mangoldt_table(limit, threads=threads), "lambda")


def lambda_gamma_weight(limit: int, p: PSParameter, threads: int = 1,
                        lam: Optional[np.ndarray] = None) -> WeightTable:
    if lam is None:
        lam = von_mangoldt_table(limit, threads=threads)
    return WeightTable(lambda_gamma_table(limit, p, lam), "lambda_gamma")


def _scan_axes(d: int, X: int):
    """Outer loop tuples for the first d-1 coordinates of [-X, X]^d."""
    if d == 1:
        yield ()
        return
    rng = range(-X, X + 1)
    if d == 2:
        for x1 in rng:
            yield (x1,)
        return
    for x1 in rng:
        for x2 in rng:
            yield (x1, x2)


def count_weighted(sys: AffineLinearSystem, body: ConvexBody, weight: WeightTable,
                   threads: int = 1) -> float:
    """Exact lattice enumeration of body with product-of-weights accumulation.

    The innermost coordinate is vectorized; slice subtotals are combined in
    a fixed order, so the result is independent of the worker count.
    """
    d = sys.d
    if d > 3:
        raise ValueError("lattice scan supports d <= 3")
    X = body.X
    inner = np.arange(-X, X + 1, dtype=np.int64)
    outers = list(_scan_axes(d, X))

    def slice_total(outer: Tuple[int, ...]) -> float:
        coords = [np.full_like(inner, c) for c in outer] + [inner]
        m = body.mask(coords)
        if not np.any(m):
            return 0.0
        sel = [c[m] for c in coords]
        prodw = np.ones(len(sel[0]), dtype=np.float64)
        for row, const in zip(sys.matrix, sys.constants):
            v = np.full(len(sel[0]), const, dtype=np.int64)
            for a, x in zip(row, sel):
                if a:
                    v = v + a * x
            prodw *= weight.lookup(v)
            if not np.any(prodw):
                return 0.0
        return float(np.sum(prodw))

    if threads > 1 and len(outers) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(slice_total, outers))
    else:
        partials = [slice_total(o) for o in outers]
    return math.fsum(partials)


def _autoconvolve(w: np.ndarray) -> np.ndarray:
    if len(w) <= 4096:
        return np.convolve(w, w)
    from scipy.signal import fftconvolve

    return fftconvolve(w, w)


def kap_count(k: int, X: int, weight: WeightTable, method: str = "auto",
              threads: int = 1) -> float:
    """sum over 1 <= n, m with n + (k-1) m <= X of prod_{i<k} w(n + i m).

    k = 3 admits the convolution identity: with b the middle term,
    sum_b w(b) * (T(2b) - w(b)^2) / 2 where T is the autoconvolution of w;
    table index 0 carries weight 0, so n >= 1 is automatic.  Larger k uses
    a per-m vectorized scan.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    if weight.modulus is None and weight.limit < X:
        raise RangeMismatch(f"weight table limit {weight.limit} below X = {X}")
    if method not in ("auto", "lattice", "convolution", "scan"):
        raise ValueError(f"unknown method {method!r}")
    if method == "lattice" or (method == "auto" and X <= 300 and k == 3):
        return count_weighted(ap_system(k), ConvexBody.ap_simplex(k, X), weight, threads=threads)
    w = weight.values[: X + 1].astype(np.float64)
    if weight.modulus is not None:
        idx = np.arange(X + 1) % weight.modulus
        w = weight.values[idx]
        w[0] = 0.0
    if k == 3 and method in ("auto", "convolution"):
        T = _autoconvolve(w)
        b = np.arange(1, X + 1)
        inner = (T[2 * b] - w[b] ** 2) / 2.0
        return compensated_sum(w[b] * inner)
    totals = []
    for m in range(1, (X - 1) // (k - 1) + 1):
        n_max = X - (k - 1) * m
        if n_max < 1:
            break
        acc = w[1 : n_max + 1].copy()
        for i in range(1, k):
            acc *= w[1 + i * m : n_max + i * m + 1]
        totals.append(float(np.sum(acc)))
    return math.fsum(totals)


def goldbach3_count(N: int, weight: WeightTable, method: str = "auto") -> float:
    """Weighted count of ordered triples n1 + n2 + n3 = N, n_i >= 1."""
    if N < 3:
        return 0.0
    if N > 10 ** 7:
        raise ValueError("N capped at 10^7")
    if weight.modulus is None and weight.limit < N - 2:
        raise RangeMismatch(f"weight table limit {weight.limit} below N - 2")
    w = weight.values[:N].astype(np.float64).copy()
    w[0] = 0.0
    if method == "direct" or (method == "auto" and N <= 3000):
        totals = []
        for n1 in range(1, N - 1):
            n2 = np.arange(1, N - n1, dtype=np.int64)
            totals.append(float(np.sum(w[n1] * w[n2] * w[N - n1 - n2])))
        return math.fsum(totals)
    T = _autoconvolve(w)  # T[s] = sum_{n2 + n3 = s} w(n2) w(n3)
    n1 = np.arange(1, N - 1, dtype=np.int64)
    return compensated_sum(w[n1] * T[N - n1])


def local_density(sys: AffineLinearSystem, p: int) -> Fraction:
    """beta_p = p^{-d} sum_{n in (Z/p)^d} prod_i (p/(p-1)) 1[psi_i(n) != 0 mod p],
    exact by full residue enumeration."""
    d, t = sys.d, sys.t
    if p ** d > 10 ** 8:
        raise ValueError("p^d capped at 10^8")
    inner = np.arange(p, dtype=np.int64)
    good_total = 0
    for outer in product(range(p), repeat=d - 1):
        ok = np.ones(p, dtype=bool)
        for row, const in zip(sys.matrix, sys.constants):
            v = const + row[-1] * inner
            for a, x in zip(row[:-1], outer):
                v = v + a * x
            ok &= np.mod(v, p) != 0
        good_total += int(np.count_nonzero(ok))
    return Fraction(good_total * p ** t, p ** d * (p - 1) ** t)


def archimedean_density(sys: AffineLinearSystem, body: ConvexBody,
                        positivity: bool = True) -> float:
    """Lattice proportion of body (optionally cut to all forms positive),
    normalized by X^d: the volume factor of the main-term prediction."""
    d = sys.d
    if d > 3:
        raise ValueError("d capped at 3")
    X = body.X
    inner = np.arange(-X, X + 1, dtype=np.int64)
    total = 0
    for outer in _scan_axes(d, X):
        coords = [np.full_like(inner, c) for c in outer] + [inner]
        m = body.mask(coords)
        if positivity:
            for row, const in zip(sys.matrix, sys.constants):
                v = np.full_like(inner, const)
                for a, x in zip(row, coords):
                    if a:
                        v = v + a * x
                m &= v > 0
        total += int(np.count_nonzero(m))
    return total / X ** d


def singular_series(sys: AffineLinearSystem, prime_cut: int = 100) -> float:
    """prod_{p <= prime_cut} beta_p; the tail is not certified (diagnostic)."""
    out = 1.0
    for p in range(2, prime_cut + 1):
        if all(p % q for q in range(2, int(math.isqrt(p)) + 1)):
            out *= float(local_density(sys, p))
    return out


def predict_main_term(sys: AffineLinearSystem, body: ConvexBody, prime_cut: int = 100) -> float:
    """(lattice volume) * prod_{p <= prime_cut} beta_p, the Green-Tao-style
    main term truncated at prime_cut (logged as a diagnostic, not asserted)."""
    return archimedean_density(sys, body) * body.X ** sys.d * singular_series(sys, prime_cut)


# ---------------------------------------------------------------------------
# Gowers uniformity norms on Z_N.
# ---------------------------------------------------------------------------

def _gowers_pow(f: np.ndarray, s: int) -> float:
    """||f||_{U^s}^{2^s} by the multiplicative-derivative recursion; this is
    the box average E_{x,h} prod_omega C^{|omega|} f(x + omega . h) computed
    in a factored order, exactly real."""
    if s == 1:
        m = complex(np.mean(f))
        return m.real * m.real + m.imag * m.imag
    N = len(f)
    total = 0.0
    fc = np.conj(f)
    for h in range(N):
        total += _gowers_pow(f * np.roll(fc, -h), s - 1)
    return total / N


def gowers_norm(f: np.ndarray, s: int) -> float:
    """The U^s norm of f on Z_N, nonnegative real.

    The factored recursion costs ~N^s vector operations (a factor N below
    the naive cube enumeration), so that is what the capacity guard bounds.
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    f = np.asarray(f, dtype=np.complex128)
    N = len(f)
    if N ** s > 10 ** 9:
        raise ValueError("N^s capped at 10^9")
    v = _gowers_pow(f, s)
    return v ** (1.0 / (1 << s))


def gowers_norm_direct(f: np.ndarray, s: int) -> float:
    """Literal product-over-cube enumeration, N^(s+1) work; the imaginary
    residue of the average is asserted below 1e-10.  For oracle use."""
    f = np.asarray(f, dtype=np.complex128)
    N = len(f)
    if N ** (s + 1) > 10 ** 9:
        raise ValueError("N^(s+1) capped at 10^9 for the direct enumeration")
    total = 0.0 + 0.0j
    cube = list(product((0, 1), repeat=s))
    for hs in product(range(N), repeat=s):
        acc = np.ones(N, dtype=np.complex128)
        for omega in cube:
            shift = sum(o * h for o, h in zip(omega, hs)) % N
            g = np.roll(f, -shift)
            acc *= np.conj(g) if sum(omega) % 2 else g
        total += np.sum(acc)
    avg = total / N ** (s + 1)
    assert abs(avg.imag) < 1e-10, f"imaginary residue {avg.imag}"
    return max(avg.real, 0.0) ** (1.0 / (1 << s))


def wtricked_difference(N_z: int, W: int, b: int, p: PSParameter,
                        threads: int = 1) -> np.ndarray:
    """f(x) = (phi(W)/W) (Lambda_gamma - Lambda)(W x + b) on Z_{N_z}.

    The Gowers-norm estimate predicts ||f||_{U^s} = o(1); this builds the
    input for measuring it at desk scale.
    """
    top = W * (N_z - 1) + b
    lam = von_mangoldt_table(top, threads=threads)
    lamg = lambda_gamma_table(top, p, lam)
    phi_over_w = _phi(W) / W
    idx = W * np.arange(N_z, dtype=np.int64) + b
    return (phi_over_w * (lamg[idx] - lam[idx])).astype(np.complex128)


def _phi(W: int) -> int:
    out, n, p = 1, W, 2
    while p * p <= n:
        if n % p == 0:
            out *= p - 1
            n //= p
            while n % p == 0:
                out *= p
                n //= p
        p += 1
    if n > 1:
        out *= n - 1
    return out
