"""Polynomial phases, smoothness norms, and nilmanifold states.

Polynomials live in the monomial basis (a_0 + a_1 n + ...) or the binomial
basis (alpha_0 + alpha_1 C(n,1) + ... + alpha_d C(n,d)); the change of basis
is the exact Stirling-number transform.  The smoothness norm on [n0+1, n0+L]
is sup_{1<=j<=d} L^j * ||alpha_j||_{R/Z} computed after shifting to [1, L].

Two nilmanifolds are supported: the torus R^D/Z^D with a degree-d filtration
and the Heisenberg manifold (3x3 unipotent matrices over R modulo the integer
lattice), the minimal non-abelian degree-2 instance.  Group arithmetic is done
in exact rationals (every float is one), so fundamental-domain reductions and
large-n evaluations carry no rounding drift; coordinates are cast to float
only at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Tuple, Union

from .errors import InvalidCharacter

__all__ = [
    "PolynomialPhase",
    "to_binomial_basis",
    "to_monomial_basis",
    "smoothness_norm",
    "NilManifold",
    "NilState",
    "torus",
    "heisenberg",
    "TorusPolySequence",
    "HeisenbergPolySequence",
    "heisenberg_step",
    "heisenberg_word",
    "heis_mul",
    "heis_pow",
    "heis_reduce",
    "horizontal_character",
    "character_phase",
    "quotient_distance",
    "ConstantFunction",
    "TorusCharacter",
    "HeisenbergVerticalCharacter",
    "lipschitz_eval",
]

Number = Union[int, float, Fraction]


@lru_cache(maxsize=None)
def _stirling2(n: int, k: int) -> int:
    """Stirling numbers of the second kind S(n,k)."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


@lru_cache(maxsize=None)
def _stirling1(n: int, k: int) -> int:
    """Signed Stirling numbers of the first kind s(n,k):
    x(x-1)...(x-n+1) = sum_k s(n,k) x^k."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return _stirling1(n - 1, k - 1) - (n - 1) * _stirling1(n - 1, k)


def _exactify(v: Number) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class PolynomialPhase:
    """Real polynomial with a declared coefficient basis.

    Coefficients may be Fractions (exact mode) or floats; conversions and
    shifts promote floats to their exact rational values internally so that
    fractional parts of the results are meaningful even for large shifts.
    """

    coeffs: Tuple[Number, ...]
    basis: str = "monomial"  # "monomial" | "binomial"

    def __post_init__(self):
        if self.basis not in ("monomial", "binomial"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if len(self.coeffs) == 0:
            object.__setattr__(self, "coeffs", (0,))
        if len(self.coeffs) - 1 > 64:
            raise ValueError("degree must be at most 64")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.coeffs)

    def evaluate(self, n: Number) -> float:
        if self.basis == "monomial":
            acc = 0.0
            for c in reversed(self.coeffs):
                acc = acc * n + float(c)
            return acc
        return float(sum(float(c) * math.comb(int(n), j) if n >= 0 else float(c) * _comb_int(n, j)
                         for j, c in enumerate(self.coeffs)))

    def evaluate_exact(self, n: int) -> Fraction:
        cs = [_exactify(c) for c in self.coeffs]
        if self.basis == "monomial":
            acc = Fraction(0)
            for c in reversed(cs):
                acc = acc * n + c
            return acc
        return sum((c * _comb_int(n, j) for j, c in enumerate(cs)), Fraction(0))

    __call__ = evaluate

    def shift(self, n0: int) -> "PolynomialPhase":
        """The polynomial n -> P(n0 + n), in the same basis.

        Binomial basis uses Vandermonde's identity C(n0+n, k) =
        sum_i C(n0, k-i) C(n, i); monomial basis uses the binomial theorem.
        Exact in rationals regardless of input representation.
        """
        if n0 == 0:
            return self
        cs = [_exactify(c) for c in self.coeffs]
        d = self.degree
        if self.basis == "binomial":
            out = [Fraction(0)] * (d + 1)
            for k, c in enumerate(cs):
                if c == 0:
                    continue
                for i in range(k + 1):
                    out[i] += c * _comb_int(n0, k - i)
        else:
            out = [Fraction(0)] * (d + 1)
            for j, c in enumerate(cs):
                if c == 0:
                    continue
                for i in range(j + 1):
                    out[i] += c * math.comb(j, i) * Fraction(n0) ** (j - i)
        if self.is_exact:
            return PolynomialPhase(tuple(out), self.basis)
        return PolynomialPhase(tuple(float(c) for c in out), self.basis)


def _comb_int(n, k: int):
    """C(n, k) for possibly negative or rational n (falling factorial / k!)."""
    if isinstance(n, int) and n >= 0:
        return math.comb(n, k)
    n = _exactify(n)
    num = Fraction(1)
    for i in range(k):
        num *= n - i
    return num / math.factorial(k)


def to_binomial_basis(P: PolynomialPhase) -> PolynomialPhase:
    """Exact Stirling change of basis into alpha_j * C(n, j) coefficients."""
    if P.basis == "binomial":
        return P
    cs = [_exactify(c) for c in P.coeffs]
    d = P.degree
    alphas = [Fraction(0)] * (d + 1)
    for j, c in enumerate(cs):
        if c == 0:
            continue
        for k in range(j + 1):
            alphas[k] += c * _stirling2(j, k) * math.factorial(k)
    if P.is_exact:
        return PolynomialPhase(tuple(alphas), "binomial")
    return PolynomialPhase(tuple(float(a) for a in alphas), "binomial")


def to_monomial_basis(P: PolynomialPhase) -> PolynomialPhase:
    if P.basis == "monomial":
        return P
    cs = [_exactify(c) for c in P.coeffs]
    d = P.degree
    out = [Fraction(0)] * (d + 1)
    for k, a in enumerate(cs):
        if a == 0:
            continue
        fk = math.factorial(k)
        for j in range(k + 1):
            out[j] += a * _stirling1(k, j) / fk
    if P.is_exact:
        return PolynomialPhase(tuple(out), "monomial")
    return PolynomialPhase(tuple(float(c) for c in out), "monomial")


def _dist_to_int(x: Fraction) -> Fraction:
    r = x - round(x)
    return abs(r)


def smoothness_norm(P: PolynomialPhase, L: int, n0: int = 0) -> float:
    """sup_{1<=j<=d} L^j * ||alpha_j||_{R/Z} for P(n0 + .) on [1, L].

    alpha_j are the binomial-basis coefficients after the shift.  Zero iff
    every nonconstant alpha_j is an integer.
    """
    if L < 1:
        raise ValueError("L must be at least 1")
    shifted = P.shift(n0) if n0 else P
    alphas = to_binomial_basis(shifted).coeffs
    best = Fraction(0)
    for j in range(1, len(alphas)):
        v = _dist_to_int(_exactify(alphas[j])) * Fraction(L) ** j
        if v > best:
            best = v
    try:
        return float(best)
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------------------
# Nilmanifolds.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NilManifold:
    kind: str  # "torus" | "heisenberg"
    degree: int
    dimension: int
    complexity: float = 1.0  # the bound 1/delta

    def __post_init__(self):
        if self.kind == "heisenberg":
            if self.dimension != 3 or self.degree != 2:
                raise ValueError("heisenberg manifold has dimension 3 and degree 2")
        elif self.kind == "torus":
            if self.dimension < 1 or self.degree < 1:
                raise ValueError("torus needs dimension >= 1 and degree >= 1")
        else:
            raise ValueError(f"unsupported manifold kind {self.kind!r}")


def torus(D: int, degree: int = 1, complexity: float = 1.0) -> NilManifold:
    return NilManifold("torus", degree, D, complexity)


def heisenberg(complexity: float = 1.0) -> NilManifold:
    return NilManifold("heisenberg", 2, 3, complexity)


@dataclass(frozen=True)
class NilState:
    """A point of G/Gamma in fundamental-domain coordinates [0,1)^D."""

    manifold: NilManifold
    coords: Tuple[float, ...]

    def __post_init__(self):
        if len(self.coords) != self.manifold.dimension:
            raise ValueError("coordinate count does not match manifold dimension")
        for c in self.coords:
            if not (0.0 <= c < 1.0):
                raise ValueError(f"coordinate {c} outside fundamental domain")


# Heisenberg elements are coordinate triples (x, y, z) standing for the
# unipotent matrix [[1, x, z], [0, 1, y], [0, 0, 1]].

Triple = Tuple[Fraction, Fraction, Fraction]


def _as_triple(v: Sequence[Number]) -> Triple:
    if len(v) != 3:
        raise ValueError("heisenberg element needs 3 coordinates")
    return tuple(_exactify(c) for c in v)  # type: ignore[return-value]


def heis_mul(g: Sequence[Number], h: Sequence[Number]) -> Triple:
    x1, y1, z1 = _as_triple(g)
    x2, y2, z2 = _as_triple(h)
    return (x1 + x2, y1 + y2, z1 + z2 + x1 * y2)


def heis_pow(g: Sequence[Number], k: int) -> Triple:
    """g^k via the closed unipotent form, valid for every integer k."""
    x, y, z = _as_triple(g)
    kk = Fraction(k * (k - 1), 2)
    return (k * x, k * y, k * z + kk * x * y)


def heis_reduce(g: Sequence[Number]) -> Tuple[Triple, Tuple[int, int, int]]:
    """Representative of g*Gamma in [0,1)^3 plus the lattice word used.

    Right-multiplying by (a, b, c) in Z^3 sends (x, y, z) to
    (x+a, y+b, z+c+x*b); the abelianized coordinates are reduced first and
    the central one afterwards, since the abelian corrections feed into z.
    """
    x, y, z = _as_triple(g)
    b = -math.floor(y)
    a = -math.floor(x)
    z1 = z + x * b
    c = -math.floor(z1)
    return (x + a, y + b, z1 + c), (a, b, c)


@dataclass(frozen=True)
class HeisenbergPolySequence:
    """g(n) = g0 * g1^C(n,1) * g2^C(n,2) with g2 constrained to the center."""

    g0: Tuple[Number, Number, Number]
    g1: Tuple[Number, Number, Number]
    g2: Tuple[Number, Number, Number]
    manifold: NilManifold = field(default_factory=heisenberg)

    def __post_init__(self):
        x2, y2, _ = _as_triple(self.g2)
        if x2 != 0 or y2 != 0:
            raise ValueError("g2 must lie in the center (x = y = 0)")


def heisenberg_word(seq: HeisenbergPolySequence, n: int) -> Triple:
    """The unreduced group element g(n), exact."""
    word = heis_mul(seq.g0, heis_pow(seq.g1, n))
    _, _, zeta = _as_triple(seq.g2)
    cn2 = Fraction(n * (n - 1), 2)
    x, y, z = word
    return (x, y, z + zeta * cn2)


def heisenberg_step(seq: HeisenbergPolySequence, n: int) -> NilState:
    """g(n)*Gamma in fundamental-domain coordinates."""
    reduced, _ = heis_reduce(heisenberg_word(seq, n))
    return NilState(seq.manifold, tuple(float(c % 1) for c in reduced))


@dataclass(frozen=True)
class TorusPolySequence:
    """g(n) = sum_i coeffs[i] * C(n,i) on R^D/Z^D (componentwise)."""

    manifold: NilManifold
    coeffs: Tuple[Tuple[Number, ...], ...]

    def __post_init__(self):
        if self.manifold.kind != "torus":
            raise ValueError("TorusPolySequence requires a torus manifold")
        if len(self.coeffs) - 1 > self.manifold.degree:
            raise ValueError("sequence degree exceeds manifold filtration degree")
        for vec in self.coeffs:
            if len(vec) != self.manifold.dimension:
                raise ValueError("coefficient vector dimension mismatch")


def torus_step(seq: TorusPolySequence, n: int) -> NilState:
    D = seq.manifold.dimension
    acc = [Fraction(0)] * D
    for i, vec in enumerate(seq.coeffs):
        w = math.comb(n, i) if n >= 0 else _comb_int(n, i)
        for j in range(D):
            acc[j] += _exactify(vec[j]) * w
    return NilState(seq.manifold, tuple(float(c % 1) for c in acc))


def _abelian_coords(state: NilState) -> Tuple[float, ...]:
    if state.manifold.kind == "heisenberg":
        return state.coords[:2]
    return state.coords


def _check_character(k: Sequence[int], manifold: NilManifold) -> Tuple[int, ...]:
    k = tuple(int(v) for v in k)
    if manifold.kind == "heisenberg":
        if len(k) == 3:
            if k[2] != 0:
                raise InvalidCharacter("character pairs nontrivially with the center")
            k = k[:2]
        if len(k) != 2:
            raise InvalidCharacter("heisenberg characters have 2 horizontal components")
    elif len(k) != manifold.dimension:
        raise InvalidCharacter("character length must equal torus dimension")
    return k


def horizontal_character(k: Sequence[int], state: NilState) -> float:
    """k . (abelianized Malcev coordinates) mod 1: a homomorphism G -> R/Z
    annihilating Gamma."""
    kk = _check_character(k, state.manifold)
    ab = _abelian_coords(state)
    return math.fsum(ki * ci for ki, ci in zip(kk, ab)) % 1.0


def character_phase(k: Sequence[int], seq) -> PolynomialPhase:
    """The polynomial chi(g(n)) in binomial basis, for smoothness-norm use."""
    if isinstance(seq, HeisenbergPolySequence):
        kk = _check_character(k, seq.manifold)
        a0 = kk[0] * _exactify(seq.g0[0]) + kk[1] * _exactify(seq.g0[1])
        a1 = kk[0] * _exactify(seq.g1[0]) + kk[1] * _exactify(seq.g1[1])
        return PolynomialPhase((a0, a1), "binomial")
    if isinstance(seq, TorusPolySequence):
        kk = _check_character(k, seq.manifold)
        alphas = tuple(
            sum(ki * _exactify(vij) for ki, vij in zip(kk, vec))
            for vec in seq.coeffs
        )
        return PolynomialPhase(alphas, "binomial")
    raise TypeError(f"unsupported sequence type {type(seq).__name__}")


# ---------------------------------------------------------------------------
# Metric surrogate and the built-in Lipschitz family.
# ---------------------------------------------------------------------------

_SMALL_WORDS = [(a, b, c) for a in (-1, 0, 1) for b in (-1, 0, 1) for c in (-1, 0, 1)]


def quotient_distance(s1: NilState, s2: NilState) -> float:
    """Distance surrogate on G/Gamma from Malcev coordinates.

    Torus: genuine flat metric (min over unit shifts).  Heisenberg: minimum
    over nearby lattice words of the euclidean coordinate distance; a
    surrogate, recorded as the metric choice in the docs.
    """
    if s1.manifold != s2.manifold:
        raise ValueError("states live on different manifolds")
    if s1.manifold.kind == "torus":
        best = math.inf
        diffs = [(a - b) % 1.0 for a, b in zip(s1.coords, s2.coords)]
        total = 0.0
        for d in diffs:
            total += min(d, 1.0 - d) ** 2
        return math.sqrt(total)
    best = math.inf
    x2, y2, z2 = s2.coords
    for a, b, c in _SMALL_WORDS:
        x1, y1, z1 = s1.coords
        # right-multiply s1's representative by the word (a, b, c)
        xx, yy, zz = x1 + a, y1 + b, z1 + c + x1 * b
        d = math.sqrt((xx - x2) ** 2 + (yy - y2) ** 2 + (zz - z2) ** 2)
        if d < best:
            best = d
    return best


class ConstantFunction:
    """F identically equal to a constant."""

    def __init__(self, value: complex = 1.0):
        self.value = complex(value)
        self.sup_norm = abs(self.value)
        self.lip_ratio = 0.0
        self.lipschitz_norm = self.sup_norm

    def __call__(self, state: NilState) -> complex:
        return self.value


class TorusCharacter:
    """F(x) = e(k . x) on the torus; Lipschitz ratio 2*pi*|k|_2."""

    def __init__(self, k: Sequence[int]):
        self.k = tuple(int(v) for v in k)
        self.sup_norm = 1.0
        self.lip_ratio = 2.0 * math.pi * math.sqrt(sum(v * v for v in self.k))
        self.lipschitz_norm = self.sup_norm + self.lip_ratio

    def __call__(self, state: NilState) -> complex:
        t = math.fsum(ki * ci for ki, ci in zip(self.k, state.coords)) % 1.0
        return complex(math.cos(2 * math.pi * t), math.sin(2 * math.pi * t))


class HeisenbergVerticalCharacter:
    """F(x,y,z) = e(m z) sin^2(pi x) sin^2(pi y): oscillates with the central
    frequency m; the bump factors vanish on the glued faces so the formula
    descends to the quotient.

    The recorded ratio is the coordinate-gradient bound with a factor-2
    margin for the metric surrogate's twisted identifications.
    """

    def __init__(self, m: int):
        self.m = int(m)
        self.sup_norm = 1.0
        grad = math.sqrt(2 * math.pi ** 2 + (2 * math.pi * self.m) ** 2)
        self.lip_ratio = 2.0 * grad
        self.lipschitz_norm = self.sup_norm + self.lip_ratio

    def __call__(self, state: NilState) -> complex:
        if state.manifold.kind != "heisenberg":
            raise ValueError("vertical character requires a heisenberg state")
        x, y, z = state.coords
        bump = math.sin(math.pi * x) ** 2 * math.sin(math.pi * y) ** 2
        t = (self.m * z) % 1.0
        return bump * complex(math.cos(2 * math.pi * t), math.sin(2 * math.pi * t))


def lipschitz_eval(F, state: NilState) -> complex:
    """Evaluate a built-in Lipschitz family member at a state."""
    return F(state)
