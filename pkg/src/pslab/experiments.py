"""Experiment drivers shared by the CLI and the acceptance suite.

Each function returns (header, rows) ready for CSV serialization; all
randomness flows through an explicit seed and all reductions are ordered,
so a fixed (params, seed) pair reproduces its rows byte for byte.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import counting
from .counting import (
    AffineLinearSystem,
    ConvexBody,
    ap_system,
    gowers_norm,
    kap_count,
    lambda_gamma_weight,
    local_density,
)
from .errors import ConfigError
from .expsum import (
    PhaseFunction,
    check_sawtooth,
    discorrelation,
    erdos_turan_check,
    vaaler_approx,
    vdc_check,
)
from .majorant import (
    LinearFormsReport,
    MajorantParams,
    NuMeasure,
    linear_forms_average,
    majorization_check,
    multi_linear_phase_sum,
)
from .nilseq import PolynomialPhase
from .ps_core import PSParameter, ps_enumerate
from .sieve import prime_flags_table, von_mangoldt_table

Rows = List[Tuple]
Header = List[str]


def parse_gamma(text: str) -> PSParameter:
    """"a/b" -> exact integer-root mode; a decimal literal -> exact rational
    value evaluated in certified-real (interval) mode."""
    text = str(text).strip()
    try:
        if "/" in text:
            a, b = text.split("/")
            return PSParameter.exact(int(a), int(b))
        return PSParameter.real(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse gamma {text!r}: {exc}") from exc


def parse_system(spec) -> AffineLinearSystem:
    """Presets "kap" ("3ap", "4ap", ...), "single", "two-form", or an explicit
    {"matrix": [[...]], "constants": [...]} object."""
    if isinstance(spec, AffineLinearSystem):
        return spec
    if isinstance(spec, str):
        s = spec.strip().lower()
        if s.endswith("ap") and s[:-2].isdigit():
            return ap_system(int(s[:-2]))
        if s == "single":
            return AffineLinearSystem(((1,),), (0,), name="single")
        if s == "two-form":
            return AffineLinearSystem(((1, 0), (1, 1)), (0, 0), name="two-form")
        raise ConfigError(f"unknown system preset {spec!r}")
    if isinstance(spec, dict):
        try:
            return AffineLinearSystem(
                tuple(tuple(int(v) for v in row) for row in spec["matrix"]),
                tuple(int(c) for c in spec["constants"]),
                name=str(spec.get("name", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad system spec: {exc}") from exc
    raise ConfigError(f"unsupported system spec {spec!r}")


def parse_phase(spec: str) -> Optional[PhaseFunction]:
    """Phase grammar: "zero", "linear:<alpha>", "monomial:<h>:<gamma>",
    "poly:<c0>,<c1>,...".  <alpha> may be "sqrt2" or "golden"."""
    s = str(spec).strip().lower()
    if s in ("zero", "0"):
        return None
    if s.startswith("linear:"):
        return PhaseFunction(P=PolynomialPhase((0.0, _named_real(s[7:])), "monomial"))
    if s.startswith("monomial:"):
        parts = s.split(":")
        if len(parts) != 3:
            raise ConfigError("monomial phase needs monomial:<h>:<gamma>")
        return PhaseFunction(h=float(parts[1]), gamma=float(Fraction(parts[2])))
    if s.startswith("poly:"):
        coeffs = tuple(float(c) for c in s[5:].split(","))
        return PhaseFunction(P=PolynomialPhase(coeffs, "monomial"))
    raise ConfigError(f"unknown phase spec {spec!r}")


def _named_real(token: str) -> float:
    if token == "sqrt2":
        return math.sqrt(2.0)
    if token == "golden":
        return (1.0 + math.sqrt(5.0)) / 2.0
    return float(Fraction(token))


def phase_descriptor(spec: str) -> str:
    p = parse_phase(spec)
    return "0" if p is None else p.describe()


# ---------------------------------------------------------------------------
# Commands.
# ---------------------------------------------------------------------------

def ps_count(gamma: PSParameter, x: int, threads: int = 1,
             checkpoints: Optional[Sequence[int]] = None) -> Tuple[Header, Rows]:
    """pi_c at geometric checkpoints against the x^gamma / log x main term."""
    if x < 10:
        raise ConfigError("x must be at least 10")
    if checkpoints is None:
        checkpoints = []
        c = 1000
        while c < x:
            checkpoints.append(c)
            c *= 10
        checkpoints.append(x)
        checkpoints = [c for c in checkpoints if c <= x]
    members = ps_enumerate(1, x, gamma)
    flags = prime_flags_table(x, threads=threads)
    prime_members = members[flags[members]]
    g = float(gamma.gamma)
    rows = []
    for c in checkpoints:
        pi_c = int(np.searchsorted(prime_members, c, side="right"))
        predicted = c ** g / math.log(c)
        rows.append((c, pi_c, predicted, pi_c / predicted))
    return ["x", "pi_c", "x^gamma/log x", "ratio"], rows


def ap_count(k: int, X: int, gamma: PSParameter, threads: int = 1,
             prime_cut: int = 100) -> Tuple[Header, Rows]:
    lam = von_mangoldt_table(X, threads=threads)
    w_l = counting.WeightTable(lam, "lambda")
    w_g = lambda_gamma_weight(X, gamma, threads=threads, lam=lam)
    c_l = kap_count(k, X, w_l, threads=threads)
    c_g = kap_count(k, X, w_g, threads=threads)
    # the volume fraction converges quickly in X; the lattice proportion is
    # evaluated at a capped resolution and rescaled to X^2
    res = min(X, 2000)
    vol = counting.archimedean_density(ap_system(k), ConvexBody.ap_simplex(k, res))
    predicted = vol * X ** 2 * counting.singular_series(ap_system(k), prime_cut)
    gap = abs(c_l - c_g) / X ** 2
    return (["count_lambda", "count_lambda_gamma", "predicted_main_term", "normalized_gap"],
            [(c_l, c_g, predicted, gap)])


def goldbach3(N: int, gamma: PSParameter, threads: int = 1) -> Tuple[Header, Rows]:
    lam = von_mangoldt_table(N, threads=threads)
    w_l = counting.WeightTable(lam, "lambda")
    w_g = lambda_gamma_weight(N, gamma, threads=threads, lam=lam)
    c_l = counting.goldbach3_count(N, w_l)
    c_g = counting.goldbach3_count(N, w_g)
    gap = abs(c_l - c_g) / max(c_l, 1.0)
    return ["N", "count_lambda", "count_lambda_gamma", "relative_gap"], [(N, c_l, c_g, gap)]


def discorrelate(gamma: PSParameter, Ns: Sequence[int], phase_spec: str,
                 threads: int = 1) -> Tuple[Header, Rows]:
    phase = parse_phase(phase_spec)
    lam = von_mangoldt_table(max(Ns), threads=threads)
    rows = []
    for N in Ns:
        res = discorrelation(gamma, N, phase, lam_table=lam, threads=threads)
        rows.append(res.csv_row())
    return (["N", "gamma", "phase_descriptor", "S1_re", "S1_im", "S2_re", "S2_im", "delta"],
            rows)


def sawtooth_check_cmd(H_values: Sequence[int], grid: int = 100000) -> Tuple[Header, Rows]:
    rows = []
    for H in H_values:
        s = vaaler_approx(H)
        rep = check_sawtooth(s, grid)
        rows.append((H, rep.points_checked, rep.max_error, rep.max_error_interior,
                     rep.max_slack, s.c_a, s.c_b, rep.violations))
    return (["H", "points", "max_error", "max_error_interior", "max_slack",
             "c_a", "c_b", "violations"], rows)


def vdc_cmd(kind: str, X: float, Y: float, h: float = 1.0, gamma: float = 0.95,
            q: float = 1000.0, threads: int = 1) -> Tuple[Header, Rows]:
    """kind "quadratic": f = x^2/q, Delta = 2/q;
    kind "monomial": f = h x^gamma, Delta = |h| gamma (1-gamma) X^(gamma-2)."""
    if kind == "quadratic":
        f = lambda x: np.asarray(x) ** 2 / q
        delta = 2.0 / q
        desc = f"x^2/{q:g}"
    elif kind == "monomial":
        f = lambda x: h * np.asarray(x, dtype=np.float64) ** gamma
        delta = abs(h) * gamma * (1.0 - gamma) * X ** (gamma - 2.0)
        desc = f"{h:g}*x^{gamma:g}"
    else:
        raise ConfigError(f"unknown vdc kind {kind!r}")
    rep = vdc_check(f, X, Y, delta, threads=threads)
    return (["phase", "X", "Y", "delta", "lhs", "rhs", "ratio"],
            [(desc, X, Y, rep.delta, rep.lhs, rep.rhs, rep.ratio)])


def et_cmd(kind: str, N: int, J: int, interval: Tuple[float, float] = (0.0, 0.5),
           seed: int = 20250809) -> Tuple[Header, Rows]:
    if kind == "sqrt2":
        u = (np.arange(1, N + 1, dtype=np.float64) * math.sqrt(2.0)) % 1.0
    elif kind == "golden":
        u = (np.arange(1, N + 1, dtype=np.float64) * (1 + math.sqrt(5.0)) / 2) % 1.0
    elif kind == "random":
        u = np.random.default_rng(seed).random(N)
    elif kind == "zero":
        u = np.zeros(N)
    else:
        raise ConfigError(f"unknown sequence kind {kind!r}")
    rep = erdos_turan_check(u, interval, J)
    return (["kind", "N", "J", "interval_start", "interval_length", "count", "lhs", "rhs"],
            [(kind, N, J, interval[0], interval[1], rep.count, rep.lhs, rep.rhs)])


def gowers_cmd(kind: str, N: int, s: int, seed: int = 20250809,
               gamma: Optional[PSParameter] = None, w: int = 3, b: int = 1,
               threads: int = 1) -> Tuple[Header, Rows]:
    """kind: "constant", "fourier" (single character e(x/N)), "random"
    (seeded +-1), or "wtricked" ((phi(W)/W)(Lambda_gamma - Lambda)(W.+b))."""
    if kind == "constant":
        f = np.ones(N, dtype=np.complex128)
    elif kind == "fourier":
        f = np.exp(2j * np.pi * np.arange(N) / N)
    elif kind == "random":
        f = np.random.default_rng(seed).choice([-1.0, 1.0], N).astype(np.complex128)
    elif kind == "wtricked":
        if gamma is None:
            raise ConfigError("wtricked input needs gamma")
        from .sieve import build_wtrick

        W = build_wtrick(w).W
        f = counting.wtricked_difference(N, W, b, gamma, threads=threads)
    else:
        raise ConfigError(f"unknown gowers input {kind!r}")
    val = gowers_norm(f, s)
    return ["input", "N", "s", "norm"], [(kind, N, s, val)]


def majorant_check_cmd(N: int, r_exp: float, gamma: PSParameter, w: int, b: int,
                       m: int = 2, c: float = 1.0, threads: int = 1) -> Tuple[Header, Rows]:
    params = MajorantParams.from_exponent(N, r_exp, gamma, w, b, m)
    measure = NuMeasure(params, threads=threads)
    mean = measure.mean()
    rep = majorization_check(params, params.window, c=c, measure=measure, threads=threads)
    lo, hi = params.window
    return (["N", "R", "gamma", "w", "b", "window_lo", "window_hi", "nu_mean",
             "checked", "min_ratio"],
            [(N, params.R, gamma.describe(), w, b, lo, hi, mean, rep.checked, rep.min_ratio)])


def lff_average_cmd(system_spec, N: int, r_exp: float, gamma: PSParameter, w: int, b: int,
                    m: int = 2, samples: Optional[int] = None, seed: int = 20250809,
                    threads: int = 1) -> Tuple[Header, Rows]:
    sys_ = parse_system(system_spec)
    params = MajorantParams.from_exponent(N, r_exp, gamma, w, b, m)
    measure = NuMeasure(params, threads=threads)
    rep: LinearFormsReport = linear_forms_average(sys_, measure, sample_count=samples, seed=seed,
                                                  threads=threads)
    return (["params_hash", "system", "average", "std_error", "N"],
            [(params.params_hash(), sys_.describe(), rep.average, rep.std_error, N)])


def phase_sum_cmd(h: Sequence[float], forms: Sequence[Tuple[int, int]], gamma: float,
                  lo: int, hi: int, threads: int = 1) -> Tuple[Header, Rows]:
    rep = multi_linear_phase_sum(h, forms, gamma, (lo, hi), threads=threads)
    return (["s", "gamma", "lo", "hi", "sum_re", "sum_im", "normalized"],
            [(rep.s, gamma, lo, hi, rep.value.real, rep.value.imag, rep.normalized)])


def local_density_cmd(system_spec, primes: Sequence[int]) -> Tuple[Header, Rows]:
    sys_ = parse_system(system_spec)
    rows = []
    for p in primes:
        beta = local_density(sys_, p)
        rows.append((sys_.describe(), p, beta.numerator, beta.denominator, float(beta)))
    return ["system", "p", "beta_num", "beta_den", "beta"], rows
