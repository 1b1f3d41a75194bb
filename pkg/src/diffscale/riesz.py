"""Riesz-product densities and their distribution functions.

The singular part of a binary constant-length spectrum is the weak limit of
finite products of non-negative trigonometric factors over geometric scales.
This module evaluates those truncated densities, integrates them into
distribution functions (by quadrature, by sine series, and by an exact
change of variables at scale points), and computes the rigorous two-sided
bounds whose rescaled endpoints settle at universal constants.

Everything downstream of the exact coefficient recursion is float numerics;
log-space is used wherever values cross the 2^(-n^2) scale that direct
products cannot survive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class RieszFactor:
    """Non-negative trigonometric factor of the two-parameter family.

    The factor is 1 + (2/b) sum_r c_r cos(2 pi r x) with b = p + q and
    c_r = b - r - 2 min(p, q, r, b - r) for r = 1..b-1.  It is a squared
    modulus divided by b, hence non-negative with unit mean; the value at
    zero is (p - q)^2 / b, which is what ultimately sets the small-scale
    decay exponent of the distribution.
    """

    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError("parameters must be positive integers")

    @property
    def base(self) -> int:
        return self.p + self.q

    @property
    def coefficients(self) -> tuple:
        b = self.base
        return tuple(b - r - 2 * min(self.p, self.q, r, b - r) for r in range(1, b))

    def value(self, x: float) -> float:
        acc = math.fsum(
            c * math.cos(2.0 * math.pi * r * x)
            for r, c in enumerate(self.coefficients, start=1)
        )
        # negative only by rounding; the polynomial itself is >= 0
        return max(1.0 + 2.0 * acc / self.base, 0.0)

    def array(self, xs: np.ndarray) -> np.ndarray:
        r = np.arange(1, self.base, dtype=float)
        c = np.asarray(self.coefficients, dtype=float)
        vals = 1.0 + (2.0 / self.base) * (np.cos(2.0 * np.pi * np.outer(xs, r)) @ c)
        return np.maximum(vals, 0.0)


def truncated_density(p: int, q: int, x: float, n: int) -> float:
    """Product of the factor over the n scales x, bx, ..., b^(n-1)x.

    A direct float product, reduced mod 1 between scales so the argument
    never outgrows the cosine's meaningful range.  Bound and bracket
    routines below work with sums of log factors instead, which is what
    genuinely large n requires.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    fac = RieszFactor(p, q)
    out = 1.0
    t = float(x) % 1.0
    for _ in range(n):
        out *= fac.value(t)
        if out == 0.0:
            break
        t = (t * fac.base) % 1.0
    return out


def _log_density_array(p: int, q: int, ys: np.ndarray, n: int, scale: float = 1.0) -> np.ndarray:
    """Sum of log factors at scales scale*ys, scale*b*ys, ...; -inf at zeros."""
    b = p + q
    tm_like = p == 1 and q == 1
    fac = RieszFactor(p, q)
    out = np.zeros(len(ys))
    t = np.mod(np.asarray(ys, dtype=float) * scale, 1.0)
    for _ in range(n):
        with np.errstate(divide="ignore"):
            if tm_like:
                # 1 - cos(2 pi t) = 2 sin(pi t)^2, stable near the zeros
                out += _LOG2 + 2.0 * np.log(np.abs(np.sin(np.pi * t)))
            else:
                out += np.log(fac.array(t))
        t = np.mod(t * b, 1.0)
    return out


def _tm_log_factor(x: float) -> float:
    s = math.sin(math.pi * x)
    if s == 0.0:
        return -math.inf
    return _LOG2 + 2.0 * math.log(abs(s))


def _simpson(values: np.ndarray, h: float) -> float:
    if len(values) % 2 == 0:
        raise ValueError("composite Simpson needs an odd sample count")
    w = np.ones(len(values))
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(h / 3.0 * (w @ values))


@lru_cache(maxsize=None)
def tm_fourier_coefficient(m: int) -> Fraction:
    """Exact sine-series coefficient at index m, by the halving recursion.

    Even indices copy from half; odd ones average the two neighbours of the
    half index with a sign flip, which already pins the value at 1 to -1/3.
    Denominators stay of the form 3 * 2^j, so exact arithmetic is cheap at
    any index.
    """
    if m < 0:
        raise ValueError("index must be non-negative")
    if m == 0:
        return Fraction(1)
    if m == 1:
        return Fraction(-1, 3)
    half, odd = divmod(m, 2)
    if odd:
        return -(tm_fourier_coefficient(half) + tm_fourier_coefficient(half + 1)) / 2
    return tm_fourier_coefficient(half)


_eta_table = None


def _coefficient_floats(m_max: int) -> np.ndarray:
    """Float coefficients for indices 0..m_max, grown by block doubling.

    Within a block [n, 2n) every recursion reference lands at an index
    already filled (evens first, since odd entries read one even neighbour
    of the same block).
    """
    global _eta_table
    if _eta_table is None:
        _eta_table = np.array([1.0, -1.0 / 3.0])
    while len(_eta_table) <= m_max:
        old = _eta_table
        idx = np.arange(len(old), 2 * len(old))
        out = np.concatenate([old, np.empty(len(old))])
        ev = idx[idx % 2 == 0]
        out[ev] = out[ev // 2]
        od = idx[idx % 2 == 1]
        out[od] = -(out[od // 2] + out[od // 2 + 1]) / 2.0
        _eta_table = out
    return _eta_table[: m_max + 1]


def distribution_fourier(k: float, terms: int = 1 << 20):
    """Sine-series value of the binary distribution at k, with a tail estimate.

    Returns (value, tail): value is k plus the truncated series
    sum c_m sin(2 pi m k) / (m pi); tail extrapolates the measured geometric
    decay of dyadic block sums of |c_m|/(m pi), so it tracks the actual
    truncation error, not a worst case.  The tail is an absolute error, so
    values far below it (the distribution at deep scale points) need the
    change-of-variables route instead.
    """
    if terms < 1:
        raise ValueError("need at least one series term")
    coef = _coefficient_floats(terms)
    m = np.arange(1, terms + 1, dtype=float)
    series = coef[1:] * np.sin(2.0 * np.pi * m * k) / (m * np.pi)
    value = float(k) + float(series.sum())

    env = np.abs(coef[1:]) / (m * np.pi)
    blocks = []
    j = 1
    while 2 * j <= terms:
        blocks.append(float(env[j - 1 : 2 * j - 1].sum()))
        j *= 2
    if len(blocks) >= 2 and blocks[-2] > 0:
        ratio = min(blocks[-1] / blocks[-2], 0.95)
    else:
        ratio = 0.5
    tail = blocks[-1] * ratio / (1.0 - ratio) if blocks else 0.0
    return value, tail


def distribution_quadrature(p: int, q: int, k: float, n: int, grid: int | None = None) -> float:
    """Integral of the n-scale density from 0 to k by composite Simpson.

    grid counts subintervals per unit length.  The integrand is a
    trigonometric polynomial of degree b^n - 1, so the resolution demand is
    exact rather than heuristic: anything below 8 b^n per unit is refused.
    """
    if not 0.0 <= k <= 1.0:
        raise ValueError("k must lie in [0, 1]")
    if n < 0:
        raise ValueError("n must be non-negative")
    need = 8 * (p + q) ** n
    if grid is None:
        grid = need
    if grid < need:
        raise ValueError(
            f"grid of {grid} per unit under-resolves the density; need at least {need}"
        )
    if k == 0.0:
        return 0.0
    m = max(2, 2 * math.ceil(k * grid / 2))
    xs = np.linspace(0.0, k, m + 1)
    logf = _log_density_array(p, q, xs, n)
    top = float(logf.max())
    if top == -math.inf:
        return 0.0
    return math.exp(top) * _simpson(np.exp(logf - top), k / m)


def distribution_at_power(
    p: int, q: int, n: int, extra: int | None = None, grid: int | None = None
) -> float:
    """Distribution value at the scale point k = b^-n.

    Substituting x = k y folds the integral over [0, k] into one over [0, 1]
    whose integrand splits exactly into the n slow factors at k y times a
    fresh depth-extra density at y; only the latter sets the grid demand.
    The result is the depth-(n+extra) distribution at k, converging quickly
    in extra, and it respects the two-sided scale-point bounds at any depth.
    """
    b = p + q
    if n < 0:
        raise ValueError("n must be non-negative")
    if extra is None:
        extra = max(4, round(14.0 / math.log2(b)))
    need = 8 * b**extra
    if grid is None:
        grid = need
    if grid < need:
        raise ValueError(
            f"grid of {grid} per unit under-resolves the density; need at least {need}"
        )
    m = max(2, 2 * math.ceil(grid / 2))
    ys = np.linspace(0.0, 1.0, m + 1)
    k = float(b) ** -n
    logi = _log_density_array(p, q, ys, n, scale=k) + _log_density_array(p, q, ys, extra)
    top = float(logi.max())
    if top == -math.inf:
        return 0.0
    return k * math.exp(top) * _simpson(np.exp(logi - top), 1.0 / m)


def tm_log_bracket(n: int):
    """Natural logs of the two-sided bounds pinning the distribution at 2^-n.

    The endpoints are 2^-n times the n-scale density at 2^-n-1 and at 2^-n.
    Working in logs keeps them meaningful long after the floats underflow:
    the bracket shrinks like 2^(-n^2).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    lo = -n * _LOG2 + math.fsum(_tm_log_factor(2.0 ** (j - n - 1)) for j in range(n))
    hi = -n * _LOG2 + math.fsum(_tm_log_factor(2.0 ** (j - n)) for j in range(n))
    return lo, hi


def tm_bracket(n: int):
    """(lower, upper) floats of the scale-point bracket; underflows to 0 past n ~ 30."""
    lo, hi = tm_log_bracket(n)
    return math.exp(lo), math.exp(hi)


@lru_cache(maxsize=None)
def tm_refined_scale(terms: int = 100_000) -> float:
    """Argument-scaling constant of the refined lower bound, about 0.30994.

    Equals 1/4 - (2/pi^2) sum over odd indices of coefficient/(index^2),
    truncated at the given term count.
    """
    if terms < 1:
        raise ValueError("need at least one term")
    coef = _coefficient_floats(2 * terms)
    odd = 2 * np.arange(terms) + 1
    s = math.fsum((coef[odd] / odd.astype(float) ** 2).tolist())
    return 0.25 - (2.0 / math.pi**2) * s


def tm_refined_log_lower(n: int, terms: int = 100_000) -> float:
    """Log of the refined lower bound: 2^-n times the (n-1)-scale density at 2^(1-n) beta."""
    if n < 2:
        raise ValueError("the refined bound needs n >= 2")
    beta = tm_refined_scale(terms)
    return -n * _LOG2 + math.fsum(
        _tm_log_factor(2.0 ** (j - n + 1) * beta) for j in range(n - 1)
    )


def tm_refined_lower(n: int, terms: int = 100_000) -> float:
    return math.exp(tm_refined_log_lower(n, terms))


def tm_bracket_constants(tol: float = 1e-5, n_max: int = 60) -> dict:
    """Rescaled bracket endpoints, iterated in n until both settle below tol.

    The upper endpoint times 2^(n^2) (2/pi^2)^n and the lower times
    2^(n^2) (8/pi^2)^n converge to finite constants (near 0.306663 and
    pi^2/4 times that); both sequences are monotone past n of about 10, so
    a step below tol is convergence rather than a plateau.
    """
    prev_u = prev_l = None
    for n in range(2, n_max + 1):
        lo, hi = tm_log_bracket(n)
        cu = math.exp(hi + n * n * _LOG2 + n * math.log(2.0 / math.pi**2))
        cl = math.exp(lo + n * n * _LOG2 + n * math.log(8.0 / math.pi**2))
        if (
            prev_u is not None
            and abs(cu - prev_u) < tol
            and abs(cl - prev_l) < tol
        ):
            return {"upper_constant": cu, "lower_constant": cl, "settled_at": n}
        prev_u, prev_l = cu, cl
    raise RuntimeError(f"bracket constants did not settle to {tol} by n = {n_max}")


def tm_bound_report(n: int, terms: int = 100_000, extra: int = 12) -> dict:
    """Bracket report at the scale point 2^-n, as a JSON-ready dict."""
    lo, hi = tm_bracket(n)
    return {
        "n": n,
        "lower": lo,
        "improved_lower": tm_refined_lower(n, terms),
        "upper": hi,
        "F_est": distribution_at_power(1, 1, n, extra=extra),
    }


def gtm_exponent(p: int, q: int) -> float:
    """Scale-point decay exponent 2 - 2 log|p-q| / log(p+q) of the distribution.

    Equal parameters return inf: the factor then vanishes quadratically at
    zero and the distribution falls faster than any power, the same
    exceptional case the cocycle route flags by a zero determinant.
    """
    if p < 1 or q < 1:
        raise ValueError("parameters must be positive integers")
    if p == q:
        return math.inf
    return 2.0 - 2.0 * math.log(abs(p - q)) / math.log(p + q)


@dataclass(frozen=True)
class DistributionSamples:
    """Sampled distribution values with provenance, ready for CSV export."""

    ks: np.ndarray
    values: np.ndarray
    method: str
    n_trunc: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ks", np.asarray(self.ks, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.method not in ("fourier", "quadrature", "riesz-truncation"):
            raise ValueError(f"unknown method tag {self.method!r}")
        if len(self.ks) != len(self.values):
            raise ValueError("k and value arrays must align")
        if np.any(np.diff(self.ks) <= 0):
            raise ValueError("k values must be strictly increasing")
        trunc = np.broadcast_to(
            np.asarray(self.n_trunc, dtype=int), self.ks.shape
        ).copy()
        object.__setattr__(self, "n_trunc", trunc)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("k,F,method,n_trunc\n")
            for k, v, t in zip(self.ks, self.values, self.n_trunc):
                fh.write(f"{k:.17g},{v:.17g},{self.method},{t}\n")


def quadrature_scan(p: int, q: int, ks, n: int, grid: int | None = None) -> DistributionSamples:
    vals = [distribution_quadrature(p, q, float(k), n, grid) for k in ks]
    return DistributionSamples(ks, vals, "quadrature", n)


def fourier_scan(ks, terms: int = 1 << 20) -> DistributionSamples:
    vals = [distribution_fourier(float(k), terms)[0] for k in ks]
    return DistributionSamples(ks, vals, "fourier", terms)


def power_scan(
    p: int, q: int, n_values, extra: int | None = None, grid: int | None = None
) -> DistributionSamples:
    """Distribution at the scale points b^-n for each requested n."""
    ns = sorted({int(v) for v in n_values}, reverse=True)
    b = p + q
    if extra is None:
        extra = max(4, round(14.0 / math.log2(b)))
    ks = [float(b) ** -n for n in ns]
    vals = [distribution_at_power(p, q, n, extra=extra, grid=grid) for n in ns]
    return DistributionSamples(ks, vals, "riesz-truncation", [n + extra for n in ns])
