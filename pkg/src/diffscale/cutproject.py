"""Cut-and-project sets on real quadratic orders and their pure-point diffraction.

The scheme embeds an order Z[theta] in the plane via x -> (x, x*); projecting
the strip {x* in W} onto the first coordinate gives a model set.  Bragg peaks
live on the dual module {x / sqrt(disc)} with internal coordinate
k* = -x* / sqrt(disc), and carry intensity dens^2 sinc(pi s k*)^2 for an
interval window of length s.

Numerically everything runs on exact (m, n) integer coefficients.  The lone
transcendental step, sin(pi s k*) at huge k*, is reduced first: for w in the
order, w / sqrt(disc) = b + w* / sqrt(disc) with b the theta-coefficient, so
the sine only ever sees the small conjugate remainder.  Peak sums use
compensated summation and are independent of chunk partitioning.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import AlgebraicNumber, QuadraticOrder, golden_order, metallic_order

# coefficient budgets for the two-float reduction path (see _split_irrational)
_MAX_N = 1 << 24
_MAX_B = 1 << 25


@dataclass(frozen=True)
class Window:
    """A bounded interval acceptance domain, half-open (lo, hi] by default.

    Endpoints may be ints, Fractions or AlgebraicNumbers; floats are taken at
    their exact binary value.  Membership tests are exact.
    """

    lo: object
    hi: object
    closed_left: bool = False
    closed_right: bool = True

    def __post_init__(self):
        for name in ("lo", "hi"):
            v = getattr(self, name)
            if isinstance(v, float):
                object.__setattr__(self, name, Fraction(v))
        if float(self.hi - self.lo) < 0:
            raise ValueError("window endpoints out of order")

    @property
    def length(self):
        return self.hi - self.lo

    def contains(self, x) -> bool:
        above = x >= self.lo if self.closed_left else x > self.lo
        if not above:
            return False
        return x <= self.hi if self.closed_right else x < self.hi


@dataclass(frozen=True)
class CutProjectScheme:
    """Planar cut-and-project data for a real quadratic order.

    The lattice is {(x, x*)} with covolume sqrt(disc); natural_length is the
    window length of the order's standard model set (tau for the golden case).
    """

    order: QuadraticOrder
    natural_length: AlgebraicNumber

    @property
    def covolume(self) -> float:
        return self.order.sqrt_disc

    def k_of(self, x: AlgebraicNumber) -> float:
        return float(x) / self.covolume

    def kstar_of(self, x: AlgebraicNumber) -> float:
        return -float(x.star()) / self.covolume

    def density(self, s) -> float:
        return float(s) / self.covolume


def golden_scheme() -> CutProjectScheme:
    order = golden_order()
    return CutProjectScheme(order, order.generator)


def noble_scheme(p: int) -> CutProjectScheme:
    """Scheme of Z[lambda_p] with the natural window length lambda_p - p + 1."""
    order = metallic_order(p)
    return CutProjectScheme(order, order.element(1 - p, 1))


def fibonacci_window() -> Window:
    tau = golden_order().generator
    return Window(-1, tau - 1)


def noble_window(p: int) -> Window:
    lam = metallic_order(p).generator
    return Window(-1, lam - p)


def model_set_density(scheme: CutProjectScheme, window: Window) -> float:
    return float(window.length) / scheme.covolume


def generate_model_set(scheme: CutProjectScheme, window: Window, radius) -> list:
    """All x in the order with |x| <= radius and x* in the window, sorted.

    Membership is decided exactly; the returned positions are AlgebraicNumbers.
    """
    if float(radius) <= 0:
        raise ValueError("radius must be positive")
    order = scheme.order
    if isinstance(radius, float):
        radius = Fraction(radius)
    lo_f, hi_f = float(window.lo), float(window.hi)
    r_f = float(radius)
    if hi_f == lo_f and not (window.closed_left and window.closed_right):
        return []
    sd = order.sqrt_disc
    n_lo = math.floor((-r_f - hi_f) / sd) - 1
    n_hi = math.ceil((r_f - lo_f) / sd) + 1
    out = []
    for n in range(n_lo, n_hi + 1):
        # intersect the strip |m + n theta| <= r with the window band in m
        m_lo = math.floor(max(-r_f - n * order.theta, lo_f - n * order.theta_star)) - 1
        m_hi = math.ceil(min(r_f - n * order.theta, hi_f - n * order.theta_star)) + 1
        for m in range(m_lo, m_hi + 1):
            x = order.element(m, n)
            if not window.contains(x.star()):
                continue
            if -radius <= x <= radius:
                out.append(x)
    out.sort(key=float)
    return out


# ---------------------------------------------------------------------------
# exact sine reduction


def _sin_pi_ratio(w: AlgebraicNumber) -> float:
    """sin(pi * w / sqrt(disc)), reduced exactly before any floating step.

    Uses w / sqrt(disc) = b + w* / sqrt(disc) and the periodicity
    sin(pi(b + r)) = (-1)^b sin(pi r), so only the small conjugate remainder
    reaches the libm sine.
    """
    order = w.order
    r = w.b % 2
    whole = int(r // 1)
    frac = r - whole
    # w* / sqrt(disc) = w* * sqrt(disc) / disc, with sqrt(disc) = 2 theta - t
    rem = float(w.star() * order.element(-order.trace, 2)) / order.disc
    if frac == 0:
        val = math.sin(math.pi * rem)
    elif frac == Fraction(1, 2):
        val = math.cos(math.pi * rem)
    else:
        val = math.sin(math.pi * (float(frac) + rem))
    return -val if whole & 1 else val


def _as_element(order: QuadraticOrder, value) -> AlgebraicNumber:
    if isinstance(value, AlgebraicNumber):
        if value.order != order:
            raise ValueError("value belongs to a different order")
        return value
    if isinstance(value, tuple):
        return order.element(*value)
    return order.element(Fraction(value), 0)


def peak_intensity(scheme: CutProjectScheme, s, k) -> float:
    """Bragg intensity dens^2 sinc(pi s k*)^2 at the module point k = x/sqrt(disc).

    k may be an AlgebraicNumber numerator x, a coefficient pair (m, n), or 0.
    s is the window length (rational or in the order).
    """
    order = scheme.order
    x = _as_element(order, k)
    s_el = _as_element(order, s)
    if float(s_el) <= 0:
        raise ValueError("window length must be positive")
    dens = scheme.density(s_el)
    w = s_el * x.star()
    if w == 0:
        return dens * dens
    u = float(w) / order.sqrt_disc  # = -s k*, and sinc is even
    val = _sin_pi_ratio(w) / (math.pi * u)
    return dens * dens * val * val


def peak_decay_constant(scheme: CutProjectScheme, s, k) -> float:
    """Limit of I(k / u^l) * u^(4l) along the unit u of the order.

    Equals dens^2 (s* x / (s x*))^2 for k = x/sqrt(disc).  The limit exists in
    this form only when s x* has integral coefficients (so the reduced sine
    argument vanishes along the scan); otherwise a ValueError is raised.
    """
    order = scheme.order
    x = _as_element(order, k)
    if x == 0:
        raise ValueError("k must be a nonzero module point")
    s_el = _as_element(order, s)
    if not (s_el * x.star()).is_integral():
        raise ValueError(
            "no pure power-law limit: s x* leaves the integer span of the order"
        )
    dens = scheme.density(s_el)
    ratio = float((s_el.star() * x) / (s_el * x.star()))
    return dens * dens * ratio * ratio


# ---------------------------------------------------------------------------
# vectorised enumeration of the Fourier module


def _split_irrational(exact: AlgebraicNumber):
    """Head/tail floats (hi, lo) with hi + lo = exact to ~2^-80 and hi 26-bit."""
    f = float(exact)
    c = f * ((1 << 27) + 1)
    hi = c - (c - f)
    lo = float(exact - Fraction(hi))
    return hi, lo


def _module_chunks(order: QuadraticOrder, k_max: float, kstar_max: float, chunk: int = 1 << 18):
    """Yield (m, n) int64 arrays with 0 < x <= k_max*sqrt(disc), |x*| <= kstar_max*sqrt(disc).

    Float prefiltering uses the split-embedding trick (error ~1 ulp); points
    within 1e-7 of a boundary are resolved exactly, so membership never
    depends on rounding.
    """
    if k_max <= 0 or kstar_max <= 0:
        return
    th_hi, th_lo = _split_irrational(order.element(0, 1))
    ts_hi, ts_lo = _split_irrational(order.element(order.trace, -1))
    sd = order.sqrt_disc
    x_cap = k_max * sd
    s_cap = kstar_max * sd
    n_lo = math.floor(-kstar_max) - 1
    n_hi = math.ceil(k_max + kstar_max) + 1
    if max(abs(n_lo), abs(n_hi)) >= _MAX_N:
        raise OverflowError("kstar_max too large for the fast reduction path")
    width = int(min(x_cap, 2 * s_cap)) + 4
    k_frac = Fraction(k_max)
    c_frac = Fraction(kstar_max)

    def exact_keep(mi: int, ni: int) -> bool:
        if mi == 0 and ni == 0:
            return False
        x = order.element(mi, ni)
        if x.sign() <= 0:
            return False
        # x <= k_max sqrt(disc)  <=>  (m + k t) + (n - 2k) theta ... sign test
        if (order.element(mi + k_frac * order.trace, ni - 2 * k_frac)).sign() > 0:
            return False
        xs = x.star()
        shift = order.element(-c_frac * order.trace, 2 * c_frac)  # kstar_max*sqrt(disc)
        if (xs - shift).sign() > 0 or (xs + shift).sign() < 0:
            return False
        return True

    for block in range(n_lo, n_hi + 1, chunk):
        n = np.arange(block, min(block + chunk, n_hi + 1), dtype=np.int64)
        nf = n.astype(np.float64)
        m_lo = np.maximum(-nf * order.theta, -nf * order.theta_star - s_cap)
        base = np.floor(m_lo).astype(np.int64) - 1
        m = (base[:, None] + np.arange(width, dtype=np.int64)[None, :]).ravel()
        nn = np.repeat(n, width)
        x = (m + nn * th_hi) + nn * th_lo
        xs = (m + nn * ts_hi) + nn * ts_lo
        keep = (x > 0) & (x <= x_cap) & (np.abs(xs) <= s_cap)
        tol_x = 1e-7 * max(1.0, x_cap)
        tol_s = 1e-7 * max(1.0, s_cap)
        border = (
            (np.abs(x) < tol_x)
            | (np.abs(x - x_cap) < tol_x)
            | (np.abs(np.abs(xs) - s_cap) < tol_s)
        )
        for idx in np.nonzero(border)[0]:
            keep[idx] = exact_keep(int(m[idx]), int(nn[idx]))
        if keep.any():
            yield m[keep], nn[keep]


def _intensities(order: QuadraticOrder, m: np.ndarray, n: np.ndarray, s_el, dens: float):
    """Vectorised dens^2 sinc(pi s k*)^2 over coefficient arrays, reduced exactly.

    Returns (intensity, u) with u = s x*/sqrt(disc); |u| = s|k*|.
    """
    d = int(np.lcm(s_el.a.denominator, s_el.b.denominator))
    sa = int(s_el.a * d)
    sb = int(s_el.b * d)
    t, q = order.trace, order.norm
    a_star = m + n * t
    b_star = -n
    A = sa * a_star + (sb * q) * b_star
    B = sa * b_star + sb * a_star + (sb * t) * b_star
    if len(B) and (int(np.abs(B).max()) >= _MAX_B or int(np.abs(A).max()) >= 1 << 52):
        raise OverflowError("reduced coefficients exceed the exact float budget")
    ts_hi, ts_lo = _split_irrational(order.element(order.trace, -1))
    rem = ((A + B * ts_hi) + B * ts_lo) / (d * order.sqrt_disc)
    rnum = B % (2 * d)
    whole = rnum // d
    fnum = rnum - whole * d
    if d == 1:
        val = np.sin(np.pi * rem)
    else:
        val = np.where(
            fnum == 0,
            np.sin(np.pi * rem),
            np.where(
                2 * fnum == d,
                np.cos(np.pi * rem),
                np.sin(np.pi * (fnum / d + rem)),
            ),
        )
    val = np.where(whole & 1, -val, val)
    u = B / d + rem
    sinc = np.ones_like(rem)
    nz = u != 0
    sinc[nz] = val[nz] / (np.pi * u[nz])
    return dens * dens * sinc * sinc, u


@dataclass
class PeakSet:
    """Bragg peaks with 0 < k <= k_max, |k*| <= kstar_max, one row per module point.

    normalisation is the central intensity I(0) = dens^2; stored intensities
    never exceed it.  Only k > 0 is stored; the spectrum is symmetric.
    """

    m: np.ndarray
    n: np.ndarray
    k: np.ndarray
    kstar: np.ndarray
    intensity: np.ndarray
    normalisation: float

    def __len__(self):
        return len(self.k)

    def total(self) -> float:
        return math.fsum(self.intensity.tolist())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "n", "k", "kstar", "intensity"])
            for row in zip(self.m, self.n, self.k, self.kstar, self.intensity):
                w.writerow([int(row[0]), int(row[1])] + [format(v, ".17g") for v in row[2:]])


def enumerate_fourier_module(
    scheme: CutProjectScheme, k_max: float, kstar_max: float, s=None
) -> PeakSet:
    """All module points k = (m + n theta)/sqrt(disc) in (0, k_max] with |k*| <= kstar_max.

    Intensities use window length s (default: the scheme's natural length).
    Memory grows with the point count ~ 2 k_max kstar_max disc / sqrt(disc).
    """
    if k_max < 0 or kstar_max < 0:
        raise ValueError("k_max and kstar_max must be non-negative")
    order = scheme.order
    s_el = _as_element(order, scheme.natural_length if s is None else s)
    dens = scheme.density(s_el)
    ms, ns, Is = [], [], []
    for m, n in _module_chunks(order, k_max, kstar_max):
        inten, _ = _intensities(order, m, n, s_el, dens)
        ms.append(m)
        ns.append(n)
        Is.append(inten)
    if not ms:
        empty = np.array([])
        return PeakSet(empty, empty, empty, empty, empty, dens * dens)
    m = np.concatenate(ms)
    n = np.concatenate(ns)
    inten = np.concatenate(Is)
    th_hi, th_lo = _split_irrational(order.element(0, 1))
    ts_hi, ts_lo = _split_irrational(order.element(order.trace, -1))
    k = ((m + n * th_hi) + n * th_lo) / order.sqrt_disc
    kstar = -((m + n * ts_hi) + n * ts_lo) / order.sqrt_disc
    idx = np.argsort(k, kind="stable")
    return PeakSet(m[idx], n[idx], k[idx], kstar[idx], inten[idx], dens * dens)


def _tail_bound(order: QuadraticOrder, s_f: float, k: float, cut: float, dens: float) -> float:
    """Rigorous bound on the intensity mass at |k*| > cut within (0, k].

    Per theta-coefficient n there are at most floor(k sqrt(disc)) + 1 module
    points, each with |k*| >= |n| - k; sinc(x)^2 <= 1/x^2 does the rest.
    """
    per_n = math.floor(k * order.sqrt_disc) + 1
    n1 = math.ceil(cut + k)
    if n1 - k <= 0:
        return math.inf
    lead = dens * dens * per_n / (math.pi * s_f) ** 2
    return lead * ((2 * n1 + 1) / cut**2 + 2.0 / (n1 - k))


def z_pure_point(scheme: CutProjectScheme, s, k: float, kstar_cut: float | None = None):
    """Integrated pure-point diffraction Z(k) = sum of I over module points in (0, k].

    Truncates at |k*| <= kstar_cut (default 50/s) and returns (value, tail_bound)
    where tail_bound rigorously covers everything omitted.  The sum is fsum-ed,
    so the value is independent of internal chunking.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    order = scheme.order
    s_el = _as_element(order, s)
    s_f = float(s_el)
    if kstar_cut is None:
        kstar_cut = 50.0 / s_f
    if kstar_cut <= 0:
        raise ValueError("kstar_cut must be positive")
    dens = scheme.density(s_el)
    partials = []
    for m, n in _module_chunks(order, k, kstar_cut):
        inten, _ = _intensities(order, m, n, s_el, dens)
        partials.append(math.fsum(inten.tolist()))
    return math.fsum(partials), _tail_bound(order, s_f, k, kstar_cut, dens)


def z_scan(
    scheme: CutProjectScheme,
    s,
    k0: float,
    ratio: float,
    depth: int,
    kstar_cut: float | None = None,
    scale_cut: bool = True,
):
    """Z along the geometric grid k0/ratio^l, l = 0..depth.

    With scale_cut (the default) the truncation |k*| <= kstar_cut * ratio^l
    follows the scan, keeping the relative tail constant; a fixed cut would
    eventually see an empty module slice (|k k*| >= |norm|/disc > 0 forces
    |k*| ~ 1/k) and return zero.  Returns (ks, values, tails) arrays.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if ratio <= 1:
        raise ValueError("ratio must exceed 1")
    s_f = float(_as_element(scheme.order, s))
    if kstar_cut is None:
        kstar_cut = 50.0 / s_f
    ks, vals, tails = [], [], []
    for level in range(depth + 1):
        k = k0 / ratio**level
        cut = kstar_cut * ratio**level if scale_cut else kstar_cut
        value, tail = z_pure_point(scheme, s, k, cut)
        ks.append(k)
        vals.append(value)
        tails.append(tail)
    return np.array(ks), np.array(vals), np.array(tails)


def sigma_series(scheme: CutProjectScheme, s, k, depth: int) -> float:
    """Truncated inflation series: sum of I(k/u^l) for l = 0..depth, u the unit.

    Terms decay geometrically (like u^(-4l) when s x* stays integral), so the
    truncation error is about the last term times r/(1-r); see
    sigma_series_terms for the term list and that estimate.
    """
    value, _ = sigma_series_terms(scheme, s, k, depth)
    return math.fsum(value)


def sigma_series_terms(scheme: CutProjectScheme, s, k, depth: int):
    """(terms, tail_estimate) behind sigma_series."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    order = scheme.order
    x = _as_element(order, k)
    unit = order.generator
    terms = []
    for level in range(depth + 1):
        terms.append(peak_intensity(scheme, s, x * unit**-level))
    ratio = terms[-1] / terms[-2] if terms[-2] > 0 else 0.0
    ratio = min(ratio, 0.9)
    tail = terms[-1] * ratio / (1 - ratio)
    return terms, tail
