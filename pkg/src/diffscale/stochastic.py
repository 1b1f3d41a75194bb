"""Stochastic point sets on the line: analytic Z(k), samplers, periodogram.

Covers the homogeneous Poisson process, the Bernoulli and Markov lattice
gases, the classical random-matrix ensembles (densities only), binary
random tilings, and Bernoullised Rudin-Shapiro chains.  Each model carries
an analytic integrated intensity; the Monte Carlo half produces weighted
realisations whose periodogram integrates to an empirical Z, which serves
as the cross-validation oracle against the analytic formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.signal import czt

from .substitution import bernoullise, rudin_shapiro_weights

_TWO_PI = 2.0 * math.pi

# Philox stream ids, one per process, so realisations with a shared global
# seed stay independent across models.
_STREAMS = {
    "poisson": 1,
    "bernoulli": 2,
    "markov": 3,
    "random_tiling": 4,
    "rudin_shapiro": 5,
}


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} = {value} is not a probability")
    return value


@dataclass(frozen=True)
class AnalyticModel:
    """One stochastic model with everything needed to evaluate its Z.

    Use the module factories (poisson(), markov(), ...) rather than the
    constructor; they validate the parameter ranges per variant.
    """

    variant: str
    p: float = 0.0
    q: float = 0.0
    beta: int = 0
    u: float = 0.0
    v: float = 0.0
    weighting: str = "binary"

    @property
    def correlation(self) -> float:
        """Markov one-step correlation r = p + q - 1; zero elsewhere."""
        if self.variant != "markov":
            return 0.0
        return self.p + self.q - 1.0

    @property
    def site_density(self) -> float:
        """Stationary occupation probability of the lattice-gas variants."""
        if self.variant == "markov":
            return (1.0 - self.p) / (2.0 - self.p - self.q)
        if self.variant == "bernoulli":
            return self.p
        raise ValueError(f"{self.variant} has no site density")

    def label(self) -> str:
        if self.variant == "poisson":
            return "poisson"
        if self.variant == "bernoulli":
            return f"bernoulli(p={self.p:g},{self.weighting})"
        if self.variant == "rmt":
            return f"rmt(beta={self.beta})"
        if self.variant == "markov":
            return f"markov(p={self.p:g},q={self.q:g})"
        return f"random_tiling(u={self.u:g},v={self.v:g},p={self.p:g})"


def poisson() -> AnalyticModel:
    """Homogeneous Poisson process with unit point density."""
    return AnalyticModel("poisson")


def bernoulli(p: float, weighting: str = "binary") -> AnalyticModel:
    """Bernoulli lattice gas: occupation probability p per site of Z.

    weighting "binary" scatters 1 on occupied and 0 on empty sites;
    "signed" puts +1 with probability p and -1 otherwise.
    """
    if weighting not in ("binary", "signed"):
        raise ValueError(f"unknown weighting {weighting!r}")
    return AnalyticModel("bernoulli", p=_check_probability("p", p), weighting=weighting)


def rmt(beta: int) -> AnalyticModel:
    """Random-matrix point process with unit density, beta in {1, 2, 4}."""
    beta = int(beta)
    if beta not in (1, 2, 4):
        raise ValueError(f"beta = {beta} not in (1, 2, 4)")
    return AnalyticModel("rmt", beta=beta)


def markov(p: float, q: float) -> AnalyticModel:
    """Two-state Markov lattice gas on Z with transition rows (p, 1-p), (1-q, q)."""
    p = _check_probability("p", p)
    q = _check_probability("q", q)
    if not 0.0 < p + q < 2.0:
        raise ValueError(f"need 0 < p + q < 2, got p + q = {p + q}")
    return AnalyticModel("markov", p=p, q=q)


def random_tiling(u: float, v: float, p: float) -> AnalyticModel:
    """Binary random tiling from intervals of lengths u, v with P(u) = p.

    A unit scatterer sits at the left endpoint of every interval.
    """
    u = float(u)
    v = float(v)
    if u <= 0.0 or v <= 0.0:
        raise ValueError("interval lengths must be positive")
    return AnalyticModel("random_tiling", p=_check_probability("p", p), u=u, v=v)


@dataclass(frozen=True)
class WeightedRealisation:
    """Weighted point set on [-half_width, half_width] plus its provenance."""

    positions: np.ndarray
    weights: np.ndarray
    half_width: float
    seed: int

    def __post_init__(self):
        if len(self.positions) != len(self.weights):
            raise ValueError("positions and weights differ in length")
        if len(self.positions) > 1 and np.any(np.diff(self.positions) < 0):
            raise ValueError("positions must be sorted")

    def __len__(self) -> int:
        return len(self.positions)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("position,weight\n")
            for x, w in zip(self.positions, self.weights):
                fh.write(f"{x:.17g},{w:.17g}\n")


def markov_density(p: float, q: float, k) -> float | np.ndarray:
    """Radon-Nikodym density g(k) of the Markov gas diffraction, a.c. part.

    Positive on [0, 1] for every admissible (p, q); g(0+) < g(1/2) exactly
    when r < 0 (effective repulsion) and the reverse for r > 0.
    """
    markov(p, q)
    r = p + q - 1.0
    num = (1.0 - p) * (1.0 - q) * (1.0 + r)
    den = (1.0 - r) * (1.0 - 2.0 * r * np.cos(_TWO_PI * np.asarray(k)) + r * r)
    out = num / den
    return float(out) if np.isscalar(k) else out


def rmt_density(beta: int, k) -> float | np.ndarray:
    """Structure-factor density of the beta ensemble at unit point density.

    Classical closed forms: 2k - k log(1+2k) below the kink for beta = 1,
    min(k, 1) for beta = 2, and k/2 - (k/4) log|1-k| for beta = 4, which
    carries an integrable logarithmic spike at k = 1.  Their small-k
    integrals reproduce the published expansions term by term.
    """
    ks = np.asarray(k, dtype=float)
    if np.any(ks < 0.0):
        raise ValueError("k must be nonnegative")
    if beta == 1:
        out = np.where(
            ks <= 1.0,
            2.0 * ks - ks * np.log1p(2.0 * ks),
            2.0 - ks * np.log((2.0 * ks + 1.0) / np.where(ks > 1.0, 2.0 * ks - 1.0, 1.0)),
        )
    elif beta == 2:
        out = np.minimum(ks, 1.0)
    elif beta == 4:
        with np.errstate(divide="ignore"):
            out = np.where(
                ks < 2.0,
                0.5 * ks - 0.25 * ks * np.log(np.abs(1.0 - ks)),
                1.0,
            )
    else:
        raise ValueError(f"beta = {beta} not in (1, 2, 4)")
    return float(out) if np.isscalar(k) else out


def markov_small_k(p: float, q: float, k: float) -> float:
    """Cubic small-k expansion of the Markov Z; consistency check only."""
    r = p + q - 1.0
    g0 = (1.0 - p) * (1.0 - q) * (1.0 + r) / (1.0 - r) ** 3
    return g0 * (k - (4.0 * math.pi**2 / 3.0) * (r / (1.0 - r) ** 2) * k**3)


def rmt_small_k(beta: int, k: float) -> float:
    """Printed small-k expansions of the beta-ensemble Z; checks only."""
    if beta == 1:
        return k**2 - (2.0 / 3.0) * k**3
    if beta == 2:
        return 0.5 * k**2
    if beta == 4:
        return 0.25 * k**2 + k**3 / 12.0
    raise ValueError(f"beta = {beta} not in (1, 2, 4)")


def random_tiling_slope(u: float, v: float, p: float) -> float:
    """Leading coefficient of the random-tiling Z; zero when u = v."""
    q = 1.0 - p
    return p * q * (u - v) ** 2 / (p * u + q * v) ** 3


def z_analytic(model: AnalyticModel, k: float) -> float:
    """Integrated diffraction intensity over (0, k], central peak excluded.

    Closed-form for the Poisson, Bernoulli and random-tiling variants;
    adaptive quadrature of the density for Markov and the beta ensembles.
    """
    k = float(k)
    if k <= 0.0:
        raise ValueError("k must be positive")
    if model.variant == "poisson":
        return k
    if model.variant == "bernoulli":
        slope = model.p * (1.0 - model.p)
        if model.weighting == "signed":
            slope *= 4.0
        return slope * k
    if model.variant == "markov":
        val, _ = quad(lambda t: markov_density(model.p, model.q, t), 0.0, k, limit=200)
        return val
    if model.variant == "rmt":
        kinks = [x for x in (1.0, 2.0) if x < k]
        val, _ = quad(
            lambda t: rmt_density(model.beta, t), 0.0, k, points=kinks or None, limit=200
        )
        return val
    u, v, p, q = model.u, model.v, model.p, 1.0 - model.p
    if u == v:
        return 0.0
    cubic = (
        (math.pi**2 / 9.0)
        * (u**2 * v**2 - 2.0 * u * v * (p * u**2 + q * v**2))
        / (p * q * (u - v) ** 2 - (p * u**2 + q * v**2))
    )
    return random_tiling_slope(u, v, p) * (k + cubic * k**3)


def _generator(seed: int, stream: int) -> np.random.Generator:
    # counter-based, keyed: independent streams from one global seed
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _lattice_sites(half_width: float) -> np.ndarray:
    lo = math.ceil(-half_width)
    hi = math.floor(half_width)
    return np.arange(lo, hi + 1, dtype=float)


def _markov_occupation(p: float, q: float, n: int, gen: np.random.Generator) -> np.ndarray:
    rho = (1.0 - p) / (2.0 - p - q)
    uni = gen.random(n)
    occ = np.empty(n, dtype=bool)
    occ[0] = uni[0] < rho
    stay = q          # occupied -> occupied
    enter = 1.0 - p   # empty -> occupied
    state = occ[0]
    for i in range(1, n):
        state = uni[i] < (stay if state else enter)
        occ[i] = state
    return occ


def sample(model: AnalyticModel, half_width: float, seed: int) -> WeightedRealisation:
    """Draw one realisation on [-half_width, half_width] from the model.

    The Markov chain starts from its stationary distribution; the random
    tiling starts at the origin and grows both ways.  The beta ensembles
    only exist here as densities, so they have no sampler.
    """
    if half_width <= 0.0:
        raise ValueError("half_width must be positive")
    if model.variant == "rmt":
        raise ValueError("beta ensembles are density-only; nothing to sample")
    gen = _generator(seed, _STREAMS[model.variant])
    R = float(half_width)

    if model.variant == "poisson":
        count = gen.poisson(2.0 * R)
        xs = np.sort(gen.uniform(-R, R, count))
        return WeightedRealisation(xs, np.ones(count), R, seed)

    if model.variant == "bernoulli":
        sites = _lattice_sites(R)
        hits = gen.random(len(sites)) < model.p
        if model.weighting == "signed":
            return WeightedRealisation(sites, np.where(hits, 1.0, -1.0), R, seed)
        return WeightedRealisation(sites[hits], np.ones(int(hits.sum())), R, seed)

    if model.variant == "markov":
        sites = _lattice_sites(R)
        occ = _markov_occupation(model.p, model.q, len(sites), gen)
        return WeightedRealisation(sites[occ], np.ones(int(occ.sum())), R, seed)

    # random tiling: scatterer at the left endpoint of each interval
    mean_len = model.p * model.u + (1.0 - model.p) * model.v
    per_side = int(1.3 * R / mean_len) + 16

    def grow(direction: float) -> np.ndarray:
        pts = []
        reach = 0.0
        while reach <= R:
            lens = np.where(
                gen.random(per_side) < model.p, model.u, model.v
            )
            for ell in lens:
                pts.append(reach * direction)
                reach += ell
                if reach > R:
                    break
        return np.array(pts)

    right = grow(1.0)
    left = grow(-1.0)
    # the origin scatterer belongs to the right-growing side only
    xs = np.concatenate([left[left < 0.0], right])
    xs = np.sort(xs[np.abs(xs) <= R])
    return WeightedRealisation(xs, np.ones(len(xs)), R, seed)


def rudin_shapiro_realisation(
    n: int, flip_probability: float = 0.0, seed: int = 0
) -> WeightedRealisation:
    """First n Rudin-Shapiro weights on Z, optionally Bernoullised.

    Each sign flips independently with the given probability; the
    diffraction, and hence Z, is the same for every flip probability.
    """
    w = rudin_shapiro_weights(n).astype(float)
    _check_probability("flip_probability", flip_probability)
    if flip_probability > 0.0:
        gen = _generator(seed, _STREAMS["rudin_shapiro"])
        w = bernoullise(w, flip_probability, gen)
    xs = np.arange(n, dtype=float) - n // 2
    return WeightedRealisation(xs, w, n / 2.0, seed)


def _exponential_sums(real: WeightedRealisation, ks: np.ndarray) -> np.ndarray:
    """|sum_x w_x exp(-2 pi i k x)| structure sums on an arbitrary grid."""
    out = np.empty(len(ks), dtype=complex)
    x = real.positions
    w = real.weights.astype(complex)
    step = max(1, (1 << 24) // max(len(x), 1))
    for start in range(0, len(ks), step):
        kc = ks[start : start + step, None]
        out[start : start + step] = np.exp(-2j * np.pi * kc * x[None, :]) @ w
    return out


def empirical_diffraction(real: WeightedRealisation, k_grid) -> list[tuple[float, float]]:
    """Periodogram I_R(k) = |sum w exp(-2 pi i k x)|^2 / (2R) on a grid."""
    ks = np.asarray(list(k_grid), dtype=float)
    sums = _exponential_sums(real, ks)
    vals = np.abs(sums) ** 2 / (2.0 * real.half_width)
    return [(float(k), float(v)) for k, v in zip(ks, vals)]


def _uniform_periodogram(real: WeightedRealisation, delta: float, m: int) -> np.ndarray:
    """Periodogram on the grid i*delta, i = 0..m-1, via a chirp transform.

    Integer-lattice realisations transform exactly; off-lattice point sets
    are spread linearly onto a fine auxiliary lattice and the triangular
    kernel is divided back out, leaving a relative error around (pi k h)^4.
    """
    x = real.positions
    w = real.weights
    rounded = np.round(x)
    if len(x) == 0:
        return np.zeros(m)
    if np.max(np.abs(x - rounded)) < 1e-9:
        offsets = (rounded - rounded.min()).astype(np.int64)
        dense = np.zeros(int(offsets.max()) + 1)
        np.add.at(dense, offsets, w)
        sums = czt(dense, m, w=np.exp(-2j * np.pi * delta))
    else:
        kmax = delta * (m - 1)
        h = min(0.05, 0.017 / max(kmax, 1e-12))
        idx = (x - x.min()) / h
        base = np.floor(idx).astype(np.int64)
        frac = idx - base
        dense = np.zeros(int(base.max()) + 2)
        np.add.at(dense, base, w * (1.0 - frac))
        np.add.at(dense, base + 1, w * frac)
        sums = czt(dense, m, w=np.exp(-2j * np.pi * delta * h))
        kernel = np.sinc(np.arange(m) * delta * h) ** 2
        sums = sums / kernel
    return np.abs(sums) ** 2 / (2.0 * real.half_width)


def empirical_Z(real: WeightedRealisation, k: float, bins: int) -> float:
    """Trapezoid integral of the periodogram over (0, k].

    The grid must resolve the periodogram's intrinsic correlation scale
    1/(2R), and a central zone of width 4/(2R) around the origin is cut
    out so the finite-size peak at 0 cannot leak in.
    """
    k = float(k)
    if k <= 0.0:
        raise ValueError("k must be positive")
    two_r = 2.0 * real.half_width
    delta = k / bins
    if delta > 1.0 / two_r:
        need = math.ceil(k * two_r)
        raise ValueError(
            f"{bins} bins give spacing {delta:.3g}, coarser than the "
            f"periodogram scale {1.0 / two_r:.3g}; need at least {need}"
        )
    grid = np.arange(bins + 1) * delta
    vals = _uniform_periodogram(real, delta, bins + 1)
    keep = grid >= 4.0 / two_r
    if keep.sum() < 2:
        raise ValueError("exclusion zone swallowed the whole grid")
    return float(np.trapezoid(vals[keep], grid[keep]))


def analytic_curve_to_csv(model: AnalyticModel, ks, path) -> None:
    label = model.label()
    with open(path, "w") as fh:
        fh.write("k,Z,model\n")
        for k in ks:
            fh.write(f"{float(k):.17g},{z_analytic(model, float(k)):.17g},{label}\n")


def periodogram_to_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write("k,intensity\n")
        for k, val in rows:
            fh.write(f"{float(k):.17g},{float(val):.17g}\n")
