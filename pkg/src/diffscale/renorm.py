"""Pair-correlation renormalisation and inflation cocycles.

Two routes to the small-k behaviour of inflation systems live here.  The
exact route (golden-mean tilings only): pair frequencies nu_ij(z) satisfy a
closed system of equations pulling values from distance z/tau, whose fixed
point is the correlation data of the tiling.  The general route: the Fourier
matrix B(k) of displacement sets, whose products along k, k/lam, k/lam^2, ...
form a cocycle; its Lyapunov spectrum controls peak amplitude decay, and
simple eigenvalue formulas predict the integrated-intensity exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import AlgebraicNumber, golden_order, lyapunov_spectrum, spectral_data
from .substitution import SubstitutionRule, TypedPatch

_PAIRS = (("a", "a"), ("a", "b"), ("b", "a"), ("b", "b"))


@dataclass(frozen=True)
class PairCorrelationTable:
    """Frequencies nu_ij(z) of a type-i point with a type-j point at distance z.

    Keys are exact golden-order distances; values are per-point frequencies.
    Tables are immutable; renorm_step returns a fresh one.  support radius
    bounds |z| for stored entries.
    """

    values: dict
    radius: float

    def get(self, i: str, j: str, z) -> float:
        return self.values.get((i, j), {}).get(z, 0.0)

    def entries(self):
        for pair, bucket in self.values.items():
            for z, v in bucket.items():
                yield pair, z, v

    def distances(self) -> set:
        out = set()
        for bucket in self.values.values():
            out |= set(bucket)
        return out

    def total_at(self, z) -> float:
        return math.fsum(self.get(i, j, z) for i, j in _PAIRS)

    def sup_diff(self, other: "PairCorrelationTable") -> float:
        keys = set()
        for pair, z, _ in self.entries():
            keys.add((pair, z))
        for pair, z, _ in other.entries():
            keys.add((pair, z))
        return max(
            (abs(self.get(*p, z) - other.get(*p, z)) for p, z in keys), default=0.0
        )


def _check_integral(table: PairCorrelationTable) -> None:
    for _, z, _ in table.entries():
        if not (isinstance(z, AlgebraicNumber) and z.is_integral()):
            raise ValueError(f"distance {z!r} is not an integer combination of 1 and tau")


def _push_step(table: PairCorrelationTable, out_radius: float) -> dict:
    """One inflation step in push form; equivalent to the pull equations.

    An old pair (i, j) at distance z feeds: (a,a) at tau z always; (a,b) at
    tau(z+1) when j = a; (b,a) at tau(z-1) when i = a; (b,b) at tau z when
    both are a.  Every contribution carries weight nu/tau.
    """
    tau = golden_order().generator
    inv = 1 / float(tau)
    out: dict = {p: {} for p in _PAIRS}

    def add(pair, z, w):
        if abs(float(z)) <= out_radius + 1e-9:
            bucket = out[pair]
            bucket[z] = bucket.get(z, 0.0) + w

    for (i, j), z, v in table.entries():
        w = v * inv
        add(("a", "a"), tau * z, w)
        if j == "a":
            add(("a", "b"), tau * (z + 1), w)
        if i == "a":
            add(("b", "a"), tau * (z - 1), w)
        if i == "a" and j == "a":
            add(("b", "b"), tau * z, w)
    return out


def renorm_step(table: PairCorrelationTable) -> PairCorrelationTable:
    """Apply the exact golden-mean renormalisation once.

    Input supported within radius R tau yields output within radius R: each
    step trades support for resolution, so iterate on a table wide enough for
    the radius you need at the end (solve_pair_correlations manages this).
    """
    _check_integral(table)
    tau_f = float(golden_order().generator)
    out_radius = table.radius / tau_f
    return PairCorrelationTable(_push_step(table, out_radius), out_radius)


def solve_pair_correlations(
    seed_freq: float, radius: float = 5.0, max_iter: int = 200, tol: float = 1e-12
) -> PairCorrelationTable:
    """Fixed point of the renormalisation with nu_aa(0) seeded at seed_freq.

    The equations are scale-invariant (any multiple of a solution solves them
    again), so the iteration is projective: after each step the table is
    rescaled to put nu_aa(0) + nu_bb(0) = 1, which pins the per-point
    normalisation.  The working radius is fixed; pulls for |z| <= W only
    reach back to |z|/tau + 1 <= W once W >= tau^2, so truncation is closed,
    not lossy.  Any seed in (0,1) flows to the tiling's frequencies.
    """
    if not 0 < seed_freq < 1:
        raise ValueError("seed frequency must lie in (0, 1)")
    order = golden_order()
    work_radius = max(float(radius), 3.0)
    zero = order.element(0, 0)
    seed = {p: {} for p in _PAIRS}
    seed[("a", "a")][zero] = float(seed_freq)
    seed[("b", "b")][zero] = 1.0 - float(seed_freq)
    table = PairCorrelationTable(seed, work_radius)
    for _ in range(max_iter):
        raw = _push_step(table, work_radius)
        scale = raw[("a", "a")].get(zero, 0.0) + raw[("b", "b")].get(zero, 0.0)
        if scale <= 0:
            raise RuntimeError("normalisation collapsed during iteration")
        nxt = PairCorrelationTable(
            {p: {z: v / scale for z, v in bucket.items()} for p, bucket in raw.items()},
            work_radius,
        )
        if nxt.sup_diff(table) < tol:
            return _truncate(nxt, float(radius))
        table = nxt
    raise RuntimeError(f"no fixed point within {max_iter} iterations at tol {tol}")


def _truncate(table: PairCorrelationTable, radius: float) -> PairCorrelationTable:
    kept = {
        pair: {z: v for z, v in bucket.items() if abs(float(z)) <= radius + 1e-9}
        for pair, bucket in table.values.items()
    }
    return PairCorrelationTable(kept, radius)


def fibonacci_pair_frequency(i: str, j: str, z: AlgebraicNumber) -> float:
    """Closed-form nu_ij(z) from window overlap, the oracle for the fixed point.

    Typed points are model sets with windows W_a = (tau-2, tau-1] and
    W_b = (-1, tau-2]; a pair at distance z exists with frequency
    |W_i cap (W_j - z*)| / tau, computed exactly before the final division.
    """
    tau = golden_order().generator
    bounds = {"a": (tau - 2, tau - 1), "b": (golden_order().element(-1), tau - 2)}
    lo_i, hi_i = bounds[i]
    lo_j, hi_j = bounds[j]
    zs = z.star()
    lo = max(lo_i, lo_j - zs)
    hi = min(hi_i, hi_j - zs)
    if hi <= lo:
        return 0.0
    return float((hi - lo) / tau)


def patch_pair_frequencies(
    patch: TypedPatch, distances, match_tol: float = 1e-9
) -> PairCorrelationTable:
    """Count nu_ij(z) on a finite typed patch, per interior reference point.

    Reference points are restricted so that x + z stays inside the patch for
    every requested distance, making the counts unbiased.
    """
    xs = patch.floats()
    types = patch.types()
    dist_list = list(distances)
    if not dist_list:
        return PairCorrelationTable({p: {} for p in _PAIRS}, 0.0)
    reach = max(abs(float(z)) for z in dist_list)
    inner = np.abs(xs) <= patch.radius - reach
    n_ref = int(inner.sum())
    values: dict = {p: {} for p in _PAIRS}
    for z in dist_list:
        zf = float(z)
        targets = xs[inner] + zf
        idx = np.searchsorted(xs, targets - match_tol)
        hit = (idx < len(xs)) & (np.abs(xs[np.minimum(idx, len(xs) - 1)] - targets) < match_tol)
        for src, ok, ti in zip(np.nonzero(inner)[0], hit, idx):
            if not ok:
                continue
            pair = (types[src], types[ti])
            bucket = values[pair]
            bucket[z] = bucket.get(z, 0.0) + 1.0 / n_ref
    return PairCorrelationTable(values, reach)


# ---------------------------------------------------------------------------
# Fourier-matrix cocycle


def displacement_sets(rule: SubstitutionRule) -> dict:
    """T[i][j]: positions of type-i tiles inside the inflated type-j tile.

    Positions are cumulative tile lengths along the image word (exact when
    the rule carries exact lengths), so the inflated a-tile of the golden rule
    holds a at 0 and b at tau.
    """
    lengths = rule.exact_lengths() or rule.natural_lengths()
    out = {(i, j): [] for i in rule.alphabet for j in rule.alphabet}
    for j in rule.alphabet:
        pos = 0
        for c in rule.images[j]:
            out[(c, j)].append(pos)
            pos = pos + lengths[c]
    return out


def _displacement_floats(rule: SubstitutionRule) -> dict:
    return {key: np.array([float(t) for t in ts]) for key, ts in displacement_sets(rule).items()}


def _b_matrix(disp: dict, alphabet, k: float) -> np.ndarray:
    d = len(alphabet)
    b = np.zeros((d, d), dtype=complex)
    for ii, i in enumerate(alphabet):
        for jj, j in enumerate(alphabet):
            ts = disp[(i, j)]
            if len(ts):
                b[ii, jj] = np.exp(2j * np.pi * k * ts).sum()
    return b


def fourier_matrix(rule: SubstitutionRule, k: float) -> np.ndarray:
    """B(k) with entries sum of exp(2 pi i k t) over the displacement sets.

    B(0) is the substitution matrix exactly.
    """
    return _b_matrix(_displacement_floats(rule), rule.alphabet, float(k))


def cocycle_exponent(rule: SubstitutionRule, k: float, depth: int, v=None) -> float:
    """(1/n) log ||B(k/lam^n) ... B(k/lam) v||, with per-step renormalisation.

    Norms are logged and stripped each step so depth 60+ cannot overflow; a
    generic start vector picks up the dominant exponent log lam.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    disp = _displacement_floats(rule)
    lam = spectral_data(rule.matrix()).pf_value
    d = len(rule.alphabet)
    vec = np.ones(d) / math.sqrt(d) if v is None else np.asarray(v, dtype=complex)
    if not np.any(vec):
        raise ValueError("start vector must be nonzero")
    vec = vec.astype(complex)
    total = 0.0
    for j in range(1, depth + 1):
        vec = _b_matrix(disp, rule.alphabet, k / lam**j) @ vec
        nrm = np.linalg.norm(vec)
        total += math.log(nrm)
        vec /= nrm
    return total / depth


def lyapunov_cocycle(
    rule: SubstitutionRule, k: float, depth: int, burn_in: int = 8
) -> np.ndarray:
    """Full Lyapunov spectrum of the B-cocycle at k, by QR (Benettin) steps.

    The first burn_in factors only align the frame and are excluded from the
    averages; the factors approach B(0) = M, so the spectrum approaches that
    of the substitution matrix.  Returns exponents sorted decreasing.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    disp = _displacement_floats(rule)
    lam = spectral_data(rule.matrix()).pf_value
    d = len(rule.alphabet)
    q = np.eye(d, dtype=complex)
    sums = np.zeros(d)
    counted = 0
    for j in range(1, depth + burn_in + 1):
        z = _b_matrix(disp, rule.alphabet, k / lam**j) @ q
        q, r = np.linalg.qr(z)
        if j > burn_in:
            with np.errstate(divide="ignore"):
                sums += np.log(np.abs(np.diagonal(r)))
            counted += 1
    return np.sort(sums / counted)[::-1]


def measured_z_exponent(
    rule: SubstitutionRule, k: float, depth: int = 50, burn_in: int = 8
) -> float:
    """Integrated-intensity exponent from the cocycle: 2 (log lam - chi_min)/log lam.

    chi_min is the smallest cocycle exponent; peak amplitudes along k/lam^l
    contract like exp(l (chi_min - log lam)), intensities like the square, and
    integrating against the k-grid divides by log lam.
    """
    spec = lyapunov_cocycle(rule, k, depth, burn_in)
    loglam = math.log(spectral_data(rule.matrix()).pf_value)
    return 2.0 * (loglam - spec[-1]) / loglam


@dataclass(frozen=True)
class ExponentPrediction:
    """Predicted small-k law Z(k) ~ k^z_exponent with z_exponent = 2 alpha_tilde.

    derivation records which eigenvalue formula produced it; candidates lists
    the alternatives when several subleading moduli compete (the dominance
    question is open for ternary real spectra); exceptional marks det = 0
    cases that decay faster than any power.
    """

    alpha_tilde: float
    derivation: str
    z_exponent: float
    candidates: tuple = ()
    exceptional: str | None = None


def predict_exponent(rule: SubstitutionRule) -> ExponentPrediction:
    """Eigenvalue-formula prediction of the hyperuniformity exponent.

    Binary rules: alpha_tilde = 2 - log|det M| / log lam.  Larger alphabets:
    alpha_tilde = 1 - log|lam_2| / log lam with lam_2 the largest-modulus
    non-PF eigenvalue (assumed dominant; all distinct moduli are reported as
    candidates).  A ternary complex pair gives |lam_2|^2 = |det|/lam exactly.
    """
    m = rule.matrix()
    sd = spectral_data(m)
    lam = sd.pf_value
    loglam = math.log(lam)
    d = len(m)
    if d == 2:
        if sd.det == 0:
            return ExponentPrediction(
                math.inf, "binary-det", math.inf,
                exceptional="det(M) = 0: decays faster than any power (TM-like)",
            )
        alpha = 2.0 - math.log(abs(sd.det)) / loglam
        return ExponentPrediction(alpha, "binary-det", 2 * alpha)
    rest = sd.spectrum[1:]
    if d == 3 and abs(rest[0].imag) > 1e-12:
        # complex pair: |lam_2| = sqrt(|det|/lam), taken in log form
        if sd.det == 0:
            return ExponentPrediction(
                math.inf, "subleading-eigenvalue", math.inf,
                exceptional="det(M) = 0: decays faster than any power",
            )
        alpha = 1.5 - math.log(abs(sd.det)) / (2 * loglam)
        return ExponentPrediction(alpha, "subleading-eigenvalue", 2 * alpha)
    mods = sorted({round(abs(z), 12) for z in rest}, reverse=True)
    cands = tuple(
        math.inf if mod == 0 else 1.0 - math.log(mod) / loglam for mod in mods
    )
    alpha = cands[0]
    note = None
    if len([mod for mod in mods if mod > 0]) > 1 and all(
        abs(z.imag) < 1e-12 for z in rest
    ):
        note = "several real subleading moduli: dominance undetermined, see candidates"
    return ExponentPrediction(
        alpha, "subleading-eigenvalue",
        math.inf if alpha == math.inf else 2 * alpha,
        candidates=cands, exceptional=note,
    )


def exponent_report(rule: SubstitutionRule) -> dict:
    """JSON-ready record of the matrix data and predicted exponent."""
    m = rule.matrix()
    sd = spectral_data(m)
    pred = predict_exponent(rule)
    return {
        "rule": rule.name,
        "lambda": sd.pf_value,
        "det": sd.det,
        "lyapunov_spectrum": list(lyapunov_spectrum(m)),
        "alpha_tilde": pred.alpha_tilde,
        "predicted_exponent": pred.z_exponent,
    }
