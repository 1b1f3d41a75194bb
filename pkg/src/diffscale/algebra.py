"""Exact arithmetic in real quadratic orders and eigen-data of small integer matrices.

The number-theoretic backbone: elements a + b*theta of Z[theta] with
theta^2 = t*theta + n (theta the larger root), their algebraic conjugates,
exact sign tests, and Perron-Frobenius data of primitive substitution
matrices.  Coefficients are held as exact rationals, so conjugation and
multiplication never lose precision; embeddings into the reals are computed
through scaled integer square roots and are correct to the last float bit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class PrimitivityError(ValueError):
    """Raised when a substitution matrix is not primitive."""


class ConditioningWarning(UserWarning):
    """Emitted when an eigenvalue problem is close to degenerate."""


_EMBED_BITS = 128  # guard bits for integer-sqrt embeddings


def _sqrt_int_float(d: int) -> float:
    """Square root of a positive integer, correctly rounded to float."""
    scaled = math.isqrt(d << (2 * _EMBED_BITS))
    return float(Fraction(scaled, 1 << _EMBED_BITS))


def _embed(u: Fraction, v: Fraction, disc: int) -> float:
    """Evaluate (u + v*sqrt(disc))/2 to full float precision.

    Naive float evaluation cancels catastrophically when u and -v*sqrt(disc)
    are large and nearly equal (tiny elements with huge coefficients), so the
    irrational part is resolved with a scaled integer square root first.
    """
    q = math.lcm(u.denominator, v.denominator)
    ui = u.numerator * (q // u.denominator)
    vi = v.numerator * (q // v.denominator)
    root = math.isqrt(vi * vi * disc << (2 * _EMBED_BITS))
    if vi < 0:
        root = -root
    return float(Fraction((ui << _EMBED_BITS) + root, q << (_EMBED_BITS + 1)))


def _sign_int_pair(u: int, v: int, disc: int) -> int:
    """Exact sign of u + v*sqrt(disc) for integers u, v and non-square disc."""
    if v == 0:
        return (u > 0) - (u < 0)
    if u == 0:
        return (v > 0) - (v < 0)
    if u > 0 and v > 0:
        return 1
    if u < 0 and v < 0:
        return -1
    # opposite signs: compare u^2 against v^2 * disc
    lhs, rhs = u * u, v * v * disc
    if u > 0:  # v < 0
        return (lhs > rhs) - (lhs < rhs)
    return (rhs > lhs) - (rhs < lhs)


class QuadraticOrder:
    """The ring Z[theta] with theta^2 = trace*theta + norm.

    theta = (trace + sqrt(disc))/2 is the larger root and
    theta_star = (trace - sqrt(disc))/2 the smaller, with
    disc = trace^2 + 4*norm required positive and non-square.
    """

    def __init__(self, trace: int, norm: int):
        disc = trace * trace + 4 * norm
        if disc <= 0:
            raise ValueError(f"discriminant {disc} is not positive")
        if math.isqrt(disc) ** 2 == disc:
            raise ValueError(f"discriminant {disc} is a perfect square; theta is rational")
        self.trace = int(trace)
        self.norm = int(norm)
        self.disc = disc
        self.sqrt_disc = _sqrt_int_float(disc)
        self.theta = (trace + self.sqrt_disc) / 2.0
        self.theta_star = (trace - self.sqrt_disc) / 2.0

    def __eq__(self, other):
        return isinstance(other, QuadraticOrder) and (self.trace, self.norm) == (other.trace, other.norm)

    def __hash__(self):
        return hash((self.trace, self.norm))

    def __repr__(self):
        return f"QuadraticOrder(trace={self.trace}, norm={self.norm})"

    def element(self, a=0, b=0) -> "AlgebraicNumber":
        return AlgebraicNumber(self, a, b)

    @property
    def generator(self) -> "AlgebraicNumber":
        return AlgebraicNumber(self, 0, 1)


def golden_order() -> QuadraticOrder:
    """Z[tau] with tau^2 = tau + 1, the golden ratio order."""
    return QuadraticOrder(1, 1)


def metallic_order(p: int) -> QuadraticOrder:
    """Z[lambda_p] with lambda_p^2 = p*lambda_p + 1 (p = 1 is the golden case)."""
    if p < 1:
        raise ValueError("p must be a positive integer")
    return QuadraticOrder(p, 1)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction coefficient, got {type(x).__name__}")


class AlgebraicNumber:
    """Element a + b*theta of a real quadratic order, with exact rational a, b.

    Supports ring arithmetic, exact division (via the rational norm), the
    star map sending theta to its conjugate root, exact sign and comparison
    tests, and a correctly rounded float embedding.
    """

    __slots__ = ("order", "a", "b")

    def __init__(self, order: QuadraticOrder, a=0, b=0):
        self.order = order
        self.a = _as_fraction(a)
        self.b = _as_fraction(b)

    def _coerce(self, other) -> "AlgebraicNumber | None":
        if isinstance(other, AlgebraicNumber):
            if other.order != self.order:
                raise ValueError("mixed quadratic orders")
            return other
        if isinstance(other, (int, Fraction)):
            return AlgebraicNumber(self.order, other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return AlgebraicNumber(self.order, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return AlgebraicNumber(self.order, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return AlgebraicNumber(self.order, -self.a, -self.b)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        # (a1 + b1 th)(a2 + b2 th) with th^2 = t th + n
        t, n = self.order.trace, self.order.norm
        a1, b1, a2, b2 = self.a, self.b, o.a, o.b
        return AlgebraicNumber(
            self.order,
            a1 * a2 + b1 * b2 * n,
            a1 * b2 + b1 * a2 + b1 * b2 * t,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        nrm = o.field_norm()
        if nrm == 0:
            raise ZeroDivisionError("division by zero element")
        num = self * o.star()
        return AlgebraicNumber(self.order, num.a / nrm, num.b / nrm)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        base = self
        if k < 0:
            base = AlgebraicNumber(self.order, 1, 0) / self
            k = -k
        out = AlgebraicNumber(self.order, 1, 0)
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def star(self) -> "AlgebraicNumber":
        """Algebraic conjugate: theta -> trace - theta."""
        return AlgebraicNumber(self.order, self.a + self.b * self.order.trace, -self.b)

    def field_norm(self) -> Fraction:
        """x * star(x), a rational number."""
        t, n = self.order.trace, self.order.norm
        return self.a * self.a + t * self.a * self.b - n * self.b * self.b

    def sign(self) -> int:
        """Exact sign (-1, 0, +1) via integer arithmetic."""
        # 2*(a + b theta) = (2a + b t) + b sqrt(disc)
        u = 2 * self.a + self.b * self.order.trace
        v = self.b
        q = math.lcm(u.denominator, v.denominator)
        ui = u.numerator * (q // u.denominator)
        vi = v.numerator * (q // v.denominator)
        return _sign_int_pair(ui, vi, self.order.disc)

    def __float__(self):
        u = 2 * self.a + self.b * self.order.trace
        return _embed(u, self.b, self.order.disc)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.order.trace, self.order.norm, self.a, self.b))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def is_integral(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    def __repr__(self):
        return f"({self.a} + {self.b}*theta)"


def star(x: AlgebraicNumber) -> AlgebraicNumber:
    """Star map of the quadratic order: a + b*theta -> (a + b*t) - b*theta."""
    return x.star()


def fibonacci(n: int) -> int:
    """Fibonacci number f_n with f_0 = 0, f_1 = 1, for any integer n."""
    if not isinstance(n, int):
        raise TypeError("index must be an integer")
    k = abs(n)
    a, b = 0, 1  # f_0, f_1
    for _ in range(k):
        a, b = b, a + b
    if n >= 0:
        return a
    # f_{-k} = (-1)^(k+1) f_k
    return a if k % 2 == 1 else -a


# ---------------------------------------------------------------------------
# integer matrices


def mat_dim(m) -> int:
    d = len(m)
    if any(len(row) != d for row in m):
        raise ValueError("matrix must be square")
    return d


def mat_mul(x, y):
    d = len(x)
    return tuple(
        tuple(sum(x[i][k] * y[k][j] for k in range(d)) for j in range(d))
        for i in range(d)
    )


def is_primitive(m) -> bool:
    """Primitivity test: some power of the pattern matrix is strictly positive.

    The exponent is capped at (d-1)^2 + 1, which suffices for primitive
    non-negative matrices.
    """
    d = mat_dim(m)
    if any(v < 0 for row in m for v in row):
        return False
    pat = tuple(tuple(1 if v > 0 else 0 for v in row) for row in m)
    cap = (d - 1) ** 2 + 1
    acc = pat
    for _ in range(cap):
        if all(v > 0 for row in acc for v in row):
            return True
        acc = tuple(
            tuple(1 if s > 0 else 0 for s in row) for row in mat_mul(acc, pat)
        )
    return all(v > 0 for row in acc for v in row)


def char_poly(m) -> list[int]:
    """Characteristic polynomial det(x I - M) by Faddeev-LeVerrier.

    Returns integer coefficients [c_0, ..., c_d] with c_d = 1, exactly.
    """
    d = mat_dim(m)
    mf = [[Fraction(v) for v in row] for row in m]
    coeffs = [Fraction(1)]  # leading
    aux = [[Fraction(0)] * d for _ in range(d)]
    for k in range(1, d + 1):
        # aux <- M * (aux + c * I)
        c = coeffs[-1]
        work = [[aux[i][j] + (c if i == j else 0) for j in range(d)] for i in range(d)]
        aux = [
            [sum(mf[i][r] * work[r][j] for r in range(d)) for j in range(d)]
            for i in range(d)
        ]
        tr = sum(aux[i][i] for i in range(d))
        coeffs.append(-tr / k)
    out = []
    for c in reversed(coeffs):
        assert c.denominator == 1
        out.append(int(c))
    return out  # [c_0, ..., c_d=1] with p(x) = sum c_i x^i


def _poly_eval(coeffs, x: float) -> tuple[float, float]:
    """Horner evaluation of p and p' at x."""
    p, dp = 0.0, 0.0
    for c in reversed(coeffs):
        dp = dp * x + p
        p = p * x + c
    return p, dp


@dataclass
class SpectralData:
    """Perron-Frobenius data of a primitive non-negative integer matrix.

    right is normalised to sum 1 (frequency vector), left to minimal entry 1
    (natural tile lengths).  moduli collapses complex pairs to their common
    modulus; for 3x3 matrices with a single real eigenvalue the pair modulus
    is exact, from lambda * |mu|^2 = |det|.
    """

    pf_value: float
    right: np.ndarray
    left: np.ndarray
    spectrum: list[complex]
    moduli: list[float]
    det: int


def _pf_vector(a: np.ndarray, lam: float) -> np.ndarray:
    """Positive eigenvector of a for eigenvalue lam, by inverse iteration."""
    d = a.shape[0]
    rng = np.random.default_rng(12345)
    v = rng.random(d) + 1.0
    shift = lam * (1.0 + 1e-12) + 1e-13
    for _ in range(4):
        try:
            v = np.linalg.solve(a - shift * np.eye(d), v)
        except np.linalg.LinAlgError:
            shift *= 1.0 + 1e-10
            continue
        v = v / np.linalg.norm(v)
    if v.sum() < 0:
        v = -v
    return v


def spectral_data(m) -> SpectralData:
    """Eigen-data of a primitive substitution matrix.

    Raises PrimitivityError for non-primitive input.  The Perron-Frobenius
    eigenvalue is polished by Newton iteration on the exact characteristic
    polynomial; eigenvector residuals land near machine precision.
    """
    if not is_primitive(m):
        raise PrimitivityError(f"matrix {m!r} is not primitive")
    d = mat_dim(m)
    coeffs = char_poly(m)
    det = int(round((-1) ** d * coeffs[0]))
    a = np.array(m, dtype=float)
    eigs = np.linalg.eigvals(a)
    lam = float(max(e.real for e in eigs))
    for _ in range(6):
        p, dp = _poly_eval(coeffs, lam)
        if dp == 0.0:
            break
        step = p / dp
        lam -= step
        if abs(step) < 1e-15 * max(1.0, abs(lam)):
            break
    gaps = [abs(lam - e) for e in eigs if abs(lam - e) > 1e-9 * max(1.0, lam)]
    others = sorted(abs(e) for e in eigs)[:-1]
    if others and lam - max(others) < 1e-6 * lam:
        warnings.warn("near-degenerate leading spectrum", ConditioningWarning)
    if len(gaps) < len(eigs) - 1:
        pass  # PF eigenvalue is simple for primitive matrices; duplicates are numerical
    right = _pf_vector(a, lam)
    left = _pf_vector(a.T, lam)
    if np.any(right <= 0) or np.any(left <= 0):
        raise ArithmeticError("Perron-Frobenius vector is not strictly positive")
    right = right / right.sum()
    left = left / left.min()

    spectrum = sorted((complex(e) for e in eigs), key=lambda z: (-abs(z), z.real))
    moduli = [abs(z) for z in spectrum]
    if d == 3:
        real_count = sum(1 for z in spectrum if abs(z.imag) < 1e-9)
        if real_count == 1:
            # exact complex-pair modulus
            pair = math.sqrt(abs(det) / lam)
            moduli = [lam, pair, pair]
    moduli[0] = lam
    return SpectralData(lam, right, left, spectrum, moduli, det)


def lyapunov_spectrum(m) -> list[float]:
    """Logarithms of distinct eigenvalue moduli, sorted decreasingly.

    Primitive matrices go through the polished eigen-data; other square
    matrices fall back to raw eigenvalue moduli (the log-modulus set
    needs no Perron-Frobenius structure).  A zero eigenvalue contributes
    -inf.  Moduli closer than 1e-9 are collapsed to a single exponent.
    """
    try:
        moduli = spectral_data(m).moduli
    except PrimitivityError:
        eigs = np.linalg.eigvals(np.array(m, dtype=float))
        moduli = sorted((abs(complex(e)) for e in eigs), reverse=True)
    out: list[float] = []
    for mod in moduli:
        val = math.log(mod) if mod > 0 else -math.inf
        if not any(abs(val - prev) < 1e-9 or (val == -math.inf and prev == -math.inf) for prev in out):
            out.append(val)
    return out
