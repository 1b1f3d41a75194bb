"""Geometric scans of Z(k) and least-squares scaling-law fits.

A scan walks any producer down the grid k0/ratio^l and keeps the values as
natural logs, so Thue-Morse-type magnitudes near 2^-144 ride through the
fits without underflow.  Power laws are verified in the two-sided sense:
besides the slope, the spread of log(Z k^-e) over the scan is reported, and
staying inside one decade counts as bounded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

_LOG10 = math.log(10.0)

# geometric grids start above the asymptotic regime; drop the head by default
_DROP_HEAD = 2


class ScanFailure(RuntimeError):
    """Producer raised at one grid point; carries the offending k."""

    def __init__(self, k: float, cause: Exception):
        super().__init__(f"producer failed at k = {k:.17g}: {cause}")
        self.k = k


@dataclass(frozen=True)
class ScanResult:
    """Samples (k_l, Z_l) on the grid k_l = anchor / ratio**l, logs kept."""

    producer: str
    anchor: float
    ratio: float
    depth: int
    ks: np.ndarray
    log_values: np.ndarray

    def __post_init__(self):
        if len(self.ks) != len(self.log_values):
            raise ValueError("grid and values differ in length")
        # Z is non-decreasing in k, so a genuine scan never steps upward
        steps = np.diff(self.log_values)
        if np.any(steps > 1e-9):
            worst = int(np.argmax(steps))
            raise ValueError(
                f"Z increases along the scan at step {worst} -> {worst + 1}"
            )

    @property
    def values(self) -> np.ndarray:
        """Plain Z values; underflows to 0 below exp(-745), logs stay exact."""
        return np.exp(self.log_values)

    def dropped(self, head: int) -> tuple[np.ndarray, np.ndarray]:
        return self.ks[head:], self.log_values[head:]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("k,Z,log_k,log_Z\n")
            for k, lv in zip(self.ks, self.log_values):
                fh.write(
                    f"{k:.17g},{math.exp(lv) if lv > -745 else 0:.17g},"
                    f"{math.log(k):.17g},{lv:.17g}\n"
                )


@dataclass(frozen=True)
class PowerFit:
    """Least-squares power law log Z = exponent * log k + log_prefactor."""

    producer: str
    exponent: float
    log_prefactor: float
    max_residual: float
    spread: float
    predicted: float | None = None
    tolerance: float | None = None

    @property
    def bounded(self) -> bool:
        """Two-sided check: log(Z k^-e) stays within one decade."""
        return self.spread < _LOG10

    @property
    def passed(self) -> bool | None:
        if self.predicted is None:
            return None
        return abs(self.exponent - self.predicted) <= self.tolerance

    def row(self) -> dict:
        return {
            "producer": self.producer,
            "kind": "power",
            "exponent": self.exponent,
            "log_prefactor": self.log_prefactor,
            "max_residual": self.max_residual,
            "spread": self.spread,
            "bounded": self.bounded,
            "predicted": self.predicted,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class LogQuadraticFit:
    """log Z = A (log k)^2 + B log k + C."""

    producer: str
    A: float
    B: float
    C: float
    max_residual: float

    def row(self) -> dict:
        return {
            "producer": self.producer,
            "kind": "log-quadratic",
            "A": self.A,
            "B": self.B,
            "C": self.C,
            "max_residual": self.max_residual,
            "predicted": None,
            "passed": None,
        }


def scan(
    producer: Callable[[float], float],
    k0: float,
    ratio: float,
    depth: int,
    name: str | None = None,
    log_space: bool = False,
) -> ScanResult:
    """Evaluate a producer on k0/ratio^l for l = 0..depth.

    With log_space the producer hands back log Z directly, which is how the
    Riesz-product bounds arrive.  A producer exception aborts the scan and
    is re-raised with the offending k attached; nothing is dropped quietly.
    """
    if ratio <= 1.0:
        raise ValueError("ratio must exceed 1")
    if depth < 3:
        raise ValueError("need depth >= 3")
    if k0 <= 0.0:
        raise ValueError("anchor k0 must be positive")
    if name is None:
        name = getattr(producer, "__name__", "producer")
    ks = k0 / ratio ** np.arange(depth + 1, dtype=float)
    logs = np.empty(depth + 1)
    for i, k in enumerate(ks):
        try:
            raw = float(producer(float(k)))
        except Exception as exc:
            raise ScanFailure(float(k), exc) from exc
        if log_space:
            logs[i] = raw
        else:
            if raw <= 0.0 or not math.isfinite(raw):
                raise ScanFailure(float(k), ValueError(f"Z = {raw} not positive"))
            logs[i] = math.log(raw)
    return ScanResult(name, k0, ratio, depth, ks, logs)


def _centered_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xl = x.astype(np.longdouble)
    yl = y.astype(np.longdouble)
    xm = xl.mean()
    ym = yl.mean()
    dx = xl - xm
    slope = float((dx * (yl - ym)).sum() / (dx * dx).sum())
    return slope, float(ym - slope * xm)


def fit_power(
    scan_result: ScanResult,
    predicted: float | None = None,
    tolerance: float = 0.1,
    drop_head: int = _DROP_HEAD,
) -> PowerFit:
    """Slope of log Z against log k, with the two-sided spread check.

    The first drop_head samples sit at the largest k and may be outside the
    asymptotic regime, so they stay out of the fit by default.
    """
    ks, logs = scan_result.dropped(drop_head)
    if len(ks) < 4:
        raise ValueError(f"need at least 4 samples after dropping {drop_head}")
    x = np.log(ks)
    slope, intercept = _centered_slope(x, logs)
    residuals = logs - (slope * x + intercept)
    compensated = logs - slope * x
    return PowerFit(
        producer=scan_result.producer,
        exponent=slope,
        log_prefactor=intercept,
        max_residual=float(np.max(np.abs(residuals))),
        spread=float(compensated.max() - compensated.min()),
        predicted=predicted,
        tolerance=tolerance if predicted is not None else None,
    )


def fit_log_quadratic(scan_result: ScanResult, drop_head: int = _DROP_HEAD) -> LogQuadraticFit:
    """Quadratic least squares in log-log coordinates, A leading.

    Solved by Cramer's rule on the centered normal equations in extended
    precision; three distinct k values are required.
    """
    ks, logs = scan_result.dropped(drop_head)
    if len(ks) < 5:
        raise ValueError(f"need at least 5 samples after dropping {drop_head}")
    x = np.log(ks).astype(np.longdouble)
    y = logs.astype(np.longdouble)
    xm = x.mean()
    t = x - xm
    m = np.array(
        [
            [(t**4).sum(), (t**3).sum(), (t**2).sum()],
            [(t**3).sum(), (t**2).sum(), t.sum()],
            [(t**2).sum(), t.sum(), np.longdouble(len(t))],
        ]
    )
    rhs = np.array([(t**2 * y).sum(), (t * y).sum(), y.sum()])

    def det3(a) -> np.longdouble:
        return (
            a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
        )

    d = det3(m)
    if abs(float(d)) < 1e-20 * float(abs(m).max()) ** 3:
        raise ValueError("degenerate design matrix; need three distinct k")
    cols = []
    for j in range(3):
        mj = m.copy()
        mj[:, j] = rhs
        cols.append(det3(mj) / d)
    a, b, c = cols
    A = float(a)
    B = float(b - 2 * a * xm)
    C = float(c - b * xm + a * xm * xm)
    fitted = A * np.log(ks) ** 2 + B * np.log(ks) + C
    return LogQuadraticFit(
        producer=scan_result.producer,
        A=A,
        B=B,
        C=C,
        max_residual=float(np.max(np.abs(logs - fitted))),
    )


@dataclass(frozen=True)
class ScalingReport:
    """Fit rows plus fixed-format JSON and text renderings."""

    rows: tuple[dict, ...]

    def to_json(self) -> str:
        return json.dumps({"fits": list(self.rows)}, indent=2, sort_keys=True)

    def to_table(self) -> str:
        head = f"{'system':<24} {'kind':<14} {'measured':>12} {'predicted':>10} {'verdict':>8}"
        lines = [head, "-" * len(head)]
        for row in self.rows:
            measured = row.get("exponent")
            if measured is None:
                measured = row["A"]
            predicted = "" if row["predicted"] is None else f"{row['predicted']:.4f}"
            if row["passed"] is None:
                verdict = "n/a"
            else:
                verdict = "pass" if row["passed"] else "FAIL"
            lines.append(
                f"{row['producer']:<24} {row['kind']:<14} {measured:>12.6f} "
                f"{predicted:>10} {verdict:>8}"
            )
        return "\n".join(lines) + "\n"


def report(fits) -> ScalingReport:
    """Bundle fits into one comparable document, one row per system."""
    rows = tuple(fit.row() for fit in fits)
    if not rows:
        raise ValueError("no fits selected")
    return ScalingReport(rows)
