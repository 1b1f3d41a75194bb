"""Batch command line: generators, Z scans, fits, and reproducible reruns.

Every command serialises its full configuration next to the data file
(<output>.run.json) and `diffscale repro` replays such a file byte for
byte.  Exit codes: 0 success, 2 usage or config problems, 3 numerical
failures (non-convergence, under-resolved estimators).
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from .cutproject import golden_scheme, noble_scheme, z_pure_point
from .numbertheory import r_diagnostic
from .renorm import exponent_report, measured_z_exponent, predict_exponent
from .riesz import distribution_at_power, tm_bound_report, tm_log_bracket
from .scaling import ScanFailure, ScanResult, fit_log_quadratic, fit_power, report, scan
from .stochastic import (
    AnalyticModel,
    bernoulli,
    empirical_Z,
    markov,
    poisson,
    random_tiling,
    rmt,
    rudin_shapiro_realisation,
    sample,
    z_analytic,
)
from .substitution import SeedError, catalogue, default_seed, substitution_patch

_SUBSTITUTION_SYSTEMS = (
    "fibonacci",
    "period_doubling",
    "thue_morse",
    "limit_quasiperiodic",
    "kolakoski31",
    "plastic",
    "rudin_shapiro",
)
_PARAMETRIC_SYSTEMS = ("noble", "gtm")
_STOCHASTIC_SYSTEMS = ("poisson", "bernoulli", "markov", "random_tiling", "rmt")
_SCAN_EXTRA_SYSTEMS = ("tm", "squarefree")

CATALOGUE_TEXT = (
    "Systems: "
    + ", ".join(_SUBSTITUTION_SYSTEMS)
    + "; noble (--p), gtm (--p --q); "
    + ", ".join(_STOCHASTIC_SYSTEMS)
    + "; tm, squarefree (zscan only)."
)


class NumericalFailure(click.ClickException):
    exit_code = 3


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs, in one reproducible record."""

    command: str
    system: str | None = None
    params: dict = field(default_factory=dict)
    k0: float | None = None
    ratio: float | None = None
    depth: int | None = None
    kstar_cut: float | None = None
    riesz_n: int | None = None
    squarefree_s: int | None = None
    mc_size: float | None = None
    radius: float | None = None
    seed: int = 0
    kmin: float | None = None
    kmax: float | None = None
    points: int | None = None
    bins: int | None = None
    input: str | None = None
    model: str | None = None
    predicted: float | None = None
    tolerance: float | None = None
    drop_head: int | None = None
    name: str | None = None
    figures: bool = True
    output: str | None = None
    fmt: str = "csv"

    def to_json(self) -> str:
        data = {k: v for k, v in dataclasses.asdict(self).items() if v is not None}
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        known = {f.name for f in dataclasses.fields(cls)}
        stray = set(data) - known
        if stray:
            raise click.UsageError(f"unknown config fields: {sorted(stray)}")
        if "command" not in data:
            raise click.UsageError("config lacks a 'command' field")
        return cls(**data)


def _resolve_output(output: str | None, default_name: str) -> Path:
    path = Path(output) if output else Path(default_name)
    outdir = os.environ.get("DIFFSCALE_OUTDIR")
    if outdir and not path.is_absolute():
        path = Path(outdir) / path
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_sidecar(cfg: RunConfig, data_path: Path) -> Path:
    side = Path(str(data_path) + ".run.json")
    side.write_text(cfg.to_json() + "\n")
    return side


def _unknown_system(system: str) -> click.UsageError:
    return click.UsageError(f"unknown system {system!r}. {CATALOGUE_TEXT}")


def _rule_for(system: str, params: dict):
    try:
        if system == "noble":
            return catalogue("noble", p=int(params.get("p", 2)))
        if system == "gtm":
            return catalogue("gtm", p=int(params.get("p", 2)), q=int(params.get("q", 1)))
        return catalogue(system)
    except KeyError:
        raise _unknown_system(system) from None


def _model_for(system: str, params: dict, usage: bool = True) -> AnalyticModel:
    try:
        if system == "poisson":
            return poisson()
        if system == "bernoulli":
            return bernoulli(params.get("p", 0.5), params.get("weighting", "binary"))
        if system == "markov":
            return markov(params.get("p", 0.25), params.get("q", 0.25))
        if system == "random_tiling":
            return random_tiling(params.get("u", 1.0), params.get("v", 2.0), params.get("p", 0.5))
        if system == "rmt":
            return rmt(int(params.get("beta", 2)))
    except ValueError as exc:
        if usage:
            raise click.UsageError(str(exc)) from exc
        raise
    raise _unknown_system(system)


def _scheme_for(system: str, params: dict):
    if system == "fibonacci":
        return golden_scheme()
    if system == "noble":
        return noble_scheme(int(params.get("p", 2)))
    raise _unknown_system(system)


def _parse_ratio(text: str | None, natural: float | None) -> float | None:
    if text is None:
        return None
    if text in ("golden", "tau"):
        return (1.0 + math.sqrt(5.0)) / 2.0
    if text == "natural":
        if natural is None:
            raise click.UsageError("'natural' ratio undefined for this system")
        return natural
    try:
        value = float(text)
    except ValueError:
        raise click.UsageError(f"ratio must be a number, 'golden', or 'natural', got {text!r}")
    return value


def _dump_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# execution (shared by the subcommands and repro)


def execute(cfg: RunConfig) -> list[Path]:
    handler = {
        "generate": _run_generate,
        "zscan": _run_zscan,
        "fit": _run_fit,
        "lyapunov": _run_lyapunov,
        "mc": _run_mc,
        "tm-bounds": _run_tm_bounds,
    }.get(cfg.command)
    if handler is None:
        raise click.UsageError(f"unknown command {cfg.command!r} in config")
    return handler(cfg)


def _run_generate(cfg: RunConfig) -> list[Path]:
    system = cfg.system or ""
    radius = cfg.radius if cfg.radius is not None else 100.0
    out = _resolve_output(cfg.output, f"generate_{system}.csv")
    if system in _SUBSTITUTION_SYSTEMS or system in _PARAMETRIC_SYSTEMS:
        rule = _rule_for(system, cfg.params)
        try:
            patch = substitution_patch(rule, default_seed(rule), radius)
        except (SeedError, MemoryError) as exc:
            raise NumericalFailure(str(exc)) from exc
        patch.to_csv(out)
    elif system in _STOCHASTIC_SYSTEMS:
        model = _model_for(system, cfg.params)
        try:
            real = sample(model, radius, cfg.seed)
        except ValueError as exc:
            raise click.UsageError(str(exc)) from exc
        real.to_csv(out)
    else:
        raise _unknown_system(system)
    side = _write_sidecar(cfg, out)
    click.echo(f"wrote {out}")
    return [out, side]


def _zscan_producer(cfg: RunConfig):
    """Returns (producer, k0, ratio, depth, log_space, name)."""
    system = cfg.system or ""
    params = cfg.params
    if system in ("fibonacci", "noble"):
        scheme = _scheme_for(system, params)
        s = params.get("s")
        s_el = scheme.natural_length if s is None else float(s)
        s_f = float(s_el)
        natural = float(scheme.order.generator)
        k0 = cfg.k0 if cfg.k0 is not None else 0.4
        ratio = cfg.ratio if cfg.ratio is not None else natural
        depth = cfg.depth if cfg.depth is not None else 10
        cut0 = cfg.kstar_cut if cfg.kstar_cut is not None else 50.0 / s_f
        name = system if system == "fibonacci" else f"noble({int(params.get('p', 2))})"

        def producer(k: float) -> float:
            # scale the internal-space cut with depth, as a fixed cut starves
            return z_pure_point(scheme, s_el, k, kstar_cut=cut0 * (k0 / k))[0]

        return producer, k0, ratio, depth, False, name

    if system == "tm":
        k0 = cfg.k0 if cfg.k0 is not None else 2.0**-4
        n0 = -math.log2(k0)
        if abs(n0 - round(n0)) > 1e-9 or round(n0) < 1:
            raise click.UsageError("tm scans need k0 = 2^-n with n >= 1")
        depth = cfg.depth if cfg.depth is not None else 10
        if cfg.ratio is not None and abs(cfg.ratio - 2.0) > 1e-12:
            raise click.UsageError("tm scans use ratio 2")

        def producer(k: float) -> float:
            return tm_log_bracket(round(-math.log2(k)))[1]

        return producer, k0, 2.0, depth, True, "thue_morse"

    if system == "gtm":
        p = int(params.get("p", 2))
        q = int(params.get("q", 1))
        base = p + q
        k0 = cfg.k0 if cfg.k0 is not None else 1.0 / base
        depth = cfg.depth if cfg.depth is not None else 11
        if cfg.ratio is not None and abs(cfg.ratio - base) > 1e-12:
            raise click.UsageError(f"gtm({p},{q}) scans use ratio {base}")

        def producer(k: float) -> float:
            return distribution_at_power(p, q, round(-math.log(k) / math.log(base)))

        return producer, k0, float(base), depth, False, f"gtm({p},{q})"

    if system in _STOCHASTIC_SYSTEMS:
        model = _model_for(system, params)
        k0 = cfg.k0 if cfg.k0 is not None else 0.4
        ratio = cfg.ratio if cfg.ratio is not None else 2.0
        depth = cfg.depth if cfg.depth is not None else 10
        return (lambda k: z_analytic(model, k)), k0, ratio, depth, False, model.label()

    raise _unknown_system(system)


def _run_zscan(cfg: RunConfig) -> list[Path]:
    system = cfg.system or ""
    out = _resolve_output(cfg.output, f"zscan_{system}.{cfg.fmt}")
    if system == "squarefree":
        count = cfg.squarefree_s if cfg.squarefree_s is not None else 8192
        kmin = cfg.kmin if cfg.kmin is not None else 1e-4
        kmax = cfg.kmax if cfg.kmax is not None else 1e-1
        points = cfg.points if cfg.points is not None else 12
        if not 0 < kmin < kmax:
            raise click.UsageError("need 0 < kmin < kmax")
        try:
            diag = r_diagnostic(np.geomspace(kmax, kmin, points), count)
        except (MemoryError, ValueError) as exc:
            raise NumericalFailure(str(exc)) from exc
        if cfg.fmt == "json":
            _dump_json(
                {
                    "k": list(diag.ks),
                    "S": diag.generators,
                    "Z": list(diag.zs),
                    "R": list(diag.ratios),
                },
                out,
            )
        else:
            diag.to_csv(out)
    else:
        producer, k0, ratio, depth, log_space, name = _zscan_producer(cfg)
        try:
            result = scan(producer, k0, ratio, depth, name=name, log_space=log_space)
        except ScanFailure as exc:
            raise NumericalFailure(str(exc)) from exc
        if cfg.fmt == "json":
            _dump_json(
                {
                    "producer": result.producer,
                    "k": list(result.ks),
                    "log_k": [math.log(k) for k in result.ks],
                    "log_Z": list(result.log_values),
                },
                out,
            )
        else:
            result.to_csv(out)
    side = _write_sidecar(cfg, out)
    click.echo(f"wrote {out}")
    return [out, side]


def _read_scan_csv(path: str, name: str) -> ScanResult:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise click.UsageError(str(exc)) from exc
    if not lines:
        raise click.UsageError(f"{path} line 1: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if "k" not in header:
        raise click.UsageError(f"{path} line 1: no 'k' column in {header}")
    ik = header.index("k")
    ilz = header.index("log_Z") if "log_Z" in header else None
    iz = header.index("Z") if "Z" in header else None
    if ilz is None and iz is None:
        raise click.UsageError(f"{path} line 1: need a 'Z' or 'log_Z' column")
    ks: list[float] = []
    logs: list[float] = []
    for num, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        try:
            k = float(parts[ik])
            if ilz is not None:
                lz = float(parts[ilz])
            else:
                z = float(parts[iz])
                if z <= 0:
                    raise ValueError(f"Z = {z} not positive")
                lz = math.log(z)
        except (ValueError, IndexError) as exc:
            raise click.UsageError(f"{path} line {num}: {exc}") from exc
        ks.append(k)
        logs.append(lz)
    if len(ks) < 2:
        raise click.UsageError(f"{path}: need at least two samples")
    try:
        return ScanResult(
            name,
            ks[0],
            ks[0] / ks[1] if ks[1] else 2.0,
            len(ks) - 1,
            np.array(ks),
            np.array(logs),
        )
    except ValueError as exc:
        raise click.UsageError(f"{path}: {exc}") from exc


def _catalogue_battery() -> tuple[list, list]:
    """Fits for every catalogued system; returns (fits, figure pairs)."""
    fits = []
    pairs = []

    fib_cfg = RunConfig(command="zscan", system="fibonacci")
    producer, k0, ratio, depth, log_space, name = _zscan_producer(fib_cfg)
    fib_scan = scan(producer, k0, ratio, depth, name=name)
    fib_fit = fit_power(fib_scan, predicted=4.0, tolerance=0.1)
    fits.append(fib_fit)
    pairs.append((fib_scan, fib_fit))

    for p, depth in ((2, 8), (3, 7)):
        cfgp = RunConfig(command="zscan", system="noble", params={"p": p}, depth=depth)
        producer, k0, ratio, dep, log_space, name = _zscan_producer(cfgp)
        nscan = scan(producer, k0, ratio, dep, name=name)
        nfit = fit_power(nscan, predicted=4.0, tolerance=0.15)
        fits.append(nfit)
        pairs.append((nscan, nfit))

    cocycle_systems = (
        ("period_doubling", {}),
        ("limit_quasiperiodic", {}),
        ("kolakoski31", {}),
        ("gtm", {"p": 3, "q": 1}),
        ("plastic", {}),
        ("gtm", {"p": 5, "q": 1}),
    )
    for system, params in cocycle_systems:
        rule = _rule_for(system, params)
        predicted = predict_exponent(rule).z_exponent
        measured = measured_z_exponent(rule, 0.7, depth=50)
        fits.append(_CocycleFit(rule.name, measured, predicted, 0.1))

    # rudin_shapiro amplitudes decay faster than any power, so the cocycle
    # slope never settles; integrate the periodogram of the exact word instead
    rs = rudin_shapiro_realisation(1 << 16)
    two_r = 2.0 * rs.half_width
    rs_scan = scan(
        lambda k: empirical_Z(rs, k, math.ceil(k * two_r)),
        0.4,
        2.0,
        6,
        name="rudin_shapiro",
    )
    rs_fit = fit_power(rs_scan, predicted=1.0, tolerance=0.1)
    fits.append(rs_fit)
    pairs.append((rs_scan, rs_fit))

    tm_cfg = RunConfig(command="zscan", system="tm")
    producer, k0, ratio, depth, log_space, name = _zscan_producer(tm_cfg)
    tm_scan = scan(producer, k0, ratio, depth, name=name, log_space=log_space)
    tm_fit = fit_log_quadratic(tm_scan)
    fits.append(tm_fit)
    pairs.append((tm_scan, tm_fit))
    return fits, pairs


@dataclass(frozen=True)
class _CocycleFit:
    """Amplitude-cocycle exponent measurement shaped like a fit row."""

    producer: str
    exponent: float
    predicted: float
    tolerance: float

    def row(self) -> dict:
        return {
            "producer": self.producer,
            "kind": "cocycle",
            "exponent": float(self.exponent),
            "predicted": float(self.predicted),
            "passed": bool(abs(self.exponent - self.predicted) <= self.tolerance),
        }


def _run_fit(cfg: RunConfig) -> list[Path]:
    written: list[Path] = []
    if cfg.model == "catalogue":
        try:
            fits, pairs = _catalogue_battery()
        except (ScanFailure, ValueError, ArithmeticError) as exc:
            raise NumericalFailure(str(exc)) from exc
        doc = report(fits)
        out = _resolve_output(cfg.output, "fit_catalogue.json")
    else:
        if not cfg.input:
            raise click.UsageError("fit needs --input (or --catalogue)")
        name = cfg.name or Path(cfg.input).stem
        scan_result = _read_scan_csv(cfg.input, name)
        drop = cfg.drop_head if cfg.drop_head is not None else 2
        try:
            if cfg.model == "log-quadratic":
                fit = fit_log_quadratic(scan_result, drop_head=drop)
            else:
                fit = fit_power(
                    scan_result,
                    predicted=cfg.predicted,
                    tolerance=cfg.tolerance if cfg.tolerance is not None else 0.1,
                    drop_head=drop,
                )
        except ValueError as exc:
            raise click.UsageError(str(exc)) from exc
        doc = report([fit])
        pairs = [(scan_result, fit)]
        out = _resolve_output(cfg.output, f"fit_{name}.json")
    out.write_text(doc.to_json() + "\n")
    written.append(out)
    click.echo(doc.to_table())
    click.echo(f"wrote {out}")
    if cfg.figures:
        from .plots import scan_fit_figure

        fig_path = out.with_suffix(".png")
        scan_fit_figure(pairs, fig_path)
        written.append(fig_path)
        click.echo(f"wrote {fig_path}")
    written.append(_write_sidecar(cfg, out))
    return written


def _run_lyapunov(cfg: RunConfig) -> list[Path]:
    system = cfg.system or ""
    if system in _STOCHASTIC_SYSTEMS or system in _SCAN_EXTRA_SYSTEMS:
        raise click.UsageError(f"{system!r} has no substitution cocycle. {CATALOGUE_TEXT}")
    rule = _rule_for(system, cfg.params)
    payload = exponent_report(rule)
    loglam = math.log(payload["lambda"])
    payload["shifted_spectrum"] = [x - loglam for x in payload["lyapunov_spectrum"]]
    k = cfg.k0 if cfg.k0 is not None else 0.7
    depth = cfg.depth if cfg.depth is not None else 50
    try:
        payload["measured_exponent"] = measured_z_exponent(rule, k, depth=depth)
    except (ValueError, ArithmeticError) as exc:
        raise NumericalFailure(str(exc)) from exc
    out = _resolve_output(cfg.output, f"lyapunov_{rule.name}.json")
    _dump_json(payload, out)
    side = _write_sidecar(cfg, out)
    click.echo(json.dumps(payload, indent=2, sort_keys=True))
    click.echo(f"wrote {out}")
    return [out, side]


def _run_mc(cfg: RunConfig) -> list[Path]:
    system = cfg.system or ""
    size = cfg.mc_size if cfg.mc_size is not None else 1e5
    kmin = cfg.kmin if cfg.kmin is not None else 0.05
    kmax = cfg.kmax if cfg.kmax is not None else 0.4
    points = cfg.points if cfg.points is not None else 8
    if not 0 < kmin < kmax:
        raise click.UsageError("need 0 < kmin < kmax")

    if system == "rudin_shapiro":
        n = int(size)
        real = rudin_shapiro_realisation(n, cfg.params.get("p", 0.0), cfg.seed)
        analytic = {k: k for k in np.linspace(kmin, kmax, points)}
        label = f"rudin_shapiro(p={cfg.params.get('p', 0.0):g})"
    else:
        model = _model_for(system, cfg.params)
        try:
            real = sample(model, size, cfg.seed)
        except ValueError as exc:
            raise click.UsageError(str(exc)) from exc
        analytic = {k: z_analytic(model, k) for k in np.linspace(kmin, kmax, points)}
        label = model.label()

    two_r = 2.0 * real.half_width
    rows = []
    try:
        for k, za in analytic.items():
            bins = cfg.bins if cfg.bins is not None else math.ceil(k * two_r)
            rows.append((k, za, empirical_Z(real, k, bins)))
    except ValueError as exc:
        raise NumericalFailure(str(exc)) from exc

    out = _resolve_output(cfg.output, f"mc_{system}.{cfg.fmt}")
    if cfg.fmt == "json":
        _dump_json(
            {
                "model": label,
                "k": [r[0] for r in rows],
                "Z_analytic": [r[1] for r in rows],
                "Z_empirical": [r[2] for r in rows],
            },
            out,
        )
    else:
        with open(out, "w") as fh:
            fh.write("k,Z_analytic,Z_empirical\n")
            for k, za, ze in rows:
                fh.write(f"{k:.17g},{za:.17g},{ze:.17g}\n")
    written = [out]
    click.echo(f"wrote {out}")
    if cfg.figures:
        from .plots import mc_comparison_figure

        fig_path = out.with_suffix(".png")
        mc_comparison_figure(
            [r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows], label, fig_path
        )
        written.append(fig_path)
        click.echo(f"wrote {fig_path}")
    written.append(_write_sidecar(cfg, out))
    return written


def _run_tm_bounds(cfg: RunConfig) -> list[Path]:
    n = cfg.riesz_n if cfg.riesz_n is not None else 10
    if n < 2:
        raise click.UsageError("need n >= 2")
    try:
        payload = tm_bound_report(n)
    except (ValueError, ArithmeticError) as exc:
        raise NumericalFailure(str(exc)) from exc
    out = _resolve_output(cfg.output, f"tm_bounds_{n}.json")
    _dump_json(payload, out)
    side = _write_sidecar(cfg, out)
    click.echo(json.dumps(payload, indent=2, sort_keys=True))
    click.echo(f"wrote {out}")
    return [out, side]


# ---------------------------------------------------------------------------
# click wiring


def _params_from(p, q, u, v, beta, weighting, s) -> dict:
    params = {}
    if p is not None:
        params["p"] = p
    if q is not None:
        params["q"] = q
    if u is not None:
        params["u"] = u
    if v is not None:
        params["v"] = v
    if beta is not None:
        params["beta"] = beta
    if weighting is not None:
        params["weighting"] = weighting
    if s is not None:
        params["s"] = s
    return params


_model_options = [
    click.option("--p", type=float, default=None, help="Model parameter p."),
    click.option("--q", type=float, default=None, help="Model parameter q."),
    click.option("--u", type=float, default=None, help="Tile length u (random_tiling)."),
    click.option("--v", type=float, default=None, help="Tile length v (random_tiling)."),
    click.option("--beta", type=int, default=None, help="Ensemble parameter (rmt)."),
    click.option(
        "--weighting",
        type=click.Choice(["binary", "signed"]),
        default=None,
        help="Bernoulli weights: 0/1 or +-1.",
    ),
]


def _add_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return wrap


@click.group(epilog=CATALOGUE_TEXT)
def main():
    """Scaling of integrated diffraction intensities near k = 0.

    Generate point sets, scan Z(k) on geometric grids, fit scaling laws,
    and cross-check analytic results against Monte Carlo estimates.  Set
    DIFFSCALE_OUTDIR to redirect relative output paths.
    """


@main.command()
@click.option("--system", required=True, help=CATALOGUE_TEXT)
@click.option("--radius", type=float, default=100.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_add_options(_model_options)
@click.option("--output", "-o", type=click.Path(), default=None)
def generate(system, radius, seed, p, q, u, v, beta, weighting, output):
    """Write one point-set patch or realisation as CSV."""
    cfg = RunConfig(
        command="generate",
        system=system,
        params=_params_from(p, q, u, v, beta, weighting, None),
        radius=radius,
        seed=seed,
        output=output,
    )
    execute(cfg)


@main.command()
@click.option("--system", required=True, help=CATALOGUE_TEXT)
@click.option("--k0", type=float, default=None, help="Scan anchor (largest k).")
@click.option("--ratio", default=None, help="Grid ratio: number, 'golden', or 'natural'.")
@click.option("--depth", type=int, default=None, help="Number of halvings (samples = depth+1).")
@click.option("--kstar-cut", type=float, default=None, help="Internal-space cut at the anchor.")
@click.option("--s", type=float, default=None, help="Window length override (cut-and-project).")
@click.option("--S", "squarefree_s", type=int, default=None, help="Square-free generator count.")
@click.option("--kmin", type=float, default=None, help="Smallest k (squarefree grid).")
@click.option("--kmax", type=float, default=None, help="Largest k (squarefree grid).")
@click.option("--points", type=int, default=None, help="Grid size (squarefree).")
@_add_options(_model_options)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--output", "-o", type=click.Path(), default=None)
def zscan(system, k0, ratio, depth, kstar_cut, s, squarefree_s, kmin, kmax, points,
          p, q, u, v, beta, weighting, fmt, output):
    """Scan Z(k) down a geometric grid and write the samples."""
    natural = None
    if system in ("fibonacci", "noble"):
        params = _params_from(p, q, None, None, None, None, s)
        natural = float(_scheme_for(system, params).order.generator)
    cfg = RunConfig(
        command="zscan",
        system=system,
        params=_params_from(p, q, u, v, beta, weighting, s),
        k0=k0,
        ratio=_parse_ratio(ratio, natural),
        depth=depth,
        kstar_cut=kstar_cut,
        squarefree_s=squarefree_s,
        kmin=kmin,
        kmax=kmax,
        points=points,
        output=output,
        fmt=fmt,
    )
    execute(cfg)


@main.command()
@click.option("--input", "input_", type=click.Path(), default=None, help="Scan CSV to fit.")
@click.option(
    "--model",
    type=click.Choice(["power", "log-quadratic"]),
    default="power",
    show_default=True,
)
@click.option("--catalogue", "catalogue_", is_flag=True, help="Fit every catalogued system.")
@click.option("--predicted", type=float, default=None, help="Expected exponent (power).")
@click.option("--tol", "tolerance", type=float, default=None, help="Pass tolerance on exponent.")
@click.option("--drop-head", type=int, default=None, help="Leading samples to drop (default 2).")
@click.option("--name", default=None, help="Producer label in the report.")
@click.option("--figures/--no-figures", default=True, show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
def fit(input_, model, catalogue_, predicted, tolerance, drop_head, name, figures, output):
    """Fit scaling laws and write a JSON report, table, and figure."""
    cfg = RunConfig(
        command="fit",
        model="catalogue" if catalogue_ else model,
        input=input_,
        predicted=predicted,
        tolerance=tolerance,
        drop_head=drop_head,
        name=name,
        figures=figures,
        output=output,
        fmt="json",
    )
    execute(cfg)


@main.command()
@click.option("--system", required=True, help="Substitution system (see catalogue).")
@click.option("--p", type=float, default=None)
@click.option("--q", type=float, default=None)
@click.option("--k", "k0", type=float, default=None, help="Probe wave number (default 0.7).")
@click.option("--depth", type=int, default=None, help="Cocycle depth (default 50).")
@click.option("--output", "-o", type=click.Path(), default=None)
def lyapunov(system, p, q, k0, depth, output):
    """Report the cocycle spectrum and exponent prediction for one rule."""
    cfg = RunConfig(
        command="lyapunov",
        system=system,
        params=_params_from(p, q, None, None, None, None, None),
        k0=k0,
        depth=depth,
        output=output,
        fmt="json",
    )
    execute(cfg)


@main.command()
@click.option("--system", required=True, help="Stochastic system or rudin_shapiro.")
@click.option("--R", "mc_size", type=float, default=None, help="Half-width (default 1e5).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--kmin", type=float, default=None)
@click.option("--kmax", type=float, default=None)
@click.option("--points", type=int, default=None)
@click.option("--bins", type=int, default=None, help="Periodogram bins (default resolves 1/2R).")
@_add_options(_model_options)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--figures/--no-figures", default=True, show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
def mc(system, mc_size, seed, kmin, kmax, points, bins, p, q, u, v, beta, weighting,
       fmt, figures, output):
    """Compare analytic Z with the periodogram of one sampled realisation."""
    cfg = RunConfig(
        command="mc",
        system=system,
        params=_params_from(p, q, u, v, beta, weighting, None),
        mc_size=mc_size,
        seed=seed,
        kmin=kmin,
        kmax=kmax,
        points=points,
        bins=bins,
        figures=figures,
        output=output,
        fmt=fmt,
    )
    execute(cfg)


@main.command(name="tm-bounds")
@click.option("--n", "riesz_n", type=int, required=True, help="Bracket depth (k = 2^-n).")
@click.option("--output", "-o", type=click.Path(), default=None)
def tm_bounds(riesz_n, output):
    """Two-sided bounds for the Thue-Morse distribution at k = 2^-n."""
    cfg = RunConfig(command="tm-bounds", riesz_n=riesz_n, output=output, fmt="json")
    execute(cfg)


@main.command()
@click.argument("config", type=click.Path(exists=True))
@click.option("--output", "-o", type=click.Path(), default=None, help="Override output path.")
def repro(config, output):
    """Replay a stored run configuration byte for byte."""
    cfg = RunConfig.from_json(Path(config).read_text())
    if output is not None:
        cfg = dataclasses.replace(cfg, output=output)
    execute(cfg)


if __name__ == "__main__":
    main()
