"""Monte-Carlo versus theory experiments for ridge deconvolution.

A sweep realises each ratio ``delta`` by choosing ``n_x = round(n_y / delta)``
at fixed ``n_y``, draws ``trials`` independent problems per ratio and solves
each one for every ``lambda`` in the grid. Random streams are keyed by
``(seed, trial, purpose)`` through :class:`numpy.random.SeedSequence` with a
counter-based Philox generator, so results do not depend on execution order.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .amp import amp_ridge, se_iterate, se_ridge_fixed_point, solve_alpha
from .dft import dft_forward, transfer_of_kernel
from .signal_model import (
    AR1,
    ConstantDensity,
    IidComplexGaussian,
    ModelConfig,
    ProcessSpec,
    TabulatedDensity,
    sample_kernel,
    sample_noise,
    sample_signal,
    spectral_density,
)
from .solvers import nmse, ridge_freq, ridge_time_oracle
from .theory import pointwise_mse, predict_mse

__all__ = [
    "SweepSpec",
    "ResultRow",
    "PRESETS",
    "preset",
    "trial_rngs",
    "run_trial",
    "simulate_trial",
    "run_sweep",
    "theory_rows",
    "is_high_variance",
    "emit_csv",
    "emit_svg",
    "CheckResult",
    "verify",
    "CSV_HEADER",
]

CSV_HEADER = (
    "delta", "lambda", "nmse_theory", "nmse_emp_mean", "nmse_emp_std",
    "trials", "seed", "runtime_ms",
)

_STREAMS = ("kernel", "signal", "noise")


@dataclass(frozen=True)
class SweepSpec:
    """Grid of ``(delta, lambda)`` cells simulated at fixed ``n_y``, ``T``, ``k``.

    ``base.n_x`` and ``base.lam`` are ignored; the grids supply them.
    """

    base: ModelConfig
    delta_grid: tuple[float, ...]
    lambda_grid: tuple[float, ...]
    trials: int
    seed: int
    process: ProcessSpec
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.delta_grid or not self.lambda_grid:
            raise ValueError("delta_grid and lambda_grid must be nonempty")
        if any(not d > 0 for d in self.delta_grid):
            raise ValueError("delta values must be > 0")
        if any(not lam >= 0 for lam in self.lambda_grid):
            raise ValueError("lambda values must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        for d in self.delta_grid:
            self.n_x_for(d)

    def n_x_for(self, delta: float) -> int:
        n_x = round(self.base.n_y / delta)
        if n_x < 1:
            raise ValueError(f"delta={delta} gives n_x < 1 at n_y={self.base.n_y}")
        return n_x

    def config_for(self, delta: float, lam: float = 0.0) -> ModelConfig:
        return self.base.replace(n_x=self.n_x_for(delta), lam=lam)


@dataclass
class ResultRow:
    delta: float
    lam: float
    nmse_theory: float
    nmse_emp_mean: float
    nmse_emp_std: float
    trials: int
    seed: int
    runtime_ms: float
    failed_trials: int = 0
    high_variance: bool = False

    def csv_fields(self) -> list[str]:
        return [
            _fmt(self.delta), _fmt(self.lam), _fmt(self.nmse_theory),
            _fmt(self.nmse_emp_mean), _fmt(self.nmse_emp_std),
            str(self.trials), str(self.seed), f"{self.runtime_ms:.3f}",
        ]


def _fmt(x: float) -> str:
    return repr(float(x))


# ----------------------------------------------------------------------------
# presets
# ----------------------------------------------------------------------------

DEFAULT_LAMBDAS = (1e-3, 1e-1, 1.0)
DEFAULT_DELTAS = (0.25, 0.5, 0.8, 1.0, 1.25, 2.0, 4.0)

PRESETS = {
    # i.i.d. complex Gaussian signal, variances as in the i.i.d. experiment
    "desk": dict(n_y=200, T=128, sigma2=1.0, process=IidComplexGaussian(0.004), trials=10),
    "iid-paper": dict(n_y=500, T=256, sigma2=1.0, process=IidComplexGaussian(0.004), trials=10),
    "ar1-paper": dict(n_y=500, T=256, sigma2=0.1, process=AR1(0.9, 0.1, "rademacher"), trials=10),
}


def preset(name: str, seed: int = 0, trials: int | None = None,
           deltas: Iterable[float] = DEFAULT_DELTAS,
           lambdas: Iterable[float] = DEFAULT_LAMBDAS, k: int | None = None) -> SweepSpec:
    """Build a :class:`SweepSpec` for a named preset; the kernel spans the signal by default."""
    try:
        p = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    T = p["T"]
    base = ModelConfig(n_x=1, n_y=p["n_y"], T=T, k=T if k is None else k, sigma2=p["sigma2"])
    return SweepSpec(
        base=base,
        delta_grid=tuple(deltas),
        lambda_grid=tuple(lambdas),
        trials=p["trials"] if trials is None else trials,
        seed=seed,
        process=p["process"],
    )


# ----------------------------------------------------------------------------
# trials
# ----------------------------------------------------------------------------


def trial_rngs(seed: int, trial: int) -> dict[str, np.random.Generator]:
    """Independent kernel/signal/noise generators for one trial of a sweep."""
    return {
        name: np.random.Generator(
            np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial, i)))
        )
        for i, name in enumerate(_STREAMS)
    }


def simulate_trial(cfg: ModelConfig, process: ProcessSpec, lambdas: Iterable[float],
                   rngs: dict[str, np.random.Generator]) -> list[float]:
    """Draw one problem and return the empirical NMSE for each penalty in ``lambdas``."""
    K = sample_kernel(cfg, rngs["kernel"])
    H = transfer_of_kernel(K, cfg.T)
    del K
    X = sample_signal(process, cfg.n_x, cfg.T, rngs["signal"])
    noise = sample_noise(cfg, rngs["noise"])
    # Y = K * X + Xi, formed through the transfer (exact for circular convolution)
    Y = np.fft.ifft(H.apply(dft_forward(X)), axis=-1, norm="ortho") + noise
    return [nmse(ridge_freq(H, Y, lam).X_hat, X) for lam in lambdas]


def run_trial(cfg: ModelConfig, process: ProcessSpec, rng) -> float:
    """Empirical NMSE of one end-to-end trial at ``cfg.lam``.

    ``rng`` is either a generator (used for every stream) or a mapping from
    ``kernel``/``signal``/``noise`` to generators.
    """
    if isinstance(rng, np.random.Generator):
        rng = {name: rng for name in _STREAMS}
    return simulate_trial(cfg, process, [cfg.lam], rng)[0]


def is_high_variance(delta: float, lam: float) -> bool:
    """Cells near the interpolation threshold with little regularisation."""
    return 0.9 < delta < 1.1 and lam < 1e-2


def _theory(spec: SweepSpec, cfg: ModelConfig, lam: float) -> float:
    return predict_mse(lam, cfg.delta, cfg.sigma2, spectral_density(spec.process),
                       sigmaK2=cfg.sigmaK2).nmse


def theory_rows(spec: SweepSpec) -> list[ResultRow]:
    """Theory-only rows (empirical columns are NaN)."""
    rows = []
    for delta in spec.delta_grid:
        cfg = spec.config_for(delta)
        for lam in spec.lambda_grid:
            t0 = time.perf_counter()
            th = _theory(spec, cfg, lam)
            rows.append(ResultRow(delta, lam, th, math.nan, math.nan, 0, spec.seed,
                                  1e3 * (time.perf_counter() - t0),
                                  high_variance=is_high_variance(delta, lam)))
    return rows


def run_sweep(spec: SweepSpec, with_theory: bool = True,
              progress: Callable[[str], None] | None = None) -> list[ResultRow]:
    """Monte-Carlo sweep over ``spec.delta_grid`` x ``spec.lambda_grid``.

    Each trial draws one ``(K, X, Xi)`` per ``delta`` and solves it for every
    ``lambda``. A failing trial is counted in ``failed_trials`` and excluded
    from the mean; it does not abort the sweep.
    """
    rows = []
    lambdas = list(spec.lambda_grid)
    for delta in spec.delta_grid:
        cfg = spec.config_for(delta)

        def one(trial, cfg=cfg):
            t0 = time.perf_counter()
            try:
                vals = simulate_trial(cfg, spec.process, lambdas, trial_rngs(spec.seed, trial))
            except (np.linalg.LinAlgError, ValueError, FloatingPointError):
                vals = [math.nan] * len(lambdas)
            return vals, time.perf_counter() - t0

        if spec.workers > 1:
            with ThreadPoolExecutor(spec.workers) as pool:
                results = list(pool.map(one, range(spec.trials)))
        else:
            results = [one(t) for t in range(spec.trials)]
        # results are ordered by trial index regardless of scheduling
        vals = np.array([r[0] for r in results], dtype=float)
        elapsed = sum(r[1] for r in results)
        for j, lam in enumerate(lambdas):
            col = vals[:, j]
            ok = col[np.isfinite(col)]
            mean = float(np.mean(ok)) if ok.size else math.nan
            std = float(np.std(ok, ddof=1)) if ok.size > 1 else 0.0
            th = _theory(spec, cfg, lam) if with_theory else math.nan
            rows.append(ResultRow(
                delta=delta, lam=lam, nmse_theory=th, nmse_emp_mean=mean,
                nmse_emp_std=std, trials=int(ok.size), seed=spec.seed,
                runtime_ms=1e3 * elapsed / len(lambdas),
                failed_trials=int(col.size - ok.size),
                high_variance=is_high_variance(delta, lam),
            ))
            if progress:
                progress(f"delta={delta:g} lambda={lam:g} theory={th:.6g} emp={mean:.6g}")
    return rows


# ----------------------------------------------------------------------------
# output
# ----------------------------------------------------------------------------


def csv_text(rows: list[ResultRow]) -> str:
    if not rows:
        raise ValueError("no rows to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    for r in rows:
        if r.high_variance:
            buf.write(f"# high_variance=true,delta={_fmt(r.delta)},lambda={_fmt(r.lam)}\n")
        if r.failed_trials:
            buf.write(f"# failed_trials={r.failed_trials},delta={_fmt(r.delta)},lambda={_fmt(r.lam)}\n")
    return buf.getvalue()


def emit_csv(rows: list[ResultRow], path) -> Path:
    """Write rows with header ``delta,lambda,nmse_theory,...,runtime_ms``.

    Flag lines (``# high_variance=...``, ``# failed_trials=...``) follow the data.
    """
    text = csv_text(rows)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def svg_text(rows: list[ResultRow], width: int = 640, height: int = 420) -> str:
    """log10(NMSE) versus delta; theory as lines, simulation as dots, one colour per lambda."""
    if not rows:
        raise ValueError("no rows to plot")
    left, right, top, bottom = 70, 150, 30, 50
    pw, ph = width - left - right, height - top - bottom

    def finite_log(v):
        return math.log10(v) if v > 0 and math.isfinite(v) else None

    ys = [v for r in rows for v in (finite_log(r.nmse_theory), finite_log(r.nmse_emp_mean))
          if v is not None]
    xs = [r.delta for r in rows]
    x0, x1 = min(xs), max(xs)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return left + pw * (x - x0) / (x1 - x0)

    def py(y):
        return top + ph * (1.0 - (y - y0) / (y1 - y0))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<line x1="{px(xv):.2f}" y1="{top + ph}" x2="{px(xv):.2f}" '
                   f'y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(xv):.2f}" y="{top + ph + 18}" '
                   f'text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<line x1="{left - 5}" y1="{py(yv):.2f}" x2="{left}" '
                   f'y2="{py(yv):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py(yv) + 4:.2f}" '
                   f'text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 10}" '
               f'text-anchor="middle">delta = n_y / n_x</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.2f})">log10(NMSE)</text>')

    lambdas = sorted({r.lam for r in rows})
    for i, lam in enumerate(lambdas):
        color = _PALETTE[i % len(_PALETTE)]
        series = sorted((r for r in rows if r.lam == lam), key=lambda r: r.delta)
        pts = [(px(r.delta), py(v)) for r in series
               if (v := finite_log(r.nmse_theory)) is not None]
        if len(pts) > 1:
            out.append('<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>'.format(
                color, " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)))
        elif pts:
            out.append(f'<line x1="{pts[0][0] - 6:.2f}" y1="{pts[0][1]:.2f}" '
                       f'x2="{pts[0][0] + 6:.2f}" y2="{pts[0][1]:.2f}" stroke="{color}" '
                       f'stroke-width="1.5"/>')
        for r in series:
            v = finite_log(r.nmse_emp_mean)
            if v is not None:
                out.append(f'<circle cx="{px(r.delta):.2f}" cy="{py(v):.2f}" r="3.5" '
                           f'fill="{color}"/>')
        ly = top + 15 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly - 4}" x2="{left + pw + 32}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<circle cx="{left + pw + 22}" cy="{ly - 4}" r="3.5" fill="{color}"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly}">lambda={lam:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(rows: list[ResultRow], path) -> Path:
    text = svg_text(rows)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write SVG to {path}: {exc}") from exc
    return path


# ----------------------------------------------------------------------------
# self-check
# ----------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3e} (tol {self.tolerance:.1e}) {self.detail}".rstrip()


def _rel(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def _check_solvers(rng) -> CheckResult:
    worst = 0.0
    for _ in range(10):
        n_x, n_y = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        T = int(rng.integers(2, 17))
        k = int(rng.integers(1, T + 1))
        lam = float(rng.choice([0.0, 0.1, 1.0]))
        cfg = ModelConfig(n_x=n_x, n_y=n_y, T=T, k=k, sigma2=0.1)
        K = sample_kernel(cfg, rng)
        Y = sample_noise(cfg.replace(sigma2=1.0), rng)
        fast = ridge_freq(transfer_of_kernel(K, T), Y, lam).X_hat
        worst = max(worst, _rel(fast, ridge_time_oracle(K, Y, lam)))
    return CheckResult("freq_vs_time_solver", worst, 1e-8, worst <= 1e-8)


def _check_amp(rng, alpha_root: str) -> list[CheckResult]:
    n_y, n_x, lam = 300, 200, 0.5
    A = (rng.standard_normal((n_y, n_x)) + 1j * rng.standard_normal((n_y, n_x))) / math.sqrt(2 * n_y)
    y = A @ (rng.standard_normal(n_x) + 1j * rng.standard_normal(n_x)) / math.sqrt(2)
    y = y + 0.3 * (rng.standard_normal(n_y) + 1j * rng.standard_normal(n_y))
    sol = solve_alpha(lam, n_y / n_x)
    alpha = sol.alpha_small if alpha_root == "small" else sol.alpha_large
    res = amp_ridge(A, y, alpha)
    closed = np.linalg.solve(A.conj().T @ A + lam * np.eye(n_x), A.conj().T @ y)
    err = _rel(res.x, closed) if res.stable else math.inf
    checks = [CheckResult("amp_vs_closed_form", err, 1e-6, bool(res.converged and err <= 1e-6),
                          "" if res.stable else f"instability reported after {res.iterations} iterations")]
    res_large = amp_ridge(A, y, sol.alpha_large, t_max=200)
    checks.append(CheckResult("amp_large_root_unstable", float(res_large.iterations), 200,
                              res_large.diverged, "iterations until instability"))
    return checks


def _check_se() -> CheckResult:
    worst = 0.0
    for lam in np.geomspace(1e-3, 10, 5):
        for delta in (0.2, 0.7, 1.0, 2.0, 5.0):
            a = solve_alpha(lam, delta).alpha_small
            tr = se_iterate(a, delta, 0.1, 1.0)
            fp = se_ridge_fixed_point(a, delta, 0.1, 1.0)
            worst = max(worst, abs(tr.tau2_fixed - fp) / fp)
    return CheckResult("se_fixed_point", worst, 1e-10, worst <= 1e-10)


def _check_collapse(rng) -> CheckResult:
    worst = 0.0
    for _ in range(20):
        lam, delta = float(rng.uniform(0, 5)), float(rng.uniform(0.2, 5))
        s2, sx2 = float(rng.uniform(0, 2)), float(rng.uniform(0.01, 2))
        a = solve_alpha(lam, delta).alpha_small
        scalar = (a - 1) ** 2 * sx2 + a * a * se_ridge_fixed_point(a, delta, s2, sx2)
        flat = predict_mse(lam, delta, s2, TabulatedDensity(
            2 * np.pi * np.arange(64) / 64, np.full(64, sx2))).mse
        const = predict_mse(lam, delta, s2, ConstantDensity(sx2)).mse
        worst = max(worst, abs(flat - scalar) / scalar, abs(const - scalar) / scalar)
    return CheckResult("quadrature_collapse", worst, 1e-12, worst <= 1e-12)


def _check_kernel_stats(rng) -> list[CheckResult]:
    out = []
    n_y, n_x, T = 500, 16, 128
    for k in (T // 4, T):
        cfg = ModelConfig(n_x=n_x, n_y=n_y, T=T, k=k)
        H = transfer_of_kernel(sample_kernel(cfg, rng), T).slices
        var = float(np.mean(np.abs(H) ** 2))
        rel = abs(np.mean(H * H)) / var
        target = cfg.sigmaK2 / n_y
        out.append(CheckResult(f"kernel_dft_variance[k={k}]", abs(var - target) / target, 0.05,
                               abs(var - target) / target <= 0.05))
        out.append(CheckResult(f"kernel_dft_relation[k={k}]", rel, 0.05, rel <= 0.05))
    return out


def _check_tau2_mc(seed: int, tau2_form: str) -> CheckResult:
    # high-SNR cell where the two tau^2 variants separate by ~14%
    lam, delta, sigma2, sx2 = 1.0, 0.5, 0.1, 1.0
    cfg = ModelConfig(n_x=round(128 / delta), n_y=128, T=64, k=64, sigma2=sigma2)
    proc = IidComplexGaussian(sx2)
    emp = np.mean([simulate_trial(cfg, proc, [lam], trial_rngs(seed, t))[0] for t in range(4)])
    a = solve_alpha(lam, cfg.delta).alpha_small
    th = pointwise_mse(a, cfg.delta, sigma2, sx2, tau2_form) / sx2
    err = abs(emp - th) / th
    return CheckResult("tau2_formula_mc_match", err, 0.05, err <= 0.05,
                       f"theory={th:.5f} simulated={emp:.5f}")


def verify(seed: int = 20240601, alpha_root: str = "small", tau2_form: str = "recursion",
           report: Callable[[str], None] | None = print) -> list[CheckResult]:
    """Run the cross-module oracle checks and report one line per check.

    ``alpha_root`` and ``tau2_form`` exist to demonstrate that the checks
    catch the wrong AMP root and the wrong ``tau^2`` formula.
    """
    rng = np.random.default_rng(seed)
    checks: list[CheckResult] = [_check_solvers(rng)]
    checks += _check_amp(rng, alpha_root)
    checks.append(_check_se())
    checks.append(_check_collapse(rng))
    checks += _check_kernel_stats(rng)
    checks.append(_check_tau2_mc(seed, tau2_form))
    if report:
        for c in checks:
            report(c.line())
    return checks
