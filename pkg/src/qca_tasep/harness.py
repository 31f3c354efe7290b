"""Experiment orchestration: single runs, scans, time series, size sweeps.

Every run is identified by a short hash of its physics-relevant
configuration, so reruns of the same config land on the same ids and the
CSV bodies are byte-identical (floats are printed with 17 significant
digits and rows are sorted before writing).  Output directory and worker
count do not enter the hash.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .classical import build_mpa, classify_phase, mpa_profile
from .correlations import (
    Bipartition,
    CorrelationRecord,
    max_two_site_coherence,
    max_two_site_lqu,
    moment_ratio,
    negativity,
    ppt_moments_dense,
)
from .exact import (
    ConvergenceReport,
    density_matrix,
    density_profile,
    evolve_to_ness,
    init_state,
    sweep,
)
from .model import ModelParams
from .tensor import (
    TruncationPolicy,
    evolve_mpo_to_ness,
    mpo_density_profile,
    mpo_from_product,
    mpo_ppt_moments,
    mpo_to_dense,
)

__all__ = [
    "MODES",
    "BACKENDS",
    "OBSERVABLES",
    "FSS_OBSERVABLES",
    "ExperimentConfig",
    "RunRecord",
    "ScanResult",
    "TimeseriesResult",
    "FssResult",
    "compute_run_id",
    "grid_axis_values",
    "crossing_locations",
    "half_peak_width",
    "run_single",
    "run_timeseries",
    "run_scan",
    "run_fss",
    "emit_outputs",
]

MODES = ("single", "scan", "timeseries", "fss", "classical")
BACKENDS = ("exact", "mpo", "classical-mpa")
OBSERVABLES = ("profile", "negativity", "lqu", "coherence", "ppt_ratio")
FSS_OBSERVABLES = ("mean_density", "mean_density_derivative", "lqu", "coherence")

NEGATIVITY_DENSE_LIMIT = 8  # MPO states must convert to dense for negativity


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment request; hashable content defines the run id."""

    params: ModelParams
    mode: str = "single"
    backend: str = "exact"
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    tol: float = 1e-9
    max_sweeps: int = 100_000
    grid: tuple[tuple[float, float, float], tuple[float, float, float]] | None = None
    sizes: tuple[int, ...] | None = None
    observables: tuple[str, ...] = ("profile",)
    n_steps: int | None = None
    fss_observable: str = "mean_density"
    out_dir: str | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.backend not in BACKENDS:
            raise ValueError(
                f"backend must be one of {BACKENDS}, got {self.backend!r}"
            )
        bad = [o for o in self.observables if o not in OBSERVABLES]
        if bad:
            raise ValueError(f"unknown observables {bad}; allowed: {OBSERVABLES}")
        if self.fss_observable not in FSS_OBSERVABLES:
            raise ValueError(
                f"fss_observable must be one of {FSS_OBSERVABLES}, "
                f"got {self.fss_observable!r}"
            )
        if self.grid is not None:
            for start, stop, step in self.grid:
                if step <= 0:
                    raise ValueError(f"grid steps must be positive, got {step!r}")
                if stop < start:
                    raise ValueError(
                        f"grid range must have stop >= start, got "
                        f"({start!r}, {stop!r})"
                    )
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers!r}")
        quantum = {"negativity", "lqu", "coherence", "ppt_ratio"}
        if self.backend == "classical-mpa":
            asked = quantum.intersection(self.observables)
            if asked:
                raise ValueError(
                    f"observables {sorted(asked)} are undefined on the "
                    f"classical backend"
                )
            if self.params.omega != 0.0:
                raise ValueError(
                    "the classical backend requires omega = 0, got "
                    f"{self.params.omega!r}"
                )
        if (
            "negativity" in self.observables
            and self.backend == "mpo"
            and self.params.n_sites > NEGATIVITY_DENSE_LIMIT
        ):
            raise ValueError(
                f"half-system negativity needs a dense matrix: use the exact "
                f"backend or at most {NEGATIVITY_DENSE_LIMIT} sites"
            )


@dataclass
class RunRecord:
    """Everything produced by one run, config included for reproducibility."""

    run_id: str
    config: ExperimentConfig
    profile: np.ndarray | None = None
    mean_density: float | None = None
    correlations: CorrelationRecord | None = None
    convergence: ConvergenceReport | None = None
    max_bond_dim: int | None = None
    diagnostics: list[dict] | None = None
    phase: str | None = None
    wall_time: float = 0.0
    error: str | None = None


@dataclass
class ScanResult:
    config: ExperimentConfig
    run_id: str
    records: list[RunRecord]


@dataclass
class TimeseriesResult:
    config: ExperimentConfig
    run_id: str
    sweeps: np.ndarray
    negativity: np.ndarray
    lqu_max: np.ndarray | None = None
    coherence_max: np.ndarray | None = None


@dataclass
class FssResult:
    config: ExperimentConfig
    run_id: str
    cut_axis: str
    cut_values: np.ndarray
    sizes: tuple[int, ...]
    curves: dict[int, np.ndarray]
    crossings: dict[tuple[int, int], tuple[float, ...]]
    records: list[RunRecord]


def _canonical(value):
    """JSON-stable form of a config value; floats at 17 significant digits."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (tuple, list)):
        return [_canonical(v) for v in value]
    raise TypeError(f"cannot canonicalize {type(value).__name__}")


def compute_run_id(config: ExperimentConfig) -> str:
    """12-hex-digit id over the physics content of a config.

    out_dir and workers are excluded: they change where and how fast the
    run happens, never what it computes.
    """
    p = config.params
    payload = {
        "mode": config.mode,
        "backend": config.backend,
        "params": {
            "n_sites": p.n_sites,
            "alpha": _canonical(p.alpha),
            "beta": _canonical(p.beta),
            "tau": _canonical(p.tau),
            "omega": _canonical(p.omega),
        },
        "policy": {
            "chi_max": config.policy.chi_max,
            "svd_cutoff": _canonical(config.policy.svd_cutoff),
            "renormalize_trace": config.policy.renormalize_trace,
        },
        "tol": _canonical(config.tol),
        "max_sweeps": config.max_sweeps,
        "grid": _canonical(config.grid) if config.grid is not None else None,
        "sizes": _canonical(config.sizes) if config.sizes is not None else None,
        "observables": sorted(config.observables),
        "n_steps": config.n_steps,
        "fss_observable": config.fss_observable,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def grid_axis_values(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive arithmetic grid, rounded so ids do not drift with float noise."""
    if step <= 0:
        raise ValueError(f"step must be positive, got {step!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(max(count, 1)), 12)


def crossing_locations(
    xs: np.ndarray, ya: np.ndarray, yb: np.ndarray
) -> tuple[float, ...]:
    """Abscissas where two sampled curves cross, by linear interpolation.

    Points where either curve is NaN (non-converged runs) are dropped
    before detection.
    """
    xs, ya, yb = (np.asarray(v, dtype=float) for v in (xs, ya, yb))
    keep = ~(np.isnan(ya) | np.isnan(yb))
    xs, d = xs[keep], (ya - yb)[keep]
    out: list[float] = []
    for k in range(len(d) - 1):
        if d[k] == 0.0:
            out.append(float(xs[k]))
        elif d[k] * d[k + 1] < 0.0:
            frac = d[k] / (d[k] - d[k + 1])
            out.append(float(xs[k] + frac * (xs[k + 1] - xs[k])))
    if len(d) and d[-1] == 0.0:
        out.append(float(xs[-1]))
    return tuple(dict.fromkeys(out))


def half_peak_width(values: np.ndarray) -> float:
    """Full width at half maximum of a sampled curve, in sample units.

    The half-maximum crossings on either side of the peak are located by
    linear interpolation between adjacent samples; if the curve never drops
    below half maximum before the array ends, the width is clamped at the
    boundary sample. An all-zero (or empty) series has width 0.
    """
    values = np.asarray(values, dtype=float)
    peak = float(values.max(initial=0.0))
    if peak <= 0.0:
        return 0.0
    pk = int(values.argmax())
    half = 0.5 * peak
    i = pk
    while i > 0 and values[i - 1] > half:
        i -= 1
    if i > 0:
        left = i - (values[i] - half) / (values[i] - values[i - 1])
    else:
        left = 0.0
    j = pk
    last = len(values) - 1
    while j < last and values[j + 1] > half:
        j += 1
    if j < last:
        right = j + (values[j] - half) / (values[j] - values[j + 1])
    else:
        right = float(last)
    return float(right - left)


def _dense_rho(state, backend: str) -> np.ndarray:
    """Hermitized, trace-normalized dense matrix of an evolved state."""
    if backend == "mpo":
        state = mpo_to_dense(state)
    rho = density_matrix(state)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / float(np.trace(rho).real)


def _evaluate_correlations(state, config: ExperimentConfig) -> CorrelationRecord:
    n = config.params.n_sites
    wanted = set(config.observables)
    neg = lqu_v = lqu_site = coh_v = coh_site = ratio = None
    if "negativity" in wanted:
        neg = negativity(_dense_rho(state, config.backend), Bipartition.half(n))
    if "lqu" in wanted:
        lqu_v, lqu_site = max_two_site_lqu(state)
    if "coherence" in wanted:
        coh_v, coh_site = max_two_site_coherence(state)
    if "ppt_ratio" in wanted:
        if config.backend == "mpo":
            ratio = moment_ratio(mpo_ppt_moments(state))
        else:
            moments = ppt_moments_dense(
                _dense_rho(state, config.backend), Bipartition.half(n)
            )
            ratio = moment_ratio(moments)
    return CorrelationRecord(
        negativity=neg,
        lqu_max=lqu_v,
        lqu_argmax_site=lqu_site,
        coherence_max=coh_v,
        coherence_argmax_site=coh_site,
        ppt_ratio=ratio,
    )


def _classical_chi(config: ExperimentConfig) -> int:
    # chi = N + 1 renders the ansatz exact; cap at the configured maximum
    return max(2, min(config.params.n_sites + 1, config.policy.chi_max))


def _run_classical(record: RunRecord, config: ExperimentConfig) -> None:
    p = config.params
    matrices = build_mpa(p.alpha, p.beta, p.tau, chi=_classical_chi(config))
    record.profile = mpa_profile(matrices, p.n_sites)
    record.mean_density = float(record.profile.mean())
    record.phase = classify_phase(p.alpha, p.beta, p.tau)
    record.convergence = ConvergenceReport(
        converged=True,
        sweeps_run=0,
        final_residual=0.0,
        residual_history=np.zeros(0),
        tol=config.tol,
    )


def _run_exact(record: RunRecord, config: ExperimentConfig) -> None:
    state = init_state(config.params.n_sites, "empty")
    state, report = evolve_to_ness(
        state, config.params, tol=config.tol, max_sweeps=config.max_sweeps
    )
    record.profile = density_profile(state)
    record.mean_density = float(record.profile.mean())
    record.convergence = report
    record.correlations = _evaluate_correlations(state, config)


def _run_mpo(record: RunRecord, config: ExperimentConfig) -> None:
    diagnostics: list[dict] = []
    state = mpo_from_product(config.params.n_sites, "empty", config.policy)
    state, report = evolve_mpo_to_ness(
        state,
        config.params,
        tol=config.tol,
        max_sweeps=config.max_sweeps,
        diagnostics_sink=diagnostics.append,
    )
    record.profile = mpo_density_profile(state)
    record.mean_density = float(record.profile.mean())
    record.convergence = report
    record.diagnostics = diagnostics
    record.max_bond_dim = max(d["max_bond_dim"] for d in diagnostics)
    record.correlations = _evaluate_correlations(state, config)


def run_single(config: ExperimentConfig) -> RunRecord:
    """Evolve one parameter point to its steady state and measure it.

    Failures (resource guards, degenerate parameters) are captured in the
    record's error field instead of raising, so scans can continue.
    """
    record = RunRecord(run_id=compute_run_id(config), config=config)
    started = time.perf_counter()
    try:
        if config.backend == "classical-mpa":
            _run_classical(record, config)
        elif config.backend == "exact":
            _run_exact(record, config)
        else:
            _run_mpo(record, config)
    except Exception as exc:  # noqa: BLE001 - structured per-point reporting
        record.error = f"{type(exc).__name__}: {exc}"
    record.wall_time = time.perf_counter() - started
    return record


def run_timeseries(
    config: ExperimentConfig, n_steps: int | None = None
) -> TimeseriesResult:
    """Record correlation observables after every sweep.

    Negativity is always recorded; LQU and coherence maxima follow the
    requested observables.  Needs a dense representation, so the exact
    backend or a short MPO chain.
    """
    steps = n_steps if n_steps is not None else config.n_steps
    if steps is None or steps < 1:
        raise ValueError(f"n_steps must be a positive integer, got {steps!r}")
    n = config.params.n_sites
    if config.backend == "classical-mpa":
        raise ValueError("time series need a quantum backend")
    if config.backend == "mpo" and n > NEGATIVITY_DENSE_LIMIT:
        raise ValueError(
            f"time series on the MPO backend are limited to "
            f"{NEGATIVITY_DENSE_LIMIT} sites, got {n}"
        )
    config = replace(config, mode="timeseries", n_steps=steps)
    want_lqu = "lqu" in config.observables
    want_coh = "coherence" in config.observables
    half = Bipartition.half(n)
    neg = np.empty(steps)
    lqu_vals = np.empty(steps) if want_lqu else None
    coh_vals = np.empty(steps) if want_coh else None

    from .tensor import sweep_mpo  # local alias keeps module import light

    if config.backend == "exact":
        state = init_state(n, "empty")
        advance = lambda s: sweep(s, config.params)  # noqa: E731
    else:
        state = mpo_from_product(n, "empty", config.policy)
        advance = lambda s: sweep_mpo(s, config.params)  # noqa: E731
    for k in range(steps):
        state = advance(state)
        neg[k] = negativity(_dense_rho(state, config.backend), half)
        if want_lqu:
            lqu_vals[k] = max_two_site_lqu(state)[0]
        if want_coh:
            coh_vals[k] = max_two_site_coherence(state)[0]
    return TimeseriesResult(
        config=config,
        run_id=compute_run_id(config),
        sweeps=np.arange(1, steps + 1),
        negativity=neg,
        lqu_max=lqu_vals,
        coherence_max=coh_vals,
    )


def _point_config(config: ExperimentConfig, **param_updates) -> ExperimentConfig:
    params = replace(config.params, **param_updates)
    return replace(
        config, params=params, mode="single", grid=None, sizes=None, workers=1
    )


def _run_points(configs: list[ExperimentConfig], workers: int) -> list[RunRecord]:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_single, configs))
    return [run_single(c) for c in configs]


def run_scan(config: ExperimentConfig) -> ScanResult:
    """Evaluate every (alpha, beta) grid point; failures do not stop the scan."""
    if config.grid is None:
        raise ValueError("scan mode requires a grid")
    config = replace(config, mode="scan")
    (a0, a1, da), (b0, b1, db) = config.grid
    alphas = grid_axis_values(a0, a1, da)
    betas = grid_axis_values(b0, b1, db)
    points = [
        _point_config(config, alpha=float(a), beta=float(b))
        for a in alphas
        for b in betas
    ]
    records = _run_points(points, config.workers)
    records.sort(
        key=lambda r: (r.config.params.alpha, r.config.params.beta, r.config.params.n_sites)
    )
    return ScanResult(config=config, run_id=compute_run_id(config), records=records)


def _fss_cut(config: ExperimentConfig):
    if config.grid is None:
        raise ValueError("size sweeps require a grid defining the cut")
    (a0, a1, da), (b0, b1, db) = config.grid
    alphas = grid_axis_values(a0, a1, da)
    betas = grid_axis_values(b0, b1, db)
    if len(alphas) > 1 and len(betas) == 1:
        return "alpha", alphas, float(betas[0])
    if len(betas) > 1 and len(alphas) == 1:
        return "beta", betas, float(alphas[0])
    raise ValueError(
        "size sweeps need a one-parameter cut: exactly one grid axis may "
        f"have more than one value, got {len(alphas)} alphas x {len(betas)} betas"
    )


def _fss_point_value(record: RunRecord, observable: str) -> float:
    if record.error is not None:
        return math.nan
    if record.convergence is not None and not record.convergence.converged:
        return math.nan
    if observable in ("mean_density", "mean_density_derivative"):
        return record.mean_density
    corr = record.correlations
    if observable == "lqu":
        return corr.lqu_max if corr and corr.lqu_max is not None else math.nan
    return corr.coherence_max if corr and corr.coherence_max is not None else math.nan


def run_fss(config: ExperimentConfig) -> FssResult:
    """Observable curves along a cut for several sizes, plus their crossings.

    Non-converged or failed points become NaN and are excluded from
    crossing detection.  The derivative variant differentiates each size's
    curve by centered finite differences before comparing.
    """
    if config.sizes is None or len(config.sizes) < 2:
        raise ValueError("size sweeps need at least two sizes")
    config = replace(config, mode="fss")
    sizes = tuple(sorted(set(int(s) for s in config.sizes)))
    cut_axis, cut_values, fixed = _fss_cut(config)
    observable = config.fss_observable
    if observable in ("lqu", "coherence") and observable not in config.observables:
        config = replace(config, observables=config.observables + (observable,))

    records: list[RunRecord] = []
    curves: dict[int, np.ndarray] = {}
    for n in sizes:
        row = []
        for x in cut_values:
            if cut_axis == "alpha":
                pc = _point_config(config, n_sites=n, alpha=float(x), beta=fixed)
            else:
                pc = _point_config(config, n_sites=n, alpha=fixed, beta=float(x))
            rec = run_single(pc)
            records.append(rec)
            row.append(_fss_point_value(rec, observable))
        curve = np.asarray(row, dtype=float)
        if observable == "mean_density_derivative":
            curve = np.gradient(curve, cut_values)
        curves[n] = curve

    crossings: dict[tuple[int, int], tuple[float, ...]] = {}
    for i, na in enumerate(sizes):
        for nb in sizes[i + 1 :]:
            crossings[(na, nb)] = crossing_locations(
                cut_values, curves[na], curves[nb]
            )
    return FssResult(
        config=config,
        run_id=compute_run_id(config),
        cut_axis=cut_axis,
        cut_values=cut_values,
        sizes=sizes,
        curves=curves,
        crossings=crossings,
        records=records,
    )


# ---------------------------------------------------------------- output


def _fmt(value) -> str:
    """CSV cell formatting: fixed 17-significant-digit floats, empty None."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    return "nan" if math.isnan(value) else format(value, ".17g")


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _versions() -> dict:
    import platform

    import matplotlib
    import scipy

    return {
        "artifact": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
        "python": platform.python_version(),
    }


def _config_dict(config: ExperimentConfig) -> dict:
    p = config.params
    return {
        "mode": config.mode,
        "backend": config.backend,
        "params": {
            "n_sites": p.n_sites,
            "alpha": p.alpha,
            "beta": p.beta,
            "tau": p.tau,
            "omega": p.omega,
        },
        "policy": {
            "chi_max": config.policy.chi_max,
            "svd_cutoff": config.policy.svd_cutoff,
            "renormalize_trace": config.policy.renormalize_trace,
        },
        "tol": config.tol,
        "max_sweeps": config.max_sweeps,
        "grid": config.grid,
        "sizes": config.sizes,
        "observables": list(config.observables),
        "n_steps": config.n_steps,
        "fss_observable": config.fss_observable,
    }


def _record_manifest(record: RunRecord) -> dict:
    conv = record.convergence
    corr = record.correlations
    return {
        "run_id": record.run_id,
        "config": _config_dict(record.config),
        "versions": _versions(),
        "wall_time_s": record.wall_time,
        "error": record.error,
        "phase": record.phase,
        "profile": None if record.profile is None else [float(v) for v in record.profile],
        "mean_density": record.mean_density,
        "max_bond_dim": record.max_bond_dim,
        "convergence": None
        if conv is None
        else {
            "converged": bool(conv.converged),
            "sweeps_run": int(conv.sweeps_run),
            "final_residual": float(conv.final_residual),
            "tol": float(conv.tol),
        },
        "correlations": None
        if corr is None
        else {
            "negativity": corr.negativity,
            "lqu_max": corr.lqu_max,
            "lqu_argmax_site": corr.lqu_argmax_site,
            "coherence_max": corr.coherence_max,
            "coherence_argmax_site": corr.coherence_argmax_site,
            "ppt_ratio": corr.ppt_ratio,
        },
    }


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(record: RunRecord, out_dir: str) -> str:
    path = os.path.join(out_dir, f"manifest_{record.run_id}.json")
    _write_json(path, _record_manifest(record))
    return path


def _write_diagnostics(record: RunRecord, out_dir: str) -> str | None:
    if not record.diagnostics:
        return None
    path = os.path.join(out_dir, f"diagnostics_{record.run_id}.jsonl")
    with open(path, "w") as fh:
        for entry in record.diagnostics:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return path


def _scan_rows(records: list[RunRecord]) -> list[list]:
    rows = []
    for r in records:
        p = r.config.params
        conv = r.convergence
        corr = r.correlations or CorrelationRecord()
        rows.append(
            [
                r.run_id,
                p.alpha,
                p.beta,
                p.tau,
                p.omega,
                p.n_sites,
                r.config.backend,
                r.mean_density,
                corr.coherence_max,
                corr.lqu_max,
                corr.ppt_ratio,
                None if conv is None else conv.converged,
                None if conv is None else conv.sweeps_run,
                r.max_bond_dim,
            ]
        )
    return rows


SCAN_HEADER = [
    "run_id",
    "alpha",
    "beta",
    "tau",
    "omega",
    "n_sites",
    "backend",
    "mean_density",
    "coherence_max",
    "lqu_max",
    "ppt_ratio",
    "converged",
    "sweeps",
    "max_bond_dim",
]


def _plot_lines(path: str, xs, series: dict, xlabel: str, ylabel: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for label, ys in series.items():
        ax.plot(xs, ys, marker="o", markersize=2.5, linewidth=1.0, label=str(label))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(series) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _plot_heatmap(path: str, alphas, betas, grid, label: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4.6, 3.8))
    extent = (alphas[0], alphas[-1], betas[0], betas[-1])
    im = ax.imshow(grid, origin="lower", extent=extent, aspect="auto")
    fig.colorbar(im, ax=ax, label=label)
    ax.set_xlabel("injection rate alpha")
    ax.set_ylabel("ejection rate beta")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _emit_single(record: RunRecord, out_dir: str) -> list[str]:
    paths = [_write_manifest(record, out_dir)]
    diag = _write_diagnostics(record, out_dir)
    if diag:
        paths.append(diag)
    if record.profile is not None:
        csv_path = os.path.join(out_dir, f"profile_{record.run_id}.csv")
        rows = [[record.run_id, s, v] for s, v in enumerate(record.profile)]
        _write_csv(csv_path, ["run_id", "site", "occupation"], rows)
        paths.append(csv_path)
        svg = os.path.join(
            out_dir, f"{record.config.mode}_profile_{record.run_id}.svg"
        )
        _plot_lines(
            svg,
            np.arange(len(record.profile)),
            {"occupation": record.profile},
            "site",
            "occupation",
        )
        paths.append(svg)
    return paths


def _emit_scan(result: ScanResult, out_dir: str) -> list[str]:
    paths = []
    for record in result.records:
        paths.append(_write_manifest(record, out_dir))
        diag = _write_diagnostics(record, out_dir)
        if diag:
            paths.append(diag)
    csv_path = os.path.join(out_dir, f"scan_{result.run_id}.csv")
    _write_csv(csv_path, SCAN_HEADER, _scan_rows(result.records))
    paths.append(csv_path)

    alphas = sorted({r.config.params.alpha for r in result.records})
    betas = sorted({r.config.params.beta for r in result.records})
    index = {
        (r.config.params.alpha, r.config.params.beta): r for r in result.records
    }
    observable_getters = {
        "mean_density": lambda r: r.mean_density,
        "coherence": lambda r: r.correlations and r.correlations.coherence_max,
        "lqu": lambda r: r.correlations and r.correlations.lqu_max,
        "ppt_ratio": lambda r: r.correlations and r.correlations.ppt_ratio,
    }
    wanted = {"mean_density"}
    wanted.update(o for o in ("coherence", "lqu", "ppt_ratio") if o in result.config.observables)
    if len(alphas) > 1 and len(betas) > 1:
        for name in sorted(wanted):
            getter = observable_getters[name]
            grid = np.full((len(betas), len(alphas)), np.nan)
            for (a, b), record in index.items():
                value = getter(record)
                if value is not None:
                    grid[betas.index(b), alphas.index(a)] = value
            svg = os.path.join(out_dir, f"scan_{name}_{result.run_id}.svg")
            _plot_heatmap(svg, alphas, betas, grid, name)
            paths.append(svg)
    manifest = os.path.join(out_dir, f"manifest_{result.run_id}.json")
    _write_json(
        manifest,
        {
            "run_id": result.run_id,
            "config": _config_dict(result.config),
            "versions": _versions(),
            "points": [r.run_id for r in result.records],
        },
    )
    paths.append(manifest)
    return paths


def _emit_timeseries(result: TimeseriesResult, out_dir: str) -> list[str]:
    paths = []
    csv_path = os.path.join(out_dir, f"timeseries_{result.run_id}.csv")
    rows = []
    for k, sweep_index in enumerate(result.sweeps):
        rows.append(
            [
                result.run_id,
                int(sweep_index),
                result.negativity[k],
                None if result.lqu_max is None else result.lqu_max[k],
                None if result.coherence_max is None else result.coherence_max[k],
            ]
        )
    _write_csv(
        csv_path,
        ["run_id", "sweep", "negativity", "lqu_max", "coherence_max"],
        rows,
    )
    paths.append(csv_path)
    series = {"negativity": result.negativity}
    svg = os.path.join(out_dir, f"timeseries_negativity_{result.run_id}.svg")
    _plot_lines(svg, result.sweeps, series, "sweep", "negativity")
    paths.append(svg)
    for name, values in (
        ("lqu", result.lqu_max),
        ("coherence", result.coherence_max),
    ):
        if values is not None:
            svg = os.path.join(out_dir, f"timeseries_{name}_{result.run_id}.svg")
            _plot_lines(svg, result.sweeps, {name: values}, "sweep", name)
            paths.append(svg)
    manifest = os.path.join(out_dir, f"manifest_{result.run_id}.json")
    _write_json(
        manifest,
        {
            "run_id": result.run_id,
            "config": _config_dict(result.config),
            "versions": _versions(),
            "final_negativity": float(result.negativity[-1]),
            "peak_negativity": float(result.negativity.max()),
            "peak_sweep": int(result.sweeps[int(result.negativity.argmax())]),
            "peak_width": half_peak_width(result.negativity),
        },
    )
    paths.append(manifest)
    return paths


def _emit_fss(result: FssResult, out_dir: str) -> list[str]:
    paths = []
    for record in result.records:
        paths.append(_write_manifest(record, out_dir))
    rows = []
    by_key = {}
    for record in result.records:
        p = record.config.params
        by_key[(p.n_sites, p.alpha, p.beta)] = record
    for n in result.sizes:
        for k, x in enumerate(result.cut_values):
            if result.cut_axis == "alpha":
                key = (n, float(x), result.records[0].config.params.beta)
            else:
                key = (n, result.records[0].config.params.alpha, float(x))
            record = by_key.get(key)
            rows.append(
                [
                    record.run_id if record else "",
                    n,
                    key[1],
                    key[2],
                    result.config.fss_observable,
                    result.curves[n][k],
                ]
            )
    rows.sort(key=lambda r: (r[1], r[2], r[3]))
    csv_path = os.path.join(out_dir, f"fss_{result.run_id}.csv")
    _write_csv(
        csv_path,
        ["run_id", "n_sites", "alpha", "beta", "observable", "value"],
        rows,
    )
    paths.append(csv_path)
    svg = os.path.join(
        out_dir, f"fss_{result.config.fss_observable}_{result.run_id}.svg"
    )
    _plot_lines(
        svg,
        result.cut_values,
        {f"N={n}": result.curves[n] for n in result.sizes},
        result.cut_axis,
        result.config.fss_observable,
    )
    paths.append(svg)
    manifest = os.path.join(out_dir, f"manifest_{result.run_id}.json")
    _write_json(
        manifest,
        {
            "run_id": result.run_id,
            "config": _config_dict(result.config),
            "versions": _versions(),
            "cut_axis": result.cut_axis,
            "cut_values": [float(v) for v in result.cut_values],
            "sizes": list(result.sizes),
            "crossings": {
                f"{a}x{b}": list(v) for (a, b), v in result.crossings.items()
            },
            "points": [r.run_id for r in result.records],
        },
    )
    paths.append(manifest)
    return paths


def emit_outputs(result, out_dir: str) -> list[str]:
    """Persist a run, scan, time series, or size sweep; returns written paths.

    Per run: a JSON manifest (full config and versions) and, where present,
    a diagnostics stream.  Per mode: the CSV table and SVG plots.
    """
    os.makedirs(out_dir, exist_ok=True)
    if isinstance(result, RunRecord):
        return _emit_single(result, out_dir)
    if isinstance(result, ScanResult):
        return _emit_scan(result, out_dir)
    if isinstance(result, TimeseriesResult):
        return _emit_timeseries(result, out_dir)
    if isinstance(result, FssResult):
        return _emit_fss(result, out_dir)
    raise TypeError(f"cannot emit outputs for {type(result).__name__}")
