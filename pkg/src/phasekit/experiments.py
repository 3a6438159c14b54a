"""Experiment drivers: phase transition, convergence race, initialization
accuracy, noise sweeps, single recoveries, and the 2-D image demo.

Every driver takes an ExperimentConfig and returns a ResultTable; execute()
adds CSV emission.  Trial instances (signal, ensemble, noise, solver index
stream, power-iteration start) all derive from (cfg.seed, purpose labels,
trial index), so

* reruns are byte-identical (timestamp metadata aside),
* trial k is the same whether run alone, in sequence, or in parallel, and
* algorithms compared within an experiment face identical instances.

Parallelism over trials is opt-in via cfg.jobs; results are aggregated in
sweep order either way.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ._version import __version__
from .analysis import loss_surface_rows
from .config import config_echo
from .core import COMPLEX, REAL, best_phase, random_signal, relative_error
from .pgm import read_pgm, write_pgm
from .results import ResultTable, write_csv
from .sensing import NoiseSpec, make_cdp, make_gaussian, measure
from .solvers import SolverConfig, run
from .spectral import InitParams, spectral_initialize
from .streams import derive_seed, substream

TRACE_COLUMNS = ("trial_id", "algorithm", "n", "m", "pass_count", "relative_error", "loss")

DEFAULT_OUTPUTS = {
    "phase_transition": "phase_transition.csv",
    "convergence_race": "convergence_race.csv",
    "init_accuracy": "init_accuracy.csv",
    "noise_sweep": "noise_sweep.csv",
    "recover": "recover_trace.csv",
    "image_demo": "image_demo_out",
    "loss_surface": "loss_surface.csv",
}


def _model_field(model):
    return REAL if model == "real" else COMPLEX


def _sweep_values(cfg):
    """The swept size parameter: m/n ratios, or mask counts for CDP."""
    return cfg.masks if cfg.model == "cdp" else cfg.m_over_n


def _m_of(cfg, value):
    if cfg.model == "cdp":
        return cfg.n * int(value)
    return int(round(value * cfg.n))


def make_instance(model, n, size_value, seed, labels):
    """Fresh (x, ensemble) for one trial, keyed by (seed, *labels)."""
    field = _model_field(model)
    x = random_signal(n, field, substream(seed, "signal", *labels))
    if model == "cdp":
        A = make_cdp(n, int(size_value), derive_seed(seed, "ensemble", *labels))
    else:
        m = int(round(size_value * n))
        A = make_gaussian(n, m, field, derive_seed(seed, "ensemble", *labels))
    return x, A


def _noise_spec(cfg, x, labels, level=None):
    """NoiseSpec for this trial; `level` overrides for sweep points."""
    kind = cfg.noise_kind
    if kind == "none" or (level is not None and level == 0):
        return None
    seed = derive_seed(cfg.seed, "noise", *labels)
    if kind == "poisson":
        alpha = level if level is not None else cfg.alphas[0]
        return NoiseSpec("poisson", alpha=float(alpha), seed=seed)
    rel = level if level is not None else cfg.noise_level
    return NoiseSpec("bounded", level=float(rel) * float(np.linalg.norm(x)), seed=seed)


def _solver_cfg(cfg, algorithm, labels, tol=None, budget=None):
    return SolverConfig(
        algorithm=algorithm,
        mu=cfg.mu,
        rho0=cfg.rho0,
        minibatch_k=cfg.minibatch_k,
        max_passes=cfg.iteration_budget if budget is None else budget,
        tol=cfg.success_tol if tol is None else tol,
        seed=derive_seed(cfg.seed, "solver", algorithm, *labels),
        record_every=cfg.record_every,
    )


def _init_for(cfg, y, A, labels):
    return spectral_initialize(y, A, InitParams(), seed=derive_seed(cfg.seed, "init", *labels))


def _map_trials(worker, args, jobs):
    if jobs <= 1:
        return [worker(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(worker, args, chunksize=1))


def _table(cfg, columns, rows):
    meta = dict(config_echo(cfg))
    meta["phasekit_version"] = __version__
    return ResultTable(columns=tuple(columns), rows=rows, metadata=meta)


# --- phase transition ---------------------------------------------------


def _pt_trial(args):
    cfg, vi, trial = args
    value = _sweep_values(cfg)[vi]
    labels = ("pt", vi, trial)
    x, A = make_instance(cfg.model, cfg.n, value, cfg.seed, labels)
    y = measure(A, x, _noise_spec(cfg, x, labels))
    init = _init_for(cfg, y, A, labels)
    out = {}
    for alg in cfg.algorithms:
        trace = run(y, A, init.z0, _solver_cfg(cfg, alg, labels), x_opt=x)
        out[alg] = trace.final_error()
    return out


def run_phase_transition(cfg):
    """Success fraction per (algorithm, sample-size point).

    A trial succeeds when the final relative error is at most
    cfg.success_tol within cfg.iteration_budget passes.  Fresh signal,
    ensemble, and initialization per trial; all algorithms share them.
    """
    values = _sweep_values(cfg)
    args = [(cfg, vi, t) for vi in range(len(values)) for t in range(cfg.trials)]
    finals = _map_trials(_pt_trial, args, cfg.jobs)
    rows = []
    for alg in cfg.algorithms:
        for vi, value in enumerate(values):
            errs = [
                finals[vi * cfg.trials + t][alg] for t in range(cfg.trials)
            ]
            succ = sum(1 for e in errs if e <= cfg.success_tol)
            rows.append(
                {
                    "algorithm": alg,
                    "n": cfg.n,
                    "m": _m_of(cfg, value),
                    "successes": succ,
                    "trials": cfg.trials,
                    "success_rate": succ / cfg.trials,
                }
            )
    return _table(cfg, ("algorithm", "n", "m", "successes", "trials", "success_rate"), rows)


# --- convergence race ---------------------------------------------------


def _race_trial(args):
    cfg, trial = args
    value = _sweep_values(cfg)[0]
    labels = ("race", trial)
    x, A = make_instance(cfg.model, cfg.n, value, cfg.seed, labels)
    y = measure(A, x, _noise_spec(cfg, x, labels))
    init = _init_for(cfg, y, A, labels)  # shared start across algorithms
    out = {}
    for alg in cfg.algorithms:
        t0 = time.perf_counter()
        trace = run(y, A, init.z0, _solver_cfg(cfg, alg, labels), x_opt=x)
        out[alg] = (trace.passes_used, time.perf_counter() - t0, trace.stop_reason)
    return out


def run_convergence_race(cfg):
    """Mean passes (and wall seconds, informational) to cfg.success_tol.

    One instance and one shared initialization per trial; every algorithm
    starts from the same point.  Budget-limited runs contribute their full
    pass budget to the mean.
    """
    args = [(cfg, t) for t in range(cfg.trials)]
    results = _map_trials(_race_trial, args, cfg.jobs)
    m = _m_of(cfg, _sweep_values(cfg)[0])
    rows = []
    for alg in cfg.algorithms:
        passes = [r[alg][0] for r in results]
        secs = [r[alg][1] for r in results]
        rows.append(
            {
                "algorithm": alg,
                "n": cfg.n,
                "m": m,
                "mean_passes": float(np.mean(passes)),
                "mean_seconds": float(np.mean(secs)),
            }
        )
    return _table(cfg, ("algorithm", "n", "m", "mean_passes", "mean_seconds"), rows)


# --- initialization accuracy --------------------------------------------


def _ia_trial(args):
    cfg, vi, trial = args
    value = _sweep_values(cfg)[vi]
    labels = ("ia", vi, trial)
    x, A = make_instance(cfg.model, cfg.n, value, cfg.seed, labels)
    y = measure(A, x, _noise_spec(cfg, x, labels))
    init = _init_for(cfg, y, A, labels)
    return relative_error(init.z0, x)


def run_init_accuracy(cfg):
    """Median and quartiles of the spectral-init error per sample size."""
    values = _sweep_values(cfg)
    args = [(cfg, vi, t) for vi in range(len(values)) for t in range(cfg.trials)]
    errs = _map_trials(_ia_trial, args, cfg.jobs)
    rows = []
    for vi, value in enumerate(values):
        block = np.array(errs[vi * cfg.trials : (vi + 1) * cfg.trials])
        rows.append(
            {
                "n": cfg.n,
                "m": _m_of(cfg, value),
                "median_err": float(np.median(block)),
                "q25": float(np.percentile(block, 25)),
                "q75": float(np.percentile(block, 75)),
            }
        )
    return _table(cfg, ("n", "m", "median_err", "q25", "q75"), rows)


# --- noise sweep ----------------------------------------------------------


def _ns_levels(cfg):
    return (0.0,) if cfg.noise_kind == "none" else cfg.alphas


def _ns_trial(args):
    cfg, li, trial = args
    level = _ns_levels(cfg)[li]
    value = _sweep_values(cfg)[0]
    labels = ("ns", li, trial)
    x, A = make_instance(cfg.model, cfg.n, value, cfg.seed, labels)
    y = measure(A, x, _noise_spec(cfg, x, labels, level=level))
    init = _init_for(cfg, y, A, labels)
    out = {}
    for alg in cfg.algorithms:
        trace = run(y, A, init.z0, _solver_cfg(cfg, alg, labels), x_opt=x)
        out[alg] = trace.final_error()
    return out


def run_noise_sweep(cfg):
    """Median final error per noise level.

    Poisson: the alpha column is the Poisson scale.  Bounded: cfg.alphas is
    reused as the list of relative levels ||w||/(sqrt(m) ||x||), reported in
    the same column.  noise_kind 'none' degenerates to one clean level 0.
    """
    levels = _ns_levels(cfg)
    args = [(cfg, li, t) for li in range(len(levels)) for t in range(cfg.trials)]
    finals = _map_trials(_ns_trial, args, cfg.jobs)
    rows = []
    for alg in cfg.algorithms:
        for li, level in enumerate(levels):
            block = [finals[li * cfg.trials + t][alg] for t in range(cfg.trials)]
            rows.append(
                {
                    "algorithm": alg,
                    "alpha": float(level),
                    "median_final_err": float(np.median(block)),
                }
            )
    return _table(cfg, ("algorithm", "alpha", "median_final_err"), rows)


# --- single recovery ------------------------------------------------------


def trace_rows(trace, trial_id, algorithm, n, m):
    """RunTrace history as CSV rows (the serialized trace schema)."""
    return [
        {
            "trial_id": trial_id,
            "algorithm": algorithm,
            "n": n,
            "m": m,
            "pass_count": p,
            "relative_error": err,
            "loss": loss,
        }
        for p, err, loss in trace.history
    ]


def run_recover(cfg):
    """Full per-pass traces for each (trial, algorithm)."""
    rows = []
    value = _sweep_values(cfg)[0]
    for trial in range(cfg.trials):
        labels = ("recover", trial)
        x, A = make_instance(cfg.model, cfg.n, value, cfg.seed, labels)
        y = measure(A, x, _noise_spec(cfg, x, labels))
        init = _init_for(cfg, y, A, labels)
        for alg in cfg.algorithms:
            trace = run(y, A, init.z0, _solver_cfg(cfg, alg, labels), x_opt=x)
            rows.extend(trace_rows(trace, trial, alg, cfg.n, A.m))
    return _table(cfg, TRACE_COLUMNS, rows)


# --- image demo -----------------------------------------------------------


def synthetic_image(size=32, maxval=255):
    """Small deterministic test card: gradient, bright square, dark disk."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    img = 0.2 * maxval + 0.4 * maxval * (xx + yy) / (2 * size - 2)
    img[size // 4 : size // 2, size // 4 : size // 2] = 0.9 * maxval
    cx, cy, r = 0.7 * size, 0.65 * size, size / 6.0
    img[(xx - cx) ** 2 + (yy - cy) ** 2 < r * r] = 0.1 * maxval
    return np.rint(img).astype(np.int64)


def run_image_demo(cfg):
    """Recover a flattened grayscale image through a CDP ensemble.

    Writes recovered.pgm, trace.csv, and summary.csv under
    cfg.output_path (a directory).  An all-zero image short-circuits to an
    all-zero recovery with zero passes; there is nothing to initialize.
    """
    out_dir = cfg.output_path or DEFAULT_OUTPUTS["image_demo"]
    os.makedirs(out_dir, exist_ok=True)
    if cfg.image_path:
        img, maxval = read_pgm(cfg.image_path)
    else:
        img, maxval = synthetic_image(), 255
    h, w = img.shape
    n = h * w
    x = img.ravel().astype(np.float64) / maxval
    L = int(cfg.masks[0])
    alg = cfg.algorithms[0]

    if not np.any(x):
        write_pgm(os.path.join(out_dir, "recovered.pgm"), np.zeros((h, w)), maxval)
        rows = [
            {
                "trial_id": 0,
                "algorithm": alg,
                "n": n,
                "m": n * L,
                "pass_count": 0,
                "relative_error": 0.0,
                "loss": 0.0,
            }
        ]
        write_csv(_table(cfg, TRACE_COLUMNS, rows), os.path.join(out_dir, "trace.csv"))
        summary = _table(
            cfg,
            ("algorithm", "n", "masks", "passes_to_tol", "final_error", "stop_reason"),
            [
                {
                    "algorithm": alg,
                    "n": n,
                    "masks": L,
                    "passes_to_tol": 0,
                    "final_error": 0.0,
                    "stop_reason": "tol",
                }
            ],
        )
        write_csv(summary, os.path.join(out_dir, "summary.csv"))
        return summary

    labels = ("image",)
    A = make_cdp(n, L, derive_seed(cfg.seed, "ensemble", *labels))
    y = measure(A, x, _noise_spec(cfg, x, labels))
    init = _init_for(cfg, y, A, labels)
    xc = x.astype(np.complex128)
    trace = run(y, A, init.z0, _solver_cfg(cfg, alg, labels), x_opt=xc)

    aligned = (best_phase(trace.iterate, xc) * trace.iterate).real
    pixels = np.clip(np.rint(aligned * maxval), 0, maxval).reshape(h, w)
    write_pgm(os.path.join(out_dir, "recovered.pgm"), pixels, maxval)
    write_csv(
        _table(cfg, TRACE_COLUMNS, trace_rows(trace, 0, alg, n, A.m)),
        os.path.join(out_dir, "trace.csv"),
    )
    passes = trace.passes_to(cfg.success_tol)
    summary = _table(
        cfg,
        ("algorithm", "n", "masks", "passes_to_tol", "final_error", "stop_reason"),
        [
            {
                "algorithm": alg,
                "n": n,
                "masks": L,
                "passes_to_tol": -1 if passes is None else passes,
                "final_error": trace.final_error(),
                "stop_reason": trace.stop_reason,
            }
        ],
    )
    write_csv(summary, os.path.join(out_dir, "summary.csv"))
    return summary


# --- loss surface -----------------------------------------------------------


def run_loss_surface(cfg):
    """Expected-loss grid over (rho, ||z||) at ||x|| = 1."""
    rhos = np.linspace(-1.0, 1.0, cfg.rho_grid)
    norms = np.linspace(0.0, 2.0, cfg.normz_grid)
    rows = loss_surface_rows(rhos, norms, norm_x=1.0)
    return _table(cfg, ("rho", "norm_z", "expected_rwf_loss", "expected_wf_loss"), rows)


RUNNERS = {
    "phase_transition": run_phase_transition,
    "convergence_race": run_convergence_race,
    "init_accuracy": run_init_accuracy,
    "noise_sweep": run_noise_sweep,
    "recover": run_recover,
    "image_demo": run_image_demo,
    "loss_surface": run_loss_surface,
}


def execute(cfg):
    """Run cfg's experiment and write its outputs.

    Returns (table, output_path).  The image demo manages its own output
    directory; every other experiment writes a single CSV file.
    """
    runner = RUNNERS[cfg.experiment]
    if cfg.experiment == "image_demo":
        table = runner(cfg)
        return table, cfg.output_path or DEFAULT_OUTPUTS["image_demo"]
    table = runner(cfg)
    path = cfg.output_path or DEFAULT_OUTPUTS[cfg.experiment]
    write_csv(table, path)
    return table, path
