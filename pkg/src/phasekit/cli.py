"""Command-line front end.

    phasekit <command> [--config FILE] [flags...]

Commands: phase-transition, converge, init-accuracy, noise-sweep, recover,
image-demo, loss-surface.  Flags override config-file values, which
override the built-in defaults.

Exit codes: 0 success, 1 configuration error (unknown flag/key, bad value,
unreadable config), 2 runtime failure during the experiment.
"""

import argparse
import sys

from ._version import __version__
from .config import ConfigError, coerce_value, load_config
from .experiments import execute

COMMANDS = {
    "phase-transition": "phase_transition",
    "converge": "convergence_race",
    "init-accuracy": "init_accuracy",
    "noise-sweep": "noise_sweep",
    "recover": "recover",
    "image-demo": "image_demo",
    "loss-surface": "loss_surface",
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; here that is a config
    # error, reported as exit 1 by main()
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _list_flag(key):
    def convert(raw):
        return coerce_value(key, raw)

    convert.__name__ = key
    return convert


def build_parser():
    parser = _Parser(
        prog="phasekit",
        description="Matrix-free phase retrieval experiments "
        "(reshaped/incremental Wirtinger flow, Kaczmarz variants).",
    )
    parser.add_argument("--version", action="version", version="phasekit " + __version__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="flat key = value config file")
    common.add_argument("--n", type=int, help="signal dimension")
    common.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", dest="output_path", help="output CSV path (or directory)")
    common.add_argument("--jobs", type=int, help="trial-level worker processes (default 1)")
    common.add_argument("--model", choices=("real", "complex", "cdp"), help="sensing model")
    common.add_argument(
        "--m-over-n", dest="m_over_n", type=_list_flag("m_over_n"),
        help="comma-separated m/n ratios",
    )
    common.add_argument(
        "--masks", type=_list_flag("masks"), help="comma-separated CDP mask counts"
    )
    common.add_argument(
        "--algo", dest="algorithms", type=_list_flag("algorithms"),
        help="comma-separated algorithm list",
    )
    common.add_argument("--tol", dest="success_tol", type=float, help="success tolerance")
    common.add_argument(
        "--budget", dest="iteration_budget", type=int, help="pass/iteration budget"
    )
    common.add_argument("--k", dest="minibatch_k", type=int, help="minibatch/block size")
    common.add_argument("--mu", type=float, help="batch step size override")
    common.add_argument("--rho0", type=float, help="incremental step numerator")
    common.add_argument(
        "--record-every", dest="record_every", type=int, help="trace recording stride"
    )
    common.add_argument(
        "--noise", dest="noise_kind", choices=("none", "bounded", "poisson"),
        help="noise model at measurement time",
    )
    common.add_argument(
        "--noise-level", dest="noise_level", type=float,
        help="bounded noise level ||w||/(sqrt(m)||x||)",
    )
    common.add_argument(
        "--alphas", type=_list_flag("alphas"),
        help="comma-separated noise levels for sweeps",
    )

    descriptions = {
        "phase-transition": "success rate vs number of measurements",
        "converge": "mean passes to a target error, shared initialization",
        "init-accuracy": "spectral initialization error vs sample size",
        "noise-sweep": "final error vs noise level",
        "recover": "single recovery runs with full per-pass traces",
        "image-demo": "recover a small grayscale image through CDP masks",
        "loss-surface": "expected amplitude/intensity loss grid dump",
    }
    for name, tag in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=descriptions[name],
                            description=descriptions[name])
        sp.set_defaults(experiment=tag)
        if name == "image-demo":
            sp.add_argument("--image", dest="image_path", help="input plain PGM file")
        if name == "loss-surface":
            sp.add_argument("--rho-grid", dest="rho_grid", type=int,
                            help="number of correlation grid points")
            sp.add_argument("--normz-grid", dest="normz_grid", type=int,
                            help="number of ||z|| grid points")
    return parser


_OVERRIDE_KEYS = (
    "experiment",
    "n",
    "trials",
    "seed",
    "output_path",
    "jobs",
    "model",
    "m_over_n",
    "masks",
    "algorithms",
    "success_tol",
    "iteration_budget",
    "minibatch_k",
    "mu",
    "rho0",
    "record_every",
    "noise_kind",
    "noise_level",
    "alphas",
    "image_path",
    "rho_grid",
    "normz_grid",
)


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if getattr(ns, "experiment", None) is None:
            parser.print_usage(sys.stderr)
            print("phasekit: error: a command is required", file=sys.stderr)
            return 1
        overrides = {
            k: getattr(ns, k) for k in _OVERRIDE_KEYS if getattr(ns, k, None) is not None
        }
        cfg = load_config(getattr(ns, "config", None), overrides)
    except ConfigError as exc:
        print("phasekit: error: %s" % exc, file=sys.stderr)
        return 1
    try:
        table, path = execute(cfg)
    except Exception as exc:  # runtime failure, distinct from config errors
        print("phasekit: runtime error: %s" % exc, file=sys.stderr)
        return 2
    print("wrote %s (%d rows)" % (path, len(table.rows)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
