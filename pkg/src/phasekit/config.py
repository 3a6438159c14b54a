"""Experiment configuration and the flat config-file grammar.

Config files are plain text, one assignment per line:

    # comment, blank lines allowed; '#' starts a comment anywhere
    experiment = phase_transition
    n = 256
    m_over_n = 2, 3, 4, 5, 6
    algorithms = rwf, irwf
    trials = 50
    seed = 11

List-valued keys take comma-separated entries.  Every key maps straight
onto an ExperimentConfig field; unknown keys are errors, so typos fail
loudly before any computation starts.
"""

from dataclasses import dataclass, fields

from .solvers import ALGORITHMS

EXPERIMENTS = (
    "phase_transition",
    "convergence_race",
    "init_accuracy",
    "noise_sweep",
    "recover",
    "image_demo",
    "loss_surface",
)

MODELS = ("real", "complex", "cdp")


class ConfigError(ValueError):
    """Invalid configuration: unknown key, bad value, or broken invariant."""


@dataclass
class ExperimentConfig:
    experiment: str = "recover"
    n: int = 256
    m_over_n: tuple = (6.0,)
    masks: tuple = (12,)  # CDP mask counts L (model 'cdp' and the image demo)
    model: str = "real"
    algorithms: tuple = ("rwf",)
    trials: int = 50
    success_tol: float = 1e-5
    iteration_budget: int = 1000
    minibatch_k: int = 64
    mu: float = None
    rho0: float = 1.0
    record_every: int = 1
    noise_kind: str = "none"
    noise_level: float = 0.01  # bounded noise: ||w||/sqrt(m) = noise_level * ||x||
    alphas: tuple = (0.001, 0.01, 0.1, 1.0)
    seed: int = 1
    output_path: str = ""
    image_path: str = ""
    rho_grid: int = 41
    normz_grid: int = 21
    jobs: int = 1

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("unknown experiment %r" % self.experiment)
        if self.model not in MODELS:
            raise ConfigError("unknown model %r" % self.model)
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if not self.m_over_n or any(r < 1 for r in self.m_over_n):
            raise ConfigError("every m_over_n must be >= 1")
        if not self.masks or any(L < 1 for L in self.masks):
            raise ConfigError("every mask count must be >= 1")
        if not self.algorithms:
            raise ConfigError("need at least one algorithm")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError("unknown algorithm %r" % a)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.success_tol <= 0:
            raise ConfigError("success_tol must be positive")
        if self.iteration_budget < 0:
            raise ConfigError("iteration_budget must be >= 0")
        if self.minibatch_k < 1:
            raise ConfigError("minibatch_k must be >= 1")
        if self.mu is not None and self.mu <= 0:
            raise ConfigError("mu must be positive when set")
        if self.rho0 <= 0:
            raise ConfigError("rho0 must be positive")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if self.noise_kind not in ("none", "bounded", "poisson"):
            raise ConfigError("unknown noise kind %r" % self.noise_kind)
        if self.noise_level < 0:
            raise ConfigError("noise_level must be >= 0")
        if not self.alphas or any(a <= 0 for a in self.alphas):
            raise ConfigError("every alpha must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.rho_grid < 2 or self.normz_grid < 1:
            raise ConfigError("loss-surface grids need rho_grid >= 2, normz_grid >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        return self


_FIELD_NAMES = tuple(f.name for f in fields(ExperimentConfig))

_LIST_ELEM = {"m_over_n": float, "masks": int, "algorithms": str, "alphas": float}
_INT_KEYS = (
    "n",
    "trials",
    "iteration_budget",
    "minibatch_k",
    "record_every",
    "seed",
    "rho_grid",
    "normz_grid",
    "jobs",
)
_FLOAT_KEYS = ("success_tol", "rho0", "noise_level")


def coerce_value(key, raw):
    """Parse the raw string for `key` into its typed field value."""
    if key not in _FIELD_NAMES:
        raise ConfigError("unknown config key %r" % key)
    raw = raw.strip()
    try:
        if key in _LIST_ELEM:
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            if not parts:
                raise ValueError("empty list")
            return tuple(_LIST_ELEM[key](p) for p in parts)
        if key == "mu":
            return None if raw.lower() in ("none", "") else float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise ConfigError("bad value for %s: %r (%s)" % (key, raw, exc)) from exc
    return raw  # string-typed fields


def parse_config_text(text):
    """Raw {key: string} mapping from config-file text."""
    entries = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected 'key = value'" % ln)
        key, _, val = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError("line %d: missing key" % ln)
        entries[key] = val.strip()
    return entries


def load_config(path=None, overrides=None):
    """ExperimentConfig from defaults, then config file, then overrides.

    `overrides` holds already-typed values (CLI flags).  Validation runs on
    the merged result; any problem raises ConfigError.
    """
    values = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("cannot read config file %s: %s" % (path, exc)) from exc
        for key, raw in parse_config_text(text).items():
            values[key] = coerce_value(key, raw)
    for key, val in (overrides or {}).items():
        if key not in _FIELD_NAMES:
            raise ConfigError("unknown config key %r" % key)
        if val is not None:
            values[key] = val
    return ExperimentConfig(**values).validate()


def config_echo(cfg):
    """Ordered {field: value} mapping for CSV metadata lines."""
    out = {}
    for f in fields(ExperimentConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ", ".join(str(x) for x in v)
        out[f.name] = v
    return out
