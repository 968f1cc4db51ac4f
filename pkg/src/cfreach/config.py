"""Run configuration: a TOML document describing one reachability run.

Schema (unknown keys are rejected)::

    [problem]
    system = "duffing"            # duffing | quadrotor | traffic | custom-test
    t0 = 0.0                      # optional, default 0
    t1 = 100.0
    step = 0.01                   # optional, per-system default
    state_dim = 6                 # optional; traffic cells / custom-test size
    x0_lower = [0.95, -0.05]
    x0_upper = [1.05, 0.05]
    d_lower = []                  # required when the system has disturbances
    d_upper = []
    projection = [1, 2]           # optional, 1-based state indices

    [problem.params]              # optional overrides of system parameters
    gamma = 0.4

    [fit]
    k = 4
    epsilon = 0.1
    delta = 1e-6
    n_samples = 20000             # optional; default is the PAC sample size
    normalize = true              # optional

    [seeds]                       # optional
    train = 0
    validate = 1

    [validate]                    # optional
    margin = 0.02
    confidence = 0.999

    [output]                      # optional; relative to the config file
    estimator = "estimator.json"
    cloud = "cloud.csv"
    report = "report"
    grid = "grid.csv"
"""
import os
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .basis import basis_size
from .errors import ConfigError
from .pac import ChernoffParams, PacParams, pac_sample_size
from .sampler import ReachabilityProblem
from .systems import DEFAULT_STEPS, IntegratorConfig, make_system

_SCHEMA = {
    "problem": {
        "system", "t0", "t1", "step", "state_dim", "x0_lower", "x0_upper",
        "d_lower", "d_upper", "projection", "params",
    },
    "fit": {"k", "epsilon", "delta", "n_samples", "normalize"},
    "seeds": {"train", "validate"},
    "validate": {"margin", "confidence"},
    "output": {"estimator", "cloud", "report", "grid"},
}
_REQUIRED = {"problem": {"system", "t1", "x0_lower", "x0_upper"}, "fit": {"k", "epsilon", "delta"}}


@dataclass(frozen=True)
class RunConfig:
    problem: ReachabilityProblem
    k: int
    epsilon: float
    delta: float
    n_samples_override: int = None
    normalize: bool = True
    train_seed: int = 0
    validate_seed: int = 1
    chernoff: ChernoffParams = None
    outputs: dict = field(default_factory=dict)

    @property
    def pac(self):
        return PacParams(self.epsilon, self.delta, self.problem.dim, self.k)

    def n_samples(self):
        if self.n_samples_override is not None:
            return self.n_samples_override
        return pac_sample_size(self.pac)


def _check_keys(doc, section, allowed, where):
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    missing = _REQUIRED.get(section, set()) - set(doc)
    if missing:
        raise ConfigError(f"missing required key(s) in {where}: {', '.join(sorted(missing))}")


def _float_list(doc, key, default=()):
    value = doc.get(key, default)
    if not isinstance(value, list | tuple) or not all(
        isinstance(v, int | float) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"problem.{key} must be a list of numbers")
    return [float(v) for v in value]


def parse_config(doc, base_dir="."):
    """Build a RunConfig from an already-parsed TOML mapping."""
    _check_keys(doc, None, set(_SCHEMA), "top level")
    for section in ("problem", "fit"):
        if section not in doc:
            raise ConfigError(f"missing [{section}] section")
    for section, allowed in _SCHEMA.items():
        if section in doc:
            if not isinstance(doc[section], dict):
                raise ConfigError(f"[{section}] must be a table")
            _check_keys(doc[section], section, allowed, f"[{section}]")
    p = doc["problem"]
    fit_doc = doc["fit"]
    try:
        system = make_system(p["system"], p.get("params"), p.get("state_dim"))
        step = float(p.get("step", DEFAULT_STEPS[system.id]))
        projection = p.get("projection")
        if projection is not None:
            if not isinstance(projection, list) or not all(isinstance(i, int) for i in projection):
                raise ConfigError("problem.projection must be a list of 1-based integers")
            projection = [i - 1 for i in projection]
        problem = ReachabilityProblem(
            system=system,
            integ=IntegratorConfig(step),
            t0=float(p.get("t0", 0.0)),
            t1=float(p["t1"]),
            x0_lower=_float_list(p, "x0_lower"),
            x0_upper=_float_list(p, "x0_upper"),
            d_lower=_float_list(p, "d_lower"),
            d_upper=_float_list(p, "d_upper"),
            projection=projection,
        )
        k = fit_doc["k"]
        if not isinstance(k, int) or isinstance(k, bool) or k < 0:
            raise ConfigError("fit.k must be a non-negative integer")
        cfg = RunConfig(
            problem=problem,
            k=k,
            epsilon=float(fit_doc["epsilon"]),
            delta=float(fit_doc["delta"]),
            n_samples_override=fit_doc.get("n_samples"),
            normalize=bool(fit_doc.get("normalize", True)),
            train_seed=int(doc.get("seeds", {}).get("train", 0)),
            validate_seed=int(doc.get("seeds", {}).get("validate", 1)),
            chernoff=(
                ChernoffParams(**doc["validate"]) if "validate" in doc and doc["validate"] else None
            ),
            outputs={
                key: os.path.join(base_dir, value) for key, value in doc.get("output", {}).items()
            },
        )
        cfg.pac  # validates epsilon and delta
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    override = cfg.n_samples_override
    if override is not None:
        m = basis_size(problem.dim, k)
        if not isinstance(override, int) or override < m:
            raise ConfigError(f"fit.n_samples must be an integer >= {m} (basis size)")
    return cfg


def load_config(path):
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(doc, os.path.dirname(os.path.abspath(path)))
