"""Plain-text run configuration: flat ``key = value`` pairs, one per line.

Blank lines and ``#`` comments are allowed.  Unknown keys are hard errors so
that typos never silently fall back to defaults.  The recognized keys are the
model parameters (``p0 alpha lambda m k1 k2 kappa delta theta1 theta2
theta_bound``), solver controls (``vi_tol vi_max_iter eq_tol eq_max_iter
damping``), the sweep block (``sweep_param sweep_from sweep_to sweep_steps
sweep_scale``), and run plumbing (``seed horizon out``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .duopoly import THETA_BOUNDS, DuopolyParams
from .loss import MixedLoss

SWEEPABLE = ("k1", "k2", "M", "kappa", "delta", "p0", "alpha", "lambda")
SCALES = ("linear", "log")


class ConfigError(Exception):
    """A configuration file or value the CLI cannot act on."""


@dataclass(frozen=True)
class RunConfig:
    p0: float
    alpha: float
    lam: float
    m_cap: float
    k1: float
    k2: float
    kappa: float
    delta: float
    theta1: float | None = None
    theta2: float | None = None
    theta_bound: str = "m"
    vi_tol: float = 1e-9
    vi_max_iter: int = 1_000_000
    eq_tol: float = 1e-8
    eq_max_iter: int = 500
    damping: float = 0.5
    sweep_param: str | None = None
    sweep_from: float | None = None
    sweep_to: float | None = None
    sweep_steps: int | None = None
    sweep_scale: str = "linear"
    seed: int | None = None
    horizon: int | None = None
    out: str | None = None


_FLOAT_KEYS = {
    "p0": "p0", "alpha": "alpha", "lambda": "lam", "m": "m_cap",
    "k1": "k1", "k2": "k2", "kappa": "kappa", "delta": "delta",
    "theta1": "theta1", "theta2": "theta2",
    "vi_tol": "vi_tol", "eq_tol": "eq_tol", "damping": "damping",
    "sweep_from": "sweep_from", "sweep_to": "sweep_to",
}
_INT_KEYS = {
    "vi_max_iter": "vi_max_iter", "eq_max_iter": "eq_max_iter",
    "sweep_steps": "sweep_steps", "seed": "seed", "horizon": "horizon",
}
_STR_KEYS = {
    "theta_bound": "theta_bound", "sweep_param": "sweep_param",
    "sweep_scale": "sweep_scale", "out": "out",
}
_REQUIRED = ("p0", "alpha", "lambda", "m", "k1", "k2", "kappa", "delta")


def canonical_sweep_param(name: str) -> str:
    for candidate in SWEEPABLE:
        if name.lower() == candidate.lower():
            return candidate
    raise ConfigError(
        f"sweep parameter {name!r} not recognized; choose one of {', '.join(SWEEPABLE)}"
    )


def parse_config(path: str | Path) -> RunConfig:
    """Read and type-check a configuration file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    raw: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = text.partition("=")
        key, value = key.strip(), value.strip()
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value

    fields: dict[str, object] = {}
    for key, value in raw.items():
        if key in _FLOAT_KEYS:
            try:
                fields[_FLOAT_KEYS[key]] = float(value)
            except ValueError as exc:
                raise ConfigError(f"{path}: key {key!r}: not a number: {value!r}") from exc
        elif key in _INT_KEYS:
            try:
                fields[_INT_KEYS[key]] = int(value)
            except ValueError as exc:
                raise ConfigError(f"{path}: key {key!r}: not an integer: {value!r}") from exc
        elif key in _STR_KEYS:
            fields[_STR_KEYS[key]] = value
        else:
            raise ConfigError(f"{path}: unknown key {key!r}")

    missing = [key for key in _REQUIRED if key not in raw]
    if missing:
        raise ConfigError(f"{path}: missing required keys: {', '.join(missing)}")

    config = RunConfig(**fields)  # type: ignore[arg-type]
    if config.theta_bound not in THETA_BOUNDS:
        raise ConfigError(
            f"theta_bound must be one of {', '.join(THETA_BOUNDS)}, got {config.theta_bound!r}"
        )
    if config.sweep_scale not in SCALES:
        raise ConfigError(
            f"sweep_scale must be one of {', '.join(SCALES)}, got {config.sweep_scale!r}"
        )
    if config.sweep_param is not None:
        config = replace(config, sweep_param=canonical_sweep_param(config.sweep_param))
    return config


def build_loss(config: RunConfig) -> MixedLoss:
    try:
        return MixedLoss.gamma(config.p0, config.alpha, config.lam)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def resolve_params(config: RunConfig, require_thetas: bool = False) -> DuopolyParams:
    """Build game parameters from a configuration.

    Commands that work at explicit premiums (solve, simulate) set
    ``require_thetas``; equilibrium-style commands ignore premiums, which
    default to the admissible lower bound when absent.
    """
    loss = build_loss(config)
    if require_thetas and (config.theta1 is None or config.theta2 is None):
        raise ConfigError("this command needs both theta1 and theta2 in the config")
    fallback = loss.mean()
    try:
        return DuopolyParams(
            theta1=config.theta1 if config.theta1 is not None else fallback,
            theta2=config.theta2 if config.theta2 is not None else fallback,
            kappa=config.kappa,
            delta=config.delta,
            k1=config.k1,
            k2=config.k2,
            m_cap=config.m_cap,
            loss=loss,
            theta_bound=config.theta_bound,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def substitute_param(config: RunConfig, name: str, value: float) -> RunConfig:
    """Return a copy of ``config`` with one sweepable parameter replaced."""
    key = {
        "k1": "k1", "k2": "k2", "M": "m_cap", "kappa": "kappa",
        "delta": "delta", "p0": "p0", "alpha": "alpha", "lambda": "lam",
    }[canonical_sweep_param(name)]
    return replace(config, **{key: value})
