"""Stochastic homogenization of elastoplasticity with kinematic hardening.

Configuration arguments accept a dict or a JSON string with the same schema as
the command-line tool.
"""

import json as _json

from . import _core
from ._core import BudgetError, ConfigError, NumericalError, fenchel_gap, my_subdiff, my_value, psi_value, run_korn_check

__all__ = [
    "BudgetError",
    "ConfigError",
    "NumericalError",
    "fenchel_gap",
    "my_subdiff",
    "my_value",
    "psi_value",
    "run_averaging_experiment",
    "run_ergodic_check",
    "run_korn_check",
    "sigma",
    "solve_effective",
    "solve_eps",
]


def _text(config):
    if config is None:
        return "{}"
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def solve_eps(config=None):
    return _core.solve_eps(_text(config))


def sigma(config=None):
    return _core.sigma(_text(config))


def solve_effective(config=None):
    return _core.solve_effective(_text(config))


def run_averaging_experiment(config=None):
    return _core.run_averaging_experiment(_text(config))


def run_ergodic_check(config=None):
    return _core.run_ergodic_check(_text(config))
