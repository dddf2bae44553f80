"""Mutation testing for reinforcement-learning agents (native core)."""

import json as _json

from . import _core
from ._core import (
    Error,
    MissingArtifactError,
    ValidationError,
    catalog,
    derive_seed,
    fisher_exact,
    killed_pair,
    mutation_score,
    probability_of_improvement,
    random_configs,
    sensitivity,
)

__all__ = [
    "Error",
    "MissingArtifactError",
    "ValidationError",
    "apply_mutation",
    "catalog",
    "default_hyperparameters",
    "default_space",
    "derive_seed",
    "evaluate",
    "fisher_exact",
    "killed_pair",
    "killing_rate",
    "load_report",
    "mutation_score",
    "normalize_config",
    "probability_of_improvement",
    "random_configs",
    "run_all",
    "sensitivity",
    "train",
]


def _dump(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def killing_rate(verdicts, threshold=0.5):
    return _json.loads(_core.killing_rate(list(verdicts), threshold))


def default_hyperparameters(algorithm):
    return _json.loads(_core.default_hyperparameters(algorithm))


def default_space(operator, hyperparameters):
    return _core.default_space(operator, _dump(hyperparameters))


def apply_mutation(operator, value, hyperparameters):
    return _json.loads(_core.apply_mutation(operator, value, _dump(hyperparameters)))


def train(env, hyperparameters, seed):
    """Returns {"agent": ..., "trs": [...]}; the agent dict feeds evaluate()."""
    return _json.loads(_core.train(env, _dump(hyperparameters), seed))


def evaluate(agent, env, configs):
    return _json.loads(_core.evaluate(_dump(agent), env, [list(c) for c in configs]))


def normalize_config(config):
    return _json.loads(_core.normalize_config(_dump(config)))


def run_all(config, workers=0):
    return _json.loads(_core.run_all(_dump(config), workers))


def load_report(path):
    return _json.loads(_core.load_report(str(path)))
