"""Python bindings for the intelligent disobedience game engine."""

import json

from ._idg import (
    IdgError,
    canonical,
    generate,
    instance_id,
    state_names,
    step_payoff,
)
from . import _idg

__all__ = [
    "IdgError",
    "canonical",
    "evaluate",
    "generate",
    "instance_id",
    "solve",
    "state_names",
    "step_payoff",
    "traps",
]


def solve(document, state="", horizon=1):
    return json.loads(_idg.solve_json(document, state, horizon))


def traps(document):
    return json.loads(_idg.traps_json(document))


def evaluate(document, leader="replanning", follower="optimal", episodes=1000, seed=0):
    return json.loads(_idg.evaluate_json(document, leader, follower, episodes, seed))
