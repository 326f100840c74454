"""Python wrapper around the heteroclinic network laboratory core.

Report-producing calls return plain dicts (parsed from the core's JSON)."""

import json
from pathlib import Path

from . import _core

__all__ = [
    "derive_constants",
    "validate_network",
    "principal_sequence",
    "time_of_flight",
    "tau",
    "wedge_defect",
    "wedge_membership",
    "local_map",
    "omega_orbit",
    "estimate_wedge_ratio",
    "delta_scaling",
    "check_lemmas",
    "glv_validate",
    "glv_itinerary",
    "glv_channel",
]

derive_constants = _core.derive_constants
time_of_flight = _core.time_of_flight
tau = _core.tau
wedge_defect = _core.wedge_defect
wedge_membership = _core.wedge_membership
local_map = _core.local_map
check_lemmas = _core.check_lemmas


def _text(config):
    """Accept a dict, a JSON string, or a path to a JSON file."""
    if isinstance(config, dict):
        return json.dumps(config)
    config = str(config)
    if config.lstrip().startswith("{"):
        return config
    return Path(config).read_text()


def validate_network(config):
    return json.loads(_core.validate_network(_text(config)))


def principal_sequence(config):
    return _core.principal_sequence(_text(config))


def omega_orbit(config, norm=0.1, loops=8):
    return json.loads(_core.omega_orbit(_text(config), norm, loops))


def estimate_wedge_ratio(expanding, contracting, eps, delta, n=100000, seed=1):
    return json.loads(
        _core.estimate_wedge_ratio(expanding, contracting, eps, delta, n, seed)
    )


def delta_scaling(expanding, contracting, eps, deltas, n=100000, seed=1):
    return json.loads(
        _core.delta_scaling(expanding, contracting, eps, list(deltas), n, seed)
    )


def glv_validate(config):
    return json.loads(_core.glv_validate(_text(config)))


def glv_itinerary(config, x0, t_max=100.0, eps=0.2):
    return json.loads(_core.glv_itinerary(_text(config), list(x0), t_max, eps))


def glv_channel(config, n=None):
    return json.loads(_core.glv_channel(_text(config), n))
