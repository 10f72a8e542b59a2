"""Structure-function scaling and She-Leveque hierarchy analysis."""

import json

import numpy as np

from ._slh import (
    SlhError,
    gamma,
    generate_cascade,
    generate_fbm,
    returns,
    run_cli,
    structure_function,
    theoretical_delta_rho_next,
    theoretical_rho,
    theoretical_xi,
)
from . import _slh

__all__ = [
    "SlhError",
    "analyze",
    "build_table",
    "gamma",
    "generate_cascade",
    "generate_fbm",
    "returns",
    "run_cli",
    "structure_function",
    "theoretical_delta_rho_next",
    "theoretical_rho",
    "theoretical_xi",
]

DEFAULT_P = [round(0.2 * k, 12) for k in range(1, 26)]
DEFAULT_TAU = [2**k for k in range(9)]


def build_table(prices, p=None, tau=None, workers=1):
    """Moment table X_p(tau); moments is a len(p) x len(tau) array."""
    doc = json.loads(
        _slh.build_table_json(np.asarray(prices, dtype=float), list(p or DEFAULT_P), list(tau or DEFAULT_TAU), workers)
    )
    doc["moments"] = np.asarray(doc["moments"])
    return doc


def analyze(prices, config=None, workers=1, label="array"):
    """Full pipeline; config uses the keys of the CLI config file."""
    text = json.dumps(config) if config else ""
    return json.loads(_slh.analyze_json(np.asarray(prices, dtype=float), text, workers, label))
