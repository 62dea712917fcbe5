"""Anonymous multi-party quantum sensing: analytic outcome model, Fisher
information and estimation, backed by the C++ core."""

import json

from . import _core
from ._core import InputError, closed_form_j22, dilution, gamma, limit_j22, optimal_a

__all__ = [
    "InputError",
    "binomial",
    "closed_form_j22",
    "dilution",
    "estimate",
    "fisher_matrix",
    "gamma",
    "limit_j22",
    "optimal_a",
    "outcome_distribution",
    "run_cli",
]


def _doc(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def binomial(n, k):
    return int(_core.binomial(n, k))


def outcome_distribution(protocol, omegas):
    """Outcome label -> probability for a protocol section (dict or JSON)."""
    return dict(_core.outcome_distribution(_doc(protocol), list(omegas)))


def fisher_matrix(protocol, theta, shots=1):
    """(J, J^-1, crb_diag) at theta; J and J^-1 are numpy arrays."""
    return _core.fisher_matrix(_doc(protocol), list(theta), shots)


def estimate(counts, protocol):
    if isinstance(counts, dict) and "counts" not in counts:
        counts = {"counts": counts}
    return json.loads(_core.estimate(_doc(counts), _doc(protocol)))


def run_cli(*args):
    """Runs the command-line front end in-process; returns (code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
