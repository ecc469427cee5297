"""Constrained Nikishin equilibrium workbench."""
import json as _json

from ._nikeq import (Error, InputError, branch_points, branch_values, cdf_distance_zeros, default_bits,
                     density_lambda1, pollaczek_halfline_density, run_command)

__all__ = ["Error", "InputError", "branch_points", "branch_values", "density_lambda1", "pollaczek_halfline_density",
           "solve_equilibrium", "mop", "check_assumptions", "cdf_distance_zeros", "run_command", "default_bits"]


def solve_equilibrium(spec, param=1.0, cells=0, tol=1e-6, max_iter=200, modified=False):
    """Solve a built-in problem ("bessel", "pollaczek", ...) or a JSON problem spec (dict or str)."""
    if isinstance(spec, dict):
        spec = _json.dumps(spec)
    from ._nikeq import _solve
    return _json.loads(_solve(spec, param, cells, tol, max_iter, modified))


def mop(n, bits=256, norms=True):
    """P_n, P_n2, residuals and (optionally) norm integrals for the Pollaczek system."""
    from ._nikeq import _mop
    return _json.loads(_mop(n, bits, norms))


def check_assumptions(n_list=(10, 50, 200), plus_compact=(0.5, 4.0), minus_compact=(-4.0, -0.05)):
    from ._nikeq import _assumptions
    return _json.loads(_assumptions(list(n_list), tuple(plus_compact), tuple(minus_compact)))
