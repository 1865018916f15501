"""Steady-state solve r(w, mu, x) = 0 by damped Newton iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dynsys
from .dynsys import DynSystem
from .errors import InputError, SolverError

ARMIJO_C = 1e-4
STEP_FLOOR = 1e-4


@dataclass
class EquilibriumResult:
    w_eq: np.ndarray
    residual_norm: float     # infinity norm
    iterations: int
    converged: bool


def solve_equilibrium(sys: DynSystem, mu: float, x, w0, tol: float = 1e-10,
                      max_iter: int = 50) -> EquilibriumResult:
    """Newton with Armijo backtracking on 0.5*||r||^2; dense LU per step.

    Non-convergence is reported in the result, not raised; a singular
    Jacobian at an iterate is an error naming the iterate.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    w = np.array(w0, float)
    if not np.all(np.isfinite(w)):
        raise InputError("initial state must be finite")
    r = dynsys.residual(sys, w, mu, x)
    for it in range(max_iter):
        rnorm = np.linalg.norm(r, np.inf)
        if rnorm <= tol:
            return EquilibriumResult(w, rnorm, it, True)
        A = dynsys.jacobian(sys, w, mu, x)
        try:
            step = np.linalg.solve(A, r)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular Jacobian at equilibrium iterate {it}") from exc
        merit0 = 0.5 * float(r @ r)
        alpha = 1.0
        while True:
            w_try = w - alpha * step
            try:
                r_try = dynsys.residual(sys, w_try, mu, x)
                merit = 0.5 * float(r_try @ r_try)
            except Exception:
                merit = np.inf
                r_try = None
            if merit <= merit0 * (1.0 - 2.0 * ARMIJO_C * alpha) or alpha <= STEP_FLOOR:
                break
            alpha *= 0.5
        if r_try is None:
            return EquilibriumResult(w, rnorm, it + 1, False)
        w, r = w_try, r_try
    rnorm = float(np.linalg.norm(r, np.inf))
    return EquilibriumResult(w, rnorm, max_iter, rnorm <= tol)
