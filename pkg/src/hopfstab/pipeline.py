"""End-to-end Hopf analysis: equilibrium -> right EVP -> left EVP -> f_lyp."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynsys import DynSystem
from .hopf import (HopfLeftState, HopfRightState, init_hopf_guess, reselect_phase_index,
                   solve_left_evp, solve_right_evp)
from .lyapunov import LyapunovReport, first_lyapunov


class FKind(Enum):
    LYAPUNOV = "lyapunov"
    MU = "mu"
    OMEGA = "omega"


@dataclass
class HopfSolution:
    uR: HopfRightState
    uL: HopfLeftState
    report: LyapunovReport

    def f_value(self, f_kind: FKind) -> float:
        if f_kind is FKind.LYAPUNOV:
            return self.report.f_lyp
        if f_kind is FKind.MU:
            return self.uR.mu
        return self.uR.omega


def solve_hopf(sys: DynSystem, x, mu0: float | None = None, w0=None,
               warm: HopfSolution | None = None, check_crossing: bool = True) -> HopfSolution:
    """Solve the coupled problem at design x, warm-starting when possible."""
    x = np.asarray(x, float)
    if warm is not None:
        guess = reselect_phase_index(warm.uR)
        uR = solve_right_evp(sys, x, guess, check_crossing=check_crossing)
        uR = reselect_phase_index(uR)
        uL = solve_left_evp(sys, x, uR, guess=None if guess is not warm.uR else warm.uL)
    else:
        if mu0 is None:
            raise ValueError("cold start requires mu0")
        w_seed = np.zeros(sys.n) if w0 is None else np.asarray(w0, float)
        guess, _ = init_hopf_guess(sys, mu0, x, w_seed)
        uR = solve_right_evp(sys, x, guess, check_crossing=check_crossing)
        uR = reselect_phase_index(uR)
        uL = solve_left_evp(sys, x, uR)
    report = first_lyapunov(sys, uR, uL, x)
    return HopfSolution(uR, uL, report)
