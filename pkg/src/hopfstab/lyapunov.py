"""First Lyapunov coefficient of a Hopf point and its stability classification.

With q, p the solved right/left eigenvectors (normalized q* q = 1 and
q* p = 1) and omega the crossing frequency,

    f_lyp = Re(h1 - 2 h2 + h3) / (2 omega),
    h1 = p* c(q, q, conj q),
    h2 = p* b(q, A^-1 b(q, conj q)),
    h3 = p* b(conj q, (2 i omega I - A)^-1 b(q, q)).

f_lyp < 0 marks a supercritical (stable) limit cycle branch, f_lyp > 0 a
subcritical (unstable) one; the sign is invariant under eigenvector
rescaling as long as the q* p = 1 pairing is maintained, while the value
scales by |alpha|^2.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import dynsys
from .counters import log_solve
from .dynsys import DynSystem
from .errors import DegeneracyError, InputError
from .hopf import HopfLeftState, HopfRightState

CLASS_TOL = 1e-8


class Stability(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    INDETERMINATE = "indeterminate"


@dataclass
class LyapunovReport:
    f_lyp: float
    h1: complex
    h2: complex
    h3: complex
    q1: np.ndarray            # A^-1 b(q, conj q) (real)
    q2: np.ndarray            # (2 i omega I - A)^-1 b(q, q) (complex)
    classification: Stability


def solve_shifted(A: np.ndarray, beta: float, rhs: np.ndarray, kind: str = "tensor") -> np.ndarray:
    """Solve (i*beta*I - A) z = rhs through the equivalent 2n x 2n real block
    system [[-A, -beta I], [beta I, -A]] acting on (Re z, Im z)."""
    n = A.shape[0]
    M = np.block([[-A, -beta * np.eye(n)], [beta * np.eye(n), -A]])
    r = np.concatenate([np.real(rhs), np.imag(rhs)])
    try:
        z = np.linalg.solve(M, r)
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError(
            f"(i*{beta:g}*I - A) is singular: 2:1 resonance at the Hopf point") from exc
    log_solve(kind)
    return z[:n] + 1j * z[n:]


def first_lyapunov(sys: DynSystem, uR: HopfRightState, uL: HopfLeftState, x,
                   class_tol: float = CLASS_TOL) -> LyapunovReport:
    """Evaluate the coefficient at a solved Hopf state pair."""
    if uR.omega <= 0:
        raise InputError("first_lyapunov requires omega > 0")
    w, mu, om = uR.w_eq, uR.mu, uR.omega
    q, p = uR.q, uL.p
    A = dynsys.jacobian(sys, w, mu, x)
    b3 = np.real(dynsys.bilinear(sys, q, np.conj(q), w, mu, x))
    b4 = np.asarray(dynsys.bilinear(sys, q, q, w, mu, x), complex)
    try:
        q1 = np.linalg.solve(A, b3)
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError(
            "Jacobian is singular at the Hopf point: fold-Hopf degeneracy") from exc
    log_solve("tensor")
    q2 = solve_shifted(A, 2.0 * om, b4)
    h1 = np.vdot(p, dynsys.trilinear(sys, q, q, np.conj(q), w, mu, x))
    h2 = np.vdot(p, dynsys.bilinear(sys, q, q1, w, mu, x))
    h3 = np.vdot(p, dynsys.bilinear(sys, np.conj(q), q2, w, mu, x))
    f = float(np.real(h1 - 2.0 * h2 + h3) / (2.0 * om))
    return LyapunovReport(f, complex(h1), complex(h2), complex(h3), q1, q2,
                          classify_bifurcation(f, class_tol))


def classify_bifurcation(f_lyp: float, class_tol: float = CLASS_TOL) -> Stability:
    """Sign rule with an indeterminate band |f_lyp| <= class_tol."""
    if class_tol < 0:
        raise InputError("class_tol must be non-negative")
    if f_lyp < -class_tol:
        return Stability.STABLE
    if f_lyp > class_tol:
        return Stability.UNSTABLE
    return Stability.INDETERMINATE


def scaling_invariance_check(sys: DynSystem, uR: HopfRightState, uL: HopfLeftState, x,
                             alpha: float, theta: float):
    """Rescale q <- alpha e^{i theta} q with the compatible p <- e^{i theta} p / alpha
    (keeps q* p = 1) and return (f_lyp_scaled, f_lyp_scaled / f_lyp)."""
    if alpha == 0:
        raise InputError("alpha must be nonzero")
    rot = np.exp(1j * theta)
    q_s = alpha * rot * uR.q
    p_s = (rot / alpha) * uL.p
    uR_s = replace(uR, q_r=q_s.real.copy(), q_i=q_s.imag.copy())
    uL_s = replace(uL, p_r=p_s.real.copy(), p_i=p_s.imag.copy())
    base = first_lyapunov(sys, uR, uL, x)
    scaled = first_lyapunov(sys, uR_s, uL_s, x)
    return scaled.f_lyp, scaled.f_lyp / base.f_lyp
