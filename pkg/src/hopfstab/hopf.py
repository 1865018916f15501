"""Coupled right/left Hopf eigenvalue problems in residual form.

The right system stacks the equilibrium equation, the real/imaginary parts
of A q = i*omega*q, a unit-norm row and a phase row pinning one imaginary
entry to zero; its unknowns are (w_eq, q_r, q_i, mu, omega), so the onset
parameter is solved for rather than prescribed.  The left system replaces
the eigenvector rows by A^T p = -i*omega*p and normalizes p against the
right eigenvector: q* p = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import dynsys
from .counters import log_solve
from .dynsys import DynSystem
from .equilibrium import solve_equilibrium
from .errors import DegeneracyError, SolverError

EVP_TOL = 1e-10
EVP_MAX_ITER = 40
CROSSING_STEP = 1e-5
PHASE_RESELECT_RATIO = 0.1


@dataclass
class HopfRightState:
    w_eq: np.ndarray
    q_r: np.ndarray
    q_i: np.ndarray
    mu: float
    omega: float
    phase_index: int

    @property
    def q(self) -> np.ndarray:
        return self.q_r + 1j * self.q_i

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.w_eq, self.q_r, self.q_i, [self.mu, self.omega]])

    @classmethod
    def from_vector(cls, u: np.ndarray, n: int, phase_index: int) -> "HopfRightState":
        return cls(u[:n].copy(), u[n:2 * n].copy(), u[2 * n:3 * n].copy(),
                   float(u[3 * n]), float(u[3 * n + 1]), phase_index)


@dataclass
class HopfLeftState:
    w_eq: np.ndarray
    p_r: np.ndarray
    p_i: np.ndarray
    mu: float
    omega: float

    @property
    def p(self) -> np.ndarray:
        return self.p_r + 1j * self.p_i

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.w_eq, self.p_r, self.p_i, [self.mu, self.omega]])

    @classmethod
    def from_vector(cls, u: np.ndarray, n: int) -> "HopfLeftState":
        return cls(u[:n].copy(), u[n:2 * n].copy(), u[2 * n:3 * n].copy(),
                   float(u[3 * n]), float(u[3 * n + 1]))


def _pin_phase(q: np.ndarray, k: int) -> np.ndarray:
    """Rotate so entry k is real and positive, then normalize to unit 2-norm."""
    qk = q[k]
    if abs(qk) == 0:
        raise SolverError(f"phase entry {k} of the eigenvector vanishes")
    q = q * np.exp(-1j * np.angle(qk))
    return q / np.linalg.norm(q)


def init_hopf_guess(sys: DynSystem, mu0: float, x, w0, tol: float = 1e-10):
    """Seed the right EVP: equilibrium at mu0, then the least-damped
    oscillatory eigenpair of its Jacobian.  Returns (guess, phase_index)."""
    eq = solve_equilibrium(sys, mu0, x, w0, tol=tol)
    if not eq.converged:
        raise SolverError(f"equilibrium seed at mu0={mu0} did not converge "
                          f"(residual {eq.residual_norm:.3e})")
    A = dynsys.jacobian(sys, eq.w_eq, mu0, x)
    lam, V = np.linalg.eig(A)
    osc = np.flatnonzero(lam.imag > 1e-12)
    if osc.size == 0:
        raise SolverError("no oscillatory mode: Jacobian has no eigenvalue with Im > 0")
    i = osc[np.argmin(np.abs(lam.real[osc]))]
    q = V[:, i]
    k = int(np.argmax(np.abs(q)))
    q = _pin_phase(q, k)
    guess = HopfRightState(eq.w_eq, q.real.copy(), q.imag.copy(),
                           float(mu0), float(lam.imag[i]), k)
    return guess, k


def residual_right(sys: DynSystem, u: HopfRightState, x) -> np.ndarray:
    A = dynsys.jacobian(sys, u.w_eq, u.mu, x)
    return np.concatenate([
        dynsys.residual(sys, u.w_eq, u.mu, x),
        A @ u.q_r + u.omega * u.q_i,
        A @ u.q_i - u.omega * u.q_r,
        [u.q_r @ u.q_r + u.q_i @ u.q_i - 1.0],
        [u.q_i[u.phase_index]],
    ])


def jacobian_right(sys: DynSystem, u: HopfRightState, x) -> np.ndarray:
    """Dense Jacobian of residual_right w.r.t. (w_eq, q_r, q_i, mu, omega)."""
    n = sys.n
    A = dynsys.jacobian(sys, u.w_eq, u.mu, x)
    Amu = dynsys.jac_mu_matrix(sys, u.w_eq, u.mu, x)
    Bqr = dynsys.hessian_dir_matrix(sys, u.q_r, u.w_eq, u.mu, x)
    Bqi = dynsys.hessian_dir_matrix(sys, u.q_i, u.w_eq, u.mu, x)
    rmu = dynsys.mu_partial(sys, u.w_eq, u.mu, x)
    N = 3 * n + 2
    J = np.zeros((N, N))
    sl_w, sl_qr, sl_qi = slice(0, n), slice(n, 2 * n), slice(2 * n, 3 * n)
    im, io = 3 * n, 3 * n + 1
    J[sl_w, sl_w] = A
    J[sl_w, im] = rmu
    J[sl_qr, sl_w] = Bqr
    J[sl_qr, sl_qr] = A
    J[sl_qr, sl_qi] = u.omega * np.eye(n)
    J[sl_qr, im] = Amu @ u.q_r
    J[sl_qr, io] = u.q_i
    J[sl_qi, sl_w] = Bqi
    J[sl_qi, sl_qr] = -u.omega * np.eye(n)
    J[sl_qi, sl_qi] = A
    J[sl_qi, im] = Amu @ u.q_i
    J[sl_qi, io] = -u.q_r
    J[im, sl_qr] = 2.0 * u.q_r
    J[im, sl_qi] = 2.0 * u.q_i
    J[io, 2 * n + u.phase_index] = 1.0
    return J


def residual_left(sys: DynSystem, uL: HopfLeftState, uR: HopfRightState, x) -> np.ndarray:
    A = dynsys.jacobian(sys, uL.w_eq, uL.mu, x)
    return np.concatenate([
        dynsys.residual(sys, uL.w_eq, uL.mu, x),
        A.T @ uL.p_r - uL.omega * uL.p_i,
        A.T @ uL.p_i + uL.omega * uL.p_r,
        [uR.q_r @ uL.p_r + uR.q_i @ uL.p_i - 1.0],
        [-uR.q_i @ uL.p_r + uR.q_r @ uL.p_i],
    ])


def jacobian_left(sys: DynSystem, uL: HopfLeftState, uR: HopfRightState, x) -> np.ndarray:
    """Dense Jacobian of residual_left w.r.t. (w_eq, p_r, p_i, mu, omega)."""
    n = sys.n
    A = dynsys.jacobian(sys, uL.w_eq, uL.mu, x)
    Amu = dynsys.jac_mu_matrix(sys, uL.w_eq, uL.mu, x)
    Hpr = dynsys.hessian_adj_matrix(sys, uL.p_r, uL.w_eq, uL.mu, x)
    Hpi = dynsys.hessian_adj_matrix(sys, uL.p_i, uL.w_eq, uL.mu, x)
    rmu = dynsys.mu_partial(sys, uL.w_eq, uL.mu, x)
    N = 3 * n + 2
    J = np.zeros((N, N))
    sl_w, sl_pr, sl_pi = slice(0, n), slice(n, 2 * n), slice(2 * n, 3 * n)
    im, io = 3 * n, 3 * n + 1
    J[sl_w, sl_w] = A
    J[sl_w, im] = rmu
    J[sl_pr, sl_w] = Hpr
    J[sl_pr, sl_pr] = A.T
    J[sl_pr, sl_pi] = -uL.omega * np.eye(n)
    J[sl_pr, im] = Amu.T @ uL.p_r
    J[sl_pr, io] = -uL.p_i
    J[sl_pi, sl_w] = Hpi
    J[sl_pi, sl_pr] = uL.omega * np.eye(n)
    J[sl_pi, sl_pi] = A.T
    J[sl_pi, im] = Amu.T @ uL.p_i
    J[sl_pi, io] = uL.p_r
    J[im, sl_pr] = uR.q_r
    J[im, sl_pi] = uR.q_i
    J[io, sl_pr] = -uR.q_i
    J[io, sl_pi] = uR.q_r
    return J


def _newton(res_fn, jac_fn, u0: np.ndarray, tol: float, max_iter: int, what: str):
    """Plain Newton with mild step-halving; returns (u, iterations)."""
    u = u0.copy()
    r = res_fn(u)
    rnorm = np.linalg.norm(r, np.inf)
    for it in range(max_iter):
        if rnorm <= tol:
            return u, it
        J = jac_fn(u)
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise DegeneracyError(
                f"{what}: singular system Jacobian (degenerate or near-multiple eigenvalue)"
            ) from exc
        log_solve("evp_newton")
        alpha = 1.0
        for _ in range(5):
            u_try = u - alpha * step
            r_try = res_fn(u_try)
            t_norm = np.linalg.norm(r_try, np.inf)
            if np.isfinite(t_norm) and (t_norm < rnorm or alpha <= 1 / 16):
                break
            alpha *= 0.5
        u, r, rnorm = u_try, r_try, t_norm
    if rnorm <= tol:
        return u, max_iter
    raise SolverError(f"{what}: Newton did not converge, last residual {rnorm:.3e}")


def _crossing_rate(sys: DynSystem, u: HopfRightState, x) -> float:
    """d Re(lambda)/d mu by central FD, re-solving the equilibrium at mu +/- h."""
    h = CROSSING_STEP * (1.0 + abs(u.mu))
    rates = []
    for mu_p in (u.mu + h, u.mu - h):
        eq = solve_equilibrium(sys, mu_p, x, u.w_eq)
        if not eq.converged:
            raise SolverError("crossing check: equilibrium re-solve failed")
        lam = np.linalg.eigvals(dynsys.jacobian(sys, eq.w_eq, mu_p, x))
        rates.append(lam[np.argmin(np.abs(lam - 1j * u.omega))].real)
    return (rates[0] - rates[1]) / (2 * h)


def solve_right_evp(sys: DynSystem, x, guess: HopfRightState, tol: float = EVP_TOL,
                    max_iter: int = EVP_MAX_ITER, check_crossing: bool = True) -> HopfRightState:
    """Newton on the right EVP residual from a seed (init_hopf_guess or warm start)."""
    n = sys.n
    k = guess.phase_index
    u_vec, _ = _newton(
        lambda u: residual_right(sys, HopfRightState.from_vector(u, n, k), x),
        lambda u: jacobian_right(sys, HopfRightState.from_vector(u, n, k), x),
        guess.to_vector(), tol, max_iter, "right EVP")
    u = HopfRightState.from_vector(u_vec, n, k)
    if u.omega < 0:
        # conjugate pair: flip to the omega > 0 representative
        u = replace(u, omega=-u.omega, q_i=-u.q_i)
    if u.omega <= 0:
        raise SolverError("right EVP: converged to zero frequency (not a Hopf point)")
    if check_crossing and _crossing_rate(sys, u, x) <= 0:
        raise SolverError("right EVP: not a forward crossing (d Re(lambda)/d mu <= 0)")
    return u


def reselect_phase_index(u: HopfRightState) -> HopfRightState:
    """Re-pin the phase entry if its magnitude decayed below the guard ratio."""
    qmag = np.abs(u.q)
    if qmag[u.phase_index] >= PHASE_RESELECT_RATIO * qmag.max():
        return u
    k = int(np.argmax(qmag))
    q = _pin_phase(u.q, k)
    return replace(u, q_r=q.real.copy(), q_i=q.imag.copy(), phase_index=k)


def init_left_guess(sys: DynSystem, uR: HopfRightState, x) -> HopfLeftState:
    """Seed the left EVP from a dense eigensolve of A^T at the solved point."""
    A = dynsys.jacobian(sys, uR.w_eq, uR.mu, x)
    lam, V = np.linalg.eig(A.T)
    i = np.argmin(np.abs(lam + 1j * uR.omega))
    p = V[:, i]
    denom = np.vdot(uR.q, p)
    if abs(denom) < 1e-10:
        raise SolverError("left EVP seed is orthogonal to the right eigenvector; reseed")
    p = p / denom
    return HopfLeftState(uR.w_eq.copy(), p.real.copy(), p.imag.copy(), uR.mu, uR.omega)


def solve_left_evp(sys: DynSystem, x, uR: HopfRightState,
                   guess: HopfLeftState | None = None, tol: float = EVP_TOL,
                   max_iter: int = EVP_MAX_ITER) -> HopfLeftState:
    """Newton on the left EVP residual; the right eigenvector enters the
    normalization rows as data."""
    n = sys.n
    if guess is None:
        guess = init_left_guess(sys, uR, x)
    u_vec, _ = _newton(
        lambda u: residual_left(sys, HopfLeftState.from_vector(u, n), uR, x),
        lambda u: jacobian_left(sys, HopfLeftState.from_vector(u, n), uR, x),
        guess.to_vector(), tol, max_iter, "left EVP")
    return HopfLeftState.from_vector(u_vec, n)
