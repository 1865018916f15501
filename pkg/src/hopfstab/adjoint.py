"""Exact design gradients of Hopf quantities via the sequential coupled adjoint.

For a scalar f of the coupled EVP states, block back-substitution of the
transposed coupled system gives

    (dr_L/du_L)^T psi_L = df/du_L,
    (dr_R/du_R)^T psi_R = df/du_R - (dr_L/du_R)^T psi_L,
    df/dx = pf/px - psi_R^T dr_R/dx - psi_L^T dr_L/dx,

where the only nonzero cross-term blocks come from the left normalization
rows (the rows that read the right eigenvector).  The partial derivatives
of the Lyapunov coefficient are assembled in reverse mode: two extra
adjoint solves (with A^T and the conjugate-transposed shifted matrix)
mirror the two primal tensor solves, so the whole gradient costs two
EVP-sized and two state-sized linear solves regardless of the number of
design variables.

Gradient convention for complex vectors: the stored g satisfies
df = Re(g* dv).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import dynsys
from .counters import log_solve
from .dynsys import DynSystem
from .errors import DegeneracyError
from .hopf import (HopfLeftState, HopfRightState, jacobian_left, jacobian_right)
from .lyapunov import LyapunovReport, first_lyapunov, solve_shifted
from .pipeline import FKind, HopfSolution, solve_hopf


@dataclass
class LyapunovPartials:
    dl_dx: np.ndarray         # real [n_x]
    dl_dw: np.ndarray         # real [n]
    dl_dq: np.ndarray         # complex [n]
    dl_dp: np.ndarray         # complex [n]
    dl_dmu: float
    dl_domega: float
    # A-adjoint kept factored as two outer products (u1 v1* + u2 v2*), never dense
    abar_factors: tuple


@dataclass
class GradientReport:
    df_dx: np.ndarray
    psi_L: np.ndarray
    psi_R: np.ndarray
    partials: Optional[LyapunovPartials]
    fd_reference: Optional[np.ndarray] = None
    max_rel_err: Optional[float] = None


def lyapunov_partials(sys: DynSystem, uR: HopfRightState, uL: HopfLeftState, x,
                      report: LyapunovReport | None = None) -> LyapunovPartials:
    """All partial derivatives of f_lyp w.r.t. (x, w_eq, q, p, mu, omega).

    Reuses the primal tensor solves (q1, q2) from the report when given;
    otherwise recomputes them.
    """
    if report is None:
        report = first_lyapunov(sys, uR, uL, x)
    w, mu, om = uR.w_eq, uR.mu, uR.omega
    q, p = uR.q, uL.p
    qc = np.conj(q)
    q1, q2 = report.q1, report.q2
    f = report.f_lyp

    A = dynsys.jacobian(sys, w, mu, x)
    B_q = dynsys.hessian_dir_matrix(sys, q, w, mu, x)
    B_qc = np.conj(B_q)
    B_q1 = dynsys.hessian_dir_matrix(sys, q1, w, mu, x)
    B_q2 = dynsys.hessian_dir_matrix(sys, q2, w, mu, x)

    # adjoint seeds of the three projections and the two tensor solves
    b1bar = -p / om
    b2bar = p / (2.0 * om)
    cbar = p / (2.0 * om)
    try:
        b3bar = np.linalg.solve(A.T.astype(complex), B_q.conj().T @ b1bar)
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError("A^T singular while assembling Lyapunov partials") from exc
    log_solve("tensor_adjoint")
    b4bar = solve_shifted(A.T, -2.0 * om, B_qc.conj().T @ b2bar, kind="tensor_adjoint")

    # tensor values at the base point (cheap, no solves)
    b1 = dynsys.bilinear(sys, q, q1, w, mu, x)
    b2 = dynsys.bilinear(sys, qc, q2, w, mu, x)
    cvec = dynsys.trilinear(sys, q, q, qc, w, mu, x)

    dl_dp = (np.asarray(cvec, complex) - 2.0 * np.asarray(b1, complex)
             + np.asarray(b2, complex)) / (2.0 * om)

    C_qqc = dynsys.third_dir2_matrix(sys, q, qc, w, mu, x)
    C_qq = dynsys.third_dir2_matrix(sys, q, q, w, mu, x)
    dl_dq = (B_q1.conj().T @ b1bar
             + np.conj(B_q2.conj().T @ b2bar)
             + B_qc.conj().T @ b3bar + np.conj(B_q.conj().T @ b3bar)
             + 2.0 * B_q.conj().T @ b4bar
             + 2.0 * C_qqc.conj().T @ cbar + np.conj(C_qq.conj().T @ cbar))

    C_qq1 = dynsys.third_dir2_matrix(sys, q, q1, w, mu, x)
    C_qcq2 = dynsys.third_dir2_matrix(sys, qc, q2, w, mu, x)
    D_qqqc = dynsys.fourth_dir3_matrix(sys, q, q, qc, w, mu, x)
    dl_dw = np.real(C_qq1.conj().T @ b1bar + C_qcq2.conj().T @ b2bar
                    + C_qqc.conj().T @ b3bar + C_qq.conj().T @ b4bar
                    + D_qqqc.conj().T @ cbar
                    - B_q1.T @ np.conj(b3bar) + B_q2.T @ np.conj(b4bar))

    Amu = dynsys.jac_mu_matrix(sys, w, mu, x)
    dl_dmu = float(np.real(
        np.vdot(b1bar, dynsys.bilinear_mu(sys, q, q1, w, mu, x))
        + np.vdot(b2bar, dynsys.bilinear_mu(sys, qc, q2, w, mu, x))
        + np.vdot(b3bar, dynsys.bilinear_mu(sys, q, qc, w, mu, x))
        + np.vdot(b4bar, dynsys.bilinear_mu(sys, q, q, w, mu, x))
        + np.vdot(cbar, dynsys.trilinear_mu(sys, q, q, qc, w, mu, x))
        - np.vdot(b3bar, Amu @ q1) + np.vdot(b4bar, Amu @ q2)))

    dl_dx = np.real(dynsys.bilinear_x_adj(sys, b1bar, q, q1, w, mu, x)
                    + dynsys.bilinear_x_adj(sys, b2bar, qc, q2, w, mu, x)
                    + dynsys.bilinear_x_adj(sys, b3bar, q, qc, w, mu, x)
                    + dynsys.bilinear_x_adj(sys, b4bar, q, q, w, mu, x)
                    + dynsys.trilinear_x_adj(sys, cbar, q, q, qc, w, mu, x)
                    - dynsys.jac_x_adj(sys, b3bar, q1, w, mu, x)
                    + dynsys.jac_x_adj(sys, b4bar, q2, w, mu, x))

    dl_domega = float(-f / om + np.real(-2j * np.vdot(b4bar, q2)))

    return LyapunovPartials(np.asarray(dl_dx, float), np.asarray(dl_dw, float),
                            dl_dq, dl_dp, dl_dmu, dl_domega,
                            abar_factors=((-b3bar, q1), (b4bar, q2)))


def partials_to_u_blocks(partials: LyapunovPartials, n: int):
    """Map the complex-convention partials onto the real combined-state layout.

    Shared quantities (w_eq, mu, omega) are attributed to the right state;
    the left block carries only the p components.
    """
    df_duR = np.concatenate([partials.dl_dw, np.real(partials.dl_dq),
                             np.imag(partials.dl_dq),
                             [partials.dl_dmu, partials.dl_domega]])
    df_duL = np.concatenate([np.zeros(n), np.real(partials.dl_dp),
                             np.imag(partials.dl_dp), [0.0, 0.0]])
    return df_duR, df_duL


def adjoint_solve_left(sys: DynSystem, uL: HopfLeftState, uR: HopfRightState, x,
                       rhs: np.ndarray) -> np.ndarray:
    """Solve (dr_L/du_L)^T psi_L = rhs with a dense LU."""
    JL = jacobian_left(sys, uL, uR, x)
    try:
        psi = np.linalg.solve(JL.T, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError("left adjoint matrix singular (degenerate Hopf mode)") from exc
    log_solve("evp_adjoint")
    return psi


def left_cross_term(uL: HopfLeftState, psi_L: np.ndarray, n: int) -> np.ndarray:
    """(dr_L/du_R)^T psi_L: nonzero only in the q blocks, through the left
    normalization rows."""
    out = np.zeros(3 * n + 2)
    psi4, psi5 = psi_L[3 * n], psi_L[3 * n + 1]
    out[n:2 * n] = psi4 * uL.p_r + psi5 * uL.p_i
    out[2 * n:3 * n] = psi4 * uL.p_i - psi5 * uL.p_r
    return out


def adjoint_solve_right(sys: DynSystem, uR: HopfRightState, x, rhs_f: np.ndarray,
                        psi_L: np.ndarray, uL: HopfLeftState) -> np.ndarray:
    """Solve (dr_R/du_R)^T psi_R = rhs_f - (dr_L/du_R)^T psi_L."""
    rhs = rhs_f - left_cross_term(uL, psi_L, sys.n)
    JR = jacobian_right(sys, uR, x)
    try:
        psi = np.linalg.solve(JR.T, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError("right adjoint matrix singular (degenerate Hopf mode)") from exc
    log_solve("evp_adjoint")
    return psi


def residual_right_x_contract(sys: DynSystem, uR: HopfRightState, x,
                              psi: np.ndarray) -> np.ndarray:
    """psi^T dr_R/dx without forming the mixed derivative tensor."""
    n = sys.n
    Jx = dynsys.x_partial(sys, uR.w_eq, uR.mu, x)
    out = Jx.T @ psi[:n]
    out = out + np.real(dynsys.jac_x_adj(sys, psi[n:2 * n], uR.q_r, uR.w_eq, uR.mu, x))
    out = out + np.real(dynsys.jac_x_adj(sys, psi[2 * n:3 * n], uR.q_i, uR.w_eq, uR.mu, x))
    return out


def residual_left_x_contract(sys: DynSystem, uL: HopfLeftState, x,
                             psi: np.ndarray) -> np.ndarray:
    """psi^T dr_L/dx; the eigenvector rows carry A^T, so the roles of the
    residual and state indices swap in the mixed contraction."""
    n = sys.n
    Jx = dynsys.x_partial(sys, uL.w_eq, uL.mu, x)
    out = Jx.T @ psi[:n]
    out = out + np.real(dynsys.jac_x_adj(sys, uL.p_r, psi[n:2 * n], uL.w_eq, uL.mu, x))
    out = out + np.real(dynsys.jac_x_adj(sys, uL.p_i, psi[2 * n:3 * n], uL.w_eq, uL.mu, x))
    return out


def total_gradient(sys: DynSystem, uR: HopfRightState, uL: HopfLeftState, x,
                   f_kind: FKind = FKind.LYAPUNOV,
                   report: LyapunovReport | None = None,
                   fd_reference: np.ndarray | None = None) -> GradientReport:
    """d f/dx for f in {f_lyp, mu_bif, omega_bif} at a solved state pair.

    Performs exactly two EVP-sized adjoint solves plus (for f_lyp, when the
    primal report is supplied) two state-sized tensor-adjoint solves,
    independent of the design dimension.
    """
    n = sys.n
    partials = None
    if f_kind is FKind.LYAPUNOV:
        partials = lyapunov_partials(sys, uR, uL, x, report=report)
        df_duR, df_duL = partials_to_u_blocks(partials, n)
        df_dx = partials.dl_dx.copy()
    else:
        df_duR = np.zeros(3 * n + 2)
        df_duR[3 * n if f_kind is FKind.MU else 3 * n + 1] = 1.0
        df_duL = np.zeros(3 * n + 2)
        df_dx = np.zeros(sys.n_x)

    psi_L = adjoint_solve_left(sys, uL, uR, x, df_duL)
    psi_R = adjoint_solve_right(sys, uR, x, df_duR, psi_L, uL)
    df_dx = df_dx - residual_right_x_contract(sys, uR, x, psi_R)
    df_dx = df_dx - residual_left_x_contract(sys, uL, x, psi_L)

    rep = GradientReport(df_dx, psi_L, psi_R, partials)
    if fd_reference is not None:
        rep.fd_reference = np.asarray(fd_reference, float)
        denom = np.maximum(np.abs(rep.fd_reference), 1e-12)
        rep.max_rel_err = float(np.max(np.abs(df_dx - rep.fd_reference) / denom))
    return rep


def fd_total_gradient(sys: DynSystem, x, f_kind: FKind = FKind.LYAPUNOV, h: float = 1e-6,
                      base: HopfSolution | None = None, mu0: float | None = None,
                      w0=None, workers: int = 1) -> np.ndarray:
    """Central-difference reference gradient re-solving the whole pipeline at
    x +/- h e_i, warm-started from the base solution."""
    import concurrent.futures
    import os

    x = np.asarray(x, float)
    if base is None:
        base = solve_hopf(sys, x, mu0=mu0, w0=w0)

    def one(i_sign):
        i, sign = i_sign
        xp = x.copy()
        xp[i] += sign * h
        sol = solve_hopf(sys, xp, warm=base, check_crossing=False)
        return sol.f_value(f_kind)

    tasks = [(i, s) for i in range(sys.n_x) for s in (+1.0, -1.0)]
    cap = int(os.environ.get("HOPFSTAB_THREADS", "1") or "1")
    workers = max(1, min(workers, cap))
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as ex:
            vals = list(ex.map(one, tasks))
    else:
        vals = [one(t) for t in tasks]
    g = np.empty(sys.n_x)
    for i in range(sys.n_x):
        g[i] = (vals[2 * i] - vals[2 * i + 1]) / (2.0 * h)
    return g
