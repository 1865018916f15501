"""Parameterized dynamical-system abstraction.

A system dw/dt = r(w, mu, x) is described by its residual plus optional
analytic derivative evaluators.  Anything not supplied analytically is
derived by central finite differences built on the residual/Jacobian, so a
model is usable with nothing but ``residual_eval``.

Directional second/third derivatives of the residual (the forms b and c)
are kept matrix-free: ``bilinear``/``trilinear`` contract the Hessian and
third-derivative data with direction vectors, and the finite-difference
backend realizes them with Jacobian calls only (two for b, four more for
the matching c, six per pair).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .counters import EvalCounter
from .errors import ConfigurationError, EvaluationError, InputError

Array = np.ndarray

#: relative-absolute blend for Jacobian / first-order FD steps
FD_STEP = 1e-6


class TensorMode(Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite_difference"


@dataclass(frozen=True)
class TensorEps:
    """Perturbation sizes for the Jacobian-difference tensor approximations."""

    eps_b: float = 1e-4
    eps_c: float = 0.01

    def __post_init__(self):
        if self.eps_b <= 0 or self.eps_c <= 0:
            raise InputError("TensorEps perturbations must be strictly positive")


@dataclass(frozen=True)
class DynSystem:
    """Immutable model definition.

    Required: dimensions and ``residual_eval``.  Optional analytic
    evaluators sharpen accuracy; every one has a finite-difference
    fallback.  All evaluators take real arrays; complex directions are
    split outside the model by multilinearity.
    """

    n: int
    n_x: int
    residual_eval: Callable[[Array, float, Array], Array]
    jacobian_eval: Optional[Callable] = None
    bilinear_eval: Optional[Callable] = None        # (y1, y2, w, mu, x) -> vector
    trilinear_eval: Optional[Callable] = None       # (y1, y2, y3, w, mu, x) -> vector
    mu_partial_eval: Optional[Callable] = None      # (w, mu, x) -> dr/dmu vector
    x_partial_eval: Optional[Callable] = None       # (w, mu, x) -> dr/dx matrix [n, n_x]
    tensor_mode: TensorMode = TensorMode.FINITE_DIFFERENCE
    tensor_eps: TensorEps = field(default_factory=TensorEps)
    # optional analytic hooks used by Newton/adjoint assembly
    jac_mu_eval: Optional[Callable] = None          # dA/dmu matrix
    hessian_dir_eval: Optional[Callable] = None     # (v, w, mu, x) -> matrix B_v = d(A v-dir): B_v[i,j] = sum_k d2r_i/dw_j dw_k v_k
    hessian_adj_eval: Optional[Callable] = None     # (v, w, mu, x) -> matrix sum_k v_k Hess(r_k)
    third_dir2_eval: Optional[Callable] = None      # (u, v, w, mu, x) -> matrix C[i,j] = sum_kl d3r_i/dw_j dw_k dw_l u_k v_l
    fourth_dir3_eval: Optional[Callable] = None     # (u, v, z, w, mu, x) -> matrix of 4th-order contractions
    bilinear_mu_eval: Optional[Callable] = None     # (y1, y2, w, mu, x) -> db/dmu vector
    trilinear_mu_eval: Optional[Callable] = None
    bilinear_x_adj_eval: Optional[Callable] = None  # (v, y1, y2, w, mu, x) -> n_x vector conj(v)^T db/dx
    trilinear_x_adj_eval: Optional[Callable] = None
    jac_x_adj_eval: Optional[Callable] = None       # (v, y, w, mu, x) -> n_x vector sum_ik v_i d2r_i/dw_k dx_m y_k
    name: str = "system"
    counter: EvalCounter = field(default_factory=EvalCounter)

    def __post_init__(self):
        if self.tensor_mode is TensorMode.ANALYTIC and (
            self.bilinear_eval is None or self.trilinear_eval is None
        ):
            raise ConfigurationError(
                f"{self.name}: analytic tensor mode requires bilinear_eval and trilinear_eval"
            )


def _check_dims(sys: DynSystem, w: Array, x: Array) -> None:
    if np.shape(w) != (sys.n,):
        raise InputError(f"{sys.name}: state has shape {np.shape(w)}, expected ({sys.n},)")
    if np.shape(x) != (sys.n_x,):
        raise InputError(f"{sys.name}: design has shape {np.shape(x)}, expected ({sys.n_x},)")


def _check_finite(vec: Array, what: str) -> Array:
    bad = np.flatnonzero(~np.isfinite(np.atleast_1d(vec)))
    if bad.size:
        raise EvaluationError(f"non-finite {what} at entry {int(bad[0])}")
    return vec


def residual(sys: DynSystem, w: Array, mu: float, x: Array) -> Array:
    """Evaluate r(w, mu, x)."""
    _check_dims(sys, w, x)
    sys.counter.residual_calls += 1
    r = np.asarray(sys.residual_eval(np.asarray(w, float), float(mu), np.asarray(x, float)), float)
    if r.shape != (sys.n,):
        raise EvaluationError(f"{sys.name}: residual returned shape {r.shape}")
    return _check_finite(r, "residual")


def jacobian(sys: DynSystem, w: Array, mu: float, x: Array) -> Array:
    """dr/dw as a dense matrix; central FD column-by-column when not analytic."""
    _check_dims(sys, w, x)
    sys.counter.jacobian_calls += 1
    if sys.jacobian_eval is not None:
        A = np.asarray(sys.jacobian_eval(np.asarray(w, float), float(mu), np.asarray(x, float)), float)
        return _check_finite(A, "jacobian")
    A = np.empty((sys.n, sys.n))
    for j in range(sys.n):
        h = FD_STEP * (1.0 + abs(w[j]))
        wp = np.array(w, float); wp[j] += h
        wm = np.array(w, float); wm[j] -= h
        A[:, j] = (sys.residual_eval(wp, mu, x) - sys.residual_eval(wm, mu, x)) / (2 * h)
    return _check_finite(A, "jacobian")


def _split_pairs(*dirs):
    """Expand complex directions into (coeff, real_dirs) terms by multilinearity."""
    terms = [(1.0 + 0j, [])]
    for d in dirs:
        d = np.asarray(d)
        new = []
        if np.iscomplexobj(d):
            re, im = np.real(d), np.imag(d)
            for c, parts in terms:
                new.append((c, parts + [re]))
                if np.any(im):
                    new.append((c * 1j, parts + [im]))
        else:
            for c, parts in terms:
                new.append((c, parts + [np.asarray(d, float)]))
        terms = new
    return terms


def bilinear(sys: DynSystem, y1, y2, w: Array, mu: float, x: Array) -> Array:
    """Hessian contraction b(y1, y2) at (w, mu, x); complex if a direction is."""
    if sys.tensor_mode is TensorMode.ANALYTIC:
        if sys.bilinear_eval is None:
            raise ConfigurationError(f"{sys.name}: analytic bilinear evaluator missing")
        fn = lambda a, b: np.asarray(sys.bilinear_eval(a, b, w, mu, x))
    else:
        fn = lambda a, b: fd_bilinear(sys, a, b, w, mu, x, sys.tensor_eps)
    if not (np.iscomplexobj(y1) or np.iscomplexobj(y2)):
        return fn(np.asarray(y1, float), np.asarray(y2, float))
    out = 0
    for c, (a, b) in _split_pairs(y1, y2):
        out = out + c * fn(a, b)
    return out


def trilinear(sys: DynSystem, y1, y2, y3, w: Array, mu: float, x: Array) -> Array:
    """Third-derivative contraction c(y1, y2, y3) at (w, mu, x)."""
    if sys.tensor_mode is TensorMode.ANALYTIC:
        if sys.trilinear_eval is None:
            raise ConfigurationError(f"{sys.name}: analytic trilinear evaluator missing")
        fn = lambda a, b, c3: np.asarray(sys.trilinear_eval(a, b, c3, w, mu, x))
    else:
        fn = lambda a, b, c3: fd_trilinear(sys, a, b, c3, w, mu, x, sys.tensor_eps)
    if not any(np.iscomplexobj(v) for v in (y1, y2, y3)):
        return fn(np.asarray(y1, float), np.asarray(y2, float), np.asarray(y3, float))
    out = 0
    for c, (a, b, c3) in _split_pairs(y1, y2, y3):
        out = out + c * fn(a, b, c3)
    return out


def fd_bilinear(sys: DynSystem, y1: Array, y2: Array, w: Array, mu: float, x: Array,
                eps: TensorEps | None = None) -> Array:
    """b(y1, y2) ~ [A(w + e y1) - A(w - e y1)] y2 / (2e); exactly two Jacobian calls.

    Directions are used as-is (callers pass EVP-normalized vectors).
    """
    eps = eps or sys.tensor_eps
    if np.iscomplexobj(y1) or np.iscomplexobj(y2):
        out = 0
        for c, (a, b) in _split_pairs(y1, y2):
            out = out + c * fd_bilinear(sys, a, b, w, mu, x, eps)
        return out
    e = eps.eps_b
    Ap = jacobian(sys, w + e * y1, mu, x)
    Am = jacobian(sys, w - e * y1, mu, x)
    return (Ap - Am) @ y2 / (2 * e)


def fd_trilinear(sys: DynSystem, y1: Array, y2: Array, y3: Array, w: Array, mu: float,
                 x: Array, eps: TensorEps | None = None) -> Array:
    """c(y1, y2, y3) ~ central difference of fd_bilinear along y3 with step eps_c."""
    eps = eps or sys.tensor_eps
    if any(np.iscomplexobj(v) for v in (y1, y2, y3)):
        out = 0
        for c, (a, b, c3) in _split_pairs(y1, y2, y3):
            out = out + c * fd_trilinear(sys, a, b, c3, w, mu, x, eps)
        return out
    e = eps.eps_c
    bp = fd_bilinear(sys, y1, y2, w + e * y3, mu, x, eps)
    bm = fd_bilinear(sys, y1, y2, w - e * y3, mu, x, eps)
    return (bp - bm) / (2 * e)


# ---------------------------------------------------------------------------
# directional derivative matrices and mixed partials (adjoint/Newton support)
# ---------------------------------------------------------------------------

def hessian_dir_matrix(sys: DynSystem, v, w: Array, mu: float, x: Array) -> Array:
    """Matrix B_v with B_v[i, j] = sum_k d2r_i/dw_j dw_k v_k, so B_v y = b(v, y)."""
    if np.iscomplexobj(v):
        return (hessian_dir_matrix(sys, np.real(v), w, mu, x)
                + 1j * hessian_dir_matrix(sys, np.imag(v), w, mu, x))
    v = np.asarray(v, float)
    if sys.hessian_dir_eval is not None:
        return np.asarray(sys.hessian_dir_eval(v, w, mu, x))
    e = sys.tensor_eps.eps_b
    return (jacobian(sys, w + e * v, mu, x) - jacobian(sys, w - e * v, mu, x)) / (2 * e)


def hessian_adj_matrix(sys: DynSystem, v: Array, w: Array, mu: float, x: Array) -> Array:
    """Residual-weighted Hessian sum_k v_k Hess(r_k); columns by FD of A^T v."""
    if sys.hessian_adj_eval is not None:
        return np.asarray(sys.hessian_adj_eval(v, w, mu, x))
    n = sys.n
    M = np.empty((n, n))
    for j in range(n):
        h = sys.tensor_eps.eps_b * (1.0 + abs(w[j]))
        wp = np.array(w, float); wp[j] += h
        wm = np.array(w, float); wm[j] -= h
        M[:, j] = (jacobian(sys, wp, mu, x).T @ v - jacobian(sys, wm, mu, x).T @ v) / (2 * h)
    return M


def third_dir2_matrix(sys: DynSystem, u, v, w: Array, mu: float, x: Array) -> Array:
    """Matrix C_{u,v}[i, j] = sum_kl d3r_i/dw_j dw_k dw_l u_k v_l (= db(u,v)/dw)."""
    if np.iscomplexobj(u):
        return (third_dir2_matrix(sys, np.real(u), v, w, mu, x)
                + 1j * third_dir2_matrix(sys, np.imag(u), v, w, mu, x))
    if sys.third_dir2_eval is not None and not np.iscomplexobj(v):
        return np.asarray(sys.third_dir2_eval(np.asarray(u, float), np.asarray(v, float), w, mu, x))
    if np.iscomplexobj(v):
        return (third_dir2_matrix(sys, u, np.real(v), w, mu, x)
                + 1j * third_dir2_matrix(sys, u, np.imag(v), w, mu, x))
    e = sys.tensor_eps.eps_c
    Bp = hessian_dir_matrix(sys, v, w + e * np.asarray(u, float), mu, x)
    Bm = hessian_dir_matrix(sys, v, w - e * np.asarray(u, float), mu, x)
    return (Bp - Bm) / (2 * e)


def fourth_dir3_matrix(sys: DynSystem, u, v, z, w: Array, mu: float, x: Array) -> Array:
    """Matrix D[i, j] = sum_klm d4r_i/dw_j dw_k dw_l dw_m u_k v_l z_m (= dc(u,v,z)/dw)."""
    if np.iscomplexobj(u):
        return (fourth_dir3_matrix(sys, np.real(u), v, z, w, mu, x)
                + 1j * fourth_dir3_matrix(sys, np.imag(u), v, z, w, mu, x))
    if sys.fourth_dir3_eval is not None and not (np.iscomplexobj(v) or np.iscomplexobj(z)):
        return np.asarray(sys.fourth_dir3_eval(u, v, z, w, mu, x))
    e = sys.tensor_eps.eps_c
    Cp = third_dir2_matrix(sys, v, z, w + e * np.asarray(u, float), mu, x)
    Cm = third_dir2_matrix(sys, v, z, w - e * np.asarray(u, float), mu, x)
    return (Cp - Cm) / (2 * e)


def mu_partial(sys: DynSystem, w: Array, mu: float, x: Array) -> Array:
    """dr/dmu vector."""
    if sys.mu_partial_eval is not None:
        return np.asarray(sys.mu_partial_eval(w, mu, x), float)
    h = FD_STEP * (1.0 + abs(mu))
    return (residual(sys, w, mu + h, x) - residual(sys, w, mu - h, x)) / (2 * h)


def x_partial(sys: DynSystem, w: Array, mu: float, x: Array) -> Array:
    """dr/dx matrix [n, n_x]."""
    if sys.x_partial_eval is not None:
        return np.asarray(sys.x_partial_eval(w, mu, x), float)
    J = np.empty((sys.n, sys.n_x))
    for m in range(sys.n_x):
        h = FD_STEP * (1.0 + abs(x[m]))
        xp = np.array(x, float); xp[m] += h
        xm = np.array(x, float); xm[m] -= h
        J[:, m] = (residual(sys, w, mu, xp) - residual(sys, w, mu, xm)) / (2 * h)
    return J


def jac_mu_matrix(sys: DynSystem, w: Array, mu: float, x: Array) -> Array:
    """dA/dmu matrix."""
    if sys.jac_mu_eval is not None:
        return np.asarray(sys.jac_mu_eval(w, mu, x), float)
    h = FD_STEP * (1.0 + abs(mu))
    return (jacobian(sys, w, mu + h, x) - jacobian(sys, w, mu - h, x)) / (2 * h)


def bilinear_mu(sys: DynSystem, y1, y2, w: Array, mu: float, x: Array) -> Array:
    """db(y1, y2)/dmu at fixed directions."""
    if sys.bilinear_mu_eval is not None and not (np.iscomplexobj(y1) or np.iscomplexobj(y2)):
        return np.asarray(sys.bilinear_mu_eval(y1, y2, w, mu, x))
    h = FD_STEP * (1.0 + abs(mu))
    return (bilinear(sys, y1, y2, w, mu + h, x) - bilinear(sys, y1, y2, w, mu - h, x)) / (2 * h)


def trilinear_mu(sys: DynSystem, y1, y2, y3, w: Array, mu: float, x: Array) -> Array:
    if sys.trilinear_mu_eval is not None and not any(np.iscomplexobj(v) for v in (y1, y2, y3)):
        return np.asarray(sys.trilinear_mu_eval(y1, y2, y3, w, mu, x))
    h = FD_STEP * (1.0 + abs(mu))
    return (trilinear(sys, y1, y2, y3, w, mu + h, x)
            - trilinear(sys, y1, y2, y3, w, mu - h, x)) / (2 * h)


def _x_adj_by_fd(eval_dirs, sys: DynSystem, v, w, mu, x):
    """Generic conj(v)^T d(eval)/dx by central FD over design entries."""
    out = np.zeros(sys.n_x, complex)
    vc = np.conj(np.asarray(v))
    for m in range(sys.n_x):
        h = FD_STEP * (1.0 + abs(x[m]))
        xp = np.array(x, float); xp[m] += h
        xm = np.array(x, float); xm[m] -= h
        out[m] = vc @ (eval_dirs(xp) - eval_dirs(xm)) / (2 * h)
    return out


def bilinear_x_adj(sys: DynSystem, v, y1, y2, w: Array, mu: float, x: Array) -> Array:
    """n_x vector with entries sum_i conj(v_i) d b_i(y1, y2)/dx_m."""
    if sys.bilinear_x_adj_eval is not None:
        out = 0
        for c, (a, b) in _split_pairs(y1, y2):
            for cv, (vv,) in _split_pairs(v):
                out = out + np.conj(cv) * c * np.asarray(
                    sys.bilinear_x_adj_eval(vv, a, b, w, mu, x))
        return out
    return _x_adj_by_fd(lambda xx: bilinear(sys, y1, y2, w, mu, xx), sys, v, w, mu, x)


def trilinear_x_adj(sys: DynSystem, v, y1, y2, y3, w: Array, mu: float, x: Array) -> Array:
    """n_x vector with entries sum_i conj(v_i) d c_i(y1, y2, y3)/dx_m."""
    if sys.trilinear_x_adj_eval is not None:
        out = 0
        for c, (a, b, c3) in _split_pairs(y1, y2, y3):
            for cv, (vv,) in _split_pairs(v):
                out = out + np.conj(cv) * c * np.asarray(
                    sys.trilinear_x_adj_eval(vv, a, b, c3, w, mu, x))
        return out
    return _x_adj_by_fd(lambda xx: trilinear(sys, y1, y2, y3, w, mu, xx), sys, v, w, mu, x)


def jac_x_adj(sys: DynSystem, v, y, w: Array, mu: float, x: Array) -> Array:
    """n_x vector with entries sum_ik conj(v_i) d2r_i/dw_k dx_m y_k.

    Fallback differences dr/dx along the state direction y, so the cost is
    two dr/dx evaluations per real direction, independent of n_x.
    """
    out = 0
    for cv, (vv,) in _split_pairs(v):
        for cy, (yy,) in _split_pairs(y):
            if sys.jac_x_adj_eval is not None:
                term = np.asarray(sys.jac_x_adj_eval(vv, yy, w, mu, x))
            else:
                e = sys.tensor_eps.eps_b
                Jp = x_partial(sys, w + e * yy, mu, x)
                Jm = x_partial(sys, w - e * yy, mu, x)
                term = (Jp - Jm).T @ vv / (2 * e)
            out = out + np.conj(cv) * cy * term
    return out
