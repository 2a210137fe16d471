"""Preconditioned conjugate gradients on the normal equations.

The preconditioner is block diagonal per element: the H2(S) Gram matrix on
each velocity component and the H1(S) Gram matrix on the pressure.
"""
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .assembly import LeastSquaresSystem
from .errors import DivergenceError, NotSPDError
from .norms import square_tables

DEFAULT_TOL = 1e-10
DEFAULT_MAXITER = 20000


def _factor(G):
    try:
        return scipy.linalg.cho_factor(np.asarray(G, dtype=float), lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError(f"preconditioner block is not SPD: {exc}") from exc


class Preconditioner:
    """Applies the inverse of the element-wise U^{L,W} quadratic form."""

    def __init__(self, g1, g2, factors=None):
        self.g1, self.g2 = g1, g2
        self.chol1, self.chol2 = factors or (_factor(g1), _factor(g2))

    @classmethod
    def for_order(cls, order):
        t = square_tables(order)
        return cls(t.g1, t.g2, (t.chol1, t.chol2))

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        nn = self.g1.shape[0]
        V = v.reshape(-1, 3, nn)
        out = np.empty_like(V)
        vel = V[:, :2].reshape(-1, nn).T
        out[:, :2] = scipy.linalg.cho_solve(self.chol2, vel).T.reshape(-1, 2, nn)
        out[:, 2] = scipy.linalg.cho_solve(self.chol1, V[:, 2].T).T
        return out.reshape(v.shape)

    __call__ = apply


def identity_preconditioner(v):
    return np.array(v, dtype=float, copy=True)


@dataclass
class SolveReport:
    iterations: int
    residual: float
    converged: bool
    seconds: float
    history: list = None


def pcg_solve(action, rhs, precond=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAXITER,
              callback=None, keep_history=False):
    """Solve A x = rhs for SPD ``action`` with preconditioner ``precond``.

    Stops when ||A x - rhs||_{P^-1} <= tol * ||rhs||_{P^-1}. Starts from zero.
    ``callback(k, x)`` is called after every iteration.
    """
    t0 = time.perf_counter()
    precond = precond or identity_preconditioner
    b = np.asarray(rhs, dtype=float)
    x = np.zeros_like(b)
    r = b.copy()
    z = precond(r)
    rz = float(r.ravel() @ z.ravel())
    if not np.isfinite(rz):
        raise DivergenceError("non-finite preconditioned residual")
    if rz < 0:
        raise NotSPDError("preconditioner is not positive definite")
    norm0 = np.sqrt(rz)
    history = [1.0] if keep_history else None
    if norm0 == 0.0:
        return x, SolveReport(0, 0.0, True, time.perf_counter() - t0, history)
    d = z.copy()
    rel = 1.0
    k = 0
    while k < max_iter:
        q = action(d)
        dq = float(d.ravel() @ q.ravel())
        if not np.isfinite(dq):
            raise DivergenceError(f"non-finite curvature at iteration {k}")
        if dq <= 0:
            raise NotSPDError(f"operator not positive definite (d^T A d = {dq:g})")
        alpha = rz / dq
        x += alpha * d
        r -= alpha * q
        z = precond(r)
        rz_new = float(r.ravel() @ z.ravel())
        if not np.isfinite(rz_new):
            raise DivergenceError(f"non-finite residual at iteration {k}")
        k += 1
        rel = np.sqrt(max(rz_new, 0.0)) / norm0
        if keep_history:
            history.append(rel)
        if callback is not None:
            callback(k, x)
        if rel <= tol:
            break
        d = z + (rz_new / rz) * d
        rz = rz_new
    return x, SolveReport(k, float(rel), bool(rel <= tol), time.perf_counter() - t0, history)


def solve_system(system, tol=DEFAULT_TOL, max_iter=DEFAULT_MAXITER, preconditioned=True):
    """Minimize the functional of a LeastSquaresSystem. Returns (X, report)."""
    precond = Preconditioner.for_order(system.order) if preconditioned else None
    x, report = pcg_solve(system.normal_action, system.normal_rhs(), precond, tol, max_iter)
    return x.reshape(system.shape), report


def solve(mesh, order, case, tol=DEFAULT_TOL, max_iter=DEFAULT_MAXITER, quad_order=None,
          preconditioned=True):
    system = LeastSquaresSystem(mesh, order, case, quad_order)
    X, report = solve_system(system, tol, max_iter, preconditioned)
    return system, X, report
