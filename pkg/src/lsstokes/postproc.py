"""Broken-norm errors against the exact solution and convergence sweeps."""
import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import P, U1, U2, Metrics
from .basis import gauss_nodes, gll_nodes, interp_matrix, diff_matrix
from .geometry import build_case_mesh
from .problems import make_case
from .solver import DEFAULT_MAXITER, DEFAULT_TOL, solve


@dataclass
class ErrorReport:
    case_id: int
    W: int
    E_u_H1: float
    E_p_L2: float
    E_c_L2: float
    iterations: int = 0
    converged: bool = True
    seconds: float = 0.0
    param: float = None


def _ratio(num, den):
    # zero exact field: report the absolute error
    return np.sqrt(num / den) if den > 0 else np.sqrt(num)


def compute_errors(X, case, mesh, quad_points=None):
    """Relative broken H1 velocity error, relative L2 pressure error and the
    absolute L2 norm of the continuity residual -div z - h.

    With a pressure gauge both pressures are shifted to vanish at the gauge
    point before comparison.
    """
    X = np.asarray(X, dtype=float)
    L, _, n, _ = X.shape
    W = n - 1
    nodes = gll_nodes(n)
    quad = gauss_nodes(quad_points or max(2 * W, W + 3))
    E = interp_matrix(nodes, quad)
    ED = E @ diff_matrix(nodes)
    qx, qy = np.meshgrid(quad.nodes, quad.nodes, indexing="ij")
    w2 = np.outer(quad.weights, quad.weights)

    shift = 0.0
    if mesh.gauge is not None:
        el, (xi, eta) = mesh.gauge
        rx = interp_matrix(nodes, np.array([xi]))[0]
        ry = interp_matrix(nodes, np.array([eta]))[0]
        shift = rx @ X[el, P] @ ry
        gp = mesh.gauge_point()
        p_shift = float(case.p(gp[0], gp[1]))
    else:
        p_shift = 0.0

    eu = nrm_u = ep = nrm_p = ec = 0.0
    for l, emap in enumerate(mesh.elements):
        met = Metrics(emap, qx, qy)
        dA = w2 * met.J
        x, y = met.x
        Ji = met.Ji
        ue, Ge = case.u(x, y), case.grad_u(x, y)
        div_z = 0.0
        for c in (U1, U2):
            U = X[l, c]
            z = E @ U @ E.T
            zs, zt = ED @ U @ E.T, E @ U @ ED.T
            zx = Ji[0, 0] * zs + Ji[1, 0] * zt
            zy = Ji[0, 1] * zs + Ji[1, 1] * zt
            div_z = div_z + (zx if c == U1 else zy)
            eu += np.sum(dA * ((ue[c] - z) ** 2 + (Ge[c, 0] - zx) ** 2 + (Ge[c, 1] - zy) ** 2))
            nrm_u += np.sum(dA * (ue[c] ** 2 + Ge[c, 0] ** 2 + Ge[c, 1] ** 2))
        pe = case.p(x, y) - p_shift
        q = E @ X[l, P] @ E.T - shift
        ep += np.sum(dA * (pe - q) ** 2)
        nrm_p += np.sum(dA * pe**2)
        ec += np.sum(dA * (-div_z - case.h(x, y)) ** 2)
    return ErrorReport(case.case_id, W, float(_ratio(eu, nrm_u)), float(_ratio(ep, nrm_p)),
                       float(np.sqrt(ec)), param=case.param)


@dataclass
class SweepResult:
    reports: list
    slope_u: float
    slope_p: float
    all_converged: bool = field(init=False)

    def __post_init__(self):
        self.all_converged = all(r.converged for r in self.reports)


def exponential_slope(W, err):
    """Least-squares slope of ln(err) against W."""
    W = np.asarray(W, dtype=float)
    err = np.asarray(err, dtype=float)
    ok = err > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(W[ok], np.log(err[ok]), 1)[0])


def run_case(case, mesh, W, tol=DEFAULT_TOL, max_iter=DEFAULT_MAXITER, quad_order=None,
             preconditioned=True):
    t0 = time.perf_counter()
    _, X, rep = solve(mesh, W, case, tol, max_iter, quad_order, preconditioned)
    err = compute_errors(X, case, mesh)
    err.iterations, err.converged = rep.iterations, rep.converged
    err.seconds = time.perf_counter() - t0
    return err


def convergence_sweep(case, W_list, tol=DEFAULT_TOL, max_iter=DEFAULT_MAXITER, quad_extra=3,
                      mesh=None):
    """Solve for every W in ``W_list``; fit the exponential decay rate.

    ``case`` is a CaseData or a benchmark id. Non-converged solves stay in the
    result with ``converged = False``.
    """
    W_list = list(W_list)
    if not W_list or W_list != sorted(W_list):
        raise ValueError("W_list must be non-empty and ascending")
    if not hasattr(case, "spec"):
        case = make_case(case)
    mesh = mesh or build_case_mesh(case.case_id)
    reports = [run_case(case, mesh, W, tol, max_iter, W + quad_extra) for W in W_list]
    return SweepResult(
        reports,
        exponential_slope(W_list, [r.E_u_H1 for r in reports]),
        exponential_slope(W_list, [r.E_p_L2 for r in reports]),
    )
