"""Closed-form manufactured solutions and derived data for the benchmark cases.

Each solution supplies u, grad u, the Hessian of u, p and grad p by hand.
Everything else (f, h, grad h, Neumann data) is derived from those:

    f = alpha u - nu lap(u) + grad p,    h = -div u.
"""
from dataclasses import dataclass

import numpy as np

from .geometry import BC, build_case_mesh

PI = np.pi


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    nu: float

    def __post_init__(self):
        if self.alpha < 0 or self.nu < 0:
            raise ValueError("alpha and nu must be non-negative")
        if self.alpha == 0 and self.nu == 0:
            raise ValueError("alpha and nu must not both vanish")


class Solution:
    """Base for exact fields. Arrays returned have leading component axes."""

    def u(self, x, y):
        raise NotImplementedError

    def grad_u(self, x, y):
        """[i, j] = d u_i / d x_j."""
        raise NotImplementedError

    def hess_u(self, x, y):
        """[i, j, k] = d^2 u_i / d x_j d x_k."""
        raise NotImplementedError

    def p_raw(self, x, y):
        raise NotImplementedError

    def grad_p(self, x, y):
        raise NotImplementedError


def _h(*rows):
    """Symmetric Hessian stack from (xx, xy, yy) per component."""
    return np.array([[[xx, xy], [xy, yy]] for xx, xy, yy in rows])


class TrigSolution(Solution):
    """u = (sin pi x sin pi y, cos pi x cos pi y), p = 150 (x - 1/2)(y - 1/2)."""

    def u(self, x, y):
        return np.array([np.sin(PI * x) * np.sin(PI * y), np.cos(PI * x) * np.cos(PI * y)])

    def grad_u(self, x, y):
        sx, cx, sy, cy = np.sin(PI * x), np.cos(PI * x), np.sin(PI * y), np.cos(PI * y)
        return PI * np.array([[cx * sy, sx * cy], [-sx * cy, -cx * sy]])

    def hess_u(self, x, y):
        sx, cx, sy, cy = np.sin(PI * x), np.cos(PI * x), np.sin(PI * y), np.cos(PI * y)
        k = PI**2
        return _h((-k * sx * sy, k * cx * cy, -k * sx * sy),
                  (-k * cx * cy, k * sx * sy, -k * cx * cy))

    def p_raw(self, x, y):
        return 150.0 * (x - 0.5) * (y - 0.5)

    def grad_p(self, x, y):
        return np.array([150.0 * (y - 0.5), 150.0 * (x - 0.5)])


class KovasznaySolution(Solution):
    """Kovasznay-type fields with lambda = Re/2 - sqrt(Re^2/4 + 4 pi^2)."""

    def __init__(self, re):
        self.re = float(re)
        self.lam = self.re / 2 - np.sqrt(self.re**2 / 4 + 4 * PI**2)

    def u(self, x, y):
        lam, k = self.lam, 2 * PI
        E = np.exp(lam * x)
        return np.array([1 - E * np.cos(k * y), lam / k * E * np.sin(k * y)])

    def grad_u(self, x, y):
        lam, k = self.lam, 2 * PI
        E, C, S = np.exp(lam * x), np.cos(k * y), np.sin(k * y)
        return np.array([[-lam * E * C, k * E * S],
                         [lam**2 / k * E * S, lam * E * C]])

    def hess_u(self, x, y):
        lam, k = self.lam, 2 * PI
        E, C, S = np.exp(lam * x), np.cos(k * y), np.sin(k * y)
        return _h((-lam**2 * E * C, lam * k * E * S, k**2 * E * C),
                  (lam**3 / k * E * S, lam**2 * E * C, -lam * k * E * S))

    def p_raw(self, x, y):
        return 0.5 * np.exp(2 * self.lam * x)

    def grad_p(self, x, y):
        return np.array([self.lam * np.exp(2 * self.lam * x), np.zeros_like(np.asarray(y, dtype=float))])


class PolySolution(Solution):
    """u = (20 x y^3, 5 (x^4 - y^4)), p = 60 x^2 y - 20 y^3."""

    def u(self, x, y):
        return np.array([20 * x * y**3, 5 * (x**4 - y**4)])

    def grad_u(self, x, y):
        return np.array([[20 * y**3, 60 * x * y**2], [20 * x**3, -20 * y**3]])

    def hess_u(self, x, y):
        z = np.zeros_like(x * y)
        return _h((z, 60 * y**2, 120 * x * y), (60 * x**2, z, -60 * y**2))

    def p_raw(self, x, y):
        return 60 * x**2 * y - 20 * y**3

    def grad_p(self, x, y):
        return np.array([120 * x * y, 60 * x**2 - 60 * y**2])


class HoleSolution(Solution):
    """Cubic velocity / quintic pressure of the square-with-hole case (not solenoidal)."""

    def u(self, x, y):
        return np.array([
            x + y**2 - 2 * x * y + x**3 - 3 * x * y**2 + y * x**2,
            -y - 2 * x * y + y**2 - 3 * y * x**2 + x**3 - x * y**2,
        ])

    def grad_u(self, x, y):
        return np.array([
            [1 - 2 * y + 3 * x**2 - 3 * y**2 + 2 * x * y, 2 * y - 2 * x - 6 * x * y + x**2],
            [-2 * y - 6 * x * y + 3 * x**2 - y**2, -1 - 2 * x + 2 * y - 3 * x**2 - 2 * x * y],
        ])

    def hess_u(self, x, y):
        return _h((6 * x + 2 * y, -2 - 6 * y + 2 * x, 2 - 6 * x),
                  (-6 * y + 6 * x, -2 - 6 * x - 2 * y, 2 - 2 * x))

    def p_raw(self, x, y):
        return x * y + x + y + x**3 * y**2

    def grad_p(self, x, y):
        return np.array([y + 1 + 3 * x**2 * y**2, x + 1 + 2 * x**3 * y])


class LinearSolution(Solution):
    """u = (y, x), p = 0: reproduced exactly on affine meshes for W >= 1."""

    def u(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return np.array([y, x])

    def grad_u(self, x, y):
        one = np.ones(np.broadcast(x, y).shape)
        return np.array([[0 * one, one], [one, 0 * one]])

    def hess_u(self, x, y):
        return np.zeros((2, 2, 2) + np.broadcast(x, y).shape)

    def p_raw(self, x, y):
        return np.zeros(np.broadcast(x, y).shape)

    def grad_p(self, x, y):
        return np.zeros((2,) + np.broadcast(x, y).shape)


class ZeroSolution(LinearSolution):
    def u(self, x, y):
        return np.zeros((2,) + np.broadcast(x, y).shape)

    def grad_u(self, x, y):
        return np.zeros((2, 2) + np.broadcast(x, y).shape)


@dataclass(frozen=True, eq=False)
class CaseData:
    case_id: int
    spec: ProblemSpec
    solution: Solution
    c: float = 0.0
    param: float = None
    description: str = ""

    # exact fields
    def u(self, x, y):
        return self.solution.u(x, y)

    def grad_u(self, x, y):
        return self.solution.grad_u(x, y)

    def hess_u(self, x, y):
        return self.solution.hess_u(x, y)

    def p(self, x, y):
        return self.solution.p_raw(x, y) + self.c

    def grad_p(self, x, y):
        return self.solution.grad_p(x, y)

    # derived data
    def f(self, x, y):
        H = self.hess_u(x, y)
        lap = H[:, 0, 0] + H[:, 1, 1]
        return self.spec.alpha * self.u(x, y) - self.spec.nu * lap + self.grad_p(x, y)

    def h(self, x, y):
        G = self.grad_u(x, y)
        return -(G[0, 0] + G[1, 1])

    def grad_h(self, x, y):
        H = self.hess_u(x, y)
        return -(H[0, 0] + H[1, 1])

    def g(self, x, y):
        return self.u(x, y)

    def neumann(self, x, y, normal, tag):
        return neumann_operator(self.grad_u(x, y), self.p(x, y), normal, tag)


def neumann_operator(grad_u, p, normal, tag):
    """gamma_N(u, p) for a velocity gradient [i, j] = du_i/dx_j and unit normal."""
    if tag is BC.NEUMANN_A:
        flux = np.einsum("ij...,j...->i...", grad_u, normal)
    elif tag is BC.NEUMANN_B:
        sym = grad_u + np.swapaxes(grad_u, 0, 1)
        flux = np.einsum("ij...,j...->i...", sym, normal)
    else:
        raise ValueError(f"no Neumann operator for tag {tag}")
    return flux - p * normal


_DESCRIPTIONS = {
    1: "generalized Stokes (alpha=1, nu=1) on [0,1]^2, trigonometric solution, Dirichlet",
    2: "Stokes with viscosity 1/Re on [-1/2,1/2]x[0,1], Kovasznay-type solution, Dirichlet",
    3: "Stokes on quarter annulus 1<=r<=4, polynomial solution, Dirichlet",
    4: "Stokes on unit square with circular hole, polynomial solution, Dirichlet",
    5: "Stokes on [0,1]^2, trigonometric solution, du/dn - pn given on y=0",
    6: "Stokes on quarter annulus, polynomial solution, ((grad u + grad u^T) - pI)n given on y=0",
}


def describe_cases():
    return dict(_DESCRIPTIONS)


def make_case(case_id, re=None, nu=None):
    """CaseData for benchmark ``case_id``.

    ``re`` applies to case 2 only (default 1); ``nu`` overrides the viscosity of
    the other cases (default 1). With a pure Dirichlet boundary the pressure
    constant is chosen so the exact pressure vanishes at the mesh gauge point;
    otherwise it is zero.
    """
    if case_id not in _DESCRIPTIONS:
        raise ValueError(f"unknown case {case_id!r}")
    if case_id == 2:
        if nu is not None:
            raise ValueError("case 2 is parametrized by Re, not nu")
        re = 1.0 if re is None else float(re)
        if not np.isfinite(re) or re <= 0:
            raise ValueError(f"invalid Reynolds number {re!r}")
        spec, sol, param = ProblemSpec(0.0, 1.0 / re), KovasznaySolution(re), re
    else:
        if re is not None:
            raise ValueError("only case 2 takes a Reynolds number")
        nu = 1.0 if nu is None else float(nu)
        alpha = 1.0 if case_id == 1 else 0.0
        spec = ProblemSpec(alpha, nu)
        sol = {1: TrigSolution, 3: PolySolution, 4: HoleSolution,
               5: TrigSolution, 6: PolySolution}[case_id]()
        param = nu
    gauge = build_case_mesh(case_id).gauge_point()
    c = 0.0 if gauge is None else -float(sol.p_raw(gauge[0], gauge[1]))
    return CaseData(case_id, spec, sol, c, param, _DESCRIPTIONS[case_id])


def custom_case(solution, alpha, nu, mesh=None, case_id=0, param=None, description="custom"):
    """CaseData for an arbitrary Solution, gauged against ``mesh`` if given."""
    gauge = mesh.gauge_point() if mesh is not None else None
    c = 0.0 if gauge is None else -float(solution.p_raw(gauge[0], gauge[1]))
    return CaseData(case_id, ProblemSpec(float(alpha), float(nu)), solution, c, param, description)


def patch_case(mesh=None):
    """u = (y, x), p = 0 with alpha = nu = 1: exactly representable data."""
    return custom_case(LinearSolution(), 1.0, 1.0, mesh, description="linear patch test")


def zero_case(mesh=None):
    return custom_case(ZeroSolution(), 1.0, 1.0, mesh, description="zero solution")


def _fd_gradient(fun, x, y, step):
    fx = (fun(x + step, y) - fun(x - step, y)) / (2 * step)
    fy = (fun(x, y + step) - fun(x, y - step)) / (2 * step)
    return fx, fy


def _fd_laplacian(fun, x, y, step):
    """Fourth-order five-point second differences in each direction."""
    c = (-1.0, 16.0, -30.0, 16.0, -1.0)
    lap = 0.0
    for k, ck in zip(range(-2, 3), c):
        lap = lap + ck * (fun(x + k * step, y) + fun(x, y + k * step))
    return lap / (12 * step**2)


def pde_residual_check(case, points, step=1e-5, lap_step=1e-3):
    """Max |alpha u - nu lap u + grad p - f| and |-div u - h| over ``points``.

    Derivatives of the closed-form u and p are taken by finite differences,
    independently of the hand-derived gradients and Hessians: central
    differences with ``step`` for first derivatives and a fourth-order stencil
    with ``lap_step`` for the Laplacian (second differences at 1e-5 would be
    dominated by roundoff).
    """
    pts = np.asarray(points, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    ux, uy = _fd_gradient(case.u, x, y, step)
    lap = _fd_laplacian(case.u, x, y, lap_step)
    px, py = _fd_gradient(case.p, x, y, step)
    mom = case.spec.alpha * case.u(x, y) - case.spec.nu * lap + np.array([px, py]) - case.f(x, y)
    div = -(ux[0] + uy[1]) - case.h(x, y)
    return float(max(np.max(np.abs(mom)), np.max(np.abs(div))))
