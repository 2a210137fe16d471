"""Element maps from the reference square S = (-1, 1)^2 and the benchmark meshes.

Every map returns, for reference points (xi, eta), the physical point and its
first and second reference derivatives as arrays of shape ``(2,) + xi.shape``.

Side numbering used throughout the package::

    0: xi = -1    1: xi = +1    2: eta = -1    3: eta = +1

A side trace is parametrized by the free reference coordinate, ascending.
"""
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import GeometryError

SIDES = (0, 1, 2, 3)


class MapEval(NamedTuple):
    x: np.ndarray
    d_xi: np.ndarray
    d_eta: np.ndarray
    d_xixi: np.ndarray
    d_xieta: np.ndarray
    d_etaeta: np.ndarray


def side_coords(side, t):
    """Reference coordinates of the points with parameter ``t`` on ``side``."""
    t = np.asarray(t, dtype=float)
    fixed = np.full_like(t, -1.0 if side in (0, 2) else 1.0)
    if side in (0, 1):
        return fixed, t
    return t, fixed


class ElementMap:
    kind = None

    def evaluate(self, xi, eta):
        raise NotImplementedError

    def __call__(self, xi, eta):
        return self.evaluate(xi, eta).x

    def jacobian(self, xi, eta):
        e = self.evaluate(xi, eta)
        return e.d_xi[0] * e.d_eta[1] - e.d_eta[0] * e.d_xi[1]

    def outward_normal(self, side, t):
        """Outward unit normal on ``side`` at trace parameters ``t``."""
        e = self.evaluate(*side_coords(side, t))
        tang = e.d_eta if side in (0, 1) else e.d_xi
        # (ty, -tx) points to the right of the tangent; J > 0 fixes the sign
        n = np.array([tang[1], -tang[0]])
        if side in (0, 3):
            n = -n
        return n / np.hypot(n[0], n[1])


class AffineMap(ElementMap):
    """Bilinear map through four corners given counterclockwise from (-1,-1)."""

    kind = "affine"

    def __init__(self, corners):
        c = np.asarray(corners, dtype=float)
        if c.shape != (4, 2):
            raise GeometryError("affine map needs 4 corners of 2 coordinates")
        edges = np.roll(c, -1, axis=0) - c
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
        scale = np.max(np.abs(edges)) ** 2
        if np.any(cross <= 1e-12 * scale):
            raise GeometryError("corners must form a convex counterclockwise quadrilateral")
        self.corners = c
        c00, c10, c11, c01 = c
        self._a0 = 0.25 * (c00 + c10 + c11 + c01)
        self._a1 = 0.25 * (-c00 + c10 + c11 - c01)
        self._a2 = 0.25 * (-c00 - c10 + c11 + c01)
        self._a3 = 0.25 * (c00 - c10 + c11 - c01)

    def evaluate(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        a0, a1, a2, a3 = (a.reshape((2,) + (1,) * xi.ndim) for a in (self._a0, self._a1, self._a2, self._a3))
        zero = np.zeros((2,) + xi.shape)
        one = np.ones(xi.shape)
        return MapEval(
            x=a0 + a1 * xi + a2 * eta + a3 * xi * eta,
            d_xi=a1 * one + a3 * eta,
            d_eta=a2 * one + a3 * xi,
            d_xixi=zero,
            d_xieta=a3 * one,
            d_etaeta=zero.copy(),
        )


class PolarMap(ElementMap):
    """Annular sector: radius linear in xi, angle linear in eta."""

    kind = "polar"

    def __init__(self, r_in, r_out, theta_start, theta_end):
        if not 0 < r_in < r_out or not theta_start < theta_end:
            raise GeometryError("polar map needs 0 < r_in < r_out and theta_start < theta_end")
        self.r_in, self.r_out = float(r_in), float(r_out)
        self.theta_start, self.theta_end = float(theta_start), float(theta_end)

    def evaluate(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        dr = 0.5 * (self.r_out - self.r_in)
        dth = 0.5 * (self.theta_end - self.theta_start)
        r = self.r_in + dr * (xi + 1.0)
        th = self.theta_start + dth * (eta + 1.0)
        c, s = np.cos(th), np.sin(th)
        return MapEval(
            x=np.array([r * c, r * s]),
            d_xi=np.array([dr * c, dr * s]),
            d_eta=np.array([-r * dth * s, r * dth * c]),
            d_xixi=np.zeros((2,) + np.broadcast(xi, eta).shape),
            d_xieta=np.array([-dr * dth * s, dr * dth * c]),
            d_etaeta=np.array([-r * dth**2 * c, -r * dth**2 * s]),
        )


class Curve:
    """Parametric curve on t in [-1, 1]; ``eval`` returns (pos, d/dt, d2/dt2)."""

    def eval(self, t):
        raise NotImplementedError

    def __call__(self, t):
        return self.eval(t)[0]

    def rotated(self, center, angle):
        return _RotatedCurve(self, center, angle)


class LineCurve(Curve):
    def __init__(self, a, b):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        shape = (2,) + (1,) * t.ndim
        half = (0.5 * (self.b - self.a)).reshape(shape)
        pos = self.a.reshape(shape) + half * (t + 1.0)
        d1 = half * np.ones(t.shape)
        return pos, d1, np.zeros_like(d1)


class ArcCurve(Curve):
    def __init__(self, center, radius, phi0, phi1):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.phi0, self.phi1 = float(phi0), float(phi1)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        dphi = 0.5 * (self.phi1 - self.phi0)
        phi = self.phi0 + dphi * (t + 1.0)
        c, s = np.cos(phi), np.sin(phi)
        rho = self.radius
        pos = self.center.reshape((2,) + (1,) * t.ndim) + rho * np.array([c, s])
        d1 = rho * dphi * np.array([-s, c])
        d2 = -rho * dphi**2 * np.array([c, s])
        return pos, d1, d2


class _RotatedCurve(Curve):
    def __init__(self, base, center, angle):
        self.base = base
        self.center = np.asarray(center, dtype=float)
        c, s = np.cos(angle), np.sin(angle)
        self.R = np.array([[c, -s], [s, c]])

    def eval(self, t):
        pos, d1, d2 = self.base.eval(t)
        shape = (2,) + (1,) * (pos.ndim - 1)
        ctr = self.center.reshape(shape)
        rot = lambda v: np.tensordot(self.R, v, axes=1)
        return ctr + rot(pos - ctr), rot(d1), rot(d2)


class BlendingMap(ElementMap):
    """Gordon-Hall transfinite interpolation of four side curves.

    ``sides`` are (bottom, top, left, right): bottom/top are parametrized by
    xi, left/right by eta, all ascending.
    """

    kind = "blending"

    def __init__(self, sides, tol=1e-12):
        bottom, top, left, right = sides
        self.bottom, self.top, self.left, self.right = bottom, top, left, right
        m, p = np.array(-1.0), np.array(1.0)
        pairs = [(bottom(m), left(m)), (bottom(p), right(m)), (top(m), left(p)), (top(p), right(p))]
        for a, b in pairs:
            if np.max(np.abs(a - b)) > tol:
                raise GeometryError(f"side curves do not meet at corner: {a} vs {b}")
        self._p00, self._p10, self._p01, self._p11 = (0.5 * (a + b) for a, b in pairs)

    def evaluate(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        xi, eta = np.broadcast_arrays(xi, eta)
        B, B1, B2 = self.bottom.eval(xi)
        T, T1, T2 = self.top.eval(xi)
        Lf, L1, L2 = self.left.eval(eta)
        R, R1, R2 = self.right.eval(eta)
        shape = (2,) + (1,) * xi.ndim
        p00, p10, p01, p11 = (q.reshape(shape) for q in (self._p00, self._p10, self._p01, self._p11))
        em, ep, xm, xp = 0.5 * (1 - eta), 0.5 * (1 + eta), 0.5 * (1 - xi), 0.5 * (1 + xi)

        bil = xm * em * p00 + xp * em * p10 + xm * ep * p01 + xp * ep * p11
        bil_xi = 0.5 * (-em * p00 + em * p10 - ep * p01 + ep * p11)
        bil_eta = 0.5 * (-xm * p00 - xp * p10 + xm * p01 + xp * p11)
        bil_xieta = 0.25 * (p00 - p10 - p01 + p11) * np.ones(xi.shape)

        return MapEval(
            x=em * B + ep * T + xm * Lf + xp * R - bil,
            d_xi=em * B1 + ep * T1 - 0.5 * Lf + 0.5 * R - bil_xi,
            d_eta=-0.5 * B + 0.5 * T + xm * L1 + xp * R1 - bil_eta,
            d_xixi=em * B2 + ep * T2,
            d_xieta=-0.5 * B1 + 0.5 * T1 - 0.5 * L1 + 0.5 * R1 - bil_xieta,
            d_etaeta=xm * L2 + xp * R2,
        )


def make_affine_map(corners):
    return AffineMap(corners)


def make_polar_map(r_in, r_out, theta_start, theta_end):
    return PolarMap(r_in, r_out, theta_start, theta_end)


def make_blending_map(sides):
    return BlendingMap(sides)


class BC(str, Enum):
    DIRICHLET = "Dirichlet"
    NEUMANN_A = "NeumannA"  # du/dn - p n
    NEUMANN_B = "NeumannB"  # ((grad u + grad u^T) - p I) n


@dataclass(frozen=True)
class InteriorEdge:
    element_a: int
    side_a: int
    element_b: int
    side_b: int
    reversed: bool

    def swapped(self):
        return InteriorEdge(self.element_b, self.side_b, self.element_a, self.side_a, self.reversed)


@dataclass(frozen=True)
class BoundaryEdge:
    element: int
    side: int
    tag: BC


@dataclass(frozen=True)
class Mesh:
    elements: tuple
    edges: tuple
    gauge: tuple = None  # (element, (xi, eta)) or None when pressure is fixed by BCs

    @property
    def interior_edges(self):
        return [e for e in self.edges if isinstance(e, InteriorEdge)]

    @property
    def boundary_edges(self):
        return [e for e in self.edges if isinstance(e, BoundaryEdge)]

    def has_neumann(self):
        return any(e.tag is not BC.DIRICHLET for e in self.boundary_edges)

    def gauge_point(self):
        """Physical location of the pressure gauge, or None."""
        if self.gauge is None:
            return None
        el, (xi, eta) = self.gauge
        return self.elements[el](np.array(xi), np.array(eta))


def side_trace(emap, side, t):
    return emap(*side_coords(side, t))


def connect(elements, tagger=None, tol=1e-10, check_points=9):
    """Find interior edges by matching side endpoints; tag the rest.

    ``tagger(midpoint) -> BC`` chooses the boundary condition of a boundary
    side; default is Dirichlet everywhere.
    """
    ends = np.array([-1.0, 1.0])
    info = []
    for el, emap in enumerate(elements):
        for s in SIDES:
            info.append((el, s, side_trace(emap, s, ends).T))
    used = set()
    edges = []
    t = np.linspace(-1.0, 1.0, check_points)
    for i, (ea, sa, pa) in enumerate(info):
        if (ea, sa) in used:
            continue
        match = None
        for eb, sb, pb in info[i + 1:]:
            if (eb, sb) in used or eb == ea:
                continue
            if np.allclose(pa, pb, atol=tol, rtol=0):
                match = (eb, sb, False)
            elif np.allclose(pa, pb[::-1], atol=tol, rtol=0):
                match = (eb, sb, True)
            if match:
                break
        if match is None:
            continue
        eb, sb, rev = match
        xa = side_trace(elements[ea], sa, t)
        xb = side_trace(elements[eb], sb, -t if rev else t)
        if np.max(np.abs(xa - xb)) > 1e-12 * max(1.0, np.max(np.abs(xa))):
            raise GeometryError(f"sides ({ea},{sa}) and ({eb},{sb}) share corners but not the curve")
        used.update({(ea, sa), (eb, sb)})
        edges.append(InteriorEdge(ea, sa, eb, sb, rev))
    for el, s, _ in info:
        if (el, s) in used:
            continue
        mid = side_trace(elements[el], s, np.array(0.0))
        tag = tagger(mid) if tagger else BC.DIRICHLET
        edges.append(BoundaryEdge(el, s, tag))
    return edges


def _grid_2x2(x0, x1, y0, y1):
    xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    elements = []
    for (ya, yb) in ((y0, ym), (ym, y1)):
        for (xa, xb) in ((x0, xm), (xm, x1)):
            elements.append(AffineMap([(xa, ya), (xb, ya), (xb, yb), (xa, yb)]))
    return elements


def _annulus():
    elements = []
    for th in ((0.0, np.pi / 4), (np.pi / 4, np.pi / 2)):
        for r in ((1.0, 2.0), (2.0, 4.0)):
            elements.append(PolarMap(r[0], r[1], *th))
    return elements


def square_with_hole(center=(0.5, 0.5), radius=0.2):
    """Unit square minus a disk: four blending elements cut along the diagonals."""
    c = np.asarray(center, dtype=float)
    arc = ArcCurve(c, radius, 1.25 * np.pi, 1.75 * np.pi)
    a0, a1 = arc(np.array(-1.0)), arc(np.array(1.0))
    bottom = LineCurve((0.0, 0.0), (1.0, 0.0))
    left = LineCurve((0.0, 0.0), a0)
    right = LineCurve((1.0, 0.0), a1)
    elements = []
    for k in range(4):
        ang = 0.5 * np.pi * k
        sides = [crv.rotated(c, ang) for crv in (bottom, arc, left, right)]
        elements.append(BlendingMap(sides))
    return elements


def _on_line_y0(mid):
    return BC.NEUMANN_A if abs(mid[1]) < 1e-12 else BC.DIRICHLET


def _on_positive_x_axis(mid):
    return BC.NEUMANN_B if abs(mid[1]) < 1e-12 and mid[0] > 0 else BC.DIRICHLET


CASE_IDS = (1, 2, 3, 4, 5, 6)


def build_case_mesh(case_id):
    """Benchmark mesh for cases 1-6 (see README for the decompositions)."""
    tagger = None
    if case_id in (1, 5):
        elements = _grid_2x2(0.0, 1.0, 0.0, 1.0)
        tagger = _on_line_y0 if case_id == 5 else None
    elif case_id == 2:
        elements = _grid_2x2(-0.5, 0.5, 0.0, 1.0)
    elif case_id in (3, 6):
        elements = _annulus()
        tagger = _on_positive_x_axis if case_id == 6 else None
    elif case_id == 4:
        elements = square_with_hole()
    else:
        raise ValueError(f"unknown case {case_id!r}; expected one of {CASE_IDS}")
    edges = connect(elements, tagger)
    mesh = Mesh(tuple(elements), tuple(edges), gauge=(0, (-1.0, -1.0)))
    if mesh.has_neumann():
        mesh = Mesh(mesh.elements, mesh.edges, gauge=None)
    return mesh


def mesh_from_elements(elements, tagger=None, gauge=(0, (-1.0, -1.0))):
    """Assemble a Mesh from arbitrary element maps."""
    elements = tuple(elements)
    edges = tuple(connect(elements, tagger))
    mesh = Mesh(elements, edges, gauge)
    if gauge is not None and mesh.has_neumann():
        mesh = Mesh(elements, edges, None)
    return mesh
