import numpy as np
import pytest

from lsstokes.basis import gauss_nodes, gll_nodes
from lsstokes.errors import GeometryError
from lsstokes.geometry import (
    BC, CASE_IDS, ArcCurve, LineCurve, build_case_mesh, make_affine_map, make_blending_map,
    make_polar_map, side_trace, square_with_hole,
)

GRID = np.linspace(-1, 1, 5)
XI, ETA = np.meshgrid(GRID, GRID, indexing="ij")


def test_affine_examples():
    m = make_affine_map([(0, 0), (0.5, 0), (0.5, 0.5), (0, 0.5)])
    np.testing.assert_allclose(m.jacobian(XI, ETA), 1 / 16, atol=1e-16)
    np.testing.assert_allclose(m(np.array(-1.0), np.array(-1.0)), [0, 0], atol=1e-16)
    unit = make_affine_map([(0, 0), (1, 0), (1, 1), (0, 1)])
    np.testing.assert_allclose(unit(np.array(0.0), np.array(0.0)), [0.5, 0.5], atol=1e-16)


@pytest.mark.parametrize("corners", [
    [(0, 0), (1, 0), (1, 1), (1, 0)],              # degenerate
    [(0, 0), (0, 1), (1, 1), (1, 0)],              # clockwise
    [(0, 0), (1, 0), (0.2, 0.2), (0, 1)],          # reentrant
])
def test_affine_rejects_bad_corners(corners):
    with pytest.raises(GeometryError):
        make_affine_map(corners)


def test_polar_examples():
    m = make_polar_map(1.0, 2.0, 0.0, np.pi / 4)
    x = m(np.array(0.0), np.array(0.0))
    np.testing.assert_allclose(x, [1.5 * np.cos(np.pi / 8), 1.5 * np.sin(np.pi / 8)], atol=1e-15)
    np.testing.assert_allclose(x, [1.385819, 0.574025], atol=1e-6)
    np.testing.assert_allclose(m(np.array(-1.0), np.array(-1.0)), [1, 0], atol=1e-15)
    assert abs(m.jacobian(np.array(0.0), np.array(0.0)) - 1.5 * 0.5 * np.pi / 8) < 1e-15
    assert np.all(m.jacobian(XI, ETA) > 0)


def test_blending_of_lines_is_affine():
    corners = np.array([(0.1, -0.2), (1.3, 0.1), (1.0, 1.2), (-0.1, 0.9)])
    aff = make_affine_map(corners)
    bl = make_blending_map([
        LineCurve(corners[0], corners[1]), LineCurve(corners[3], corners[2]),
        LineCurve(corners[0], corners[3]), LineCurve(corners[1], corners[2]),
    ])
    ea, eb = aff.evaluate(XI, ETA), bl.evaluate(XI, ETA)
    for a, b in zip(ea, eb):
        np.testing.assert_allclose(a, b, atol=1e-12)
    for (xi, eta), c in zip([(-1, -1), (1, -1), (1, 1), (-1, 1)], corners):
        np.testing.assert_allclose(bl(np.array(float(xi)), np.array(float(eta))), c, atol=1e-15)


def test_blending_corner_mismatch():
    with pytest.raises(GeometryError):
        make_blending_map([
            LineCurve((0, 0), (1, 0)), LineCurve((0, 1), (1, 1)),
            LineCurve((0, 0), (0, 1)), LineCurve((1, 0.1), (1, 1)),
        ])


def test_hole_arc_midpoint_on_circle():
    for emap in square_with_hole():
        mid = emap(np.array(0.0), np.array(1.0))
        assert abs(np.hypot(*(mid - 0.5)) - 0.2) < 1e-12
        # the outer side lies on the unit square boundary
        out = side_trace(emap, 2, np.linspace(-1, 1, 7))
        on_edge = np.isclose(out, 0, atol=1e-14) | np.isclose(out, 1, atol=1e-14)
        assert np.all(on_edge.any(axis=0))


def test_case1_topology():
    mesh = build_case_mesh(1)
    assert len(mesh.elements) == 4
    assert len(mesh.interior_edges) == 4
    assert len(mesh.boundary_edges) == 8
    assert all(e.tag is BC.DIRICHLET for e in mesh.boundary_edges)
    np.testing.assert_allclose(mesh.gauge_point(), [0, 0])


def test_case5_neumann_edges():
    mesh = build_case_mesh(5)
    neu = [e for e in mesh.boundary_edges if e.tag is BC.NEUMANN_A]
    assert len(neu) == 2
    for e in neu:
        pts = side_trace(mesh.elements[e.element], e.side, np.linspace(-1, 1, 5))
        np.testing.assert_allclose(pts[1], 0, atol=1e-15)
    assert mesh.gauge is None


def test_case6_neumann_edges():
    mesh = build_case_mesh(6)
    neu = [e for e in mesh.boundary_edges if e.tag is not BC.DIRICHLET]
    assert len(neu) == 2 and all(e.tag is BC.NEUMANN_B for e in neu)
    for e in neu:
        pts = side_trace(mesh.elements[e.element], e.side, np.linspace(-1, 1, 5))
        np.testing.assert_allclose(pts[1], 0, atol=1e-15)
        assert np.all(pts[0] >= 1 - 1e-15)


def test_case4_hole_is_dirichlet():
    mesh = build_case_mesh(4)
    assert len(mesh.interior_edges) == 4 and len(mesh.boundary_edges) == 8
    assert all(e.tag is BC.DIRICHLET for e in mesh.boundary_edges)


def test_unknown_case():
    with pytest.raises(ValueError):
        build_case_mesh(9)


@pytest.mark.parametrize("case_id", CASE_IDS)
def test_every_side_in_one_edge(case_id):
    mesh = build_case_mesh(case_id)
    seen = []
    for e in mesh.edges:
        if hasattr(e, "element_a"):
            assert e.element_a != e.element_b
            seen += [(e.element_a, e.side_a), (e.element_b, e.side_b)]
        else:
            seen.append((e.element, e.side))
    assert sorted(seen) == [(l, s) for l in range(len(mesh.elements)) for s in range(4)]


@pytest.mark.parametrize("case_id", CASE_IDS)
def test_interior_trace_consistency(case_id):
    mesh = build_case_mesh(case_id)
    t = np.linspace(-1, 1, 41)
    for e in mesh.interior_edges:
        xa = side_trace(mesh.elements[e.element_a], e.side_a, t)
        xb = side_trace(mesh.elements[e.element_b], e.side_b, -t if e.reversed else t)
        assert np.max(np.abs(xa - xb)) <= 1e-12


@pytest.mark.parametrize("case_id", CASE_IDS)
def test_jacobian_positive(case_id):
    mesh = build_case_mesh(case_id)
    for W in range(1, 17):
        for rule in (gll_nodes(W + 1), gauss_nodes(W + 3)):
            xi, eta = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
            for emap in mesh.elements:
                assert np.all(emap.jacobian(xi, eta) > 0)


@pytest.mark.parametrize("case_id", [1, 2, 3, 4])
def test_bijective_on_sample_grid(case_id):
    g = np.linspace(-1, 1, 9)
    xi, eta = np.meshgrid(g, g, indexing="ij")
    for emap in build_case_mesh(case_id).elements:
        pts = emap(xi, eta).reshape(2, -1).T
        d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        assert np.min(d + np.eye(len(pts))) > 1e-6


def _fd_derivatives(emap, xi, eta, h):
    f = lambda a, b: emap(a, b)
    d_xi = (f(xi + h, eta) - f(xi - h, eta)) / (2 * h)
    d_eta = (f(xi, eta + h) - f(xi, eta - h)) / (2 * h)
    return d_xi, d_eta


def _all_maps():
    maps = []
    for cid in (1, 3, 4):
        maps += list(build_case_mesh(cid).elements)
    maps.append(make_affine_map([(0.1, -0.2), (1.3, 0.1), (1.0, 1.2), (-0.1, 0.9)]))
    arc = ArcCurve((0, -2), 2.5, 0.4 * np.pi, 0.6 * np.pi).rotated((0, 0), 0.1)
    a0, a1 = arc(np.array(-1.0)), arc(np.array(1.0))
    maps.append(make_blending_map([
        arc, LineCurve((-0.4, 1.5), (0.4, 1.5)), LineCurve(a0, (-0.4, 1.5)), LineCurve(a1, (0.4, 1.5)),
    ]))
    return maps


def test_metric_identity_by_finite_differences():
    g = np.linspace(-0.9, 0.9, 5)
    xi, eta = np.meshgrid(g, g, indexing="ij")
    h = 1e-5
    for emap in _all_maps():
        ev = emap.evaluate(xi, eta)
        d_xi, d_eta = _fd_derivatives(emap, xi, eta, h)
        np.testing.assert_allclose(d_xi, ev.d_xi, atol=1e-8)
        np.testing.assert_allclose(d_eta, ev.d_eta, atol=1e-8)
        # second derivatives: central differences of the analytic first derivatives
        fd = lambda a, b: emap.evaluate(a, b)
        dd_xi = (fd(xi + h, eta).d_xi - fd(xi - h, eta).d_xi) / (2 * h)
        dd_eta = (fd(xi, eta + h).d_eta - fd(xi, eta - h).d_eta) / (2 * h)
        dd_mix = (fd(xi, eta + h).d_xi - fd(xi, eta - h).d_xi) / (2 * h)
        np.testing.assert_allclose(dd_xi, ev.d_xixi, atol=1e-5)
        np.testing.assert_allclose(dd_eta, ev.d_etaeta, atol=1e-5)
        np.testing.assert_allclose(dd_mix, ev.d_xieta, atol=1e-5)


def test_outward_normals_unit_square():
    m = make_affine_map([(0, 0), (1, 0), (1, 1), (0, 1)])
    t = np.linspace(-1, 1, 3)
    expected = {0: (-1, 0), 1: (1, 0), 2: (0, -1), 3: (0, 1)}
    for side, nrm in expected.items():
        n = m.outward_normal(side, t)
        np.testing.assert_allclose(n, np.array(nrm, float)[:, None] * np.ones(3), atol=1e-15)
