"""The least-squares functional and its matrix-free normal operator.

The functional is a sum of terms ``(B x - c)^T M (B x - c)``. Each term owns a
linear residual operator B (``apply``), its transpose (``adjoint``), the weight
M of its quadratic form (``weight``) and the data c. The normal operator is
``sum_i B_i^T M_i B_i`` and is only ever applied, never assembled.

Field layout: ``X[l, v, i, j]`` with element l, variable v in (u1, u2, p) and
GLL indices i along xi, j along eta. The flat DOF vector is ``X.ravel()``.
"""
import numpy as np

from .basis import diff_matrix, gauss_nodes, gll_nodes, interp_matrix
from .errors import LayoutError
from .geometry import BC, side_coords
from .norms import edge_tables
from .problems import neumann_operator

U1, U2, P = 0, 1, 2
NVARS = 3
# reference derivative slots: (xi-operator, eta-operator) with 0 value, 1 d, 2 d^2
REF_PAIRS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
# physical derivative slots
VAL, DX, DY, DXX, DXY, DYY = range(6)


class Metrics:
    """Map derivatives and Jacobian quantities at a set of reference points."""

    def __init__(self, emap, xi, eta):
        e = emap.evaluate(xi, eta)
        self.x = e.x
        (x_s, y_s), (x_t, y_t) = e.d_xi, e.d_eta
        self.x_xi, self.y_xi, self.x_eta, self.y_eta = x_s, y_s, x_t, y_t
        J = x_s * y_t - x_t * y_s
        if np.any(J <= 0):
            raise ValueError("non-positive Jacobian")
        self.J = J
        self.sqrtJ = np.sqrt(J)
        # Ji = inverse of [[x_xi, x_eta], [y_xi, y_eta]]
        self.Ji = np.array([[y_t, -x_t], [-y_s, x_s]]) / J
        self.hess_x = np.array([[e.d_xixi[0], e.d_xieta[0]], [e.d_xieta[0], e.d_etaeta[0]]])
        self.hess_y = np.array([[e.d_xixi[1], e.d_xieta[1]], [e.d_xieta[1], e.d_etaeta[1]]])
        J_xi = e.d_xixi[0] * y_t + x_s * e.d_xieta[1] - e.d_xieta[0] * y_s - x_t * e.d_xixi[1]
        J_eta = e.d_xieta[0] * y_t + x_s * e.d_etaeta[1] - e.d_etaeta[0] * y_s - x_t * e.d_xieta[1]
        self.sqrtJ_xi = J_xi / (2 * self.sqrtJ)
        self.sqrtJ_eta = J_eta / (2 * self.sqrtJ)

    def physical(self, ref):
        """Map reference derivative slots (6, ...) to physical slots (6, ...)."""
        v, v_s, v_t, v_ss, v_st, v_tt = ref
        Ji = self.Ji
        v_x = Ji[0, 0] * v_s + Ji[1, 0] * v_t
        v_y = Ji[0, 1] * v_s + Ji[1, 1] * v_t
        Hc = np.array([[v_ss, v_st], [v_st, v_tt]]) - v_x * self.hess_x - v_y * self.hess_y
        Hp = np.einsum("ca...,cd...,db...->ab...", Ji, Hc, Ji)
        return np.array([v, v_x, v_y, Hp[0, 0], Hp[0, 1], Hp[1, 1]])

    def transform(self):
        """P[phys, ref, ...]: the linear map applied by ``physical``."""
        shape = self.J.shape
        cols = []
        for k in range(6):
            e = np.zeros((6,) + shape)
            e[k] = 1.0
            cols.append(self.physical(e))
        return np.stack(cols, axis=1)


class Term:
    """One quadratic term of the functional."""

    name = "term"

    def apply(self, X):
        raise NotImplementedError

    def adjoint(self, R):
        raise NotImplementedError

    def weight(self, R):
        raise NotImplementedError

    def value(self, X):
        r = self.apply(X) - self.data
        return float(np.sum(r * self.weight(r)))


class VolumeTerm(Term):
    """Pointwise linear combination of reference derivatives at quadrature points."""

    def __init__(self, name, ops, coeff, data, weights):
        self.name = name
        self.ops = ops          # (E, E D, E D D), each (m, n)
        self.coeff = coeff      # (L, R, 3, 6, m*m)
        self.data = data        # (L, R, m*m)
        self.w = weights        # (m*m,)

    def reference(self, X):
        L, V, n, _ = X.shape
        m = self.ops[0].shape[0]
        T = [A @ X for A in self.ops]
        ref = np.empty((L, V, 6, m, m))
        for k, (a, b) in enumerate(REF_PAIRS):
            ref[:, :, k] = T[a] @ self.ops[b].T
        return ref.reshape(L, V, 6, m * m)

    def reference_adjoint(self, refbar):
        L, V = refbar.shape[:2]
        m, n = self.ops[0].shape
        refbar = refbar.reshape(L, V, 6, m, m)
        # group by xi-operator so each of its transposes is applied once
        S = [np.zeros((L, V, m, n)) for _ in self.ops]
        for k, (a, b) in enumerate(REF_PAIRS):
            S[a] += refbar[:, :, k] @ self.ops[b]
        return sum(A.T @ s for A, s in zip(self.ops, S))

    def apply(self, X):
        return np.einsum("lrvkq,lvkq->lrq", self.coeff, self.reference(X))

    def adjoint(self, R):
        return self.reference_adjoint(np.einsum("lrvkq,lrq->lvkq", self.coeff, R))

    def weight(self, R):
        return R * self.w


class EdgeTerm(Term):
    """Residuals on element sides: stacked small trace operators.

    ``ops_a[e, c]`` maps the element-a DOFs of variable ``var[c]`` to the
    trace of residual component c; optional ``ops_b`` is subtracted into a jump.
    For coupled components (Neumann) ``ops_a`` has shape (E, C, 3, n, n^2).
    """

    def __init__(self, name, shape, elem_a, ops_a, weights, data, elem_b=None, ops_b=None, var=None):
        self.name = name
        self.shape = shape      # full field shape (L, 3, n, n)
        self.elem_a = np.asarray(elem_a, dtype=int)
        self.elem_b = None if elem_b is None else np.asarray(elem_b, dtype=int)
        self.ops_a, self.ops_b = ops_a, ops_b
        self.var = None if var is None else np.asarray(var, dtype=int)
        self.wmats = weights    # (C, n, n)
        self.data = data        # (E, C, n)

    def _side(self, X, elem, ops):
        Xf = X.reshape(X.shape[0], NVARS, -1)[elem]
        if self.var is None:
            return np.einsum("ecvin,evn->eci", ops, Xf)
        return np.einsum("ecin,ecn->eci", ops, Xf[:, self.var])

    def _side_adjoint(self, R, elem, ops, out):
        if self.var is None:
            np.add.at(out, elem, np.einsum("ecvin,eci->evn", ops, R))
        else:
            np.add.at(out, (elem[:, None], self.var[None, :]), np.einsum("ecin,eci->ecn", ops, R))

    def apply(self, X):
        if len(self.elem_a) == 0:
            return np.zeros_like(self.data)
        r = self._side(X, self.elem_a, self.ops_a)
        if self.ops_b is not None:
            r = self._side(X, self.elem_b, self.ops_b) - r
        return r

    def adjoint(self, R):
        L, _, n, _ = self.shape
        out = np.zeros((L, NVARS, n * n))
        if len(self.elem_a):
            if self.ops_b is not None:
                self._side_adjoint(R, self.elem_b, self.ops_b, out)
                self._side_adjoint(-R, self.elem_a, self.ops_a, out)
            else:
                self._side_adjoint(R, self.elem_a, self.ops_a, out)
        return out.reshape(self.shape)

    def weight(self, R):
        return np.einsum("cij,ecj->eci", self.wmats, R)


class GaugeTerm(Term):
    """(p(gauge) - p_exact(gauge))^2 pinning the pressure constant."""

    name = "gauge"

    def __init__(self, element, row, value, shape):
        self.element, self.row = element, row
        self.data = np.array([value])
        self.shape = shape

    def apply(self, X):
        return np.array([self.row @ X[self.element, P].ravel()])

    def adjoint(self, R):
        out = np.zeros(self.shape)
        n = self.shape[-1]
        out[self.element, P] = (R[0] * self.row).reshape(n, n)
        return out

    def weight(self, R):
        return R


def side_indices(side, n):
    """Flat nodal indices of a side, ordered by ascending trace parameter."""
    k = np.arange(n)
    return {0: k, 1: (n - 1) * n + k, 2: k * n, 3: k * n + n - 1}[side]


class LeastSquaresSystem:
    """Residual operators, data and normal equations for one (mesh, W, case).

    ``quad_order`` is the number of Gauss points per direction for volume
    residuals (default W + 3).
    """

    def __init__(self, mesh, order, case, quad_order=None):
        if order < 1:
            raise ValueError("polynomial order W must be >= 1")
        self.mesh, self.order, self.case = mesh, int(order), case
        self.spec = case.spec
        n = self.n = self.order + 1
        self.L = len(mesh.elements)
        self.shape = (self.L, NVARS, n, n)
        self.size = int(np.prod(self.shape))
        self.nodes = gll_nodes(n)
        self.quad = gauss_nodes(quad_order or self.order + 3)
        self.D = diff_matrix(self.nodes)
        E = interp_matrix(self.nodes, self.quad)
        self.ops = (E, E @ self.D, E @ self.D @ self.D)
        self.edge_tables = edge_tables(self.order)

        qx, qy = np.meshgrid(self.quad.nodes, self.quad.nodes, indexing="ij")
        self.quad_metrics = [Metrics(em, qx, qy) for em in mesh.elements]
        gx, gy = np.meshgrid(self.nodes.nodes, self.nodes.nodes, indexing="ij")
        self.node_metrics = [Metrics(em, gx, gy) for em in mesh.elements]
        self.weights2d = np.outer(self.quad.weights, self.quad.weights).ravel()

        self.terms = [self._momentum_term(), self._continuity_term(), self._jump_term()]
        self.terms += [t for t in (self._dirichlet_term(), self._neumann_term()) if t is not None]
        if mesh.gauge is not None:
            self.terms.append(self._gauge_term())

    # ---- layout -------------------------------------------------------
    def structured(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape == self.shape:
            return x
        if x.ndim == 1 and x.size == self.size:
            return x.reshape(self.shape)
        raise LayoutError(f"expected {self.size} DOFs or shape {self.shape}, got {x.shape}")

    def _like(self, X, x):
        return X.ravel() if np.ndim(x) == 1 else X

    # ---- volume terms -------------------------------------------------
    def _volume_coeff(self, A, met):
        """Contract physical-slot coefficients A[r, v, phys, q] with the metric map."""
        Pm = met.transform().reshape(6, 6, -1)
        return np.einsum("rvfq,fkq->rvkq", A, Pm)

    def _momentum_term(self):
        a, nu = self.spec.alpha, self.spec.nu
        coeffs, data = [], []
        for met in self.quad_metrics:
            sJ = met.sqrtJ.ravel()
            A = np.zeros((2, NVARS, 6, sJ.size))
            for i in (U1, U2):
                A[i, i, VAL] = a * sJ
                A[i, i, DXX] = -nu * sJ
                A[i, i, DYY] = -nu * sJ
                A[i, P, DX + i] = sJ
            coeffs.append(self._volume_coeff(A, met))
            x, y = met.x[0].ravel(), met.x[1].ravel()
            data.append(self.case.f(x, y) * sJ)
        return VolumeTerm("momentum", self.ops, np.array(coeffs), np.array(data), self.weights2d)

    def _continuity_term(self):
        coeffs, data = [], []
        for met in self.quad_metrics:
            sJ, sJs, sJt = (a.ravel() for a in (met.sqrtJ, met.sqrtJ_xi, met.sqrtJ_eta))
            xs, ys, xt, yt = (a.ravel() for a in (met.x_xi, met.y_xi, met.x_eta, met.y_eta))
            A = np.zeros((3, NVARS, 6, sJ.size))
            # G = -(div u) sqrtJ and its xi / eta derivatives
            A[0, U1, DX] = -sJ
            A[0, U2, DY] = -sJ
            for r, (tx, ty, dsJ) in ((1, (xs, ys, sJs)), (2, (xt, yt, sJt))):
                A[r, U1, DXX] = -sJ * tx
                A[r, U1, DXY] = -sJ * ty
                A[r, U1, DX] = -dsJ
                A[r, U2, DXY] = -sJ * tx
                A[r, U2, DYY] = -sJ * ty
                A[r, U2, DY] = -dsJ
            coeffs.append(self._volume_coeff(A, met))
            x, y = met.x[0].ravel(), met.x[1].ravel()
            h, gh = self.case.h(x, y), self.case.grad_h(x, y)
            data.append([
                h * sJ,
                sJ * (gh[0] * xs + gh[1] * ys) + h * sJs,
                sJ * (gh[0] * xt + gh[1] * yt) + h * sJt,
            ])
        return VolumeTerm("continuity", self.ops, np.array(coeffs), np.array(data), self.weights2d)

    # ---- traces ---------------------------------------------------------
    def trace_ops(self, element, side):
        """(value, d/dx, d/dy) trace matrices of shape (n, n^2) on one side."""
        n = self.n
        idx = side_indices(side, n)
        I = np.eye(n)
        Ds, Dt = np.kron(self.D, I)[idx], np.kron(I, self.D)[idx]
        Ji = self.node_metrics[element].Ji.reshape(2, 2, -1)[:, :, idx]
        val = np.eye(n * n)[idx]
        dx = Ji[0, 0][:, None] * Ds + Ji[1, 0][:, None] * Dt
        dy = Ji[0, 1][:, None] * Ds + Ji[1, 1][:, None] * Dt
        return np.array([val, dx, dy])

    def side_points(self, element, side):
        return self.mesh.elements[element](*side_coords(side, self.nodes.nodes))

    def side_normal(self, element, side):
        return self.mesh.elements[element].outward_normal(side, self.nodes.nodes)

    def _jump_term(self):
        # (variable, trace kind) per jump component
        comps = [(U1, 0), (U2, 0), (U1, 1), (U1, 2), (U2, 1), (U2, 2), (P, 0)]
        tb = self.edge_tables
        wm = np.array([tb.mass, tb.mass] + [tb.h_half] * 5)
        edges = self.mesh.interior_edges
        ops_a, ops_b = [], []
        for e in edges:
            Ta = self.trace_ops(e.element_a, e.side_a)
            Tb = self.trace_ops(e.element_b, e.side_b)
            if e.reversed:
                Tb = Tb[:, ::-1]
            ops_a.append([Ta[k] for _, k in comps])
            ops_b.append([Tb[k] for _, k in comps])
        n, n2 = self.n, self.n**2
        ops_a = np.array(ops_a).reshape(len(edges), len(comps), n, n2)
        ops_b = np.array(ops_b).reshape(len(edges), len(comps), n, n2)
        return EdgeTerm("jumps", self.shape, [e.element_a for e in edges], ops_a, wm,
                        np.zeros((len(edges), len(comps), n)),
                        elem_b=[e.element_b for e in edges], ops_b=ops_b,
                        var=[v for v, _ in comps])

    def _dirichlet_term(self):
        edges = [e for e in self.mesh.boundary_edges if e.tag is BC.DIRICHLET]
        if not edges:
            return None
        ops, data = [], []
        for e in edges:
            T = self.trace_ops(e.element, e.side)[0]
            ops.append([T, T])
            x = self.side_points(e.element, e.side)
            data.append(self.case.g(x[0], x[1]))
        wm = np.array([self.edge_tables.h_threehalf] * 2)
        return EdgeTerm("dirichlet", self.shape, [e.element for e in edges], np.array(ops), wm,
                        np.array(data), var=[U1, U2])

    def _neumann_ops(self, element, side, tag):
        """N[i, v] mapping variable v's DOFs to component i of gamma_N."""
        val, dx, dy = self.trace_ops(element, side)
        nrm = self.side_normal(element, side)
        grad = (dx, dy)
        N = np.zeros((2, NVARS) + val.shape)
        for i in (0, 1):
            for j in (0, 1):
                N[i, i] += nrm[j][:, None] * grad[j]
                if tag is BC.NEUMANN_B:
                    N[i, j] += nrm[j][:, None] * grad[i]
            N[i, P] = -nrm[i][:, None] * val
        return N

    def _neumann_term(self):
        edges = [e for e in self.mesh.boundary_edges if e.tag is not BC.DIRICHLET]
        if not edges:
            return None
        ops, data = [], []
        for e in edges:
            ops.append(self._neumann_ops(e.element, e.side, e.tag))
            x = self.side_points(e.element, e.side)
            data.append(self.case.neumann(x[0], x[1], self.side_normal(e.element, e.side), e.tag))
        wm = np.array([self.edge_tables.h_half] * 2)
        return EdgeTerm("neumann", self.shape, [e.element for e in edges], np.array(ops), wm, np.array(data))

    def _gauge_term(self):
        el, (xi, eta) = self.mesh.gauge
        rx = interp_matrix(self.nodes, np.array([xi]))[0]
        ry = interp_matrix(self.nodes, np.array([eta]))[0]
        pt = self.mesh.elements[el](np.array(xi), np.array(eta))
        return GaugeTerm(el, np.kron(rx, ry), float(self.case.p(pt[0], pt[1])), self.shape)

    # ---- public operations ------------------------------------------------
    def term(self, name):
        for t in self.terms:
            if t.name == name:
                return t
        raise KeyError(name)

    def evaluate_functional(self, x):
        """Total functional value and a per-term breakdown."""
        X = self.structured(x)
        parts = {t.name: t.value(X) for t in self.terms}
        return sum(parts.values()), parts

    def normal_action(self, x):
        X = self.structured(x)
        out = np.zeros(self.shape)
        for t in self.terms:
            out += t.adjoint(t.weight(t.apply(X)))
        return self._like(out, x)

    def normal_rhs(self, flat=True):
        out = np.zeros(self.shape)
        for t in self.terms:
            out += t.adjoint(t.weight(t.data))
        return out.ravel() if flat else out

    def neumann_trace(self, x, edge):
        """Both components of gamma_N(u, p) at the trace nodes of a Neumann edge."""
        if edge.tag is BC.DIRICHLET:
            raise ValueError("neumann_trace called on a Dirichlet edge")
        X = self.structured(x)
        N = self._neumann_ops(edge.element, edge.side, edge.tag)
        return np.einsum("ivkn,vn->ik", N, X[edge.element].reshape(NVARS, -1))

    def physical_derivatives(self, x):
        """(L, 3, 6, m, m) physical derivative slots at the volume quadrature points."""
        X = self.structured(x)
        ref = self.terms[0].reference(X)
        m = self.quad.n
        out = np.empty((self.L, NVARS, 6, m * m))
        for l, met in enumerate(self.quad_metrics):
            Pm = met.transform().reshape(6, 6, -1)
            out[l] = np.einsum("fkq,vkq->vfq", Pm, ref[l])
        return out.reshape(self.L, NVARS, 6, m, m)

    def interpolate(self, u=None, p=None):
        """Nodal interpolant of the case's exact fields (or given callables)."""
        u = u or self.case.u
        p = p or self.case.p
        X = np.empty(self.shape)
        for l, met in enumerate(self.node_metrics):
            x, y = met.x
            X[l, :2] = u(x, y)
            X[l, P] = p(x, y)
        return X


def build_system(mesh, order, case, quad_order=None):
    return LeastSquaresSystem(mesh, order, case, quad_order)


def evaluate_functional(x, case, mesh, order, quad_order=None):
    return LeastSquaresSystem(mesh, order, case, quad_order).evaluate_functional(x)
