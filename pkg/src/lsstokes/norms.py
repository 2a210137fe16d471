"""Quadratic forms for the fractional edge norms and the H1/H2 Gram matrices on S.

Edge vectors hold nodal values at the W+1 GLL points of the trace interval
I = (-1, 1). Square fields hold (W+1, W+1) nodal values flattened C-order,
first index along xi.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .basis import diff_matrix, gauss_nodes, gll_nodes, interp_matrix
from .errors import NotSPDError


def half_seminorm_matrix(trace_nodes):
    """Matrix S with v^T S v = int_I int_I |w(s) - w(t)|^2 / |s - t|^2 ds dt.

    The divided difference q(s, t) = (w(s) - w(t)) / (s - t) is a polynomial
    of degree n-2 in each variable (q(s, s) = w'(s)), so an n-point tensor
    Gauss rule integrates q^2 exactly.
    """
    n = trace_nodes.n
    g = gauss_nodes(n)
    E = interp_matrix(trace_nodes, g)
    ED = E @ diff_matrix(trace_nodes)
    s = g.nodes
    Q = np.empty((n, n, n))
    for a in range(n):
        for b in range(n):
            if a == b:
                Q[a, b] = ED[a]
            else:
                Q[a, b] = (E[a] - E[b]) / (s[a] - s[b])
    w2 = np.outer(g.weights, g.weights)
    S = np.einsum("ab,abi,abj->ij", w2, Q, Q)
    return 0.5 * (S + S.T)


def _mass_1d(nodes, quad):
    E = interp_matrix(nodes, quad)
    return E.T @ (quad.weights[:, None] * E)


@dataclass(frozen=True, eq=False)
class EdgeNormTables:
    nodes: object
    mass: np.ndarray        # L2(I)
    half: np.ndarray        # |.|_{1/2,I}^2
    diff: np.ndarray        # tangential differentiation on the trace nodes

    @property
    def h_half(self):
        """Full ||.||_{1/2,I}^2 form."""
        return self.mass + self.half

    @property
    def h_threehalf(self):
        """||w||_0^2 + ||w'||_{1/2}^2 (tangential derivative only)."""
        return self.mass + self.diff.T @ self.h_half @ self.diff


@lru_cache(maxsize=None)
def edge_tables(order):
    """Edge norm tables for polynomial degree ``order`` (order+1 trace nodes)."""
    nodes = gll_nodes(order + 1)
    mass = _mass_1d(nodes, gauss_nodes(order + 1))
    tables = EdgeNormTables(nodes, mass, half_seminorm_matrix(nodes), diff_matrix(nodes))
    for a in (tables.mass, tables.half):
        a.setflags(write=False)
    return tables


def edge_norm_half(v, tables):
    v = np.asarray(v, dtype=float)
    return float(v @ tables.h_half @ v)


def edge_norm_threehalf(v, d, tables):
    v = np.asarray(v, dtype=float)
    dv = d @ v
    return float(v @ tables.mass @ v + dv @ tables.h_half @ dv)


H1 = "H1"
H2 = "H2"


def square_gram(order, quad=None, which=H1):
    """Gram matrix of the H1 or H2 inner product on S over the GLL nodal basis.

    ``quad`` defaults to a Gauss rule with order+3 points.
    """
    nodes = gll_nodes(order + 1)
    if quad is None:
        quad = gauss_nodes(order + 3)
    if quad.n < order + 1:
        raise ValueError("quadrature too coarse for the Gram matrix")
    E = interp_matrix(nodes, quad)
    D = diff_matrix(nodes)
    W = quad.weights[:, None]
    ops = [E, E @ D, E @ D @ D]
    M, K, K2 = (A.T @ (W * A) for A in ops)
    G = np.kron(M, M) + np.kron(K, M) + np.kron(M, K)
    if which == H2:
        G = G + np.kron(K2, M) + np.kron(K, K) + np.kron(M, K2)
    elif which != H1:
        raise ValueError(f"unknown Gram kind {which!r}")
    return 0.5 * (G + G.T)


@dataclass(frozen=True, eq=False)
class SquareGramTables:
    g1: np.ndarray
    g2: np.ndarray
    chol1: tuple
    chol2: tuple


def _cholesky(G):
    try:
        return scipy.linalg.cho_factor(G, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError(str(exc)) from exc


@lru_cache(maxsize=None)
def square_tables(order):
    g1 = square_gram(order, which=H1)
    g2 = square_gram(order, which=H2)
    return SquareGramTables(g1, g2, _cholesky(g1), _cholesky(g2))
