"""One-dimensional nodal machinery: GLL / Gauss nodes, differentiation and
barycentric interpolation matrices.

All tables are cached per order and returned read-only.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidOrderError

GLL = "GLL"
GAUSS = "Gauss"

_NEWTON_TOL = 1e-15
_NEWTON_MAXIT = 100


@dataclass(frozen=True, eq=False)
class NodeSet1D:
    kind: str
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self):
        return self.nodes.size

    def __hash__(self):
        return hash((self.kind, self.n))

    def __eq__(self, other):
        if not isinstance(other, NodeSet1D):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.nodes, other.nodes)


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def _legendre_columns(x, N):
    """Columns P_0..P_N evaluated at x."""
    V = np.empty((x.size, N + 1))
    V[:, 0] = 1.0
    if N >= 1:
        V[:, 1] = x
    for k in range(2, N + 1):
        V[:, k] = ((2 * k - 1) * x * V[:, k - 1] - (k - 1) * V[:, k - 2]) / k
    return V


@lru_cache(maxsize=None)
def gll_nodes(n):
    """Gauss-Lobatto-Legendre rule with ``n`` points (exact to degree 2n-3).

    Nodes are the roots of (1 - x^2) P'_{n-1}(x), found by Newton iteration
    started from the Chebyshev-Gauss-Lobatto points.
    """
    if int(n) != n or n < 2:
        raise InvalidOrderError(f"GLL rule needs n >= 2 points, got {n}")
    n = int(n)
    N = n - 1
    x = -np.cos(np.pi * np.arange(n) / N)
    for _ in range(_NEWTON_MAXIT):
        V = _legendre_columns(x, N)
        dx = (x * V[:, N] - V[:, N - 1]) / (n * V[:, N])
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    V = _legendre_columns(x, N)
    w = 2.0 / (N * n * V[:, N] ** 2)
    # enforce exact symmetry about 0
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x[0], x[-1] = -1.0, 1.0
    return NodeSet1D(GLL, _frozen(x), _frozen(w))


@lru_cache(maxsize=None)
def gauss_nodes(n):
    """Gauss-Legendre rule with ``n`` points (exact to degree 2n-1)."""
    if int(n) != n or n < 1:
        raise InvalidOrderError(f"Gauss rule needs n >= 1 points, got {n}")
    x, w = np.polynomial.legendre.leggauss(int(n))
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return NodeSet1D(GAUSS, _frozen(x), _frozen(w))


def _as_nodes(nodes):
    return nodes.nodes if isinstance(nodes, NodeSet1D) else np.asarray(nodes, dtype=float)


def barycentric_weights(nodes):
    x = _as_nodes(nodes)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0.0):
        raise ValueError("interpolation nodes must be distinct")
    return 1.0 / np.prod(diff, axis=1)


def _diff_matrix(x):
    lam = barycentric_weights(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (lam[None, :] / lam[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    # negative-sum trick: rows annihilate constants to roundoff
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


@lru_cache(maxsize=None)
def _cached_diff(nodes):
    return _frozen(_diff_matrix(nodes.nodes))


def diff_matrix(nodes):
    """D[i, j] = l_j'(x_i) for the Lagrange basis on ``nodes``."""
    if isinstance(nodes, NodeSet1D):
        return _cached_diff(nodes)
    return _diff_matrix(np.asarray(nodes, dtype=float))


def _interp_matrix(x, t):
    lam = barycentric_weights(x)
    diff = t[:, None] - x[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    P = lam[None, :] / diff
    P /= P.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    P[hit] = exact[hit].astype(float)
    return P


@lru_cache(maxsize=None)
def _cached_interp(source, target):
    return _frozen(_interp_matrix(source.nodes, target.nodes))


def interp_matrix(source, target):
    """Matrix evaluating the interpolant on ``source`` at ``target`` points.

    Uses the second (true) barycentric formula. ``target`` may be a NodeSet1D
    or a plain array of points.
    """
    if isinstance(source, NodeSet1D) and isinstance(target, NodeSet1D):
        return _cached_interp(source, target)
    return _interp_matrix(_as_nodes(source), np.atleast_1d(_as_nodes(target)))
