"""Nodal Lagrange bases on Gauss nodes and upwind DG differentiation operators.

``D_plus`` approximates ``d/dx`` with interface values taken from the left
(information travelling to the right, e.g. ``v > 0``); ``D_minus`` takes them
from the right. Both are assembled from the weak form

    h w_a (D u)_a = -sum_b w_b L_a'(xi_b) u_b + u_hat(1/2) L_a(1/2) - u_hat(-1/2) L_a(-1/2)

and stored as sparse block-banded matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import GaussRule, Mesh1D, NodalGrid, nodal_grid


def lagrange_eval(nodes: np.ndarray, x) -> np.ndarray:
    """Values ``L_j(x)`` of the Lagrange polynomials on ``nodes``; shape ``(len(x), len(nodes))``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = nodes.size
    out = np.ones((x.size, n))
    for j in range(n):
        for m in range(n):
            if m != j:
                out[:, j] *= (x - nodes[m]) / (nodes[j] - nodes[m])
    return out


def lagrange_deriv(nodes: np.ndarray, x) -> np.ndarray:
    """Derivatives ``L_j'(x)``; shape ``(len(x), len(nodes))``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = nodes.size
    out = np.zeros((x.size, n))
    for j in range(n):
        for s in range(n):
            if s == j:
                continue
            term = np.full(x.size, 1.0 / (nodes[j] - nodes[s]))
            for m in range(n):
                if m != j and m != s:
                    term *= (x - nodes[m]) / (nodes[j] - nodes[m])
            out[:, j] += term
    return out


@dataclass(frozen=True)
class NodalBasis:
    """Lagrange basis on the nodes of a Gauss rule.

    Attributes
    ----------
    left, right : ndarray
        ``L_j(-1/2)`` and ``L_j(1/2)``.
    dref : ndarray
        ``dref[a, b] = L_b'(xi_a)``, so ``dref @ u`` differentiates the
        interpolant of ``u`` at the nodes (reference coordinates).
    """

    rule: GaussRule
    left: np.ndarray
    right: np.ndarray
    dref: np.ndarray

    @property
    def k(self) -> int:
        return self.rule.k


def nodal_basis(rule: GaussRule) -> NodalBasis:
    ends = lagrange_eval(rule.nodes, [-0.5, 0.5])
    dref = lagrange_deriv(rule.nodes, rule.nodes)
    if rule.k == 0:
        dref = np.zeros((1, 1))
    return NodalBasis(rule, ends[0], ends[1], dref)


@dataclass(frozen=True)
class UpwindOperator:
    """A sparse nodal operator; supports ``op @ u`` for vectors and column stacks."""

    matrix: sp.csr_matrix

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, u):
        return apply(self, u)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class UpwindOperatorPair:
    plus: UpwindOperator
    minus: UpwindOperator
    grid: NodalGrid
    bc: str


def apply(op: UpwindOperator, u: np.ndarray) -> np.ndarray:
    """Exact action of a nodal operator on ``u`` (a vector or an ``(n, r)`` array)."""
    u = np.asarray(u, dtype=float)
    if u.shape[0] != op.matrix.shape[1]:
        raise ValueError(f"length mismatch: operator acts on {op.matrix.shape[1]} nodes, got {u.shape[0]}")
    return op.matrix @ u


def _local_blocks(basis: NodalBasis):
    """Reference-cell blocks, before division by ``h_i``.

    Returns (volume, plus_self, plus_left, minus_self, minus_right), each
    ``(k+1, k+1)`` and already divided by the Gauss weight of the output row.
    """
    w = basis.rule.weights
    # volume[a, b] = -w_b L_a'(xi_b) / w_a
    volume = -(basis.dref.T * w[None, :]) / w[:, None]
    lt, rt = basis.left, basis.right
    # D+ : u_hat = u^- (left trace), right interface uses own cell, left interface uses cell i-1
    plus_self = volume + np.outer(rt, rt) / w[:, None]
    plus_left = -np.outer(lt, rt) / w[:, None]
    # D- : u_hat = u^+ (right trace), right interface uses cell i+1, left interface uses own cell
    minus_self = volume - np.outer(lt, lt) / w[:, None]
    minus_right = np.outer(rt, lt) / w[:, None]
    return plus_self, plus_left, minus_self, minus_right


def build_upwind_pair(mesh: Mesh1D, basis: NodalBasis, bc: str | None = None) -> UpwindOperatorPair:
    """Global upwind DG derivative operators ``D+`` and ``D-`` on ``mesh``.

    ``bc`` is ``"periodic"`` or ``"zero-inflow"`` (missing neighbour traces are
    zero). It defaults to periodic for periodic meshes and zero inflow otherwise.
    """
    if not isinstance(basis, NodalBasis):
        raise TypeError("basis must be a NodalBasis")
    if bc is None:
        bc = "periodic" if mesh.bc == "periodic" else "zero-inflow"
    if bc not in ("periodic", "zero-inflow"):
        raise ValueError(f"unknown boundary kind {bc!r}")
    if bc == "periodic" and mesh.bc != "periodic":
        raise ValueError("periodic operators need a periodic mesh")
    grid = nodal_grid(mesh, basis.rule)
    n, p = mesh.n, basis.rule.npts
    ps, pl, ms, mr = _local_blocks(basis)
    inv_h = 1.0 / mesh.h

    cells = np.arange(n)
    left_nb = (cells - 1) % n
    right_nb = (cells + 1) % n
    if bc == "zero-inflow":
        keep_left = cells > 0
        keep_right = cells < n - 1
    else:
        keep_left = keep_right = np.ones(n, dtype=bool)

    def assemble(self_blk, nb_blk, nb, keep):
        data = [inv_h[:, None, None] * self_blk[None]]
        rows = [cells]
        cols = [cells]
        data.append(inv_h[keep, None, None] * nb_blk[None])
        rows.append(cells[keep])
        cols.append(nb[keep])
        bsr_data = np.concatenate(data)
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        # expand blocks into coordinates
        a, b = np.meshgrid(np.arange(p), np.arange(p), indexing="ij")
        R = (r[:, None, None] * p + a[None]).ravel()
        C = (c[:, None, None] * p + b[None]).ravel()
        m = sp.coo_matrix((bsr_data.ravel(), (R, C)), shape=(n * p, n * p)).tocsr()
        m.sum_duplicates()
        return UpwindOperator(m)

    plus = assemble(ps, pl, left_nb, keep_left)
    minus = assemble(ms, mr, right_nb, keep_right)
    return UpwindOperatorPair(plus, minus, grid, bc)
