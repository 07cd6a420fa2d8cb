"""Velocity moments and the macroscopic-conservative decomposition ``f = f1 + f2``.

``f1`` is the weighted orthogonal projection of ``f / w_M`` onto
``span{1, v, v^2}`` (rescaled by ``w_M``); it carries exactly the discrete
charge, current and kinetic-energy densities of ``f``, and ``f2 = f - f1``
carries none of them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lowrank import LowRankFunction, concat
from .mesh import NodalGrid


def inner_v(a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (a.shape == b.shape == np.shape(weights)):
        raise ValueError(f"length mismatch: {a.shape}, {b.shape}, {np.shape(weights)}")
    return float(np.sum(a * b * weights))


def maxwellian_weight(temperature: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """``w_M(v) = exp(-v^2 / (2 T))``; ``T = 3.5`` gives ``exp(-v^2/7)``."""
    return lambda v: np.exp(-np.asarray(v) ** 2 / (2.0 * temperature))


@dataclass(frozen=True)
class VInnerSpace:
    v: np.ndarray
    weights: np.ndarray
    wm: np.ndarray
    c: float
    basis: np.ndarray        # (n, 3): 1, v, v^2 - c
    norms2: np.ndarray       # squared w_M-norms of the basis vectors
    gram_inv_t: np.ndarray   # maps moments (rho, J, kappa) to projection coefficients
    moment_vectors: np.ndarray  # (n, 3): weights * (1, v, v^2/2)

    @property
    def n(self) -> int:
        return self.v.size

    def inner_wm(self, a, b) -> float:
        return float(np.sum(np.asarray(a) * np.asarray(b) * self.wm * self.weights))


def build_v_space(grid: NodalGrid | tuple[np.ndarray, np.ndarray], wm=None) -> VInnerSpace:
    """Weighted inner-product space on the velocity grid.

    ``wm`` is a callable ``w_M(v)``, an array of nodal values, or ``None`` for
    ``exp(-v^2/2)``.
    """
    if isinstance(grid, NodalGrid):
        v, omega = grid.points, grid.weights
    else:
        v, omega = (np.asarray(x, dtype=float) for x in grid)
    if v.shape != omega.shape:
        raise ValueError("velocity points and weights differ in length")
    if np.any(omega <= 0):
        raise ValueError("quadrature weights must be positive")
    if v.size < 3 or np.unique(v).size < 3:
        raise ValueError(f"need at least 3 distinct velocity nodes to carry (rho, J, kappa), got {v.size}")
    if wm is None:
        wm = maxwellian_weight(1.0)
    wm_vals = np.asarray(wm(v) if callable(wm) else wm, dtype=float)
    if wm_vals.shape != v.shape or np.any(wm_vals <= 0):
        raise ValueError("w_M must be positive at every velocity node")

    ones = np.ones_like(v)
    n1 = np.sum(wm_vals * omega)
    c = np.sum(v**2 * wm_vals * omega) / n1
    basis = np.column_stack([ones, v, v**2 - c])
    norms2 = np.einsum("ia,ia,i->a", basis, basis, wm_vals * omega)
    if np.any(norms2 <= 0) or not np.all(np.isfinite(norms2)):
        raise ValueError("degenerate projection basis (zero weighted norm)")
    moment_vectors = omega[:, None] * np.column_stack([ones, v, 0.5 * v**2])
    # gram[a, b] = <basis_a, p_b>_{w_M} with p = (1, v, v^2/2)
    gram = (basis * wm_vals[:, None]).T @ moment_vectors
    gram_inv_t = np.linalg.inv(gram.T)
    return VInnerSpace(v, omega, wm_vals, float(c), basis, norms2, gram_inv_t, moment_vectors)


@dataclass(frozen=True)
class MacroMoments:
    rho: np.ndarray
    J: np.ndarray
    kappa: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.vstack([self.rho, self.J, self.kappa])


def moment_matrix(f: LowRankFunction, vectors: np.ndarray) -> np.ndarray:
    """``sum_l C_l <U2_l, vectors[:, a]> U1_l`` for every column ``a``; shape ``(m, ncol)``."""
    if f.right.shape[0] != vectors.shape[0]:
        raise ValueError(f"grid mismatch: f has {f.right.shape[0]} velocity nodes, space has {vectors.shape[0]}")
    proj = (f.right.T @ vectors) * f.coef[:, None]  # (r, ncol)
    return f.left @ proj


def moments(f: LowRankFunction, space: VInnerSpace) -> MacroMoments:
    m = moment_matrix(f, space.moment_vectors)
    return MacroMoments(m[:, 0].copy(), m[:, 1].copy(), m[:, 2].copy())


def build_f1(mom: MacroMoments, space: VInnerSpace) -> LowRankFunction:
    """Rank-3 function in ``w_M * span{1, v, v^2 - c}`` with the given moments.

    On a velocity grid symmetric about zero this reduces to the familiar
    closed form ``rho/|1|^2 (x) w_M + J/|v|^2 (x) w_M v + (2 kappa - c rho)/|v^2-c|^2 (x) w_M (v^2-c)``;
    the 3x3 Gram solve keeps the moments exact on any grid.
    """
    m = np.vstack([mom.rho, mom.J, mom.kappa])  # (3, nx)
    alpha = space.gram_inv_t @ m               # (3, nx)
    right = space.basis * space.wm[:, None]
    return LowRankFunction(np.ones(3), alpha.T.copy(), right)


def conservative_decompose(f: LowRankFunction, space: VInnerSpace) -> tuple[LowRankFunction, LowRankFunction]:
    """Split ``f`` into ``(f1, f2)`` with ``f2 = f - f1`` held as a rank ``r + 3`` concatenation."""
    f1 = build_f1(moments(f, space), space)
    return f1, concat(f, f1, 1.0, -1.0)
