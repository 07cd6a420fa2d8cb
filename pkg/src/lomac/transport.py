"""2D linear advection ``u_t + u_x1 + u_x2 = 0`` in low-rank form, and SIAC post-processing.

The SIAC kernel is a combination of ``2k+1`` shifted central B-splines of
order ``k+1`` whose coefficients make the convolution reproduce polynomials
up to degree ``2k``. On a uniform periodic mesh the filter is a fixed
nodal stencil, so the 2D filter of a low-rank function is two 1D filters
applied to the factors.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from .dg import UpwindOperatorPair, build_upwind_pair, lagrange_eval, nodal_basis
from .lowrank import LowRankFunction, WeightPair, combine, from_separable, map_factors, to_dense, truncate_weighted
from .mesh import Mesh1D, NodalGrid, build_uniform, gauss_rule


# -- advection ---------------------------------------------------------------

def _check_periodic(*ops: UpwindOperatorPair) -> None:
    for op in ops:
        if op.bc != "periodic":
            raise ValueError("advection needs periodic meshes in both directions")


def advection_rhs(u: LowRankFunction, ops_x1: UpwindOperatorPair, ops_x2: UpwindOperatorPair) -> LowRankFunction:
    """``-(D+ (x) I + I (x) D+) u``; unit positive speeds only use the left-trace operator."""
    return combine([(-1.0, map_factors(u, ops_x1.plus, None)), (-1.0, map_factors(u, None, ops_x2.plus))])


def advect_step(
    u: LowRankFunction,
    dt: float,
    ops_x1: UpwindOperatorPair,
    ops_x2: UpwindOperatorPair,
    u_nm2: LowRankFunction | None = None,
    eps: float = 1e-4,
    criterion: str = "relative",
) -> LowRankFunction:
    """One multistep update ``u_nm2/4 + 3u/4 + (3/2) dt L(u)`` followed by weighted truncation.

    Without ``u_nm2`` a Heun step is taken instead (used for the first two steps).
    """
    _check_periodic(ops_x1, ops_x2)
    if dt <= 0:
        raise ValueError("time step must be positive")
    w = WeightPair(ops_x1.grid.weights, ops_x2.grid.weights)

    def trunc(g):
        return truncate_weighted(g, eps, w, criterion)

    if u_nm2 is None:
        u1 = trunc(combine([(1.0, u), (dt, advection_rhs(u, ops_x1, ops_x2))]))
        return trunc(combine([(0.5, u), (0.5, u1), (0.5 * dt, advection_rhs(u1, ops_x1, ops_x2))]))
    return trunc(combine([(0.25, u_nm2), (0.75, u), (1.5 * dt, advection_rhs(u, ops_x1, ops_x2))]))


@dataclass
class AdvectionResult:
    u: LowRankFunction
    ranks: list[int]
    times: list[float]
    dt: float
    grids: tuple[NodalGrid, NodalGrid]


def run_advection(
    u0_terms,
    a: float,
    b: float,
    n: int,
    k: int,
    t_end: float,
    eps: float = 1e-4,
    dt: float | None = None,
    criterion: str = "relative",
) -> AdvectionResult:
    """Advect separable initial data on ``[a, b]^2`` with ``n x n`` uniform cells.

    The default time step is ``(h/3)^1.5``, shrunk so that it divides ``t_end``.
    """
    basis = nodal_basis(gauss_rule(k))
    mesh = build_uniform(a, b, n, "periodic")
    ops = build_upwind_pair(mesh, basis, "periodic")
    x = ops.grid.points
    u = from_separable([(c, g1(x), g2(x)) for c, g1, g2 in u0_terms])
    if dt is None:
        dt = (float(mesh.h.min()) / 3.0) ** 1.5
    nsteps = max(1, math.ceil(t_end / dt - 1e-9))
    dt = t_end / nsteps
    hist: list[LowRankFunction] = []
    ranks, times = [u.rank], [0.0]
    for i in range(nsteps):
        prev2 = hist[-2] if len(hist) >= 2 else None
        new = advect_step(u, dt, ops, ops, prev2, eps, criterion)
        hist = (hist + [u])[-2:]
        u = new
        ranks.append(u.rank)
        times.append((i + 1) * dt)
    return AdvectionResult(u, ranks, times, dt, (ops.grid, ops.grid))


# -- SIAC filter ---------------------------------------------------------------

def _gauss_on(a: float, b: float, npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


@dataclass(frozen=True)
class SiacKernel:
    """Symmetric kernel ``K(x) = sum_g c_g psi(x - g)``, ``g = -k..k``, in units of the cell size."""

    k: int
    coef: np.ndarray
    spline_knots: np.ndarray  # knots of the central B-spline of order k+1
    breaks: np.ndarray        # all points where K is not smooth

    @property
    def half_width(self) -> float:
        return (3 * self.k + 1) / 2.0

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        psi = BSpline.basis_element(self.spline_knots, extrapolate=False)
        out = np.zeros_like(x)
        for g, c in zip(range(-self.k, self.k + 1), self.coef):
            out += c * np.nan_to_num(psi(x - g))
        return out


@functools.lru_cache(maxsize=None)
def siac_kernel(k: int) -> SiacKernel:
    """Kernel with ``2k+1`` B-splines of order ``k+1`` reproducing polynomials of degree ``<= 2k``."""
    if k < 0:
        raise ValueError("kernel degree must be nonnegative")
    knots = np.arange(k + 2) - (k + 1) / 2.0
    psi = BSpline.basis_element(knots, extrapolate=False)
    shifts = np.arange(-k, k + 1)
    npts = 2 * k + 2
    # moments int psi(x - g) x^m dx, exact with Gauss rules on the knot intervals
    mom = np.zeros((2 * k + 1, 2 * k + 1))
    for lo, hi in zip(knots[:-1], knots[1:]):
        y, w = _gauss_on(lo, hi, npts)
        vals = psi(y) * w
        for j, g in enumerate(shifts):
            mom[:, j] += [(vals * (y + g) ** m).sum() for m in range(2 * k + 1)]
    rhs = np.zeros(2 * k + 1)
    rhs[0] = 1.0
    coef = np.linalg.solve(mom, rhs)
    breaks = np.unique(np.concatenate([knots + g for g in shifts]))
    return SiacKernel(k, coef, knots, breaks)


@functools.lru_cache(maxsize=None)
def siac_stencil(k: int) -> tuple[np.ndarray, np.ndarray]:
    """``(offsets, S)`` with ``u*(node a of cell i) = sum_d S[d, a, b] u(node b of cell i+d)``.

    Entries are exact integrals of the kernel against the nodal basis on the
    reference cell, split at the kernel breakpoints.
    """
    rule = gauss_rule(k)
    ker = siac_kernel(k)
    reach = int(math.ceil(ker.half_width + 0.5))
    offsets = np.arange(-reach, reach + 1)
    p = rule.npts
    S = np.zeros((offsets.size, p, p))
    nq = k + 2  # integrand degree <= 2k
    for di, d in enumerate(offsets):
        for a in range(p):
            # K(xi_a - d - eta) with eta in [-1/2, 1/2]
            cuts = rule.nodes[a] - d - ker.breaks
            inner = cuts[(cuts > -0.5) & (cuts < 0.5)]
            pts = np.concatenate([[-0.5], np.sort(inner), [0.5]])
            for lo, hi in zip(pts[:-1], pts[1:]):
                eta, w = _gauss_on(lo, hi, nq)
                kv = ker(rule.nodes[a] - d - eta) * w
                S[di, a] += kv @ lagrange_eval(rule.nodes, eta)
    return offsets, S


def siac_filter(u: np.ndarray, k: int, mesh: Mesh1D) -> np.ndarray:
    """Filter nodal DG values along the first axis (uniform periodic mesh only).

    ``u`` may be a vector or an ``(N(k+1), r)`` column stack of factors.
    """
    if mesh.bc != "periodic":
        raise ValueError("the SIAC filter needs a periodic mesh")
    if not mesh.is_uniform():
        raise ValueError("the SIAC filter needs a uniform mesh")
    u = np.asarray(u, dtype=float)
    p = k + 1
    if u.shape[0] != mesh.n * p:
        raise ValueError(f"expected {mesh.n * p} nodal values, got {u.shape[0]}")
    offsets, S = siac_stencil(k)
    cells = u.reshape(mesh.n, p, -1)
    out = np.zeros_like(cells)
    for d, blk in zip(offsets, S):
        out += np.einsum("ab,ibr->iar", blk, np.roll(cells, -d, axis=0))
    return out.reshape(u.shape)


def siac_filter_lowrank(u: LowRankFunction, k: int, mesh_x1: Mesh1D, mesh_x2: Mesh1D) -> LowRankFunction:
    return LowRankFunction(u.coef, siac_filter(u.left, k, mesh_x1), siac_filter(u.right, k, mesh_x2))


def error_norms(u: LowRankFunction | np.ndarray, exact, grids: tuple[NodalGrid, NodalGrid]) -> tuple[float, float]:
    """Nodal L2 (tensor Gauss quadrature) and max-norm errors against ``exact(x1, x2)``."""
    g1, g2 = grids
    dense = to_dense(u) if isinstance(u, LowRankFunction) else np.asarray(u, dtype=float)
    diff = dense - exact(g1.points[:, None], g2.points[None, :])
    w = np.outer(g1.weights, g2.weights)
    return float(np.sqrt(np.sum(w * diff**2))), float(np.max(np.abs(diff)))
