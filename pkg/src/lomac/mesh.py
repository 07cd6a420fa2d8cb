"""One-dimensional meshes, Gauss rules on the reference cell and nodal grids.

The reference cell is ``[-1/2, 1/2]``, so the Gauss weights of a rule sum to
one and the physical quadrature weight of node ``(i, ig)`` is ``h_i * w_ig``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_DEGREE = 8
BOUNDARY_KINDS = ("periodic", "open")


@dataclass(frozen=True)
class GaussRule:
    """Gauss-Legendre rule with ``k + 1`` nodes on ``[-1/2, 1/2]``."""

    k: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def npts(self) -> int:
        return self.k + 1


@lru_cache(maxsize=None)
def gauss_rule(k: int) -> GaussRule:
    """Return the (k+1)-point Gauss-Legendre rule scaled to the unit cell."""
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= MAX_DEGREE:
        raise ValueError(f"polynomial degree k must be an integer in [0, {MAX_DEGREE}], got {k!r}")
    x, w = np.polynomial.legendre.leggauss(int(k) + 1)
    nodes = 0.5 * x
    weights = 0.5 * w
    # enforce exact symmetry; leggauss is symmetric only to rounding
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return GaussRule(int(k), nodes, weights)


@dataclass(frozen=True)
class Mesh1D:
    """Cell partition ``x_{1/2} < ... < x_{N+1/2}`` of an interval."""

    boundaries: np.ndarray
    bc: str = "periodic"

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b.ndim != 1 or b.size < 2:
            raise ValueError("a mesh needs at least two boundaries")
        if not np.all(np.diff(b) > 0):
            raise ValueError("mesh boundaries must be strictly increasing")
        if self.bc not in BOUNDARY_KINDS:
            raise ValueError(f"unknown boundary kind {self.bc!r}; expected one of {BOUNDARY_KINDS}")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "boundaries", b)

    @property
    def n(self) -> int:
        return self.boundaries.size - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.boundaries)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.boundaries[:-1] + self.boundaries[1:])

    @property
    def a(self) -> float:
        return float(self.boundaries[0])

    @property
    def b(self) -> float:
        return float(self.boundaries[-1])

    @property
    def length(self) -> float:
        return self.b - self.a

    def is_uniform(self, rtol: float = 1e-12) -> bool:
        h = self.h
        return bool(np.all(np.abs(h - h.mean()) <= rtol * h.mean()))


def build_uniform(a: float, b: float, n: int, bc: str = "periodic") -> Mesh1D:
    if n is None or int(n) != n or n < 1:
        raise ValueError(f"number of cells must be a positive integer, got {n!r}")
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    bnd = np.linspace(a, b, int(n) + 1)
    return Mesh1D(bnd, bc)


def perturb_mesh(mesh: Mesh1D, fraction: float, seed: int = 0) -> Mesh1D:
    """Randomly move every interior boundary by up to ``fraction * h``.

    ``h`` is the local mean of the two adjacent cell sizes (the cell size on a
    uniform mesh). Endpoints stay put. The draw uses numpy's PCG64 generator
    seeded with ``seed``, so results are reproducible.
    """
    if not 0.0 <= fraction < 0.5:
        raise ValueError(f"perturbation fraction must lie in [0, 1/2), got {fraction}")
    if fraction == 0.0 or mesh.n < 2:
        return Mesh1D(mesh.boundaries.copy(), mesh.bc)
    rng = np.random.Generator(np.random.PCG64(seed))
    b = mesh.boundaries.copy()
    h = mesh.h
    hloc = 0.5 * (h[:-1] + h[1:])
    delta = rng.uniform(-fraction, fraction, size=mesh.n - 1) * hloc
    b[1:-1] += delta
    return Mesh1D(b, mesh.bc)


@dataclass(frozen=True)
class NodalGrid:
    """Shifted Gauss nodes of every cell, in cell-major order, with weights."""

    mesh: Mesh1D
    rule: GaussRule
    points: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def k(self) -> int:
        return self.rule.k

    def cellwise(self, u: np.ndarray) -> np.ndarray:
        """View a nodal vector as an ``(N, k+1)`` array."""
        return np.asarray(u).reshape(self.mesh.n, self.rule.npts, *np.shape(u)[1:])


def nodal_grid(mesh: Mesh1D, rule: GaussRule) -> NodalGrid:
    pts = mesh.centers[:, None] + mesh.h[:, None] * rule.nodes[None, :]
    wts = mesh.h[:, None] * rule.weights[None, :]
    pts = pts.ravel()
    wts = wts.ravel()
    pts.setflags(write=False)
    wts.setflags(write=False)
    return NodalGrid(mesh, rule, pts, wts)
