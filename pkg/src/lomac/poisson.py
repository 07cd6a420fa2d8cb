"""Periodic 1D Poisson solve ``-phi'' = rho - rho0, E = -phi'`` by the local DG method.

Alternating fluxes: the potential trace is taken from the left and the field
trace from the right, so ``E = -D+ phi`` and ``D- E = rho - rho0``. The
potential is gauged to zero mean by a bordered system, factorized once per
mesh.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dg import NodalBasis, UpwindOperatorPair, build_upwind_pair
from .mesh import Mesh1D


@dataclass(frozen=True)
class FieldState:
    E: np.ndarray
    phi: np.ndarray
    rho0: float


class PoissonSolver:
    def __init__(self, mesh: Mesh1D, basis: NodalBasis, ops: UpwindOperatorPair | None = None):
        if mesh.bc != "periodic":
            raise ValueError("the Poisson solver supports periodic meshes only")
        self.mesh = mesh
        self.ops = ops if ops is not None else build_upwind_pair(mesh, basis, "periodic")
        if self.ops.bc != "periodic":
            raise ValueError("the Poisson solver needs periodic operators")
        self.weights = self.ops.grid.weights
        dp = self.ops.plus.matrix
        dm = self.ops.minus.matrix
        lap = -(dm @ dp)
        w = sp.csr_matrix(self.weights[None, :])
        bordered = sp.bmat([[lap, w.T], [w, None]], format="csc")
        self._lu = spla.splu(bordered)
        self._n = lap.shape[0]
        probe = self._lu.solve(np.zeros(self._n + 1))
        if not np.all(np.isfinite(probe)):
            raise np.linalg.LinAlgError("Poisson system is singular (gauge constraint failed)")

    def solve(self, rho: np.ndarray) -> FieldState:
        rho = np.asarray(rho, dtype=float)
        if rho.shape != (self._n,):
            raise ValueError(f"rho must have length {self._n}")
        rho0 = float(self.weights @ rho / self.mesh.length)
        rhs = np.append(rho - rho0, 0.0)
        sol = self._lu.solve(rhs)
        phi = sol[:-1]
        E = -(self.ops.plus.matrix @ phi)
        # zero mean holds exactly in exact arithmetic; remove rounding drift
        E = E - (self.weights @ E) / self.mesh.length
        return FieldState(E, phi, rho0)


def solve_field(rho: np.ndarray, mesh: Mesh1D, basis: NodalBasis) -> FieldState:
    """One-shot convenience wrapper; build a ``PoissonSolver`` to reuse the factorization."""
    return PoissonSolver(mesh, basis).solve(rho)


def electric_energy(E: np.ndarray, weights: np.ndarray) -> float:
    E = np.asarray(E, dtype=float)
    if E.shape != np.shape(weights):
        raise ValueError("field and weights differ in length")
    return 0.5 * float(np.sum(weights * E * E))
