"""Full-grid reference implementation of the same scheme, for verification only.

Everything here works on the dense ``(k+1)N_x x (k+1)N_v`` array of nodal
values. It is slow by design and used as ground truth for the low-rank
solver at ``eps = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dg import NodalBasis
from .lowrank import to_dense
from .mesh import Mesh1D
from .stepper import VlasovPoissonSolver


@dataclass
class DenseField:
    values: np.ndarray
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.x.size, self.v.size):
            raise ValueError(f"values have shape {self.values.shape}, grids give {(self.x.size, self.v.size)}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite nodal values")


def dense_rhs(F: np.ndarray, E: np.ndarray, v: np.ndarray, xops, vops) -> np.ndarray:
    """``-(v+ D+_x + v- D-_x) F - (E+ D+_v + E- D-_v) F`` with assembled operators."""
    F = np.asarray(F, dtype=float)
    if F.shape != (xops.grid.size, vops.grid.size) or E.shape != (F.shape[0],) or v.shape != (F.shape[1],):
        raise ValueError("shape mismatch between F, E, v and the operators")
    vp, vm = np.maximum(v, 0), np.minimum(v, 0)
    ep, em = np.maximum(E, 0), np.minimum(E, 0)
    out = -(xops.plus.matrix @ F) * vp[None, :] - (xops.minus.matrix @ F) * vm[None, :]
    out -= ep[:, None] * (vops.plus.matrix @ F.T).T + em[:, None] * (vops.minus.matrix @ F.T).T
    return out


def _scripted_derivative_1d(u, mesh: Mesh1D, basis: NodalBasis, upwind_left: bool, periodic: bool) -> np.ndarray:
    """Upwind DG derivative of one nodal line, written cell by cell from the weak form."""
    p = basis.rule.npts
    w = basis.rule.weights
    n = mesh.n
    out = np.zeros(n * p)
    for i in range(n):
        cell = u[i * p:(i + 1) * p]
        own_r = sum(cell[b] * basis.right[b] for b in range(p))
        own_l = sum(cell[b] * basis.left[b] for b in range(p))
        if upwind_left:
            nb = i - 1
            if nb < 0 and not periodic:
                up_l = 0.0
            else:
                nbc = u[(nb % n) * p:((nb % n) + 1) * p]
                up_l = sum(nbc[b] * basis.right[b] for b in range(p))
            trace_r, trace_l = own_r, up_l
        else:
            nb = i + 1
            if nb >= n and not periodic:
                up_r = 0.0
            else:
                nbc = u[(nb % n) * p:((nb % n) + 1) * p]
                up_r = sum(nbc[b] * basis.left[b] for b in range(p))
            trace_r, trace_l = up_r, own_l
        for a in range(p):
            vol = sum(w[b] * basis.dref[b, a] * cell[b] for b in range(p))
            out[i * p + a] = (-vol + trace_r * basis.right[a] - trace_l * basis.left[a]) / (w[a] * mesh.h[i])
    return out


def scripted_rhs(F, E, x_mesh: Mesh1D, v_mesh: Mesh1D, basis: NodalBasis, v: np.ndarray) -> np.ndarray:
    """Same right-hand side as :func:`dense_rhs`, evaluated node by node with explicit loops."""
    F = np.asarray(F, dtype=float)
    out = np.zeros_like(F)
    for j in range(F.shape[1]):
        up = v[j] >= 0
        d = _scripted_derivative_1d(F[:, j], x_mesh, basis, upwind_left=up, periodic=True)
        out[:, j] -= v[j] * d
    for i in range(F.shape[0]):
        up = E[i] >= 0
        d = _scripted_derivative_1d(F[i, :], v_mesh, basis, upwind_left=up, periodic=False)
        out[i, :] -= E[i] * d
    return out


class DenseVlasovPoisson:
    """Dense mirror of :class:`VlasovPoissonSolver` on the same grids and operators.

    With ``correct=True`` each stage performs the moment projection and the
    conservative macroscopic correction; with ``correct=False`` it is the
    plain full-grid DG multistep.
    """

    def __init__(self, solver: VlasovPoissonSolver, correct: bool = True):
        self.lr = solver
        self.ps = solver.ps
        self.correct = correct
        sp = self.ps.space
        self.P = sp.moment_vectors                      # (n, 3): omega (1, v, v^2/2)
        self.B = sp.basis * sp.wm[:, None]              # (n, 3)
        self.G = sp.gram_inv_t
        vp, vm = np.maximum(sp.v, 0), np.minimum(sp.v, 0)
        w = sp.weights[:, None]
        self.Fp = w * np.column_stack([vp, vp**2, 0.5 * vp**3])
        self.Fm = w * np.column_stack([vm, vm**2, 0.5 * vm**3])

    def moments(self, F):
        return F @ self.P  # (m, 3): rho, J, kappa

    def project(self, mom):
        """Dense ``f1`` with moments ``mom`` (rows rho, J, kappa per x node)."""
        return (self.G @ mom.T).T @ self.B.T

    def field(self, F):
        return self.ps.poisson.solve(self.moments(F)[:, 0])

    def macro_rhs(self, U, F, fld, t):
        ps = self.ps
        D = ps.xops
        rhs = -(D.plus.matrix @ (F @ self.Fp)).T - (D.minus.matrix @ (F @ self.Fm)).T
        cfg = self.lr.config
        if cfg.momentum_source == "product":
            rhs[1] += U[0] * fld.E
        else:
            s = 0.5 * fld.E**2
            rhs[1] += fld.rho0 * fld.E + 0.5 * (D.plus.matrix @ s + D.minus.matrix @ s)
        src = self.lr.macro_source(t)
        if src is not None:
            rhs += src
        return rhs

    def kinetic_rhs(self, F, fld, t):
        out = dense_rhs(F, fld.E, self.ps.v, self.ps.xops, self.ps.vops)
        src = self.lr.kinetic_source(t)
        if src is not None:
            out += to_dense(src)
        return out

    def stage(self, f_terms, u_terms, rhs_terms, dt):
        Fs = sum(a * F for a, F in f_terms)
        Us = sum(a * U for a, U in u_terms) if self.correct else None
        for b, F, U, t in rhs_terms:
            fld = self.field(F)
            Fs = Fs + b * dt * self.kinetic_rhs(F, fld, t)
            if self.correct:
                Us = Us + b * dt * self.macro_rhs(U, F, fld, t)
        if not self.correct:
            return Fs, None
        f2 = Fs - self.project(self.moments(Fs))
        fld = self.ps.poisson.solve(Us[0])
        mom = np.vstack([Us[0], Us[1], Us[2] - 0.5 * fld.E**2])
        return self.project(mom.T) + f2, Us

    def initial(self):
        st = self.lr.initialize()
        F = to_dense(st.f)
        return F, st.macro.as_array()

    def run(self, nsteps: int, dt: float):
        """Dense solutions ``[F^0, ..., F^nsteps]`` (Heun for two steps, multistep after)."""
        F, U = self.initial()
        out = [F]
        hist = []
        t = 0.0
        for n in range(nsteps):
            if len(hist) < 2:
                F1, U1 = self.stage([(1.0, F)], [(1.0, U)], [(1.0, F, U, t)], dt)
                Fn, Un = self.stage(
                    [(0.5, F), (0.5, F1)], [(0.5, U), (0.5, U1)],
                    [(0.5, F1, U1, t + dt)], dt,
                )
            else:
                F2, U2 = hist[1]
                Fn, Un = self.stage(
                    [(0.25, F2), (0.75, F)], [(0.25, U2), (0.75, U)],
                    [(1.5, F, U, t)], dt,
                )
            hist = [(F, U)] + hist[:1]
            F, U = Fn, Un
            t = (n + 1) * dt
            out.append(F)
        return out

    def invariants(self, F):
        """Total mass, momentum and energy (kinetic plus field) of a dense solution."""
        wx = self.ps.xgrid.weights
        mom = self.moments(F)
        fld = self.field(F)
        return float(wx @ mom[:, 0]), float(wx @ mom[:, 1]), float(wx @ (mom[:, 2] + 0.5 * fld.E**2))


def dense_run(solver: VlasovPoissonSolver, nsteps: int, dt: float, correct: bool = True) -> list[np.ndarray]:
    return DenseVlasovPoisson(solver, correct).run(nsteps, dt)


def lowrank_run(solver: VlasovPoissonSolver, nsteps: int, dt: float) -> list[np.ndarray]:
    state = solver.initialize()
    out = [to_dense(state.f)]
    for _ in range(nsteps):
        state = solver.advance(state, dt)
        out.append(to_dense(state.f))
    return out


def verify_equivalence(benchmarks=("weak_landau_1d", "strong_landau_1d", "bump_on_tail", "forced_vp"),
                       nx: int = 8, nv: int = 16, k: int = 1, nsteps: int = 5) -> dict[str, float]:
    """Max nodal difference between the eps=0 low-rank run and the dense run, per benchmark."""
    from .config import SolverConfig

    out = {}
    for name in benchmarks:
        cfg = SolverConfig(benchmark=name, nx=nx, nv=nv, k=k, eps=0.0, perturb=0.1, rank_cap=10_000)
        solver = VlasovPoissonSolver(cfg)
        dt, _ = solver.time_step()
        a = lowrank_run(solver, nsteps, dt)
        b = dense_run(solver, nsteps, dt)
        out[name] = max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))
    return out
