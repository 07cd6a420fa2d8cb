"""Low-rank DG stepping for 1D1V Vlasov-Poisson with local macroscopic conservation.

Each step advances the kinetic solution with the 3-level SSP multistep by
rank concatenation, advances the macroscopic (rho, J, e) system with KFVS
fluxes of the same kinetic solution, and then replaces the moment-carrying
part of the kinetic solution by one built from the macroscopic densities.
Only the moment-free remainder is truncated, so the kinetic moments equal
the conservative macroscopic ones after every step.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .benchmarks import Benchmark, get_benchmark
from .config import SolverConfig
from .dg import NodalBasis, UpwindOperatorPair, build_upwind_pair, nodal_basis
from .lowrank import (LowRankFunction, WeightPair, combine, from_separable, map_factors, to_dense,
                      truncate_weighted, weighted_norm)
from .macro import MacroState, kfvs_fluxes, kinetic_energy_from_total, macro_rhs
from .mesh import Mesh1D, NodalGrid, build_uniform, gauss_rule, perturb_mesh
from .moments import MacroMoments, VInnerSpace, build_f1, build_v_space, maxwellian_weight, moments
from .poisson import FieldState, PoissonSolver

log = logging.getLogger(__name__)

# relative size (to the predictor) below which remainder components are discarded
NOISE_FLOOR = 1e-14


class NumericalAbort(RuntimeError):
    """The run produced non-finite values or exceeded the rank cap."""


@dataclass
class PhaseSpace:
    """Meshes, nodal grids, operators and the velocity inner-product space of one run."""

    xmesh: Mesh1D
    vmesh: Mesh1D
    basis: NodalBasis
    xgrid: NodalGrid
    vgrid: NodalGrid
    xops: UpwindOperatorPair
    vops: UpwindOperatorPair
    space: VInnerSpace
    poisson: PoissonSolver
    trunc_weights: WeightPair

    @property
    def x(self) -> np.ndarray:
        return self.xgrid.points

    @property
    def v(self) -> np.ndarray:
        return self.vgrid.points

    @property
    def v_plus(self) -> np.ndarray:
        return np.maximum(self.v, 0.0)

    @property
    def v_minus(self) -> np.ndarray:
        return np.minimum(self.v, 0.0)


def build_phase_space(config: SolverConfig) -> PhaseSpace:
    rule = gauss_rule(config.k)
    basis = nodal_basis(rule)
    xmesh = build_uniform(*config.x_domain, config.nx, "periodic")
    vmesh = build_uniform(*config.v_domain, config.nv, "open")
    if config.perturb > 0:
        xmesh = perturb_mesh(xmesh, config.perturb, config.seed)
        vmesh = perturb_mesh(vmesh, config.perturb, config.seed + 1)
    xops = build_upwind_pair(xmesh, basis, "periodic")
    vops = build_upwind_pair(vmesh, basis, "zero-inflow")
    if config.wm_kind == "maxwellian":
        wm = maxwellian_weight(config.wm_temperature)
    else:
        wm = np.ones_like
    space = build_v_space(vops.grid, wm)
    poisson = PoissonSolver(xmesh, basis, xops)
    tw = WeightPair(xops.grid.weights, vops.grid.weights, space.wm)
    return PhaseSpace(xmesh, vmesh, basis, xops.grid, vops.grid, xops, vops, space, poisson, tw)


def sample_terms(terms, x: np.ndarray, v: np.ndarray) -> LowRankFunction:
    """Sample separable ``(c, g(x), h(v))`` terms on the nodal grids."""
    return from_separable([(c, gx(x), hv(v)) for c, gx, hv in terms])


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    momentum: float
    kinetic_energy: float
    field_energy: float
    total_energy: float
    rank: int
    l2_error: float | None = None
    linf_error: float | None = None


@dataclass
class KineticState:
    """Solution at ``t``: kinetic ``f``, macro densities, field, and the two previous levels.

    ``history`` holds ``(f, macro)`` pairs, most recent first.
    """

    f: LowRankFunction
    t: float
    field: FieldState
    macro: MacroState
    history: list = field(default_factory=list)
    steps: int = 0


class VlasovPoissonSolver:
    """LoMaC low-rank DG solver for one configuration."""

    def __init__(self, config: SolverConfig, benchmark: Benchmark | None = None):
        if config.mode != "vp1d1v":
            raise ValueError(f"VlasovPoissonSolver runs mode 'vp1d1v', got {config.mode!r}")
        self.config = config
        self.bench = benchmark if benchmark is not None else get_benchmark(config.benchmark)
        self.ps = build_phase_space(config)
        self.use_sources = config.manufactured_source and self.bench.kinetic_source is not None

    # -- building blocks -------------------------------------------------

    def field_of(self, f: LowRankFunction) -> FieldState:
        return self.ps.poisson.solve(moments(f, self.ps.space).rho)

    def vlasov_rhs(self, f: LowRankFunction, E: np.ndarray) -> LowRankFunction:
        """``-(v+ D+_x + v- D-_x) f - (E+ D+_v + E- D-_v) f`` as a rank ``4 r`` function."""
        ps = self.ps
        ep = np.maximum(E, 0.0)
        em = np.minimum(E, 0.0)
        return combine([
            (-1.0, map_factors(f, ps.xops.plus, ps.v_plus)),
            (-1.0, map_factors(f, ps.xops.minus, ps.v_minus)),
            (-1.0, map_factors(f, ep, ps.vops.plus)),
            (-1.0, map_factors(f, em, ps.vops.minus)),
        ])

    def kinetic_source(self, t: float) -> LowRankFunction | None:
        if not self.use_sources:
            return None
        return sample_terms(self.bench.kinetic_source(t), self.ps.x, self.ps.v)

    def macro_source(self, t: float) -> np.ndarray | None:
        if not self.use_sources or self.bench.macro_source is None:
            return None
        return self.bench.macro_source(self.ps.x, t)

    def _stage(self, f_terms, u_terms, rhs_terms, dt: float):
        """One LoMaC update.

        ``f_terms``/``u_terms`` are ``(a, f)``/``(a, U)`` pairs of the explicit
        combination; ``rhs_terms`` are ``(b, f, U, t)`` with the operator
        evaluated at ``(f, U)`` and time ``t``, scaled by ``b dt``.
        """
        cfg = self.config
        ps = self.ps
        kin = list(f_terms)
        mac = sum(a * U.as_array() for a, U in u_terms)
        for b, f, U, t in rhs_terms:
            fld = self.field_of(f)
            kin.append((b * dt, self.vlasov_rhs(f, fld.E)))
            src = self.kinetic_source(t)
            if src is not None:
                kin.append((b * dt, src))
            flux = kfvs_fluxes(f, ps.space)
            rhs = macro_rhs(U, flux, fld.E, ps.xops, fld.rho0, self.macro_source(t), cfg.momentum_source)
            mac = mac + b * dt * rhs
        f_star = combine(kin)
        U_new = MacroState.from_array(mac)

        # moment-free remainder of the kinetic prediction
        f1_star = build_f1(moments(f_star, ps.space), ps.space)
        f2 = combine([(1.0, f_star), (-1.0, f1_star)])
        # the remainder of a near-equilibrium f* is rounding noise; a relative
        # criterion alone would keep it, so drop what is below f*'s precision
        floor = NOISE_FLOOR * weighted_norm(f_star, ps.trunc_weights) if cfg.eps > 0 else 0.0
        f2 = truncate_weighted(f2, cfg.eps, ps.trunc_weights, cfg.criterion, floor=floor)

        # moment-carrying part rebuilt from the conservative macro update
        fld_new = ps.poisson.solve(U_new.rho)
        kappa = kinetic_energy_from_total(U_new.e, fld_new.E)
        f1_macro = build_f1(MacroMoments(U_new.rho, U_new.J, kappa), ps.space)
        f_new = combine([(1.0, f1_macro), (1.0, f2)])

        if f_new.rank > cfg.rank_cap:
            raise NumericalAbort(
                f"rank {f_new.rank} exceeds the cap {cfg.rank_cap}; raise rank_cap or eps (now {cfg.eps:g})"
            )
        if not (np.all(np.isfinite(f_new.coef)) and np.all(np.isfinite(f_new.left)) and np.all(np.isfinite(mac))):
            raise NumericalAbort("non-finite values in the solution")
        return f_new, U_new, fld_new

    # -- public stepping API ----------------------------------------------

    def initialize(self) -> KineticState:
        if self.bench.initial_terms is None:
            raise ValueError(f"benchmark {self.bench.name!r} has no separable initial condition")
        f0 = sample_terms(self.bench.initial_terms(self.config.params), self.ps.x, self.ps.v)
        fld = self.field_of(f0)
        mom = moments(f0, self.ps.space)
        U0 = MacroState(mom.rho, mom.J, mom.kappa + 0.5 * fld.E**2)
        return KineticState(f0, 0.0, fld, U0, [], 0)

    def heun_step(self, state: KineticState, dt: float) -> KineticState:
        """SSP two-stage Runge-Kutta step with the conservative correction after each stage."""
        if dt <= 0:
            raise ValueError("time step must be positive")
        f, U, t = state.f, state.macro, state.t
        f1, U1, _ = self._stage([(1.0, f)], [(1.0, U)], [(1.0, f, U, t)], dt)
        f2, U2, fld = self._stage([(0.5, f), (0.5, f1)], [(0.5, U), (0.5, U1)], [(0.5, f1, U1, t + dt)], dt)
        hist = [(f, U)] + state.history[:1]
        return KineticState(f2, t + dt, fld, U2, hist, state.steps + 1)

    def startup(self, state: KineticState, dt: float) -> KineticState:
        """Advance a fresh state two steps so the multistep has its history."""
        if state.history:
            raise ValueError("startup expects a fresh state without history")
        for _ in range(2):
            state = self.heun_step(state, dt)
        return state

    def step(self, state: KineticState, dt: float) -> KineticState:
        """``f^{n+1} = f^{n-2}/4 + 3 f^n/4 + (3/2) dt L(f^n)`` with the conservative correction."""
        if dt <= 0:
            raise ValueError("time step must be positive")
        if len(state.history) < 2:
            raise ValueError("multistep needs two previous levels; call startup first")
        f_nm2, U_nm2 = state.history[1]
        f, U = state.f, state.macro
        f_new, U_new, fld = self._stage(
            [(0.25, f_nm2), (0.75, f)], [(0.25, U_nm2), (0.75, U)], [(1.5, f, U, state.t)], dt
        )
        hist = [(f, U), state.history[0]]
        return KineticState(f_new, state.t + dt, fld, U_new, hist, state.steps + 1)

    def advance(self, state: KineticState, dt: float) -> KineticState:
        """Heun for the first two steps, multistep afterwards."""
        if len(state.history) < 2:
            return self.heun_step(state, dt)
        return self.step(state, dt)

    # -- diagnostics -------------------------------------------------------

    def diagnostics(self, state: KineticState, with_error: bool = True) -> DiagnosticsRecord:
        wx = self.ps.xgrid.weights
        U, E = state.macro, state.field.E
        field_e = 0.5 * float(wx @ (E * E))
        total = float(wx @ U.e)
        rec = DiagnosticsRecord(
            t=state.t,
            mass=float(wx @ U.rho),
            momentum=float(wx @ U.J),
            kinetic_energy=total - field_e,
            field_energy=field_e,
            total_energy=total,
            rank=state.f.rank,
        )
        if with_error and self.bench.exact is not None:
            rec.l2_error, rec.linf_error = self.error_norms(state)
        return rec

    def error_norms(self, state: KineticState) -> tuple[float, float]:
        """Nodal L2 (tensor Gauss quadrature) and max-norm errors against the exact solution."""
        x, v = self.ps.x, self.ps.v
        diff = to_dense(state.f) - self.bench.exact(x[:, None], v[None, :], state.t)
        w = np.outer(self.ps.xgrid.weights, self.ps.vgrid.weights)
        return float(np.sqrt(np.sum(w * diff**2))), float(np.max(np.abs(diff)))

    # -- time step ---------------------------------------------------------

    def time_step(self) -> tuple[float, int]:
        """``(dt, nsteps)`` with ``nsteps * dt == t_end``; dt never exceeds the rule's value."""
        cfg = self.config
        hmin = float(self.ps.xmesh.h.min())
        if cfg.dt is not None:
            dt = cfg.dt
        elif cfg.dt_rule == "advection":
            dt = (hmin / 3.0) ** 1.5
        else:
            vmax = float(np.max(np.abs(cfg.v_domain)))
            dt = cfg.cfl * hmin / vmax
        n = max(1, math.ceil(cfg.t_end / dt - 1e-9))
        return cfg.t_end / n, n


@dataclass
class RunResult:
    series: list[DiagnosticsRecord]
    snapshots: dict[float, LowRankFunction]
    state: KineticState
    dt: float
    seconds: float
    solver: VlasovPoissonSolver | None = None


def run(config: SolverConfig, progress: bool = False) -> RunResult:
    """Integrate a configuration to ``t_end``, recording diagnostics every ``output_every`` steps."""
    solver = VlasovPoissonSolver(config)
    dt, nsteps = solver.time_step()
    tic = time.perf_counter()
    state = solver.initialize()
    series = [solver.diagnostics(state)]
    snaps: dict[float, LowRankFunction] = {}
    pending = [t for t in config.snapshot_times if t <= config.t_end + 1e-12]
    if pending and pending[0] <= 0.5 * dt:
        snaps[pending.pop(0)] = state.f
    for n in range(1, nsteps + 1):
        state = solver.advance(state, dt)
        state = replace(state, t=n * dt)
        if n % config.output_every == 0 or n == nsteps:
            series.append(solver.diagnostics(state))
            if progress:
                log.info("t=%.4f rank=%d", state.t, state.f.rank)
        while pending and pending[0] <= state.t + 0.5 * dt:
            snaps[pending.pop(0)] = state.f
    return RunResult(series, snaps, state, dt, time.perf_counter() - tic, solver)
