"""
Checking the low-rank solver against a dense reference
======================================================

With no truncation the low-rank solver is the full-grid scheme in another
storage format, so both must agree to rounding error. The dense reference
also shows what the macroscopic correction buys: without it the plain DG
scheme drifts in total energy.
"""
from lomac import SolverConfig, VlasovPoissonSolver
from lomac.oracle import DenseVlasovPoisson, verify_equivalence

####################################################################
# Agreement on every benchmark
# ----------------------------
for name, diff in verify_equivalence(nx=8, nv=16, k=1, nsteps=5).items():
    print(f"{name:18s} max nodal difference {diff:.1e}")

####################################################################
# Ablation: the same dense scheme with and without the correction
# ----------------------------------------------------------------
solver = VlasovPoissonSolver(SolverConfig(benchmark="weak_landau_1d", nx=8, nv=16, k=1, eps=0.0))
dt, _ = solver.time_step()
for correct in (True, False):
    dense = DenseVlasovPoisson(solver, correct=correct)
    F = dense.run(40, dt)
    m0, _, e0 = dense.invariants(F[0])
    m, _, e = dense.invariants(F[-1])
    label = "corrected" if correct else "plain DG "
    print(f"{label}: mass deviation {abs(m - m0) / m0:.1e}, energy deviation {abs(e - e0) / e0:.1e}")
