"""
Convergence on a manufactured solution
======================================

The forced problem adds a source to the Vlasov equation (and the matching
moments to the macroscopic system) so that the exact solution is known.
Refining both grids by two shows the ``k+1`` order of the nodal scheme.
"""
from lomac import SolverConfig, run
from lomac.io import convergence_table, format_table

####################################################################
# Refinement ladder with quadratic elements
# -----------------------------------------
# ``t_end`` is shortened so the demo runs in seconds.
levels = []
for nx in (8, 16, 32):
    cfg = SolverConfig(benchmark="forced_vp", nx=nx, nv=2 * nx, k=2, t_end=0.5, output_every=10**9)
    res = run(cfg)
    last = res.series[-1]
    levels.append({"mesh": f"{nx}x{2 * nx}", "l2": last.l2_error, "linf": last.linf_error, "seconds": res.seconds})

print(format_table(convergence_table(levels)))
