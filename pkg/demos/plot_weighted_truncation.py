"""
Low-rank functions and weighted truncation
==========================================

A nodal function on a tensor grid is stored as ``sum_l C_l U1_l (x) U2_l``.
Arithmetic concatenates factors, so ranks grow; the weighted SVD truncation
brings them back down while controlling the error in the quadrature-weighted
norm.
"""
import numpy as np

from lomac import LowRankFunction, WeightPair, to_dense, truncate_weighted
from lomac.lowrank import combine, weighted_norm
from lomac.mesh import build_uniform, gauss_rule, nodal_grid

####################################################################
# A smooth non-separable function at full rank
# --------------------------------------------
# ``1 / (1 + x^2 + v^2)`` sampled on Gauss nodes, stored with all 48 terms
# of its plain SVD.
rule = gauss_rule(2)
xg = nodal_grid(build_uniform(-2, 2, 16), rule)
vg = nodal_grid(build_uniform(-3, 3, 16, "open"), rule)
F = 1.0 / (1.0 + xg.points[:, None] ** 2 + vg.points[None, :] ** 2)
u, s, vt = np.linalg.svd(F, full_matrices=False)
f = LowRankFunction(s, u, vt.T)
print(f"stored rank: {f.rank}")

####################################################################
# Truncate at a few tolerances
# ----------------------------
# The relative criterion bounds the weighted error by ``eps`` times the
# weighted norm of the input.
w = WeightPair(xg.weights, vg.weights)
norm = weighted_norm(f, w)
for eps in (1e-2, 1e-4, 1e-8):
    t = truncate_weighted(f, eps, w)
    err = weighted_norm(combine([(1.0, f), (-1.0, t)]), w)
    print(f"eps={eps:.0e}: rank {t.rank:2d}, weighted error / norm {err / norm:.2e}")

####################################################################
# Concatenation doubles the rank; truncation removes the redundancy
# -------------------------------------------------------------------
g = combine([(1.0, f), (1.0, f)])
t = truncate_weighted(g, 1e-12, w)
print(f"f + f has rank {g.rank}; truncated: {t.rank}, max deviation from 2F "
      f"{np.abs(to_dense(t) - 2 * F).max():.1e}")
