"""
Stokes' theorem and the gerbe connection on a mesh
==================================================

The action around the boundary of a surface equals the flux of dL ^ dt
through it.  On a triangulated surface the two sides differ by O(h^2).
A connection (A, B, H) built on three charts satisfies H = dB,
B_b - B_a = dA_ab and A_ab + A_bc + A_ca = g^-1 dg up to sampling error.
"""

import numpy as np

from qmgerbe import stokes_check, verify_connection
from qmgerbe.cover import overlap
from qmgerbe.geometry import constructed_connection, polynomial_lagrangian, slab_cover
from qmgerbe.mesh import SimplicialComplex, box_volume, square_surface

# L = q^3 + q t^2 on the unit square of the (q, t) plane
L = polynomial_lagrangian([(1.0, (3, 0)), (1.0, (1, 2))])
prev = None
for n in (4, 8, 16, 32):
    rep = stokes_check(L, square_surface(n))
    rate = "" if prev is None else f"   order {np.log2(prev / rep.residual):.3f}"
    print(f"n = {n:2d}: line {rep.line:.10f}  surface {rep.surface:.10f}  residual {rep.residual:.2e}{rate}")
    prev = rep.residual

# Connection data on a Kuhn-triangulated cube covered by three slabs
print()
cover = slab_cover()
for n in (4, 8):
    K = SimplicialComplex.from_mesh(box_volume(n))
    rep = verify_connection(constructed_connection(K, cover, seed=0))
    print(f"n = {n}: |H - dB| {rep.residual_H:.1e}  |B_b - B_a - dA| {rep.residual_B:.1e}  "
          f"|sum A - dlog g| {rep.residual_A:.1e}")

# A wrong A on one edge of the triple overlap is caught
data = constructed_connection(K, cover, seed=0)
edge = int(np.flatnonzero(K.inside(1, overlap(cover, (1, 2, 3))))[0])
rep = verify_connection(data.perturbed_A((1, 2), edge, 0.1), tol=1e-2)
print(f"A_12 shifted by 0.1 on one edge: max residual {rep.max_residual:.3f}, passed = {rep.passed}")
