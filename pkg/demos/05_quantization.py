"""
Integrality of the characteristic class
=======================================

Over a closed volume the curvature H integrates to a multiple of 2 pi.
On a surface S = dV the same statement reads (1 / pi hbar) int_S dL ^ dt
in Z, and the two are compared by gluing two volumes along S.
"""

import numpy as np

from qmgerbe import cocycle_integer_form, gluing_check, integrate_H_closed_volume, steepest_descent_cocycle
from qmgerbe.acceptance import free_example_loop, gluing_instance
from qmgerbe.charclass import uniform_H, winding_of
from qmgerbe.mesh import closed_volume

# A closed 3-volume: the boundary of a triangulated 4-box
vol = closed_volume(1)
for total in (0.0, 2 * np.pi, 4 * np.pi, 3 * np.pi):
    rep = integrate_H_closed_volume(uniform_H(vol, total), vol)
    print(f"int H = {total:7.4f}: n = {rep.n}, deviation {rep.deviation:.2e}, quantised = {rep.passed}")

# A vortex Lagrangian L = c atan2(q2, q1) threads flux through a box around
# its axis; glue the box to a reversed copy of itself
print()
for n_flux in (1.0, 2.0, 2.5):
    L, H, v1, v2, hbar = gluing_instance(n_flux)
    rep = gluing_check(L, H, v1, v2, hbar)
    print(f"flux / pi hbar = {rep.surface.ratio:.4f}, volume / 2 pi = {rep.volume.ratio:.4f}, passed = {rep.passed}")

# The cocycle itself in integer form: g = exp(i pi n)
print()
res = steepest_descent_cocycle(free_example_loop())
rep = cocycle_integer_form(res.g, tol=1.0, winding=winding_of(res.action_over_hbar))
print(f"S_loop / pi = {rep.ratio:.4f}: nearest n = {rep.n} ({rep.parity})")
