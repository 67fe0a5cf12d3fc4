"""
Propagators of the three quadratic systems
==========================================

Closed-form kernels for the free particle, the constant force and the
harmonic oscillator, checked against their own composition law and
against a time-sliced path integral.
"""

import numpy as np

from qmgerbe import KernelParams, SpacetimePoint, classical_action, compose_semigroup, propagator, timeslice_propagator

P = SpacetimePoint
systems = [KernelParams("free"), KernelParams("linear", F=0.7), KernelParams("harmonic", omega=1.0)]
a, b = P(0.4, 0.0), P(-0.7, 1.3)

# The kernel at two events, and the classical action whose phase it carries
for k in systems:
    G = propagator(k, a, b)
    S = classical_action(k, a, b)
    print(f"{k.kind:9s} G = {G:.6f}   |G| = {abs(G):.6f}   S_cl = {S:+.6f}")

# Gluing two kernels at an intermediate time and integrating over the
# intermediate position gives the kernel back
print()
for k in systems:
    G = propagator(k, a, b)
    glued = compose_semigroup(k, a, 0.5, b)
    print(f"{k.kind:9s} semigroup relative error {abs(glued - G) / abs(G):.2e}")

# Slicing the time interval into N pieces and integrating over N - 1
# positions leaves the answer unchanged for any N
print()
for k in systems:
    G = propagator(k, a, b)
    errs = [abs(timeslice_propagator(k, a, b, N) - G) / abs(G) for N in (2, 3, 4)]
    print(f"{k.kind:9s} time slicing, N = 2, 3, 4: " + ", ".join(f"{e:.1e}" for e in errs))

# Near a half period the oscillator kernel is singular and refuses to answer
try:
    propagator(systems[2], P(0.0, 0.0), P(1.0, np.pi))
except ValueError as exc:
    print("\n" + str(exc))
