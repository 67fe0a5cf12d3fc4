"""
Trivialisations from propagator integrals
=========================================

Integrating the kernel over the starting point of the first leg and the
end point of the second leg leaves a phase that depends only on the
midpoint q12.  Quadrature and the closed forms agree up to a constant
phase, so the comparison is made through ratios tau(q) / tau(0).
"""

import numpy as np

from qmgerbe import KernelParams, TrivParams, tau_closed, tau_numeric

cases = {
    "free": TrivParams(KernelParams("free"), 0.0, 1.0, 2.0),
    "linear": TrivParams(KernelParams("linear", F=1.0), 0.0, 1.0, 2.0),
    "harmonic": TrivParams(KernelParams("harmonic", omega=1.0), 0.0, np.pi / 4, np.pi / 2),
}

for name, tp in cases.items():
    print(f"{name}: times {tp.t1:.3f} < {tp.t12:.3f} < {tp.t2:.3f}")
    print("   q12    arg closed ratio   arg numeric ratio   difference")
    c0, n0 = tau_closed(tp, 0.0).tau, tau_numeric(tp, 0.0).tau
    for q in np.linspace(-1.0, 1.0, 5):
        rc = tau_closed(tp, q).tau / c0
        rn = tau_numeric(tp, q).tau / n0
        print(f"  {q:+.2f}   {np.angle(rc):+.12f}   {np.angle(rn):+.12f}   {abs(np.angle(rn / rc)):.1e}")
    print()

# The free-particle trivialisation is constant: the gerbe it defines is trivial
# The force and frequency limits reduce to it continuously
for F in (1e-2, 1e-4, 1e-8):
    tp = TrivParams(KernelParams("linear", F=F), 0.0, 1.0, 2.0)
    print(f"F = {F:.0e}: |tau(1.5) - 1| = {abs(tau_closed(tp, 1.5).tau - 1):.1e}")
