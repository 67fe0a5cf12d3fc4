"""Numerical toolkit for the gerbe structure of quantum-mechanical propagators.

Quadratic-Lagrangian propagators, their trivialisations on chart overlaps,
the resulting U(1) 2-cocycle, discrete connection forms and integrality
checks for the characteristic class.
"""

from .cech import U1Cochain, coboundary, verify_cocycle, verify_gerbe_cocycle, verify_line_bundle_cocycle
from .charclass import (
    QuantizationReport,
    cocycle_integer_form,
    gauss_law_check,
    gluing_check,
    integrate_H_closed_volume,
)
from .cocycle import (
    LoopSpec,
    PairTrivialisation,
    decompose_loop,
    g_tilde_numeric,
    steepest_descent_cocycle,
    two_cocycle,
)
from .cover import Chart, Cover, overlap, sample_points
from .errors import GerbeError
from .geometry import (
    GerbeConnectionData,
    LagrangianField,
    action_line_integral,
    connection_from_lagrangian,
    gauge_transform,
    stokes_check,
    surface_integral_dL_dt,
    verify_connection,
    vev_report,
    wkb_phase,
)
from .kernels import (
    KernelParams,
    SpacetimePoint,
    classical_action,
    compose_semigroup,
    duality_phase,
    fresnel_gaussian,
    propagator,
    timeslice_propagator,
)
from .mesh import DiscretePath, DiscreteSurface, DiscreteVolume, SimplicialComplex
from .quadrature import QuadratureSpec, regularized_integral
from .trivialisation import TrivParams, tau_closed, tau_numeric

__version__ = "0.1.0"
