"""Exact Casimir interaction between a sphere and a cylinder.

Scalar fields with Dirichlet or Neumann boundary conditions and the EM field
for perfect conductors, evaluated from the round-trip log determinant over
sphere multipoles, together with every closed-form asymptotic regime
(large separation, proximity force approximation, derivative expansion).
"""

__version__ = "0.1.0"

from .asymptotics import (Family, FarIntegralConstant, de_beta, de_energy,
                          far_energy, far_integral_constants, pfa_energy)
from .energy import (EnergyResult, ForceResult, Geometry, casimir_energy,
                     casimir_force, logdet_one_minus, omega_integral)
from .errors import (CascylError, ConvergenceError, GeometryError,
                     SingularTMatrixError, SpectralRadiusError)
from .kernel import (ModeBasis, NSumResult, QuadratureSpec, RoundTripMatrix,
                     assemble_em_matrix, assemble_round_trip,
                     assemble_scalar_matrix, n_sum_terms)
from .scattering import BoundaryCondition, cylinder_t, sphere_t

__all__ = [
    "BoundaryCondition", "CascylError", "ConvergenceError", "EnergyResult",
    "Family", "FarIntegralConstant", "ForceResult", "Geometry", "GeometryError",
    "ModeBasis", "NSumResult", "QuadratureSpec", "RoundTripMatrix",
    "SingularTMatrixError", "SpectralRadiusError", "assemble_em_matrix",
    "assemble_round_trip", "assemble_scalar_matrix", "casimir_energy",
    "casimir_force", "cylinder_t", "de_beta", "de_energy", "far_energy",
    "far_integral_constants", "logdet_one_minus", "n_sum_terms",
    "omega_integral", "pfa_energy", "sphere_t", "__version__",
]
