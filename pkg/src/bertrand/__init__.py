"""Bertrand surfaces of revolution and their closing central potentials."""

from .errors import BertrandError, ConstraintError, DomainError, NumericalFailure, PreconditionError
from .param_plane import ParamPoint, RegionTag, branch_intervals, classify
from .potentials import Potential, circular_momentum, effective_potential
from .surfaces import FirstTypeSpec, SurfaceSpec, detect_embedding
from .dynamics import OrbitState, apsidal_angle, closure_test, integrate, integrate_theta_chart
from .cone_atlas import ConeSpec, covering_order, develop

__all__ = [
    "BertrandError", "ConstraintError", "DomainError", "NumericalFailure", "PreconditionError",
    "ParamPoint", "RegionTag", "branch_intervals", "classify",
    "Potential", "circular_momentum", "effective_potential",
    "FirstTypeSpec", "SurfaceSpec", "detect_embedding",
    "OrbitState", "apsidal_angle", "closure_test", "integrate", "integrate_theta_chart",
    "ConeSpec", "covering_order", "develop",
]

__version__ = "0.1.0"
