"""Numerical verification of Sasaki geometry on T^{1,1}.

Modules: ``coords`` (charts and frames), ``jets`` (second-order forward
differentiation), ``tensor`` (curvature engine), ``sasaki`` (the structure
generated by a Sasaki potential), ``deform`` (contact-form deformations),
``flow`` (transverse Kahler-Ricci flow) and ``cli``.
"""

from .coords import ChartDomain, ComplexPoint, DomainError, RealPoint, sample_points, to_complex, to_real
from .deform import BasicFunction, DeformedStructure, family_metric, log_modulus, log_squared
from .flow import FlowConfig, FlowState, analytic_solution, integrate_flow
from .sasaki import SasakiStructure, sasaki_structure, standard_metric, standard_potential
from .tensor import MetricField, christoffel, einstein_residual, ricci, scalar_curvature

__version__ = "0.1.0"

__all__ = [
    "BasicFunction",
    "ChartDomain",
    "ComplexPoint",
    "DeformedStructure",
    "DomainError",
    "FlowConfig",
    "FlowState",
    "MetricField",
    "RealPoint",
    "SasakiStructure",
    "analytic_solution",
    "christoffel",
    "einstein_residual",
    "family_metric",
    "integrate_flow",
    "log_modulus",
    "log_squared",
    "ricci",
    "sample_points",
    "sasaki_structure",
    "scalar_curvature",
    "standard_metric",
    "standard_potential",
    "to_complex",
    "to_real",
]
