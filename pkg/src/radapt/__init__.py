"""Variational r-adaptation of high-order curvilinear 2D meshes.

Target elements are the initial straight-sided elements deformed by a
metric tensor; nodes are relocated to minimize a hyperelastic energy of
the map from target to current elements.
"""
from .energy import (EnergyBreakdown, MaterialConstants, element_energy, energy_gradient,
                     node_energy_gradient, strain_energy_density, strain_energy_density_dF,
                     total_energy)
from .geometry import Arc, Segment, curve_eval, curve_project
from .io import MeshFormatError, read_mesh, write_mesh
from .mapping import (build_target_cache, build_target_jacobian, deformation_gradient,
                      eval_current_jacobian, eval_ideal_jacobian)
from .mesh import (Mesh, barycentre, generate_quadrant_tri_mesh, generate_unit_square_quad_mesh,
                   node_to_elements)
from .metric import (GaussianRingProfile, IdentityField, IsotropicField, MetricTensor, RingField,
                     compose_radial_metric, gaussian_r, isotropic_metric, ring_metric_eval)
from .optimizer import AdaptReport, OptimizerConfig, optimize, validity_scan
from .reference import ReferenceElement, Shape, build_reference_element

__version__ = "0.1.0"
