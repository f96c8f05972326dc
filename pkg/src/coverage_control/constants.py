"""Numerical tolerances shared across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # geometry
    duplicate_vertex: float = 1e-12
    duplicate_generator: float = 1e-12
    face_length: float = 1e-12
    degenerate_triangle: float = 1e-12
    clip_slack: float = 1e-14
    # integration
    zero_mass: float = 1e-14
    refine_rel_change: float = 1e-6
    quad_rel_cell: float = 1e-6
    quad_rel_total: float = 1e-12
    quad_max_depth: int = 10
    quad_max_log_var: float = 1.0
    singular_node: float = 1e-12
    # monotonicity checks
    flow_descent_rel: float = 1e-9
    energy_descent: float = 1e-6
    async_descent: float = 1e-6
    # distributed layer
    active_speed: float = 1e-9
    adjust_radius_max_iter: int = 64
    disk_polygon_sides: int = 64


TOL = Tolerances()
