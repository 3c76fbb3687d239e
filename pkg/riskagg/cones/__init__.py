"""
Cones
=====

Convex cone specifications, projection and cone images under linear maps.
"""

from .cone_geometry import ConeKind, ConeSpec, conic_hull_of_simplex, project, project_many, transform_cone

__all__ = ['ConeKind', 'ConeSpec', 'conic_hull_of_simplex', 'project', 'project_many', 'transform_cone']
