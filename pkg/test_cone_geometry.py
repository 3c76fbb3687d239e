#!/usr/bin/env python3
"""
Tests for cone descriptions, projections and linear images of cones
"""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from riskagg.cones import (
    ConeKind,
    ConeSpec,
    conic_hull_of_simplex,
    project,
    project_many,
    transform_cone,
)
from riskagg.cones import cone_geometry
from riskagg.errors import DomainError, ProjectionError


def random_cone(rng, d, k):
    return ConeSpec.generated(rng.standard_normal((k, d)))


def point_in_cone(rng, cone):
    if cone.kind is ConeKind.FULL_SPACE:
        return rng.standard_normal(cone.dim)
    if cone.kind is ConeKind.NONNEG_ORTHANT:
        return rng.uniform(0, 1, cone.dim)
    return rng.uniform(0, 1, cone.n_generators) @ cone.generators


def enumerate_projection_distance(cone, y):
    """min ||y - p|| over nonnegative least-squares fits on every independent face"""
    G = cone.generators
    best = np.linalg.norm(y)
    for size in range(1, min(cone.n_generators, cone.dim) + 1):
        for subset in itertools.combinations(range(cone.n_generators), size):
            A = G[list(subset)].T
            if np.linalg.matrix_rank(A) < size:
                continue
            coef = np.linalg.lstsq(A, y, rcond=None)[0]
            if np.all(coef >= 0):
                best = min(best, np.linalg.norm(A @ coef - y))
    return best


class TestConeSpec:

    def test_generated_normalizes_and_dedupes(self):
        cone = ConeSpec.generated([[1.0, 0.0], [2.0, 0.0], [0.0, 3.0], [0.0, 0.0]])
        assert cone.n_generators == 2
        assert_allclose(np.linalg.norm(cone.generators, axis=1), 1.0)

    def test_axes_are_flagged_orthant(self):
        assert ConeSpec.generated(np.eye(3)).is_orthant
        assert not ConeSpec.generated([[1.0, 0.0], [1.0, 1.0]]).is_orthant

    def test_invalid_generators(self):
        with pytest.raises(DomainError):
            ConeSpec.generated([[0.0, 0.0]])
        with pytest.raises(DomainError):
            ConeSpec.generated([[np.nan, 1.0]])
        with pytest.raises(DomainError):
            ConeSpec.full_space(0)

    @pytest.mark.parametrize("d", [1, 2, 10])
    def test_conic_hull_of_simplex(self, d):
        cone = conic_hull_of_simplex(d)
        assert cone.kind is ConeKind.NONNEG_ORTHANT
        assert cone.dim == d


class TestProject:

    def test_orthant_clamps(self):
        assert_array_equal(project(ConeSpec.nonneg_orthant(2), [-1.0, 2.0]), [0.0, 2.0])

    def test_full_space_identity(self):
        y = np.array([-3.0, 0.5, 7.0])
        assert_array_equal(project(ConeSpec.full_space(3), y), y)

    def test_generated_two_rays(self):
        cone = ConeSpec.generated([[1.0, 0.0], [1.0, 1.0]])
        p = project(cone, [0.0, 1.0])
        assert_allclose(p, [0.5, 0.5], atol=1e-12)

    def test_point_inside_is_fixed(self):
        cone = ConeSpec.generated([[1.0, 0.0], [1.0, 1.0]])
        assert_allclose(project(cone, [2.0, 1.0]), [2.0, 1.0], atol=1e-12)

    def test_polar_point_maps_to_origin(self):
        cone = ConeSpec.generated([[1.0, 0.0], [1.0, 1.0]])
        assert_allclose(project(cone, [-1.0, -1.0]), [0.0, 0.0], atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            project(ConeSpec.nonneg_orthant(2), [1.0, 2.0, 3.0])
        with pytest.raises(DomainError):
            project_many(ConeSpec.nonneg_orthant(2), np.zeros((4, 3)))

    def test_project_many_matches_rows(self):
        rng = np.random.default_rng(0)
        cone = random_cone(rng, 3, 4)
        Y = rng.standard_normal((20, 3))
        assert_allclose(project_many(cone, Y), [project(cone, y) for y in Y])

    def test_nnls_failure_is_projection_error(self, monkeypatch):
        def failing_nnls(A, b, maxiter=None):
            raise RuntimeError("Maximum number of iterations reached.")
        monkeypatch.setattr(cone_geometry, "nnls", failing_nnls)
        cone = ConeSpec.generated([[1.0, 0.0], [1.0, 1.0]])
        with pytest.raises(ProjectionError) as info:
            project(cone, [0.0, 1.0])
        assert info.value.residual >= 0.0


class TestProjectionProperties:

    def test_idempotent_orthogonal_dominant(self):
        rng = np.random.default_rng(2024)
        for trial in range(10_000):
            d = int(rng.integers(1, 5))
            kind = trial % 3
            if kind == 0:
                cone = ConeSpec.full_space(d)
            elif kind == 1:
                cone = ConeSpec.nonneg_orthant(d)
            else:
                cone = random_cone(rng, d, int(rng.integers(1, 6)))
            y = 3.0 * rng.standard_normal(d)
            x = point_in_cone(rng, cone)
            p = project(cone, y)

            scale = 1.0 + y @ y
            assert np.linalg.norm(project(cone, p) - p) <= 1e-10 * scale
            assert abs(p @ (y - p)) <= 1e-9 * scale
            assert x @ y <= x @ p + 1e-9 * (1.0 + np.linalg.norm(x) * np.linalg.norm(y))

    def test_distance_matches_enumeration(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            d = int(rng.integers(2, 4))
            cone = random_cone(rng, d, int(rng.integers(1, 5)))
            y = rng.standard_normal(d)
            p = project(cone, y)
            assert np.linalg.norm(y - p) == pytest.approx(enumerate_projection_distance(cone, y), abs=1e-8)


class TestTransformCone:

    def test_identity_orthant(self):
        image = transform_cone(ConeSpec.nonneg_orthant(2), np.eye(2))
        assert image.is_orthant
        rng = np.random.default_rng(1)
        for y in rng.standard_normal((100, 2)):
            assert_array_equal(project(image, y), project(ConeSpec.nonneg_orthant(2), y))

    def test_diagonal_scaling_keeps_axes(self):
        image = transform_cone(ConeSpec.nonneg_orthant(2), np.diag([2.0, 1.0]))
        assert image.is_orthant
        assert_array_equal(image.generators, np.eye(2))

    def test_single_generator(self):
        P = np.array([[1.0, 2.0], [0.0, 3.0]])
        g = np.array([1.0, 1.0])
        image = transform_cone(ConeSpec.generated([g]), P)
        expected = P @ g / np.linalg.norm(P @ g)
        assert_allclose(image.generators[0], expected, atol=1e-15)

    def test_orthant_image_is_columns(self):
        P = np.array([[1.0, 2.0], [0.0, 3.0]])
        image = transform_cone(ConeSpec.nonneg_orthant(2), P)
        columns = P.T / np.linalg.norm(P.T, axis=1, keepdims=True)
        assert_allclose(image.generators, columns)

    def test_full_space(self):
        assert transform_cone(ConeSpec.full_space(3), 2 * np.eye(3)).kind is ConeKind.FULL_SPACE

    def test_image_membership(self):
        rng = np.random.default_rng(5)
        P = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        cone = random_cone(rng, 3, 4)
        image = transform_cone(cone, P)
        for _ in range(50):
            x = point_in_cone(rng, cone)
            assert_allclose(project(image, P @ x), P @ x, atol=1e-9 * (1 + np.linalg.norm(P @ x)))

    def test_singular_transform(self):
        with pytest.raises(DomainError):
            transform_cone(ConeSpec.nonneg_orthant(2), [[1.0, 1.0], [1.0, 1.0]])
