import numpy as np
import pytest

from pyramidrate.errors import Infeasible, NotSalient
from pyramidrate.geometry import (GeneratedCone, Pyramid, conic_membership, distance_to_cone,
                                  dual_cone, extremal_directions, interior_point, nnls,
                                  project_onto_cone)

from conftest import random_pyramid


def test_quadrant_interior_point(quadrant):
    y = interior_point(quadrant.normals)
    assert np.all(quadrant.normals @ y >= 1 - 1e-12)
    assert np.allclose(y, [1, 1])


def test_opposite_halfplanes_infeasible():
    with pytest.raises(Infeasible):
        Pyramid([[1, 0], [-1, 0]])


def test_three_vectors_summing_to_zero_infeasible():
    # every normal is a negative combination of the others, so no interior
    with pytest.raises(Infeasible):
        Pyramid([[1, 0], [-0.5, np.sqrt(3) / 2], [-0.5, -np.sqrt(3) / 2]])


def test_normals_are_unit():
    p = Pyramid([[3, 0], [0, 0.25]])
    assert np.allclose(np.linalg.norm(p.normals, axis=1), 1.0)


def test_orthant_is_self_dual(quadrant):
    dual = dual_cone(quadrant)
    assert np.allclose(sorted(map(tuple, dual.generators)), [(0, 1), (1, 0)])


def test_middle_ray_not_extremal():
    c = GeneratedCone([[1, 0], [1, 1], [0, 1]])
    assert extremal_directions(c).indices == (0, 2)


def test_octant_with_redundant_normal():
    p = Pyramid([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]])
    ext = extremal_directions(dual_cone(p))
    gens = dual_cone(p).generators[list(ext.indices)]
    assert np.allclose(sorted(map(tuple, gens)), sorted(map(tuple, np.eye(3))))


def test_extremal_not_salient():
    with pytest.raises(NotSalient):
        extremal_directions(GeneratedCone([[1, 0], [-1, 0], [0, 1]]))


def test_membership_certificate():
    c = GeneratedCone([[1, 0], [1, 1]])
    ok, lam = conic_membership(c, np.array([3.0, 1.0]))
    assert ok
    assert np.allclose(c.generators.T @ lam, [3, 1])
    ok, lam = conic_membership(c, np.array([0.0, 1.0]))
    assert not ok and lam is None


def test_nnls_against_closed_form():
    G = np.eye(2)
    lam, res = nnls(G, np.array([-1.0, 2.0]))
    assert np.allclose(lam, [0, 2]) and abs(res - 1.0) < 1e-12


@pytest.mark.parametrize("x, proj", [((-1, 2), (0, 2)), ((3, 4), (3, 4)), ((-1, -1), (0, 0))])
def test_project_quadrant(quadrant, x, proj):
    assert np.allclose(project_onto_cone(quadrant, np.array(x, float)), proj, atol=1e-12)


def test_projection_onto_wedge():
    # 60 degree wedge between the x axis and the ray at 60 degrees
    a = np.pi / 3
    p = Pyramid([[0, 1], [np.sin(a), -np.cos(a)]])
    x = np.array([0.0, 1.0])
    ray = np.array([np.cos(a), np.sin(a)])
    assert np.allclose(project_onto_cone(p, x), (x @ ray) * ray, atol=1e-10)
    assert abs(distance_to_cone(p, x) - np.cos(a)) < 1e-10


def test_double_duality_membership(rng):
    for dim, k in ((2, 3), (3, 5), (4, 6)):
        p = random_pyramid(rng, dim, k)
        dual = dual_cone(p)
        ext = extremal_directions(dual)
        back = Pyramid(dual.generators[list(ext.indices)])
        pts = rng.normal(size=(1000, dim))
        for y in pts:
            margin = np.min(p.normals @ y)
            if abs(margin) < 1e-7:
                continue
            assert p.contains(y, 1e-9) == back.contains(y, 1e-9)


def test_extremal_representation_independent(rng):
    for _ in range(10):
        p = random_pyramid(rng, 3, 5)
        dual = dual_cone(p)
        base = dual.generators[list(extremal_directions(dual).indices)]
        extra = rng.uniform(0.1, 1.0, size=(3, len(base))) @ base
        bigger = GeneratedCone(np.vstack([dual.generators, extra]))
        got = bigger.generators[list(extremal_directions(bigger).indices)]
        assert len(got) == len(base)
        for g in got:
            assert np.min(np.linalg.norm(base - g, axis=1)) <= 1e-10


def test_nonexpansive(rng):
    p = random_pyramid(rng, 3, 5)
    for _ in range(200):
        x, y = rng.normal(size=(2, 3)) * 3
        px, py = project_onto_cone(p, x), project_onto_cone(p, y)
        assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-10


def test_moreau_identity(rng):
    for dim, k in ((2, 2), (2, 4), (3, 4), (4, 7)):
        p = random_pyramid(rng, dim, k)
        polar = GeneratedCone(-dual_cone(p).generators)
        for x in rng.normal(size=(100, dim)) * 2:
            res = distance_to_cone(p, x) ** 2 + distance_to_cone(polar, x) ** 2 - x @ x
            assert abs(res) <= 1e-9


def test_distance_zero_inside(rng):
    p = random_pyramid(rng, 3, 4)
    for _ in range(50):
        y = p.interior * rng.uniform(0.1, 5)
        assert distance_to_cone(p, y) <= 1e-9


def test_pyramid_generated_form_agrees_with_halfspaces(rng):
    p = random_pyramid(rng, 3, 6)
    g = p.generated
    for y in rng.normal(size=(500, 3)):
        if abs(np.min(p.normals @ y)) < 1e-7:
            continue
        assert g.contains(y) == p.contains(y)


def test_non_pointed_pyramid_keeps_lineality():
    # a half-plane: K contains the whole x axis
    p = Pyramid([[0, 1]])
    assert p.contains([-5.0, 0.0]) and p.contains([5.0, 1.0])
    assert np.allclose(project_onto_cone(p, np.array([-3.0, -2.0])), [-3, 0], atol=1e-10)
