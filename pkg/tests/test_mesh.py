import numpy as np
import pytest

from radapt.mapping import current_jacobians, det2
from radapt.mesh import (BINDING_TOL, Mesh, MeshError, barycentre, generate_quadrant_tri_mesh,
                         generate_unit_square_quad_mesh, node_to_elements)
from radapt.reference import Shape, build_reference_element


def test_quad_grid_counts(quad2):
    assert quad2.n_elements == 4
    assert quad2.n_nodes == 9


def test_fig2_size_closed_form():
    m = generate_unit_square_quad_mesh(24, 3)
    assert m.n_elements == 576
    assert m.n_nodes == (3 * 24 + 1) ** 2 == 5329


def test_affine_elements_have_constant_positive_jacobian():
    m = generate_unit_square_quad_mesh(2, 3)
    ref = build_reference_element(m.shape, m.order)
    d = det2(current_jacobians(m, ref))
    np.testing.assert_allclose(d, 0.25**2, rtol=1e-13)


def test_quad_boundary_setup():
    m = generate_unit_square_quad_mesh(3, 3)
    assert len(m.frozen) == 4
    on_boundary = np.isclose(m.nodes, 0).any(axis=1) | np.isclose(m.nodes, 1).any(axis=1)
    bound_or_frozen = np.array([m.is_bound(i) or i in m.frozen for i in range(m.n_nodes)])
    np.testing.assert_array_equal(on_boundary, bound_or_frozen)


def test_shared_edge_nodes_consistent():
    # neighbouring elements traversing a shared edge in opposite directions
    # must reference the same nodes
    m = generate_unit_square_quad_mesh(2, 3)
    assert m.n_nodes == 49
    assert len(np.unique(m.conn)) == 49


@pytest.mark.parametrize("h", [0.3, 0.1, 0.05])
def test_quadrant_orientation_and_binding(h):
    m = generate_quadrant_tri_mesh(3, h)
    v = m.initial_vertices
    signed = ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
              - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))
    assert np.all(signed > 0)
    for node, (cid, t) in m.bindings.items():
        assert np.hypot(*(m.curves[cid].eval(t) - m.nodes[node])) < BINDING_TOL
    ref = build_reference_element(m.shape, m.order)
    assert det2(current_jacobians(m, ref)).min() > 0


def test_quadrant_element_count_heuristic():
    m = generate_quadrant_tri_mesh(3, 0.1)
    extent = 0.75
    heuristic = 2 * (extent / 0.1) ** 2
    # n = ceil(0.75 / 0.1) = 8 cells per side, two triangles each
    assert m.n_elements == 2 * 8**2
    assert 0.5 * heuristic <= m.n_elements <= 1.5 * heuristic


def test_generators_deterministic():
    a, b = generate_quadrant_tri_mesh(3, 0.1), generate_quadrant_tri_mesh(3, 0.1)
    assert a.nodes.tobytes() == b.nodes.tobytes()
    assert a.conn.tobytes() == b.conn.tobytes()
    assert a.bindings == b.bindings


def test_barycentre_examples():
    m = Mesh([(0, 0), (1, 0), (1, 1), (0, 1)], [[0, 1, 2, 3]], Shape.QUAD, 1)
    np.testing.assert_allclose(barycentre(m, 0), [0.5, 0.5])
    t = Mesh([(0, 0), (1, 0), (0, 1)], [[0, 1, 2]], Shape.TRI, 1)
    np.testing.assert_allclose(barycentre(t, 0), [1 / 3, 1 / 3])


def test_barycentre_uses_initial_snapshot(quad2):
    before = barycentre(quad2, 0).copy()
    quad2.move(4, (0.7, 0.6))
    np.testing.assert_array_equal(barycentre(quad2, 0), before)
    with pytest.raises(ValueError):
        quad2.initial_vertices[0, 0, 0] = 3.0


def test_node_to_elements(quad2):
    adj = node_to_elements(quad2)
    assert len(adj[4]) == 4
    assert len(adj[0]) == 1
    assert sum(map(len, adj)) == quad2.conn.size
    assert set().union(*map(set, adj)) == set(range(quad2.n_elements))


def test_node_update_rules(quad2):
    corner = next(iter(quad2.frozen))
    with pytest.raises(MeshError):
        quad2.move(corner, (0.1, 0.1))
    bound = next(iter(quad2.bindings))
    with pytest.raises(MeshError):
        quad2.move(bound, (0.1, 0.1))
    quad2.slide(bound, 0.3)
    cid, t = quad2.bindings[bound]
    np.testing.assert_array_equal(quad2.nodes[bound], quad2.curves[cid].eval(0.3))


def test_mesh_validation():
    with pytest.raises(MeshError):
        Mesh([(0, 0), (1, 0), (0, 1)], [[0, 1, 5]], Shape.TRI, 1)
    with pytest.raises(MeshError):
        Mesh([(0, 0), (1, 0), (0, 1)], [[0, 1, 1]], Shape.TRI, 1)
    with pytest.raises(MeshError):
        Mesh([(0, 0), (1, 0), (0, 1), (1, 1)], [[0, 1, 2, 3]], Shape.TRI, 1)
    with pytest.raises(MeshError):
        generate_unit_square_quad_mesh(1, 1)
    with pytest.raises(MeshError):
        generate_quadrant_tri_mesh(3, 0.0)
