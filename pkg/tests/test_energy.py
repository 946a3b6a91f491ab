import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radapt import _kernels
from radapt.energy import (MaterialConstants, element_energy, energy_gradient,
                           node_energy_gradient, regularized_det, strain_energy_density,
                           strain_energy_density_dF, total_energy)
from radapt.mapping import REG_FLOOR, build_target_cache
from radapt.mesh import Mesh, adjacency_csr, generate_unit_square_quad_mesh, node_to_elements
from radapt.metric import IdentityField, RingField
from radapt.reference import Shape, build_reference_element

from conftest import perturb

UNIT = MaterialConstants()


def rotation(a):
    return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])


def random_F(rng, n=1):
    # positive-determinant matrices away from the singular set
    F = np.eye(2) + 0.4 * rng.standard_normal((n, 2, 2))
    flip = np.linalg.det(F) < 0.05
    F[flip] = np.eye(2) + 0.1 * rng.standard_normal((int(flip.sum()), 2, 2))
    return F


def test_closed_form_value():
    expected = 3 - math.log(4) + math.log(4) ** 2 / 2
    assert abs(strain_energy_density(2 * np.eye(2)) - expected) < 1e-12
    assert expected == pytest.approx(2.5746116, abs=1e-7)


def test_closed_form_stress():
    expected = (2 + (math.log(4) - 1) / 2) * np.eye(2)
    np.testing.assert_allclose(strain_energy_density_dF(2 * np.eye(2)), expected, atol=1e-12)


def test_material_constants_change_weights():
    F = np.diag([2.0, 1.0])
    # I1 - 2 = 3, ln J = ln 2
    W = strain_energy_density(F, MaterialConstants(mu=2.0, lam=3.0))
    assert W == pytest.approx(3.0 - 2 * math.log(2) + 1.5 * math.log(2) ** 2, rel=1e-14)
    with pytest.raises(ValueError):
        MaterialConstants(mu=0.0)


def test_stress_matches_finite_differences():
    rng = np.random.default_rng(11)
    F = random_F(rng, 20)
    P = strain_energy_density_dF(F)
    h = 1e-6
    for a in range(2):
        for b in range(2):
            E = np.zeros((2, 2))
            E[a, b] = h
            fd = (strain_energy_density(F + E) - strain_energy_density(F - E)) / (2 * h)
            np.testing.assert_allclose(P[:, a, b], fd, rtol=1e-6, atol=1e-8)


@given(st.floats(-math.pi, math.pi))
def test_rotations_have_zero_energy(a):
    assert abs(strain_energy_density(rotation(a))) < 1e-13


@settings(max_examples=200)
@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-1.0, 1.0), st.floats(-math.pi, math.pi))
def test_energy_positive_off_rotations(s1, s2, shear, a):
    F = rotation(a) @ np.array([[s1, shear], [0.0, s2]])
    U = np.linalg.svd(F, compute_uv=False)
    if np.abs(U - 1).max() < 1e-3:
        return
    assert strain_energy_density(F) > 0


@given(st.floats(-math.pi, math.pi), st.integers(0, 2**32 - 1))
def test_frame_indifference(a, seed):
    F = random_F(np.random.default_rng(seed))[0]
    W = strain_energy_density(F)
    assert abs(strain_energy_density(rotation(a) @ F) - W) <= 1e-12 * max(1.0, abs(W))


def test_regularization_continuous_across_floor():
    d = REG_FLOOR
    J = np.linspace(-20 * d, 20 * d, 4001)
    F = np.zeros((J.size, 2, 2))
    F[:, 0, 0] = 1.0
    F[:, 1, 1] = J
    W = strain_energy_density(F, delta=d)
    assert np.all(np.isfinite(W))
    # W is smooth in J, so successive differences stay bounded by the slope
    slope = np.abs(np.gradient(W, J)).max()
    assert np.abs(np.diff(W)).max() <= 1.01 * slope * (J[1] - J[0])
    Jd, _ = regularized_det(np.array([1.0, 0.0, -1.0]), d)
    assert Jd[0] == pytest.approx(1.0, rel=1e-15)
    assert Jd[1] == d
    assert 0 < Jd[2] < 1e-15


def test_scaled_mesh_energy():
    m = generate_unit_square_quad_mesh(3, 2)
    m2 = Mesh(2 * m.nodes, m.conn, m.shape, m.order)
    ref = build_reference_element(m.shape, m.order)
    cache = build_target_cache(m, IdentityField(), ref)
    got = total_energy(m2, constants=UNIT, ref=ref, cache=cache).total
    assert got == pytest.approx(strain_energy_density(2 * np.eye(2)) * 1.0, rel=1e-12)


def test_identity_energy_is_zero():
    m = generate_unit_square_quad_mesh(8, 3)
    assert abs(total_energy(m, IdentityField()).total) < 1e-10


def test_triangle_energy_order_independent():
    # affine map of a triangle: P=1 and P=3 give the same energy
    verts = np.array([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    A = np.array([[1.5, 0.3], [0.1, 0.8]])
    vals = []
    for order in (1, 3):
        ref = build_reference_element(Shape.TRI, order)
        # map reference nodes to the ideal triangle, then deform affinely
        lam = np.column_stack([-(ref.ref_nodes.sum(axis=1)) / 2, (ref.ref_nodes[:, 0] + 1) / 2,
                               (ref.ref_nodes[:, 1] + 1) / 2])
        ideal = lam @ verts
        m = Mesh(ideal, [list(range(ref.n_nodes))], Shape.TRI, order)
        cache = build_target_cache(m, IdentityField(), ref)
        moved = Mesh(ideal @ A.T, m.conn, m.shape, order)
        vals.append(total_energy(moved, constants=UNIT, ref=ref, cache=cache).total)
    assert vals[0] == pytest.approx(vals[1], rel=1e-13)
    assert vals[0] == pytest.approx(0.5 * strain_energy_density(A), rel=1e-13)


def test_locality(quad3p3):
    m = perturb(quad3p3, 0.1, seed=4)
    ref = build_reference_element(m.shape, m.order)
    cache = build_target_cache(m, RingField(), ref)
    before = total_energy(m, constants=UNIT, ref=ref, cache=cache).per_element
    adj = node_to_elements(m)
    node = int(np.flatnonzero((m.bind_curve < 0) & ~np.isin(np.arange(m.n_nodes), list(m.frozen)))[0])
    m.move(node, m.nodes[node] + [1e-3, -1e-3])
    after = total_energy(m, constants=UNIT, ref=ref, cache=cache).per_element
    changed = set(np.flatnonzero(before != after))
    assert changed and changed <= set(adj[node])


def test_numba_energy_matches_numpy(quad3p3):
    m = perturb(quad3p3, 0.1, seed=5)
    ref = build_reference_element(m.shape, m.order)
    cache = build_target_cache(m, RingField(), ref)
    ref_vals = total_energy(m, constants=UNIT, ref=ref, cache=cache).per_element
    jit_vals = _kernels.element_energies(m.nodes, m.conn, np.ascontiguousarray(ref.basis_grad),
                                         cache.J_T_inv, cache.wdet, cache.delta, 1.0, 1.0)
    np.testing.assert_allclose(jit_vals, ref_vals, rtol=1e-12)
    single = element_energy(m, 3, cache, ref, UNIT)
    assert single == pytest.approx(ref_vals[3], rel=1e-13)


def test_node_gradient_matches_finite_differences(quad3p3):
    m = perturb(quad3p3, 0.1, seed=6)
    ref = build_reference_element(m.shape, m.order)
    cache = build_target_cache(m, RingField(), ref)
    adj = node_to_elements(m)
    full = energy_gradient(m, cache, ref, UNIT)
    ptr, csr = adjacency_csr(m)
    G = np.ascontiguousarray(ref.basis_grad)
    h = 1e-6
    for node in [5, 17, 30, 44]:
        g = node_energy_gradient(m, node, adj, cache, ref, UNIT)
        fd = np.empty(2)
        for k in range(2):
            X = m.nodes.copy()
            X[node, k] += h
            ep = total_energy(Mesh(X, m.conn, m.shape, m.order), constants=UNIT, ref=ref, cache=cache).total
            X[node, k] -= 2 * h
            em = total_energy(Mesh(X, m.conn, m.shape, m.order), constants=UNIT, ref=ref, cache=cache).total
            fd[k] = (ep - em) / (2 * h)
        np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-10)
        np.testing.assert_allclose(full[node], g, rtol=1e-12, atol=1e-15)
        jit = _kernels._node_gradient(node, m.nodes, m.conn, G, cache.J_T_inv, cache.wdet,
                                      cache.delta, 1.0, 1.0, ptr, csr)
        np.testing.assert_allclose(jit, g, rtol=1e-11, atol=1e-15)
    with pytest.raises(IndexError):
        node_energy_gradient(m, m.n_nodes, adj, cache, ref, UNIT)


def test_strongly_inverted_stays_finite():
    F = np.diag([1.0, -5.0])
    assert np.isfinite(strain_energy_density(F))
    assert np.all(np.isfinite(strain_energy_density_dF(F)))
    Jd, dJd = regularized_det(-5.0, REG_FLOOR)
    assert Jd > 0 and dJd > 0
    W = _kernels._density(1.0, 0.0, 0.0, -5.0, 1.0, 1.0, REG_FLOOR)
    assert W == pytest.approx(strain_energy_density(F), rel=1e-14)
