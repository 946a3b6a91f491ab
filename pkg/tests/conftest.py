import numpy as np
import pytest

from radapt.mesh import generate_quadrant_tri_mesh, generate_unit_square_quad_mesh

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((criterion, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def perturb(mesh, frac, seed=0):
    """Move every movable node by up to ``frac`` of the element size.

    Element size is the node spacing sqrt(area) / order of the smallest
    ideal element. Free nodes get a random planar offset, bound nodes a
    random parameter offset along their curve.
    """
    rng = np.random.default_rng(seed)
    v = mesh.initial_vertices
    # element size from the smallest ideal element (shoelace area)
    area = 0.5 * np.abs(np.sum(v[:, :, 0] * np.roll(v[:, :, 1], -1, axis=1)
                               - np.roll(v[:, :, 0], -1, axis=1) * v[:, :, 1], axis=1))
    amp = frac * float(np.sqrt(area.min())) / mesh.order
    for n in range(mesh.n_nodes):
        if n in mesh.frozen:
            continue
        if mesh.is_bound(n):
            c = mesh.curves[int(mesh.bind_curve[n])]
            dt = amp / np.hypot(*c.tangent(mesh.bind_t[n]))
            t = float(np.clip(mesh.bind_t[n] + rng.uniform(-dt, dt), 0.0, 1.0))
            mesh.slide(n, t)
        else:
            rho, phi = amp * rng.uniform(), rng.uniform(0.0, 2 * np.pi)
            mesh.move(n, mesh.nodes[n] + rho * np.array([np.cos(phi), np.sin(phi)]))
    return mesh


@pytest.fixture
def quad2():
    return generate_unit_square_quad_mesh(2, 1)


@pytest.fixture
def quad3p3():
    return generate_unit_square_quad_mesh(3, 3)


@pytest.fixture
def tri_small():
    return generate_quadrant_tri_mesh(3, 0.25)
