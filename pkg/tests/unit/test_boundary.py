import numpy as np
import pytest

from src.fem.boundary import (
    BoundaryCondition,
    DirichletEntry,
    FaceTraction,
    SingularSystemError,
    release_dirichlet,
)


def _entries(nodes, directions=(0, 1, 2), value=0.0):
    nodes = tuple(int(n) for n in nodes)
    return tuple(DirichletEntry(nodes=nodes, direction=d, value=value) for d in directions)


def _rollers(mesh):
    sets = mesh.node_sets
    return (
        _entries(sets["left"], (0,))
        + _entries(sets["bottom"], (1,))
        + _entries(sets["back"], (2,))
    )


def test_clamped_face_restrains(cube):
    BoundaryCondition(dirichlet=_entries(cube.node_sets["left"])).check_restraint(cube.coords)


def test_rollers_restrain(cube):
    BoundaryCondition(dirichlet=_rollers(cube)).check_restraint(cube.coords)


@pytest.mark.parametrize(
    "build",
    [
        lambda m: (),
        lambda m: _entries(m.node_sets["left"], (0,)),
        lambda m: _entries(m.node_sets["left"], (0, 1)),
        lambda m: _entries(m.node_sets["left"][:1]),
    ],
)
def test_insufficient_restraint(cube, build):
    with pytest.raises(SingularSystemError):
        BoundaryCondition(dirichlet=build(cube)).check_restraint(cube.coords)


def test_prescribed_later_entry_wins(cube):
    nodes = tuple(int(n) for n in cube.node_sets["right"])
    bc = BoundaryCondition(
        dirichlet=(
            DirichletEntry(nodes=nodes, direction=0, value=0.1),
            DirichletEntry(nodes=nodes[:1], direction=0, value=0.3),
        )
    )
    dofs, values = bc.prescribed()
    assert list(dofs) == sorted(3 * n for n in nodes)
    assert values[list(dofs).index(3 * nodes[0])] == 0.3
    assert sorted(values) == [0.1, 0.1, 0.1, 0.3]


def test_with_value_replaces_entry(cube):
    nodes = cube.node_sets["right"]
    bc = BoundaryCondition(dirichlet=_entries(nodes, (0,), 0.1))
    moved = bc.with_value(0, nodes, 0.2)
    assert len(moved.dirichlet) == 1
    assert moved.dirichlet[0].value == 0.2
    assert bc.dirichlet[0].value == 0.1


def test_traction_resultant(bar):
    # +x face of the second element carries 10 MPa along x over 1 mm^2
    bc = BoundaryCondition(tractions=(FaceTraction(faces=((1, 5),), traction=(10.0, 0.0, 0.0)),))
    f = bc.external_forces(bar)
    assert f[0::3].sum() == pytest.approx(10.0, rel=1e-12)
    assert f[1::3].sum() == pytest.approx(0.0, abs=1e-12)
    right = bar.node_sets["right"]
    np.testing.assert_allclose(f[3 * right], 2.5, rtol=1e-12)


def test_point_loads(cube):
    bc = BoundaryCondition(point_loads={5: 3.0})
    f = bc.external_forces(cube)
    assert f[5] == 3.0
    assert np.count_nonzero(f) == 1


def test_release_schedule_scales_reactions(cube):
    right = cube.node_sets["right"]
    bc = BoundaryCondition(
        dirichlet=_entries(cube.node_sets["left"]) + _entries(right, (0,), 0.05)
    )
    reactions = np.zeros(cube.n_dofs)
    reactions[3 * right] = 40.0
    schedule = release_dirichlet(bc, right, 4, reactions=reactions, coords=cube.coords)
    assert len(schedule) == 4
    for step, scale in zip(schedule, (0.75, 0.5, 0.25, 0.0)):
        dofs, _ = step.prescribed()
        assert not set(3 * right) & set(dofs.tolist())
        assert [step.point_loads[int(d)] for d in 3 * right] == pytest.approx([40.0 * scale] * 4)


def test_release_frees_every_direction_of_node_set(cube):
    right = cube.node_sets["right"]
    bc = BoundaryCondition(dirichlet=_entries(cube.node_sets["left"]) + _entries(right))
    schedule = release_dirichlet(bc, right, 1, reactions=np.zeros(cube.n_dofs))
    dofs, _ = schedule[0].prescribed()
    left = cube.node_sets["left"]
    assert sorted(dofs.tolist()) == sorted((3 * left[:, None] + np.arange(3)).ravel().tolist())


def test_release_partial_node_set(cube):
    right = cube.node_sets["right"]
    bc = BoundaryCondition(dirichlet=_entries(cube.node_sets["left"]) + _entries(right, (0,), 0.1))
    schedule = release_dirichlet(bc, right[:2], 2, reactions=np.ones(cube.n_dofs))
    dofs, values = schedule[-1].prescribed()
    for n in right[2:]:
        assert 3 * n in dofs
        assert values[list(dofs).index(3 * n)] == 0.1


def test_release_errors(cube):
    left, right = cube.node_sets["left"], cube.node_sets["right"]
    bc = BoundaryCondition(dirichlet=_entries(left))
    zeros = np.zeros(cube.n_dofs)
    with pytest.raises(ValueError):
        release_dirichlet(bc, left, 0, reactions=zeros)
    with pytest.raises(ValueError, match="active displacement constraint"):
        release_dirichlet(bc, right, 2, reactions=zeros)
    with pytest.raises(SingularSystemError):
        release_dirichlet(bc, left, 2, reactions=zeros, coords=cube.coords)
