import numpy as np
import pytest

from src.fem.helmholtz import (
    HelmholtzSolver,
    assemble_helmholtz,
    interpolate_to_gauss,
    nodal_volumes,
)
from src.fem.mesh import box_mesh


@pytest.fixture
def strip():
    return box_mesh(3.0, 1.0, 1.0, 3, 1, 1)


@pytest.mark.parametrize("ell", [0.0, 0.5, 3.0])
def test_uniform_source_gives_constant_field(strip, ell):
    kbar = HelmholtzSolver(strip, ell).solve(np.full((strip.n_elements, 8), 0.02))
    np.testing.assert_allclose(kbar, 0.02, rtol=1e-12)


@pytest.mark.parametrize("lumped", [True, False])
def test_volume_weighted_mean_preserved(strip, lumped):
    rng = np.random.default_rng(0)
    source = rng.uniform(0.0, 0.1, size=(strip.n_elements, 8))
    kbar = HelmholtzSolver(strip, 0.8, lumped=lumped).solve(source)
    # unit cubes: every Gauss point weighs 1/8 mm^3
    total = source.sum() / 8.0
    if lumped:
        assert nodal_volumes(strip) @ kbar == pytest.approx(total, rel=1e-12)
    else:
        gauss = interpolate_to_gauss(strip, kbar)
        assert gauss.sum() / 8.0 == pytest.approx(total, rel=1e-10)


def test_maximum_principle_with_lumped_mass():
    mesh = box_mesh(3.0, 3.0, 3.0, 3, 3, 3)
    rng = np.random.default_rng(1)
    solver = HelmholtzSolver(mesh, 1.5, lumped=True)
    for _ in range(5):
        source = rng.uniform(0.0, 1.0, size=(mesh.n_elements, 8))
        kbar = solver.solve(source)
        assert kbar.min() >= source.min() - 1e-12
        assert kbar.max() <= source.max() + 1e-12


def test_non_negative_source_gives_non_negative_field(strip):
    source = np.zeros((strip.n_elements, 8))
    source[0] = 1.0
    kbar = HelmholtzSolver(strip, 2.0, lumped=True).solve(source)
    assert kbar.min() >= 0.0
    assert kbar.max() < 1.0


def test_two_element_bar_matches_line_model(bar):
    ell, k1, k2 = 0.7, 0.3, 0.1
    source = np.array([np.full(8, k1), np.full(8, k2)])
    kbar = HelmholtzSolver(bar, ell, lumped=True).solve(source)
    a = ell**2
    line = np.array(
        [
            [0.5 + a, -a, 0.0],
            [-a, 1.0 + 2 * a, -a],
            [0.0, -a, 0.5 + a],
        ]
    )
    expected = np.linalg.solve(line, [k1 / 2, (k1 + k2) / 2, k2 / 2])
    for station, value in zip((0.0, 1.0, 2.0), expected):
        nodes = bar.nodes_where(0, station)
        np.testing.assert_allclose(kbar[nodes], value, rtol=1e-12)


def test_zero_length_equals_projection(strip):
    rng = np.random.default_rng(2)
    source = rng.uniform(size=(strip.n_elements, 8))
    solver = HelmholtzSolver(strip, 0.0, lumped=True)
    np.testing.assert_allclose(solver.solve(source), solver.projection(source), rtol=1e-12)


def test_longer_length_smooths_more(strip):
    source = np.zeros((strip.n_elements, 8))
    source[1] = 1.0
    short = HelmholtzSolver(strip, 0.2).solve(source)
    long = HelmholtzSolver(strip, 5.0).solve(source)
    assert np.ptp(long) < np.ptp(short)


def test_assembled_matrix_is_symmetric(strip):
    matrix, rhs = assemble_helmholtz(strip, 1.0, source=np.ones((strip.n_elements, 8)))
    dense = matrix.toarray()
    np.testing.assert_allclose(dense, dense.T, atol=1e-14)
    assert rhs.sum() == pytest.approx(3.0, rel=1e-12)


def test_negative_length_rejected(strip):
    with pytest.raises(ValueError):
        assemble_helmholtz(strip, -1.0)


def test_interpolate_constant(strip):
    gauss = interpolate_to_gauss(strip, np.full(strip.n_nodes, 4.5))
    assert gauss.shape == (strip.n_elements, 8)
    np.testing.assert_allclose(gauss, 4.5, rtol=1e-14)
