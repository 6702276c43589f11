import numpy as np
import pytest

from src.mechanics.tensor_core import (
    SymTensor3,
    compressive_part,
    dev,
    deviatoric_projector,
    identity_operator,
    j2,
    mandel_to_voigt,
    mean,
    principal,
    ramp,
    rotate,
    tensile_part,
    volumetric_projector,
    von_mises,
    voigt_to_mandel,
)


def _random_tensor(rng, scale=100.0):
    return SymTensor3(rng.normal(scale=scale, size=6))


def _rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1.0
    return q


def test_storage_views():
    t = SymTensor3.from_components(xx=1.0, yy=2.0, zz=3.0, xy=0.5, yz=-0.25, zx=0.125)
    m = t.to_matrix()
    assert m[0, 1] == m[1, 0] == 0.5
    assert m[2, 0] == m[0, 2] == 0.125
    assert t.engineering()[3:].tolist() == [1.0, -0.5, 0.25]
    assert SymTensor3.from_engineering(t.engineering()) == t
    assert SymTensor3.from_matrix(m) == t


def test_mandel_dot_equals_double_contraction():
    rng = np.random.default_rng(3)
    a, b = _random_tensor(rng), _random_tensor(rng)
    expected = float(np.sum(a.to_matrix() * b.to_matrix()))
    assert a.ddot(b) == pytest.approx(expected, rel=1e-12)
    assert float(a.mandel() @ b.mandel()) == pytest.approx(expected, rel=1e-12)
    assert SymTensor3.from_mandel(a.mandel()).allclose(a, rtol=1e-14)


def test_identity_and_arithmetic():
    i = SymTensor3.identity()
    assert i.trace() == 3.0
    assert i.ddot(i) == 3.0
    t = 2.0 * i - i / 2.0
    assert t == SymTensor3.diag(1.5, 1.5, 1.5)
    assert (-t + t) == SymTensor3.zeros()


def test_tensor_is_immutable():
    t = SymTensor3.identity()
    with pytest.raises(ValueError):
        t.components[0] = 5.0


def test_dev_and_invariants():
    sigma = SymTensor3.diag(300.0, 0.0, 0.0)
    assert mean(sigma) == pytest.approx(100.0)
    assert dev(sigma).trace() == pytest.approx(0.0, abs=1e-12)
    assert von_mises(sigma) == pytest.approx(300.0, rel=1e-14)
    shear = SymTensor3.from_components(xy=100.0)
    assert j2(shear) == pytest.approx(100.0**2)
    assert von_mises(shear) == pytest.approx(np.sqrt(3.0) * 100.0)


@pytest.mark.parametrize("x,expected", [(-2.0, 0.0), (0.0, 0.0), (3.5, 3.5)])
def test_ramp(x, expected):
    assert ramp(x) == expected


def test_principal_diag_sorted_descending():
    decomp = principal(SymTensor3.diag(3.0, 1.0, 2.0))
    assert decomp.values.tolist() == pytest.approx([3.0, 2.0, 1.0])
    np.testing.assert_allclose(np.abs(decomp.directions), np.eye(3)[[0, 2, 1]], atol=1e-12)


def test_principal_reassembly_and_orthogonality():
    rng = np.random.default_rng(11)
    for _ in range(50):
        t = _random_tensor(rng)
        decomp = principal(t)
        assert decomp.reassemble().allclose(t, rtol=1e-10)
        np.testing.assert_allclose(
            decomp.directions @ decomp.directions.T, np.eye(3), atol=1e-10
        )


def test_principal_repeated_values_use_axis_basis():
    decomp = principal(SymTensor3.diag(5.0, 5.0, 5.0))
    np.testing.assert_allclose(decomp.directions, np.eye(3), atol=1e-12)
    decomp = principal(SymTensor3.diag(1.0, 4.0, 4.0))
    assert decomp.values.tolist() == pytest.approx([4.0, 4.0, 1.0])
    np.testing.assert_allclose(decomp.directions, np.eye(3)[[1, 2, 0]], atol=1e-12)


def test_tensile_compressive_split_is_complete():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        t = _random_tensor(rng)
        plus, minus = tensile_part(t), compressive_part(t)
        assert (plus + minus).allclose(t, rtol=1e-10)
        scale = max(t.norm(), 1.0)
        assert np.linalg.eigvalsh(plus.to_matrix()).min() >= -1e-10 * scale
        assert np.linalg.eigvalsh(minus.to_matrix()).max() <= 1e-10 * scale


def test_split_of_definite_tensors():
    t = SymTensor3.diag(1.0, 2.0, 3.0)
    assert tensile_part(t).allclose(t)
    assert compressive_part(t).allclose(SymTensor3.zeros(), atol=1e-14)
    assert compressive_part(-t).allclose(-t)


def test_rotation_preserves_invariants():
    rng = np.random.default_rng(5)
    t = _random_tensor(rng)
    r = _rotation(rng)
    rotated = rotate(t, r)
    assert rotated.trace() == pytest.approx(t.trace(), rel=1e-12, abs=1e-9)
    assert von_mises(rotated) == pytest.approx(von_mises(t), rel=1e-12)
    assert rotate(rotated, r.T).allclose(t, rtol=1e-12)


def test_projectors():
    p_dev, p_vol = deviatoric_projector(), volumetric_projector()
    np.testing.assert_allclose(p_dev @ p_dev, p_dev, atol=1e-15)
    np.testing.assert_allclose(p_vol @ p_vol, p_vol, atol=1e-15)
    np.testing.assert_allclose(p_dev + p_vol, identity_operator(), atol=1e-15)
    t = SymTensor3.from_components(1.0, -2.0, 4.0, 0.5, 0.25, -1.0)
    assert SymTensor3.from_mandel(p_dev @ t.mandel()).allclose(dev(t), rtol=1e-14)


def test_mandel_voigt_conversion_round_trip():
    rng = np.random.default_rng(2)
    op = rng.normal(size=(6, 6))
    np.testing.assert_allclose(voigt_to_mandel(mandel_to_voigt(op)), op, rtol=1e-14)
