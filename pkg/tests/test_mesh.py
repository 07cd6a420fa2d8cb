import numpy as np
import pytest
from hypothesis import given, strategies as st

from lomac.mesh import Mesh1D, build_uniform, gauss_rule, nodal_grid, perturb_mesh


def test_gauss_rule_low_orders():
    r0 = gauss_rule(0)
    assert np.allclose(r0.nodes, [0.0]) and np.allclose(r0.weights, [1.0])
    r1 = gauss_rule(1)
    assert np.allclose(r1.nodes, [-1 / (2 * np.sqrt(3)), 1 / (2 * np.sqrt(3))], atol=1e-15)
    assert np.allclose(r1.weights, [0.5, 0.5], atol=1e-15)
    r2 = gauss_rule(2)
    assert np.allclose(r2.nodes, [-np.sqrt(0.6) / 2, 0, np.sqrt(0.6) / 2], atol=1e-15)
    assert np.allclose(r2.weights, [5 / 18, 8 / 18, 5 / 18], atol=1e-15)


@pytest.mark.parametrize("k", range(9))
def test_gauss_rule_exactness(k):
    r = gauss_rule(k)
    assert np.all(np.diff(r.nodes) > 0)
    assert np.allclose(r.nodes, -r.nodes[::-1], atol=1e-15)
    assert abs(r.weights.sum() - 1) < 1e-14
    for d in range(2 * k + 2):
        exact = 0.0 if d % 2 else 2 * 0.5 ** (d + 1) / (d + 1)
        assert abs(np.sum(r.weights * r.nodes**d) - exact) < 1e-14
    # one degree higher is not integrated exactly
    d = 2 * k + 2
    assert abs(np.sum(r.weights * r.nodes**d) - 2 * 0.5 ** (d + 1) / (d + 1)) > 1e-16


@pytest.mark.parametrize("k", [-1, 9, 1.5])
def test_gauss_rule_rejects(k):
    with pytest.raises(ValueError):
        gauss_rule(k)


def test_build_uniform_examples():
    m = build_uniform(0, 2 * np.pi, 4)
    assert np.allclose(m.boundaries, [0, np.pi / 2, np.pi, 3 * np.pi / 2, 2 * np.pi])
    assert np.allclose(build_uniform(-6, 6, 2).centers, [-3, 3])
    one = build_uniform(0, 1, 1)
    assert one.n == 1 and np.allclose(one.h, [1.0])
    with pytest.raises(ValueError):
        build_uniform(0, 1, 0)
    with pytest.raises(ValueError):
        build_uniform(1, 1, 3)


def test_mesh_validation():
    with pytest.raises(ValueError):
        Mesh1D(np.array([0.0, 1.0, 0.5]))
    with pytest.raises(ValueError):
        Mesh1D(np.array([0.0, 1.0]), bc="reflecting")


def test_perturb_mesh():
    m = build_uniform(0, 1, 16)
    assert np.array_equal(perturb_mesh(m, 0.0, 3).boundaries, m.boundaries)
    a = perturb_mesh(m, 0.1, 7)
    b = perturb_mesh(m, 0.1, 7)
    assert np.array_equal(a.boundaries, b.boundaries)
    assert not np.array_equal(a.boundaries, perturb_mesh(m, 0.1, 8).boundaries)
    h = 1 / 16
    assert np.all(a.h >= 0.8 * h - 1e-15) and np.all(a.h <= 1.2 * h + 1e-15)
    assert a.boundaries[0] == 0 and a.boundaries[-1] == 1
    with pytest.raises(ValueError):
        perturb_mesh(m, 0.5, 0)


@given(st.integers(1, 40), st.floats(0, 0.49), st.integers(0, 2**32 - 1))
def test_perturbed_mesh_valid(n, frac, seed):
    m = perturb_mesh(build_uniform(-1, 2, n), frac, seed)
    assert np.all(np.diff(m.boundaries) > 0)
    assert np.isclose(m.length, 3.0)


def test_nodal_grid_examples():
    g = nodal_grid(build_uniform(0, 1, 1), gauss_rule(0))
    assert np.allclose(g.points, [0.5]) and np.allclose(g.weights, [1.0])
    g = nodal_grid(build_uniform(0, 2, 2), gauss_rule(1))
    assert g.size == 4 and np.isclose(g.weights.sum(), 2)
    for k in (1, 2, 3):
        g = nodal_grid(build_uniform(0, 1, 5), gauss_rule(k))
        assert abs(g.weights @ g.points**2 - 1 / 3) < 1e-15


@given(st.integers(0, 4), st.integers(1, 12), st.integers(0, 1000))
def test_piecewise_quadrature_exact(k, n, seed):
    m = perturb_mesh(build_uniform(-1, 1, n), 0.3, seed)
    g = nodal_grid(m, gauss_rule(k))
    assert np.all(np.diff(g.points) > 0)
    assert np.isclose(g.weights.sum(), m.length)
    rng = np.random.default_rng(seed)
    coef = rng.normal(size=(n, 2 * k + 2))
    # per-cell polynomial sum c_d (x - x_i)^d, integrated exactly by antiderivative
    exact = 0.0
    for i in range(n):
        lo, hi = m.boundaries[i] - m.centers[i], m.boundaries[i + 1] - m.centers[i]
        exact += sum(c * (hi ** (d + 1) - lo ** (d + 1)) / (d + 1) for d, c in enumerate(coef[i]))
    cells = g.cellwise(g.points) - m.centers[:, None]
    vals = sum(coef[:, d, None] * cells**d for d in range(2 * k + 2))
    assert abs(np.sum(g.cellwise(g.weights) * vals) - exact) < 1e-12 * max(1, abs(exact))
