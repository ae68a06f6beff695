import numpy as np
import pytest

from conformal_solitons import jets
from conformal_solitons.catalog import ENTRY_NAMES
from conformal_solitons.errors import DegenerateMetricError, DomainError
from conformal_solitons.hypersurface import (
    Chart,
    LocalGeometry,
    axis_orientation,
    codazzi_residual_at,
    covariant_weingarten_at,
    frame_at,
    gradient_at,
    hessian_scalar_at,
    lie_metric_at,
    position_orientation,
    ricci_at,
    umbilicity_at,
)
from conformal_solitons.jets import SmoothMap
from conformal_solitons.semiriem import AmbientSpace, ConformalMatrix, Signature, inner

EUCLID3 = AmbientSpace.flat(Signature.euclidean(3))
LORENTZ3 = AmbientSpace.flat(Signature.lorentz(3))


def polar_hyperboloid():
    f = lambda u: [jets.cosh(u[0]), jets.sinh(u[0]) * jets.cos(u[1]), jets.sinh(u[0]) * jets.sin(u[1])]
    fmap = SmoothMap.on_box(f, [0.0, -np.pi], [3.0, np.pi], "polar hyperboloid")
    return Chart(fmap, LORENTZ3, position_orientation, (0.1, -3.0), (2.0, 3.0))


def scalar(f, chart):
    return SmoothMap(f, chart.n, chart.map.lo, chart.map.hi)


def test_sphere_frame(entries):
    fp = frame_at(entries("sphere").chart, [1.0, 0.3])
    np.testing.assert_allclose(fp.g, np.diag([1.0, np.sin(1.0) ** 2]), atol=1e-14)
    np.testing.assert_allclose(fp.A, -np.eye(2), atol=1e-13)
    assert fp.H == pytest.approx(-1.0, abs=1e-13)
    assert fp.eps_N == 1
    np.testing.assert_allclose(fp.N, fp.x, atol=1e-14)


def test_flat_plane_frame(entries):
    fp = frame_at(entries("flat_plane").chart, [0.2, -0.4])
    assert np.all(fp.A == 0) and fp.H == 0 and np.all(fp.Gamma == 0)
    np.testing.assert_array_equal(fp.N, [0, 0, 1])


def test_polar_hyperboloid_frame():
    fp = frame_at(polar_hyperboloid(), [0.7, 0.3])
    assert fp.eps_N == -1
    np.testing.assert_allclose(fp.A, -np.eye(2), atol=1e-13)
    # H = eps_N tr(A) / n, so A = eps_N H I forces H = +1 here
    assert fp.H == pytest.approx(1.0, abs=1e-13)


@pytest.mark.parametrize("name", ENTRY_NAMES)
def test_frame_invariants(entries, rng, name):
    chart = entries(name).chart
    sig = chart.ambient.signature
    for u in chart.sample(rng, 10):
        fp = frame_at(chart, u)
        np.testing.assert_allclose(fp.g, fp.g.T, atol=0)
        np.testing.assert_allclose(fp.g @ fp.g_inv, np.eye(2), atol=1e-10)
        for E in fp.E:
            assert abs(inner(sig, fp.N, E)) <= 1e-10
        assert abs(abs(inner(sig, fp.N, fp.N)) - 1.0) <= 1e-10
        X, Y = rng.standard_normal((2, 2))
        assert abs((fp.A @ X) @ fp.g @ Y - X @ fp.g @ (fp.A @ Y)) <= 1e-9
        if chart.ambient.is_quadric:
            assert abs(inner(sig, fp.N, fp.x)) <= 1e-10


@pytest.mark.parametrize("name", ["sphere", "pseudo_hyperbolic_zero", "saddle_graph", "latitude_sphere"])
def test_weingarten_matches_fd_normal(entries, name):
    # container derivative of N along E_i, differenced numerically, is -A E_i (+ a multiple of x on quadrics)
    chart = entries(name).chart
    u = np.array([0.6, 0.4])
    fp = frame_at(chart, u)
    h = 1e-5
    for i in range(2):
        du = np.zeros(2)
        du[i] = h
        dN = (frame_at(chart, u + du).N - frame_at(chart, u - du).N) / (2 * h)
        tangential = fp.g_inv @ (fp.E * chart.ambient.signature.array) @ dN
        np.testing.assert_allclose(tangential, -fp.A[:, i], atol=1e-7)


def test_ricci_examples(entries):
    geo = LocalGeometry(entries("sphere").chart, [1.1, 0.2])
    np.testing.assert_allclose(geo.ricci, geo.gv, atol=1e-12)
    assert geo.scalar_curvature == pytest.approx(2.0, abs=1e-12)
    ric, S = ricci_at(entries("flat_plane").chart, [0.3, 0.3])
    assert np.all(ric == 0) and S == 0
    ric, S = ricci_at(polar_hyperboloid(), [0.7, 0.3])
    g = frame_at(polar_hyperboloid(), [0.7, 0.3]).g
    np.testing.assert_allclose(ric, -g, atol=1e-12)
    assert S == pytest.approx(-2.0, abs=1e-12)


def test_gradient_examples(entries):
    sph = entries("sphere").chart
    np.testing.assert_array_equal(gradient_at(sph, scalar(lambda u: 3.0, sph), [1.0, 0.2]), [0.0, 0.0])
    grad = gradient_at(sph, scalar(lambda u: jets.cos(u[0]), sph), [np.pi / 2, 0.0])
    np.testing.assert_allclose(grad, [-1.0, 0.0], atol=1e-15)
    plane = entries("flat_plane").chart
    np.testing.assert_array_equal(gradient_at(plane, scalar(lambda u: u[0], plane), [0.1, 0.5]), [1.0, 0.0])


def test_hessian_flat():
    plane_map = SmoothMap.on_box(lambda u: [u[0], u[1], 0.0], [-2, -2], [2, 2])
    chart = Chart(plane_map, EUCLID3, axis_orientation(2), (-1, -1), (1, 1))
    half_sq = scalar(lambda u: 0.5 * (u[0] * u[0] + u[1] * u[1]), chart)
    np.testing.assert_allclose(hessian_scalar_at(chart, half_sq, [0.3, -0.8]), np.eye(2), atol=1e-15)


def test_hessian_height_sphere(entries, rng):
    chart = entries("sphere").chart
    h = scalar(lambda u: jets.cos(u[0]), chart)  # height of (0,0,1)
    for u in chart.sample(rng, 20):
        fp = frame_at(chart, u)
        hess = hessian_scalar_at(chart, h, u)
        assert np.max(np.abs(hess + np.cos(u[0]) * fp.g)) <= 1e-9


def test_hessian_height_hyperboloid(rng):
    chart = polar_hyperboloid()
    h = scalar(lambda u: -jets.cosh(u[0]), chart)  # <(1,0,0), x> in Lorentz signature
    for u in chart.sample(rng, 20):
        fp = frame_at(chart, u)
        hess = hessian_scalar_at(chart, h, u)
        assert np.max(np.abs(hess - (-np.cosh(u[0])) * fp.g)) <= 1e-9


def _tangent_part(chart, vector_of_x):
    """Chart components of the tangential part of an ambient field, as a jet-capable map."""

    class Field:
        def jet(self, u):
            geo = LocalGeometry(chart, u)
            return geo.tangent_components(vector_of_x(geo.x) + 0.0 * geo.x)

    return Field()


def test_lie_metric_examples(entries, rng):
    chart = entries("sphere").chart
    grad_h = _tangent_part(chart, lambda x: np.array([0.0, 0.0, 1.0]))
    B = ConformalMatrix.from_generator(Signature.euclidean(3), rng.standard_normal((3, 3))).B
    rotation = _tangent_part(chart, lambda x: jets.constant_linear("ab,b->a", B, x))
    zero = _tangent_part(chart, lambda x: np.zeros(3))
    for u in chart.sample(rng, 10):
        g = frame_at(chart, u).g
        np.testing.assert_allclose(lie_metric_at(chart, grad_h, u), -2 * np.cos(u[0]) * g, atol=1e-12)
        assert np.max(np.abs(lie_metric_at(chart, rotation, u))) <= 1e-9
        assert np.max(np.abs(lie_metric_at(chart, zero, u))) == 0


def test_covariant_weingarten_trivial(entries, rng):
    for name in ("sphere", "flat_plane"):
        chart = entries(name).chart
        for u in chart.sample(rng, 5):
            assert np.max(np.abs(covariant_weingarten_at(chart, u, rng.standard_normal(2)))) <= 1e-12


def test_covariant_weingarten_matches_fd(entries, rng):
    # nabla_V A = d_V A + [Gamma(V), A] with d_V A differenced from frames
    chart = entries("pseudo_hyperbolic_zero").chart
    h = 1e-5
    for u in chart.sample(rng, 5):
        V = rng.standard_normal(2)
        fp = frame_at(chart, u)
        dA = (frame_at(chart, u + h * V).A - frame_at(chart, u - h * V).A) / (2 * h)
        GV = np.einsum("kil,i->kl", fp.Gamma, V)
        expected = dA + GV @ fp.A - fp.A @ GV
        np.testing.assert_allclose(covariant_weingarten_at(chart, u, V), expected, atol=1e-5)


def test_codazzi(entries, rng):
    assert codazzi_residual_at(entries("sphere").chart, [1.0, 0.3]) <= 1e-9
    assert codazzi_residual_at(entries("flat_plane").chart, [0.2, 0.1]) == 0
    chart = entries("pseudo_hyperbolic_negative").chart
    for u in chart.sample(rng, 20):
        assert codazzi_residual_at(chart, u) <= 1e-7


def test_umbilicity(entries):
    ok, H, dev = umbilicity_at(entries("sphere").chart, [1.0, 0.3])
    assert ok and H == pytest.approx(-1.0, abs=1e-12)
    ok, H, dev = umbilicity_at(entries("flat_plane").chart, [0.0, 0.0])
    assert ok and H == 0
    ok, H, dev = umbilicity_at(entries("saddle_graph").chart, [0.3, 0.1])
    assert not ok and dev > 1e-2


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("name", ENTRY_NAMES)
def test_curvature_invariants(entries, rng, name, n):
    entry = entries(name, n)
    for u in entry.chart.sample(rng, 50 if n == 2 else 15):
        geo = LocalGeometry(entry.chart, u)
        assert geo.metric_compatibility_residual() <= 1e-9
        assert geo.gauss_residual() <= 1e-7
        if entry.umbilic:
            assert geo.scalar_curvature_residual() <= 1e-8


def test_gradient_hessian_duality(entries, rng):
    chart = entries("pseudo_hyperbolic_negative").chart
    phi = scalar(lambda u: jets.sin(u[0]) * u[1] + jets.exp(0.3 * u[1]), chart)
    for u in chart.sample(rng, 10):
        geo = LocalGeometry(chart, u)
        p = phi.jet(u)
        grad = jets.einsum("ij,j->i", geo.ginv, p.diff())
        nabla_grad = geo.covariant_derivative(grad) @ geo.gv
        np.testing.assert_allclose(geo.hessian(p), nabla_grad, atol=1e-8)


def test_degenerate_metric_rejected():
    lightlike = SmoothMap.on_box(lambda u: [u[0], u[0], u[1]], [-1, -1], [1, 1])
    chart = Chart(lightlike, LORENTZ3, axis_orientation(0), (-0.5, -0.5), (0.5, 0.5))
    with pytest.raises(DegenerateMetricError) as info:
        frame_at(chart, [0.1, 0.1])
    assert info.value.det < 1e-10


def test_outside_domain(entries):
    with pytest.raises(DomainError):
        frame_at(entries("sphere").chart, [3.2, 0.0])
