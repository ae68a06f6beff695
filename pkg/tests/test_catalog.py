import numpy as np
import pytest

from conformal_solitons.catalog import (
    ENTRY_NAMES,
    canonical_field,
    expected_lambda,
    get_entry,
    hyperboloid_transition,
    identity_map,
    isometry_residual,
    list_catalog,
)
from conformal_solitons.conformal import angle_function
from conformal_solitons.errors import DimensionError, DomainError, GeometryError
from conformal_solitons.hypersurface import frame_at, umbilicity_at
from conformal_solitons.jets import SmoothMap
from conformal_solitons.semiriem import inner
from conformal_solitons.soliton_lab import (
    StationaryEvidence,
    TashiroCase,
    concircular_fit,
    concircular_sample_at,
    stationary_scan,
    tashiro_classify,
)


def test_sphere_entry():
    e = get_entry("sphere", 2)
    assert (e.H, e.eps_N, e.k_expected) == (-1.0, 1, 1.0)
    assert e.classification is TashiroCase.SPHERICAL


def test_unknown_entry_and_dimension():
    with pytest.raises(ValueError):
        get_entry("torus")
    with pytest.raises(DimensionError):
        get_entry("sphere", 1)


def test_warped_metrics(entries):
    g = frame_at(entries("pseudo_hyperbolic_zero").chart, [0.4, 0.2]).g
    np.testing.assert_allclose(g, np.diag([1.0, np.exp(0.8)]), atol=1e-9)
    for t in (-0.7, 0.0, 0.4):
        g = frame_at(entries("pseudo_hyperbolic_negative").chart, [t, 0.3]).g
        np.testing.assert_allclose(g, np.diag([1.0, np.cosh(t) ** 2]), atol=1e-9)


def test_warped_metrics_n3(entries):
    t, z = 0.3, [0.5, -0.2]
    g = frame_at(entries("pseudo_hyperbolic_zero", 3).chart, [t, *z]).g
    np.testing.assert_allclose(g, np.diag([1.0, np.exp(2 * t), np.exp(2 * t)]), atol=1e-9)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("name", ["sphere", "hyperbolic", "pseudo_hyperbolic_zero", "pseudo_hyperbolic_negative"])
def test_quadric_membership(entries, rng, name, n):
    entry = entries(name, n)
    sig = entry.chart.ambient.signature
    eps_q = 1.0 if name == "sphere" else -1.0
    for u in entry.chart.sample(rng, 200):
        x = entry.chart.point(u)
        assert abs(inner(sig, x, x) - eps_q) <= 1e-10


def test_latitude_sphere_in_quadric(entries, rng):
    entry = entries("latitude_sphere")
    for u in entry.chart.sample(rng, 200):
        x = entry.chart.point(u)
        assert abs(x @ x - 1.0) <= 1e-10


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("name", ENTRY_NAMES)
def test_declared_constants(entries, rng, name, n):
    entry = entries(name, n)
    for u in entry.chart.sample(rng, 20):
        fp = frame_at(entry.chart, u)
        assert fp.eps_N == entry.eps_N
        if entry.umbilic:
            assert fp.H == pytest.approx(entry.H, abs=1e-8)
            ok, _, _ = umbilicity_at(entry.chart, u)
            assert ok


def test_saddle_not_umbilic(entries):
    ok, _, dev = umbilicity_at(entries("saddle_graph").chart, [0.3, 0.1])
    assert not ok and dev > 1e-2


def test_expected_lambda_examples(entries):
    sphere = entries("sphere")
    gamma = [0, 0, 1]
    assert expected_lambda(sphere, gamma, [1e-9, 0.0]) == pytest.approx(0.0, abs=1e-12)
    assert expected_lambda(sphere, gamma, [np.pi / 2, 0.0]) == pytest.approx(1.0, abs=1e-15)
    hyper = entries("hyperbolic")
    assert expected_lambda(hyper, [1, 0, 0], [0.0, 0.0]) == -2.0
    with pytest.raises(ValueError):
        expected_lambda(entries("flat_plane"), gamma, [0.0, 0.0])
    with pytest.raises(ValueError):
        expected_lambda(entries("saddle_graph"), gamma, [0.0, 0.0])


def test_identity_isometry(entries, rng):
    for name in ENTRY_NAMES:
        chart = entries(name).chart
        u = chart.sample(rng, 1)[0]
        assert isometry_residual(chart, chart, identity_map(chart), u) == 0


@pytest.mark.parametrize("name", ["pseudo_hyperbolic_zero", "pseudo_hyperbolic_negative"])
def test_warped_models_are_hyperbolic_space(entries, rng, name):
    entry = entries(name)
    target = entries("hyperbolic").chart
    good = hyperboloid_transition(entry)
    bad = hyperboloid_transition(entry, t_scale=2.0)
    for u in entry.chart.sample(rng, 20):
        assert isometry_residual(entry.chart, target, good, u) <= 1e-7
        assert isometry_residual(entry.chart, target, bad, u * [0.5, 1.0]) > 0.1


def test_isometry_image_outside_domain(entries):
    sphere = entries("sphere").chart
    shift = SmoothMap(lambda u: [u[0] + 3.0, u[1]], 2, sphere.map.lo, sphere.map.hi)
    with pytest.raises(DomainError):
        isometry_residual(sphere, sphere, shift, [1.0, 0.0])


def test_transition_requires_hyperboloid(entries):
    with pytest.raises(GeometryError):
        hyperboloid_transition(entries("sphere"))


@pytest.mark.parametrize("name", [e for e in ENTRY_NAMES if e != "saddle_graph"])
def test_classification_pipeline(entries, rng, name):
    entry = entries(name)
    field = canonical_field(entry)
    fit = concircular_fit([concircular_sample_at(entry.chart, field, u) for u in entry.chart.sample(rng, 10)])
    evidence = StationaryEvidence.NONE
    if fit.k < -1e-6:
        evidence = stationary_scan(entry.chart, angle_function(entry.chart, field)).evidence
    assert tashiro_classify(fit.k, fit.b, evidence, entry.profile) is entry.classification


def test_list_catalog():
    listing = list_catalog()
    assert [e["name"] for e in listing] == list(ENTRY_NAMES) and len(listing) == 7
    by_name = {e["name"]: e for e in listing}
    assert by_name["sphere"]["k"] == 1.0
    assert by_name["flat_plane"]["H"] == 0.0
    assert by_name["saddle_graph"]["classification"] is None and by_name["saddle_graph"]["H"] is None
