"""Built-in hypersurfaces with their declared constants and closed-form soliton functions.

The charts are written with the scalar functions of :mod:`jets`, so one
definition serves both plain evaluation and differentiation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .conformal import ConformalField
from .errors import DimensionError, GeometryError
from .hypersurface import Chart, axis_orientation, position_orientation
from .jets import SmoothMap
from .semiriem import AmbientSpace, Signature, inner
from .soliton_lab import TashiroCase

ENTRY_NAMES = (
    "flat_plane",
    "sphere",
    "hyperbolic",
    "pseudo_hyperbolic_zero",
    "pseudo_hyperbolic_negative",
    "latitude_sphere",
    "saddle_graph",
)

POLAR_MARGIN = 0.05
LATITUDE_RADIUS = 1.0


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    n: int
    chart: Chart
    eps_N: int
    H: float
    c_ambient: float
    k_expected: float
    classification: TashiroCase | None
    profile: str | None
    umbilic: bool
    canonical_gamma: np.ndarray
    description: str

    @property
    def soliton_bearing(self) -> bool:
        return self.classification is not None

    def metadata(self) -> dict:
        """JSON-ready summary; undeclared constants (NaN) become None."""
        num = lambda v: None if v != v else v
        return {
            "name": self.name,
            "n": self.n,
            "ambient": self.chart.ambient.describe(),
            "eps_N": self.eps_N,
            "H": num(self.H),
            "c": self.c_ambient,
            "k": num(self.k_expected),
            "classification": None if self.classification is None else self.classification.value,
            "umbilic": self.umbilic,
            "description": self.description,
        }


# ---------------------------------------------------------------------------
# chart formulas (coordinates are floats or scalar jets)


def _sum_sq(vals):
    return sum(v * v for v in vals)


def _sphere_point(angles):
    """Unit sphere of dimension len(angles): polar angles then one azimuth."""
    if len(angles) == 1:
        return [jets.cos(angles[0]), jets.sin(angles[0])]
    theta = angles[0]
    s = jets.sin(theta)
    return [s * y for y in _sphere_point(angles[1:])] + [jets.cos(theta)]


def _horosphere_point(t, z):
    """Hyperboloid <y,y> = -1 in Lorentz space, metric dt^2 + e^{2t}|dz|^2."""
    et, emt = jets.exp(t), jets.exp(-t)
    q = et * _sum_sq(z)
    y0 = 0.5 * (et + emt + q)
    yn = 0.5 * (et - emt - q)
    return [y0] + [et * zi for zi in z] + [yn]


def _polar_box(n):
    lo = [0.0] * (n - 1) + [-np.pi]
    hi = [np.pi] * (n - 1) + [np.pi]
    slo = [POLAR_MARGIN] * (n - 1) + [-np.pi + POLAR_MARGIN]
    shi = [np.pi - POLAR_MARGIN] * (n - 1) + [np.pi - POLAR_MARGIN]
    return lo, hi, tuple(slo), tuple(shi)


def _flat(m):
    return AmbientSpace.flat(Signature.euclidean(m))


def _lorentz(m):
    return AmbientSpace.flat(Signature.lorentz(m))


def _build(name: str, n: int) -> CatalogEntry:
    unit = lambda m, i: np.eye(m)[i]
    if name == "flat_plane":
        fmap = SmoothMap.on_box(lambda u: list(u) + [0.0], [-2.0] * n, [2.0] * n, name)
        chart = Chart(fmap, _flat(n + 1), axis_orientation(n), (-1.0,) * n, (1.0,) * n, name)
        return CatalogEntry(name, n, chart, 1, 0.0, 0.0, 0.0, TashiroCase.EUCLIDEAN, None, True,
                            unit(n + 1, n), "hyperplane through the origin of Euclidean space")
    if name == "sphere":
        lo, hi, slo, shi = _polar_box(n)
        fmap = SmoothMap.on_box(_sphere_point, lo, hi, name)
        chart = Chart(fmap, _flat(n + 1), position_orientation, slo, shi, name)
        return CatalogEntry(name, n, chart, 1, -1.0, 0.0, 1.0, TashiroCase.SPHERICAL, None, True,
                            unit(n + 1, n), "unit sphere in Euclidean space, polar chart")
    if name == "hyperbolic":
        fmap = SmoothMap.on_box(lambda u: [jets.sqrt(1.0 + _sum_sq(u))] + list(u), [-50.0] * n, [50.0] * n, name)
        chart = Chart(fmap, _lorentz(n + 1), position_orientation, (-1.5,) * n, (1.5,) * n, name)
        return CatalogEntry(name, n, chart, -1, 1.0, 0.0, -1.0, TashiroCase.HYPERBOLIC, None, True,
                            unit(n + 1, 0), "upper hyperboloid in Lorentz space, graph over the spatial part")
    if name == "pseudo_hyperbolic_zero":
        fmap = SmoothMap.on_box(lambda u: _horosphere_point(u[0], u[1:]), [-2.0] * n, [2.0] * n, name)
        chart = Chart(fmap, _lorentz(n + 1), position_orientation, (-1.0,) * n, (1.0,) * n, name)
        gamma = unit(n + 1, 0) - unit(n + 1, n)
        return CatalogEntry(name, n, chart, -1, 1.0, 0.0, -1.0, TashiroCase.PSEUDO_HYPERBOLIC_ZERO, "zero", True,
                            gamma, "hyperboloid in horospherical coordinates, metric dt^2 + e^{2t}|dz|^2")
    if name == "pseudo_hyperbolic_negative":
        def neg(u):
            t = u[0]
            ch = jets.cosh(t)
            return [ch * y for y in _horosphere_point(u[1], u[2:])] + [jets.sinh(t)]

        fmap = SmoothMap.on_box(neg, [-2.0] * n, [2.0] * n, name)
        chart = Chart(fmap, _lorentz(n + 1), position_orientation, (-1.0,) * n, (1.0,) * n, name)
        return CatalogEntry(name, n, chart, -1, 1.0, 0.0, -1.0, TashiroCase.PSEUDO_HYPERBOLIC_NEGATIVE, "negative",
                            True, unit(n + 1, n), "hyperboloid as a cosh-warped product, metric dt^2 + cosh^2 t g_H")
    if name == "latitude_sphere":
        r = LATITUDE_RADIUS
        lo, hi, slo, shi = _polar_box(n)
        sr, cr = np.sin(r), np.cos(r)
        fmap = SmoothMap.on_box(lambda u: [sr * y for y in _sphere_point(u)] + [cr], lo, hi, name)
        amb = AmbientSpace.quadric(Signature.euclidean(n + 2), 1)
        chart = Chart(fmap, amb, axis_orientation(n + 1, -1.0), slo, shi, name)
        H = -cr / sr
        gamma = np.concatenate([np.resize([0.3, -0.2, 0.4], n + 1), [0.5]])
        return CatalogEntry(name, n, chart, 1, H, 1.0, 1.0 + H * H, TashiroCase.SPHERICAL, None, True,
                            gamma, f"small sphere at polar distance {r} inside the unit sphere of dimension n+1")
    if name == "saddle_graph":
        fmap = SmoothMap.on_box(lambda u: list(u) + [u[0] * u[0] - u[1] * u[1]], [-2.0] * n, [2.0] * n, name)
        chart = Chart(fmap, _flat(n + 1), axis_orientation(n), (-1.0,) * n, (1.0,) * n, name)
        return CatalogEntry(name, n, chart, 1, float("nan"), 0.0, float("nan"), None, None, False,
                            unit(n + 1, n), "graph of u1^2 - u2^2, non-umbilic control")
    raise KeyError(name)


def get_entry(name: str, n: int = 2) -> CatalogEntry:
    if name not in ENTRY_NAMES:
        raise ValueError(f"unknown catalog entry {name!r}; known: {', '.join(ENTRY_NAMES)}")
    if int(n) != n or n < 2:
        raise DimensionError(f"catalog entries need n >= 2, got {n}")
    return _build(name, int(n))


def list_catalog(n: int = 2) -> list[dict]:
    return [get_entry(name, n).metadata() for name in ENTRY_NAMES]


# ---------------------------------------------------------------------------
# fields and expectations


def gamma_field(entry: CatalogEntry, gamma=None) -> ConformalField:
    """Field whose ambient vector realizes the height function of ``gamma``.

    On flat containers this is the constant field Vbar = gamma (the closed form
    carries a factor 1/2 on its constant term); on quadrics it is the
    gradient field -eps_q <x, gamma> x + gamma.
    """
    amb = entry.chart.ambient
    gamma = entry.canonical_gamma if gamma is None else np.asarray(gamma, dtype=float)
    if amb.is_quadric:
        return ConformalField.quadric(amb, gamma)
    return ConformalField.flat(amb, gamma=2.0 * gamma)


def canonical_field(entry: CatalogEntry) -> ConformalField:
    """The field used by the demo scenario of the entry."""
    if entry.name == "flat_plane":
        a = np.zeros(entry.n + 1)
        a[0], a[-1] = 0.3, 1.0
        return ConformalField.flat(entry.chart.ambient, a=a, beta=0.5)
    return gamma_field(entry)


def expected_lambda(entry: CatalogEntry, gamma, u) -> float:
    """Closed-form soliton function for the gamma-field of ``entry`` at ``u``."""
    gamma = np.asarray(gamma, dtype=float)
    n = entry.n
    sig = entry.chart.ambient.signature
    x = entry.chart.point(u)
    h = inner(sig, gamma, x)
    if entry.name in ("sphere", "hyperbolic"):
        return entry.eps_N * (n - 1 - h)
    if entry.name in ("pseudo_hyperbolic_zero", "pseudo_hyperbolic_negative"):
        return -(n - 1) + h
    if entry.name == "latitude_sphere":
        r = LATITUDE_RADIUS
        y = x[:-1] / np.sin(r)
        N = np.concatenate([np.cos(r) * y, [-np.sin(r)]])
        S = n * (n - 1) * entry.k_expected
        return S / n - h + inner(sig, gamma, N) * entry.H
    if entry.name == "flat_plane":
        raise ValueError("flat_plane has lambda = sigma restricted to the plane; use the field's sigma")
    raise ValueError(f"{entry.name} carries no soliton expectation")


def _induced_metric(chart: Chart, u) -> np.ndarray:
    E = chart.map.jet(u, order=1).d1
    return E.T @ (chart.ambient.signature.array[:, None] * E)


def isometry_residual(chartA: Chart, chartB: Chart, fmap: SmoothMap, u) -> float:
    """max |fmap^* g_B - g_A| at ``u`` (coordinate components)."""
    u = chartA.map.check_domain(u)
    J = fmap.jet(u, order=1)
    v = J.value
    if v.shape != (chartB.n,):
        raise DimensionError(f"map lands in {v.shape}, chart B has dimension {chartB.n}")
    chartB.map.check_domain(v)
    D = J.d1
    pulled = D.T @ _induced_metric(chartB, v) @ D
    return float(np.max(np.abs(pulled - _induced_metric(chartA, u))))


def identity_map(chart: Chart) -> SmoothMap:
    return SmoothMap(lambda u: list(u), chart.n, chart.map.lo, chart.map.hi, "identity")


def hyperboloid_transition(entry: CatalogEntry, t_scale: float = 1.0) -> SmoothMap:
    """Coordinate change from a hyperboloid-type entry to the graph chart of ``hyperbolic``.

    The graph chart is parametrized by the spatial part of the point, so the
    transition is the entry's chart with the time component dropped.
    ``t_scale != 1`` rescales the first parameter and gives a wrong map.
    """
    if entry.chart.ambient.signature != Signature.lorentz(entry.n + 1) or entry.eps_N != -1:
        raise GeometryError(f"{entry.name} is not a hyperboloid model")
    func = entry.chart.map.func

    def transition(u):
        return func([u[0] * t_scale] + list(u[1:]))[1:]

    m = entry.chart.map
    return SmoothMap(transition, entry.n, m.lo, m.hi, f"{entry.name}->hyperbolic")
