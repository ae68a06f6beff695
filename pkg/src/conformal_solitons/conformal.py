"""Conformal vector fields of the two ambient models and their split along a hypersurface.

Flat container (``c = 0``)::

    sigma(x) = <a, x> + beta
    Vbar(x)  = sigma(x) x - 1/2 <x, x> a + B x + 1/2 gamma

Quadric ``<x, x> = eps_q`` (``c = eps_q``)::

    sigma(x) = -eps_q <gamma, x>
    Vbar(x)  = -eps_q <x, gamma> x + B x + gamma

``a`` is stored with the signature weights already applied, so ``<a, x>`` is the
height function of ``a``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import DimensionError
from .hypersurface import Chart, LocalGeometry
from .jets import Jet
from .semiriem import AmbientSpace, ConformalMatrix, inner, tangent_basis

SPLIT_TOL = 1e-10


@dataclass(frozen=True)
class ConformalField:
    a: np.ndarray
    beta: float
    B: ConformalMatrix
    gamma: np.ndarray
    ambient: AmbientSpace

    def __post_init__(self):
        m = self.ambient.container_dim
        a = np.array(self.a, dtype=float)
        gamma = np.array(self.gamma, dtype=float)
        if a.shape != (m,) or gamma.shape != (m,):
            raise DimensionError(f"field vectors must have length {m}")
        B = self.B if isinstance(self.B, ConformalMatrix) else ConformalMatrix(self.B, self.ambient.signature)
        if B.sig != self.ambient.signature:
            raise DimensionError("matrix signature differs from the ambient signature")
        if self.ambient.is_quadric and (np.any(a != 0) or self.beta != 0):
            raise ValueError("quadric fields are generated by gamma and B only (a = 0, beta = 0)")
        a.setflags(write=False)
        gamma.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def flat(cls, ambient: AmbientSpace, a=None, beta=0.0, B=None, gamma=None) -> "ConformalField":
        m = ambient.container_dim
        return cls(
            np.zeros(m) if a is None else a,
            beta,
            ConformalMatrix.zero(ambient.signature) if B is None else B,
            np.zeros(m) if gamma is None else gamma,
            ambient,
        )

    @classmethod
    def quadric(cls, ambient: AmbientSpace, gamma, B=None) -> "ConformalField":
        m = ambient.container_dim
        Bm = ConformalMatrix.zero(ambient.signature) if B is None else B
        return cls(np.zeros(m), 0.0, Bm, gamma, ambient)

    @property
    def sig(self):
        return self.ambient.signature

    def with_killing(self, B) -> "ConformalField":
        return ConformalField(self.a, self.beta, B, self.gamma, self.ambient)


def _matvec(B: np.ndarray, x):
    if isinstance(x, Jet):
        return jets.constant_linear("ab,b->a", B, x)
    return B @ x


def _check_point(field: ConformalField, x):
    if isinstance(x, Jet):
        if x.shape != (field.ambient.container_dim,):
            raise DimensionError(f"point jet of shape {x.shape}")
        field.ambient.check_point(x.value)
        return x
    return field.ambient.check_point(x)


def _sigma(field: ConformalField, x):
    if field.ambient.is_quadric:
        return -field.ambient.quadric_sign * inner(field.sig, field.gamma, x)
    return inner(field.sig, field.a, x) + field.beta


def _vbar(field: ConformalField, x):
    sig = field.sig
    Bx = _matvec(field.B.B, x)
    if field.ambient.is_quadric:
        return -field.ambient.quadric_sign * inner(sig, x, field.gamma) * x + Bx + field.gamma
    return _sigma(field, x) * x - 0.5 * inner(sig, x, x) * field.a + Bx + 0.5 * field.gamma


def sigma_at(field: ConformalField, x):
    """Conformal factor at a container point (or point jet)."""
    return _sigma(field, _check_point(field, x))


def eval_field(field: ConformalField, x):
    """Ambient field vector at a container point (or point jet)."""
    return _vbar(field, _check_point(field, x))


def field_jacobian(field: ConformalField, x) -> np.ndarray:
    """J[a, b] = d_b Vbar^a for the closed-form extension to the container."""
    x = _check_point(field, x)
    xj = jets.stack(Jet.variables(x, 1))
    return _vbar(field, xj).d1


def sigma_gradient(field: ConformalField, x) -> np.ndarray:
    """Container differential of sigma (its extension is affine in x)."""
    x = _check_point(field, x)
    return _sigma(field, jets.stack(Jet.variables(x, 1))).d1


def _probe_basis(field: ConformalField, x) -> np.ndarray:
    """Rows spanning the ambient tangent space at ``x``, orthonormal for the signature."""
    sig = field.sig
    if not field.ambient.is_quadric:
        return np.eye(sig.dim)
    T = tangent_basis(sig, x)
    w, Q = np.linalg.eigh((T * sig.array) @ T.T)
    return (Q / np.sqrt(np.abs(w))).T @ T


def conformality_residual(field: ConformalField, x, m: int = 10, rng: np.random.Generator | None = None) -> float:
    """max |<D_X V, Y> + <D_Y V, X> - 2 sigma <X, Y>| over tangent probe pairs.

    The probes are the axis-aligned basis vectors plus ``m`` random pairs drawn
    from ``rng``; on quadrics they are taken in the ambient tangent space.
    """
    x = _check_point(field, x)
    sig = field.sig
    rng = np.random.default_rng(0) if rng is None else rng
    J = field_jacobian(field, x)
    sigma = float(_sigma(field, x))
    basis = _probe_basis(field, x)
    eta = sig.array
    # bilinear form K(X, Y) = <JX, Y> + <JY, X> - 2 sigma <X, Y> on the basis
    K = (basis @ J.T * eta) @ basis.T
    K = K + K.T - 2.0 * sigma * (basis * eta) @ basis.T
    worst = float(np.max(np.abs(K)))
    for _ in range(m):
        X, Y = rng.standard_normal((2, basis.shape[0]))
        worst = max(worst, abs(X @ K @ Y))
    return worst


def sigma_hessian_residual(field: ConformalField, x) -> float:
    """Max entry of Hess sigma + c sigma g in an orthonormal ambient frame."""
    x = _check_point(field, x)
    xj = jets.stack(Jet.variables(x, 2))
    s = _sigma(field, xj)
    amb = field.ambient
    if not amb.is_quadric:
        return float(np.max(np.abs(s.d2)))
    eta = field.sig.array
    basis = _probe_basis(field, x)
    gram = (basis * eta) @ basis.T
    # on the quadric: Hess s(X, Y) = D^2 s(X, Y) - eps_q <X, Y> ds(x)
    hess = basis @ s.d2 @ basis.T - amb.quadric_sign * float(s.d1 @ x) * gram
    return float(np.max(np.abs(hess + amb.curvature * s.value * gram)))


@dataclass(frozen=True)
class SplitSample:
    u: np.ndarray
    x: np.ndarray
    N: np.ndarray
    eps_N: int
    Vbar: np.ndarray
    V: np.ndarray  # components in the chart basis
    C: float
    sigma: float
    reconstruction_error: float


class SplitGeometry:
    """Jets of Vbar, sigma, C and the tangential part V at one chart point."""

    def __init__(self, geo: LocalGeometry, field: ConformalField):
        if field.ambient != geo.chart.ambient:
            raise ValueError("field ambient differs from the chart ambient")
        self.geo = geo
        self.field = field
        self.Vbar = _vbar(field, geo.x)
        self.sigma = _sigma(field, geo.x)
        self.C = inner(field.sig, self.Vbar, geo.N)
        self.V = geo.tangent_components(self.Vbar)

    def sample(self) -> SplitSample:
        geo = self.geo
        V = self.V.value
        Vbar = self.Vbar.value
        rebuilt = V @ geo.E.value + geo.eps_N * self.C.value * geo.N.value
        return SplitSample(
            u=geo.u,
            x=geo.x.value,
            N=geo.N.value,
            eps_N=geo.eps_N,
            Vbar=Vbar,
            V=V,
            C=float(self.C.value),
            sigma=float(self.sigma.value),
            reconstruction_error=float(np.max(np.abs(rebuilt - Vbar))),
        )


def split_at(chart: Chart, field: ConformalField, u) -> SplitSample:
    return SplitGeometry(LocalGeometry(chart, u), field).sample()


class _ChartField:
    """Quantity of the split evaluated as a map on chart parameters.

    Quacks like a SmoothMap (``__call__``, ``jet``, ``check_domain``) so the
    finite-difference oracle and the differential operators accept it.
    """

    def __init__(self, chart: Chart, field: ConformalField, attr: str):
        self.chart = chart
        self.field = field
        self.attr = attr
        self.n_in = chart.n

    def check_domain(self, u, margin: float = 0.0):
        return self.chart.map.check_domain(u, margin)

    def jet(self, u, order: int | None = None) -> Jet:
        return getattr(SplitGeometry(LocalGeometry(self.chart, u), self.field), self.attr)

    def __call__(self, u):
        value = self.jet(u).value
        return float(value) if value.ndim == 0 else value


def angle_function(chart: Chart, field: ConformalField) -> _ChartField:
    """C = <Vbar, N> as a function of the chart parameters."""
    return _ChartField(chart, field, "C")


def tangential_field(chart: Chart, field: ConformalField) -> _ChartField:
    """Chart components of the tangential part V of the field."""
    return _ChartField(chart, field, "V")


def restricted_sigma(chart: Chart, field: ConformalField) -> _ChartField:
    return _ChartField(chart, field, "sigma")
