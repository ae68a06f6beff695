"""Extrinsic and intrinsic geometry of a hypersurface given by a chart.

All quantities at a parameter point are built from the jet of the chart, so
derived objects (metric, normal, Weingarten operator, Christoffel symbols)
come with their own derivatives and the curvature identities hold to rounding.

Index conventions used throughout:

* ``E[i]`` is the pushforward of the i-th coordinate vector (a container vector).
* Bilinear forms are lower-index ``(n, n)`` arrays, ``T[i, j] = T(E_i, E_j)``.
* Operators are mixed ``(n, n)`` arrays acting on component columns,
  ``M E_i = M[k, i] E_k``.  ``bilinear(M) = M.T @ g`` converts explicitly.
* ``Gamma[k, i, j]`` is the Christoffel symbol of the second kind.
* Weingarten sign: the container derivative of the unit normal along ``X`` is
  ``-A X``; with ``N = x`` on a unit sphere this gives ``A = -I``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import jets
from .errors import DegenerateMetricError, DimensionError, GeometryError, NullNormalError
from .jets import Jet, SmoothMap
from .semiriem import AmbientSpace, inner

DET_TOL = 1e-10
UMBILIC_TOL = 1e-8


def position_orientation(x):
    """Reference vector for quadric-type hypersurfaces: the normal is ``N = x``."""
    return x


def axis_orientation(axis: int, sign: float = 1.0):
    """Reference vector ``sign * e_axis``: pick the normal with that component positive."""

    def reference(x):
        m = x.shape[0]
        w = np.zeros(m)
        w[axis] = sign
        return w

    reference.__name__ = f"axis_orientation({axis}, {sign:+g})"
    return reference


@dataclass(frozen=True)
class Chart:
    """Parametrization of a hypersurface inside an ambient container.

    ``orientation`` maps the container position (array or vector jet) to a
    reference vector; the unit normal is the normalized projection of that
    vector onto the normal line.  ``sample_lo``/``sample_hi`` bound the box
    used for random sampling and scans, kept away from chart singularities.
    """

    map: SmoothMap
    ambient: AmbientSpace
    orientation: Callable
    sample_lo: tuple
    sample_hi: tuple
    name: str = ""

    @property
    def n(self) -> int:
        return self.map.n_in

    def point(self, u) -> np.ndarray:
        return self.map(u)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        lo, hi = np.asarray(self.sample_lo), np.asarray(self.sample_hi)
        return lo + (hi - lo) * rng.random((count, self.n))


@dataclass(frozen=True)
class FramePoint:
    u: np.ndarray
    x: np.ndarray
    E: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    N: np.ndarray
    eps_N: int
    A: np.ndarray
    H: float
    Gamma: np.ndarray
    dg: np.ndarray  # dg[k, i, j] = d_k g_ij


def _as_jet(obj, u, order_needed: int = 1) -> Jet:
    j = obj if isinstance(obj, Jet) else obj.jet(u)
    if j.order < order_needed:
        raise ValueError(f"need a jet of order >= {order_needed}, got {j.order}")
    return j


class LocalGeometry:
    """Jets of the frame, fundamental forms and connection at one chart point."""

    def __init__(self, chart: Chart, u):
        self.chart = chart
        self.u = chart.map.check_domain(u)
        amb = chart.ambient
        sig = amb.signature
        self.sig = sig
        self.eta = eta = sig.array
        n, m = chart.n, sig.dim
        self.n, self.m = n, m

        x = chart.map.jet(self.u)
        if x.shape != (m,):
            raise DimensionError(f"chart {chart.name!r} outputs {x.shape}, container has dim {m}")
        amb.check_point(x.value)
        self.x = x
        E = x.diff().T  # (n, m)
        self.E = E
        g = jets.einsum("ia,ja->ij", E * eta, E)
        det = np.linalg.det(g.value)
        if abs(det) < DET_TOL:
            raise DegenerateMetricError(det)
        self.g = g
        self.ginv = ginv = jets.inv(g)

        w = chart.orientation(x)
        t = jets.einsum("ia,a->i", E * eta, w)
        nvec = w - jets.einsum("i,ia->a", jets.einsum("ij,j->i", ginv, t), E)
        if amb.is_quadric:
            nvec = nvec - amb.quadric_sign * inner(sig, x, w) * x
        scale = float(np.sum(nvec.value**2))
        if scale < 1e-20:
            raise GeometryError("orientation reference vector is tangent to the hypersurface")
        nn = inner(sig, nvec, nvec)
        if abs(nn.value) <= 1e-10 * scale:
            raise NullNormalError(f"null normal direction, <n,n>/|n|^2 = {nn.value / scale:.3e}")
        self.eps_N = 1 if nn.value > 0 else -1
        self.N = nvec * jets.power(nn * self.eps_N, -0.5)

        dN = self.N.diff()  # (m, n): dN[a, i] = d_i N^a
        hb = -jets.einsum("ai,la->il", dN * eta[:, None], E)
        self.Ab = hb  # bilinear Weingarten form g(A E_i, E_j)
        self.A = jets.einsum("kl,il->ki", ginv, hb)  # mixed operator A^k_i
        self.H = self.eps_N * float(np.trace(self.A.value)) / n

        dg = g.diff()  # dg[i, j, k] = d_k g_ij
        first = 0.5 * (dg.transpose((1, 2, 0)) + dg.transpose((1, 0, 2)) - dg.transpose((2, 0, 1)))
        self.dg = dg
        self.Gamma = jets.einsum("kl,lij->kij", ginv, first)

        c = np.linalg.cholesky(g.value)
        self.on = np.linalg.inv(c).T  # columns: g-orthonormal frame in coordinates
        self.on_inv = c.T

    # conversions -----------------------------------------------------------
    @property
    def gv(self) -> np.ndarray:
        return self.g.value

    def bilinear(self, M: np.ndarray) -> np.ndarray:
        return M.T @ self.gv

    def on_bilinear(self, T: np.ndarray) -> np.ndarray:
        return self.on.T @ T @ self.on

    def on_operator(self, M: np.ndarray) -> np.ndarray:
        return self.on_inv @ M @ self.on

    def bilinear_norm(self, T: np.ndarray) -> float:
        """Max-entry norm of a bilinear form in an orthonormal frame."""
        return float(np.max(np.abs(self.on_bilinear(T))))

    def vector_norm(self, v: np.ndarray) -> float:
        return float(np.sqrt(abs(v @ self.gv @ v)))

    def tangent_components(self, w) -> np.ndarray | Jet:
        """Coordinates of the tangential part of a container vector (or jet)."""
        if not isinstance(w, Jet):
            return self.ginv.value @ (self.E.value * self.eta) @ np.asarray(w, dtype=float)
        t = jets.einsum("ia,a->i", self.E * self.eta, w)
        return jets.einsum("ij,j->i", self.ginv, t)

    @property
    def c(self) -> float:
        return self.chart.ambient.curvature

    # frame ------------------------------------------------------------------
    def frame(self) -> FramePoint:
        return FramePoint(
            u=self.u,
            x=self.x.value,
            E=self.E.value,
            g=self.gv,
            g_inv=self.ginv.value,
            N=self.N.value,
            eps_N=self.eps_N,
            A=self.A.value,
            H=self.H,
            Gamma=self.Gamma.value,
            dg=np.moveaxis(self.dg.value, 2, 0),
        )

    # curvature --------------------------------------------------------------
    @functools.cached_property
    def riemann(self) -> np.ndarray:
        """R[a, b, c, d] = R^a_{bcd}, with R(E_c, E_d) E_b = R^a_{bcd} E_a."""
        G = self.Gamma.value
        dG = self.Gamma.d1  # dG[a, b, c, d] = d_d Gamma^a_bc
        return (
            np.einsum("adbc->abcd", dG)
            - np.einsum("acbd->abcd", dG)
            + np.einsum("ace,edb->abcd", G, G)
            - np.einsum("ade,ecb->abcd", G, G)
        )

    @functools.cached_property
    def ricci(self) -> np.ndarray:
        return np.einsum("abad->bd", self.riemann)

    @functools.cached_property
    def scalar_curvature(self) -> float:
        return float(np.einsum("ij,ij->", self.ginv.value, self.ricci))

    @functools.cached_property
    def A2b(self) -> np.ndarray:
        A = self.A.value
        return self.bilinear(A @ A)

    # differential operators -------------------------------------------------
    def gradient(self, phi: Jet) -> np.ndarray:
        return self.ginv.value @ phi.d1

    def hessian(self, phi: Jet) -> np.ndarray:
        if phi.order < 2:
            raise ValueError("Hessian needs a jet of order >= 2")
        return phi.d2 - np.einsum("kij,k->ij", self.Gamma.value, phi.d1)

    def covariant_derivative(self, W: Jet) -> np.ndarray:
        """nabla W as D[i, k] = (nabla_{E_i} W)^k."""
        return W.d1.T + np.einsum("kil,l->ik", self.Gamma.value, W.value)

    def lie_metric(self, W: Jet) -> np.ndarray:
        D = self.covariant_derivative(W)
        T = D @ self.gv  # T[i, j] = g(nabla_i W, E_j)
        return T + T.T

    @functools.cached_property
    def nabla_A(self) -> np.ndarray:
        """DA[i, k, j] = (nabla_{E_i} A)^k_j."""
        A = self.A.value
        G = self.Gamma.value
        dA = np.moveaxis(self.A.d1, 2, 0)  # dA[i, k, j] = d_i A^k_j
        return dA + np.einsum("kil,lj->ikj", G, A) - np.einsum("lij,kl->ikj", G, A)

    def covariant_weingarten(self, V) -> np.ndarray:
        return np.einsum("i,ikj->kj", np.asarray(V, dtype=float), self.nabla_A)

    def codazzi_residual(self) -> float:
        worst = 0.0
        on = self.on
        for a in range(self.n):
            Ta = self.covariant_weingarten(on[:, a])
            for b in range(a + 1, self.n):
                Tb = self.covariant_weingarten(on[:, b])
                worst = max(worst, self.vector_norm(Ta @ on[:, b] - Tb @ on[:, a]))
        return worst

    def umbilicity(self):
        dev = self.on_operator(self.A.value - self.eps_N * self.H * np.eye(self.n))
        deviation = float(np.max(np.abs(dev)))
        return deviation <= UMBILIC_TOL, self.H, deviation

    def gauss_residual(self) -> float:
        """Ric - [c(n-1) g + n H A - eps_N A^2] in an orthonormal frame."""
        n = self.n
        rhs = self.c * (n - 1) * self.gv + n * self.H * self.Ab.value - self.eps_N * self.A2b
        return self.bilinear_norm(self.ricci - rhs)

    def scalar_curvature_residual(self) -> float:
        n = self.n
        return abs(self.scalar_curvature / (n * (n - 1)) - (self.c + self.eps_N * self.H**2))

    def metric_compatibility_residual(self) -> float:
        dg = self.dg.value  # [i, j, k] = d_k g_ij
        G = self.Gamma.value
        g = self.gv
        res = (
            np.moveaxis(dg, 2, 0)
            - np.einsum("lki,lj->kij", G, g)
            - np.einsum("lkj,il->kij", G, g)
        )
        return float(np.max(np.abs(res)))


def local_geometry(chart: Chart, u) -> LocalGeometry:
    return LocalGeometry(chart, u)


def frame_at(chart: Chart, u) -> FramePoint:
    return LocalGeometry(chart, u).frame()


def ricci_at(chart: Chart, u):
    """Lower-index Ricci tensor and scalar curvature at ``u``."""
    geo = LocalGeometry(chart, u)
    return geo.ricci, geo.scalar_curvature


def gradient_at(chart: Chart, phi, u) -> np.ndarray:
    geo = LocalGeometry(chart, u)
    return geo.gradient(_as_jet(phi, geo.u, 1))


def hessian_scalar_at(chart: Chart, phi, u) -> np.ndarray:
    geo = LocalGeometry(chart, u)
    return geo.hessian(_as_jet(phi, geo.u, 2))


def lie_metric_at(chart: Chart, W, u) -> np.ndarray:
    """(L_W g)_ij for a tangent field given by its coordinate components."""
    geo = LocalGeometry(chart, u)
    Wj = _as_jet(W, geo.u, 1)
    if Wj.shape != (geo.n,):
        raise DimensionError(f"field has {Wj.shape} components, chart has dimension {geo.n}")
    return geo.lie_metric(Wj)


def covariant_weingarten_at(chart: Chart, u, V) -> np.ndarray:
    return LocalGeometry(chart, u).covariant_weingarten(V)


def codazzi_residual_at(chart: Chart, u) -> float:
    return LocalGeometry(chart, u).codazzi_residual()


def umbilicity_at(chart: Chart, u):
    """``(is_umbilic, H, deviation)`` with deviation = max |A - eps_N H I| (orthonormal)."""
    return LocalGeometry(chart, u).umbilicity()


def gauss_residual_at(chart: Chart, u) -> float:
    return LocalGeometry(chart, u).gauss_residual()
