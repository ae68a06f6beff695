"""Soliton residuals, the angle-function identities, concircular fits and classification.

Every check here reduces to a lower-index tensor identity evaluated in a
g-orthonormal frame at a single chart point; residuals are max-entry norms
(or g-norms for vectors).
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

import numpy as np

from .conformal import ConformalField, SplitGeometry, field_jacobian, sigma_gradient
from .errors import GeometryError, MuUndefinedError
from .hypersurface import Chart, LocalGeometry, _as_jet
from .jets import Jet

ZERO_TOL = 1e-6
MU_DENOM_TOL = 1e-10
MU_A_TOL = 1e-10
CRITICAL_TOL = 1e-6
INCONCLUSIVE_TOL = 1e-3


# ---------------------------------------------------------------------------
# per-point evaluation


def _tangent_jet(geo: LocalGeometry, V) -> Jet:
    if isinstance(V, ConformalField):
        return SplitGeometry(geo, V).V
    return _as_jet(V, geo.u, 1)


def _lambda(geo: LocalGeometry, Vj: Jet) -> float:
    L = geo.lie_metric(Vj)
    div = 0.5 * float(np.einsum("ij,ij->", geo.ginv.value, L))
    return (geo.scalar_curvature + div) / geo.n


class PointLab:
    """All soliton-side quantities of a (chart, field) pair at one point."""

    def __init__(self, chart: Chart, field: ConformalField, u):
        self.geo = geo = LocalGeometry(chart, u)
        self.field = field
        self.split = sp = SplitGeometry(geo, field)
        self.C = float(sp.C.value)
        self.sigma = float(sp.sigma.value)
        self.V = sp.V.value
        self.lie_V = geo.lie_metric(sp.V)
        self.lam = _lambda(geo, sp.V)

    @property
    def psi(self) -> float:
        return self.sigma - self.lam

    def N_sigma(self) -> float:
        """Ambient derivative of sigma along N."""
        return float(sigma_gradient(self.field, self.geo.x.value) @ self.geo.N.value)

    def soliton_residual(self, lam: float | None = None) -> float:
        geo = self.geo
        lam = self.lam if lam is None else lam
        return geo.bilinear_norm(geo.ricci + 0.5 * self.lie_V - lam * geo.gv)

    def lemma31(self) -> float:
        """L_Vbar gbar (restricted) - L_V g + 2 eps_N C A."""
        geo = self.geo
        dV = self.split.Vbar.diff().value  # [a, i] = d_i (Vbar o x)^a
        T = np.einsum("ai,ja->ij", dV * geo.eta[:, None], geo.E.value)
        lie_bar = T + T.T
        return geo.bilinear_norm(lie_bar - self.lie_V + 2.0 * geo.eps_N * self.C * geo.Ab.value)

    def lemma32(self, lam: float | None = None) -> float:
        """Ric + psi g + eps_N C A."""
        geo = self.geo
        psi = self.sigma - (self.lam if lam is None else lam)
        return geo.bilinear_norm(geo.ricci + psi * geo.gv + geo.eps_N * self.C * geo.Ab.value)

    def lemma33(self) -> float:
        """grad C + (Dbar_N Vbar)^T + A V, as a g-norm."""
        geo = self.geo
        DNV = field_jacobian(self.field, geo.x.value) @ geo.N.value
        rhs = -geo.tangent_components(DNV) - geo.A.value @ self.V
        return geo.vector_norm(geo.gradient(self.split.C) - rhs)

    def hess_C(self) -> np.ndarray:
        return self.geo.hessian(self.split.C)

    def lemma34_rhs(self) -> np.ndarray:
        geo = self.geo
        g = geo.gv
        Ab = geo.Ab.value
        C, sigma = self.C, self.sigma
        D = geo.covariant_derivative(self.split.V)  # D[i, k] = (nabla_i V)^k
        M = D @ geo.A.value.T @ g  # M[i, j] = g(A nabla_i V, E_j)
        return (
            -(geo.c * C + self.N_sigma()) * g
            + sigma * Ab
            + geo.eps_N * C * geo.A2b
            - geo.bilinear(geo.covariant_weingarten(self.V))
            - M
            - M.T
        )

    def lemma34(self) -> float:
        return self.geo.bilinear_norm(self.hess_C() - self.lemma34_rhs())

    def concircular_sample(self) -> "ConcircularSample":
        geo = self.geo
        return ConcircularSample(
            C=self.C,
            hess=self.hess_C(),
            g=geo.gv,
            k_expected=geo.c + geo.eps_N * geo.H**2,
            b_expected=-(self.N_sigma() + geo.eps_N * self.sigma * geo.H),
        )


@dataclass(frozen=True)
class SolitonSample:
    u: np.ndarray
    lam: float
    psi: float
    C: float
    sigma: float
    residuals: dict = dc_field(default_factory=dict)


def soliton_sample_at(chart: Chart, field: ConformalField, u) -> SolitonSample:
    lab = PointLab(chart, field, u)
    residuals = {
        "soliton": lab.soliton_residual(),
        "l31": lab.lemma31(),
        "l32": lab.lemma32(),
        "l33": lab.lemma33(),
        "l34": lab.lemma34(),
    }
    return SolitonSample(lab.geo.u, lab.lam, lab.psi, lab.C, lab.sigma, residuals)


def extract_lambda_at(chart: Chart, V, u) -> float:
    """lambda = (S + div V) / n; ``V`` is a tangent field or a ConformalField."""
    geo = LocalGeometry(chart, u)
    return _lambda(geo, _tangent_jet(geo, V))


def soliton_residual_at(chart: Chart, V, lam: float, u) -> float:
    geo = LocalGeometry(chart, u)
    Vj = _tangent_jet(geo, V)
    return geo.bilinear_norm(geo.ricci + 0.5 * geo.lie_metric(Vj) - lam * geo.gv)


def lemma31_residual_at(chart: Chart, field: ConformalField, u) -> float:
    return PointLab(chart, field, u).lemma31()


def lemma32_residual_at(chart: Chart, field: ConformalField, lam: float | None, u) -> float:
    """With ``lam=None`` the trace-extracted lambda is used."""
    return PointLab(chart, field, u).lemma32(lam)


def lemma33_residual_at(chart: Chart, field: ConformalField, u) -> float:
    return PointLab(chart, field, u).lemma33()


def lemma34_residual_at(chart: Chart, field: ConformalField, u) -> float:
    return PointLab(chart, field, u).lemma34()


# ---------------------------------------------------------------------------
# concircular fit


@dataclass(frozen=True)
class ConcircularSample:
    C: float
    hess: np.ndarray
    g: np.ndarray
    k_expected: float = float("nan")
    b_expected: float = float("nan")


@dataclass(frozen=True)
class ConcircularFit:
    k: float
    b: float
    fit_residual: float
    k_expected: float
    b_expected: float
    k_spread: float
    b_spread: float
    degenerate: bool = False


def concircular_sample_at(chart: Chart, field: ConformalField, u) -> ConcircularSample:
    return PointLab(chart, field, u).concircular_sample()


def concircular_fit(samples: Sequence[ConcircularSample]) -> ConcircularFit:
    """Least-squares (k, b) with Hess C = (-k C + b) g over the samples.

    The fit is done in a g-orthonormal frame at each sample, where the model
    is ``Hess + (k C - b) I = 0``.  Constant C leaves k unidentifiable; that
    case is flagged as degenerate and k, b are reported as NaN.
    """
    if len(samples) < 3:
        raise ValueError("concircular fit needs at least 3 samples")
    rows, rhs, frames = [], [], []
    for s in samples:
        L = np.linalg.inv(np.linalg.cholesky(np.asarray(s.g, dtype=float))).T
        Hn = L.T @ np.asarray(s.hess, dtype=float) @ L
        frames.append(Hn)
        for i in range(Hn.shape[0]):
            rows.append([s.C, -1.0])
            rhs.append(-Hn[i, i])
    Cs = np.array([s.C for s in samples])
    kx = np.array([s.k_expected for s in samples])
    bx = np.array([s.b_expected for s in samples])
    spread = lambda v: float(np.max(v) - np.min(v)) if np.all(np.isfinite(v)) else float("nan")
    k_exp = float(np.mean(kx)) if np.all(np.isfinite(kx)) else float("nan")
    b_exp = float(np.mean(bx)) if np.all(np.isfinite(bx)) else float("nan")
    degenerate = float(np.max(Cs) - np.min(Cs)) <= 1e-10 * (1.0 + float(np.max(np.abs(Cs))))
    if degenerate:
        nan = float("nan")
        return ConcircularFit(nan, nan, nan, k_exp, b_exp, spread(kx), spread(bx), True)
    (k, b), *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    worst = 0.0
    for s, Hn in zip(samples, frames):
        worst = max(worst, float(np.max(np.abs(Hn + (k * s.C - b) * np.eye(Hn.shape[0])))))
    return ConcircularFit(float(k), float(b), worst, k_exp, b_exp, spread(kx), spread(bx))


# ---------------------------------------------------------------------------
# Ric = mu A


@dataclass(frozen=True)
class MuFit:
    mu: float
    residual: float
    H_predicted: float | None
    H: float


def mu_fit_at(chart: Chart, u, psi: float | None = None, C: float | None = None) -> MuFit:
    """Closed-form projection of Ric onto the Weingarten form.

    ``H_predicted = -eps_N psi / (mu + eps_N C)`` is returned when psi and C are
    given and the denominator is away from zero, otherwise None.
    """
    geo = LocalGeometry(chart, u)
    R = geo.on_bilinear(geo.ricci)
    Ab = geo.on_bilinear(geo.Ab.value)
    norm2 = float(np.sum(Ab * Ab))
    if norm2 <= MU_A_TOL**2:
        raise MuUndefinedError("Weingarten operator vanishes, mu is undefined")
    mu = float(np.sum(R * Ab)) / norm2
    residual = float(np.max(np.abs(R - mu * Ab)))
    H_pred = None
    if psi is not None and C is not None:
        denom = mu + geo.eps_N * C
        if abs(denom) > MU_DENOM_TOL:
            H_pred = -geo.eps_N * psi / denom
    return MuFit(mu, residual, H_pred, geo.H)


def psi_density(psis: Iterable[float], threshold: float = 1e-8) -> float:
    """Fraction of samples with |psi| above ``threshold``."""
    arr = np.abs(np.asarray(list(psis), dtype=float))
    return float(np.mean(arr > threshold)) if arr.size else 0.0


# ---------------------------------------------------------------------------
# classification


class TashiroCase(enum.Enum):
    PRODUCT_LINE = "ProductLine"
    EUCLIDEAN = "Euclidean"
    PSEUDO_HYPERBOLIC_ZERO = "PseudoHyperbolicZero"
    PSEUDO_HYPERBOLIC_NEGATIVE = "PseudoHyperbolicNegative"
    PSEUDO_HYPERBOLIC_UNRESOLVED = "PseudoHyperbolicUnresolved"
    HYPERBOLIC = "Hyperbolic"
    SPHERICAL = "Spherical"
    INDETERMINATE = "Indeterminate"


class StationaryEvidence(enum.Enum):
    NONE = "none"
    ISOLATED = "isolated"
    UNKNOWN = "unknown"


def tashiro_classify(k: float, b: float, evidence, profile: str | None = None,
                     tol: float = ZERO_TOL) -> TashiroCase:
    """Decision procedure over (sign k, b, stationary evidence).

    ``profile`` ("zero" or "negative") separates the two pseudo-hyperbolic
    types, which the local data cannot distinguish.
    """
    if not (np.isfinite(k) and np.isfinite(b)):
        raise ValueError("k and b must be finite")
    evidence = StationaryEvidence(evidence)
    if abs(k) <= tol:
        return TashiroCase.PRODUCT_LINE if abs(b) <= tol else TashiroCase.EUCLIDEAN
    if k > 0:
        return TashiroCase.SPHERICAL
    if evidence is StationaryEvidence.ISOLATED:
        return TashiroCase.HYPERBOLIC
    if evidence is StationaryEvidence.UNKNOWN:
        return TashiroCase.INDETERMINATE
    if profile is None:
        return TashiroCase.PSEUDO_HYPERBOLIC_UNRESOLVED
    profiles = {"zero": TashiroCase.PSEUDO_HYPERBOLIC_ZERO, "negative": TashiroCase.PSEUDO_HYPERBOLIC_NEGATIVE}
    if profile not in profiles:
        raise ValueError(f"unknown profile {profile!r}; expected 'zero' or 'negative'")
    return profiles[profile]


# ---------------------------------------------------------------------------
# closed-form solutions of rho'' + k rho = b

ODE_CASES = ("IA", "IB", "IIA0", "IIAminus", "IIB", "III")


def ode_k(case: str, c: float = 0.0) -> float:
    if case not in ODE_CASES:
        raise ValueError(f"unknown case {case!r}")
    if case in ("IA", "IB"):
        return 0.0
    return c * c if case == "III" else -c * c


def concircular_solution(case: str, a: float, b: float, c: float, s):
    """Closed-form solution rho(s) for the given case of the table."""
    if case not in ODE_CASES:
        raise ValueError(f"unknown case {case!r}")
    s = np.asarray(s, dtype=float)
    if case == "IA":
        if b != 0:
            raise ValueError("case IA requires b = 0")
        return a * s
    if case == "IB":
        if b == 0:
            raise ValueError("case IB requires b != 0")
        return 0.5 * b * s**2 + a
    if not c > 0:
        raise ValueError(f"case {case} requires c > 0")
    shift = b / c**2
    if case == "IIA0":
        return a * np.exp(c * s) - shift
    if case == "IIAminus":
        return a * np.sinh(c * s) - shift
    if case == "IIB":
        return a * np.cosh(c * s) - shift
    return a * np.cos(c * s) + shift


def ode_residual(case: str, a: float, b: float, c: float, s, h: float = 1e-2) -> np.ndarray:
    """|rho'' + k rho - b| with rho'' from Richardson-extrapolated central differences."""
    s = np.asarray(s, dtype=float)
    rho = lambda t: concircular_solution(case, a, b, c, t)

    def d2(step):
        return (rho(s + step) - 2.0 * rho(s) + rho(s - step)) / step**2

    second = (4.0 * d2(h / 2) - d2(h)) / 3.0
    return np.abs(second + ode_k(case, c) * rho(s) - b)


# ---------------------------------------------------------------------------
# stationary points


@dataclass(frozen=True)
class ScanResult:
    evidence: StationaryEvidence
    critical_points: tuple
    min_gradient: float


def _grad_info(chart: Chart, C_field, u):
    Cj = C_field.jet(u)
    E = chart.map.jet(u, order=1).d1  # (m, n)
    g = E.T @ (chart.ambient.signature.array[:, None] * E)
    return Cj, g


def _newton(chart: Chart, C_field, u0, lo, hi, iters: int = 30):
    u = np.array(u0, dtype=float)
    for _ in range(iters):
        try:
            Cj, g = _grad_info(chart, C_field, u)
        except GeometryError:
            return None
        d1, d2 = Cj.d1, Cj.d2
        norm = float(np.sqrt(abs(d1 @ np.linalg.solve(g, d1))))
        if norm < 1e-12:
            return u, norm, d2, g
        try:
            step = np.linalg.solve(d2, -d1)
        except np.linalg.LinAlgError:
            return None
        u = u + step
        if np.any(u <= lo) or np.any(u >= hi):
            return None
    Cj, g = _grad_info(chart, C_field, u)
    norm = float(np.sqrt(abs(Cj.d1 @ np.linalg.solve(g, Cj.d1))))
    return u, norm, Cj.d2, g


def stationary_scan(chart: Chart, C_field, grid: int | Sequence = 15) -> ScanResult:
    """Look for critical points of C over the chart's sample box.

    ||grad C|| is evaluated at grid-cell centres; discrete local minima seed a
    Newton search on dC = 0.  A converged, nondegenerate critical point counts
    as isolated.  Otherwise the smallest grid gradient norm decides between
    none (> 1e-3) and unknown.
    """
    lo = np.asarray(chart.sample_lo, dtype=float)
    hi = np.asarray(chart.sample_hi, dtype=float)
    n = chart.n
    counts = [int(grid)] * n if np.isscalar(grid) else [int(c) for c in grid]
    axes = [lo[i] + (np.arange(counts[i]) + 0.5) * (hi[i] - lo[i]) / counts[i] for i in range(n)]
    norms = np.full(counts, np.inf)
    for idx in itertools.product(*[range(c) for c in counts]):
        u = np.array([axes[i][idx[i]] for i in range(n)])
        try:
            Cj, g = _grad_info(chart, C_field, u)
        except GeometryError:
            continue
        norms[idx] = float(np.sqrt(abs(Cj.d1 @ np.linalg.solve(g, Cj.d1))))
    min_grad = float(np.min(norms))

    seeds = []
    for idx in itertools.product(*[range(c) for c in counts]):
        v = norms[idx]
        if not np.isfinite(v):
            continue
        neighbours = []
        for axis in range(n):
            for d in (-1, 1):
                j = list(idx)
                j[axis] += d
                if 0 <= j[axis] < counts[axis]:
                    neighbours.append(norms[tuple(j)])
        if all(v <= w for w in neighbours):
            seeds.append(np.array([axes[i][idx[i]] for i in range(n)]))

    dom_lo = np.asarray(chart.map.lo, dtype=float)
    dom_hi = np.asarray(chart.map.hi, dtype=float)
    found, degenerate = [], False
    for seed in seeds:
        res = _newton(chart, C_field, seed, dom_lo, dom_hi)
        if res is None:
            continue
        u, norm, d2, g = res
        if norm >= CRITICAL_TOL or np.any(u < lo) or np.any(u > hi):
            continue
        if np.min(np.abs(np.linalg.eigvals(np.linalg.solve(g, d2)))) < 1e-8:
            degenerate = True
            continue
        if not any(np.linalg.norm(u - p) < 1e-6 for p in found):
            found.append(u)

    if found:
        evidence = StationaryEvidence.ISOLATED
    elif degenerate or min_grad <= INCONCLUSIVE_TOL:
        evidence = StationaryEvidence.UNKNOWN
    else:
        evidence = StationaryEvidence.NONE
    return ScanResult(evidence, tuple(tuple(float(v) for v in p) for p in found), min_grad)
