"""Signature-aware linear algebra on flat semi-Euclidean containers.

Two ambient models are supported: the flat container itself and a quadric
``{x : <x, x> = eps_q}`` inside it, which is a space form of curvature
``c = eps_q``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import DimensionError, OffQuadricError

QUADRIC_TOL = 1e-9
CONFORMAL_MATRIX_TOL = 1e-12


@dataclass(frozen=True)
class Signature:
    """Metric signs of a flat container, all ``-1`` entries first."""

    eps: tuple

    def __post_init__(self):
        eps = tuple(int(e) for e in self.eps)
        if not eps:
            raise DimensionError("empty signature")
        if any(e not in (-1, 1) for e in eps):
            raise ValueError(f"signature entries must be +-1, got {eps}")
        nu = eps.count(-1)
        if eps[:nu] != (-1,) * nu:
            raise ValueError("negative signature entries must come first")
        object.__setattr__(self, "eps", eps)

    @classmethod
    def euclidean(cls, dim: int) -> "Signature":
        return cls((1,) * dim)

    @classmethod
    def lorentz(cls, dim: int) -> "Signature":
        return cls((-1,) + (1,) * (dim - 1))

    @property
    def dim(self) -> int:
        return len(self.eps)

    @property
    def index(self) -> int:
        """Number of timelike directions (often written nu)."""
        return self.eps.count(-1)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.eps, dtype=float)

    def __repr__(self):
        return "Signature(" + "".join("-" if e < 0 else "+" for e in self.eps) + ")"


def inner(sig: Signature, u, v):
    """Semi-Euclidean inner product sum_i eps_i u_i v_i.

    Accepts plain vectors or vector jets; the result is a float or a scalar jet.
    """
    if jets.is_jet(u) or jets.is_jet(v):
        for w in (u, v):
            shape = w.shape if jets.is_jet(w) else np.shape(w)
            if shape != (sig.dim,):
                raise DimensionError(f"vector of shape {shape} does not match {sig}")
        weighted = u * sig.array if jets.is_jet(u) else np.asarray(u, dtype=float) * sig.array
        return jets.einsum("a,a->", weighted, v)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (sig.dim,) or v.shape != (sig.dim,):
        raise DimensionError(f"vectors {u.shape}, {v.shape} do not match {sig}")
    return float(np.sum(sig.array * u * v))


class AmbientKind(enum.Enum):
    FLAT = "flat"
    QUADRIC = "quadric"


@dataclass(frozen=True)
class AmbientSpace:
    """A flat container, or the quadric <x,x> = quadric_sign inside it."""

    kind: AmbientKind
    signature: Signature
    quadric_sign: int | None = None

    def __post_init__(self):
        if self.kind is AmbientKind.FLAT and self.quadric_sign is not None:
            raise ValueError("flat ambient has no quadric sign")
        if self.kind is AmbientKind.QUADRIC and self.quadric_sign not in (-1, 1):
            raise ValueError("quadric sign must be +1 or -1")

    @classmethod
    def flat(cls, signature: Signature) -> "AmbientSpace":
        return cls(AmbientKind.FLAT, signature)

    @classmethod
    def quadric(cls, signature: Signature, quadric_sign: int) -> "AmbientSpace":
        return cls(AmbientKind.QUADRIC, signature, int(quadric_sign))

    @property
    def is_quadric(self) -> bool:
        return self.kind is AmbientKind.QUADRIC

    @property
    def curvature(self) -> float:
        return 0.0 if self.kind is AmbientKind.FLAT else float(self.quadric_sign)

    @property
    def container_dim(self) -> int:
        return self.signature.dim

    @property
    def dim(self) -> int:
        return self.container_dim - (1 if self.is_quadric else 0)

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.container_dim,):
            raise DimensionError(f"point of shape {x.shape} in container of dim {self.container_dim}")
        if self.is_quadric:
            dev = inner(self.signature, x, x) - self.quadric_sign
            if abs(dev) > QUADRIC_TOL:
                raise OffQuadricError(f"<x,x> deviates from {self.quadric_sign} by {dev:.3e}")
        return x

    def describe(self) -> str:
        if self.is_quadric:
            return f"quadric <x,x>={self.quadric_sign:+d} in {self.signature!r}"
        return f"flat {self.signature!r}"


@dataclass(frozen=True)
class MatrixVerdict:
    valid: bool
    violations: tuple = field(default_factory=tuple)


def validate_conformal_matrix(sig: Signature, B) -> MatrixVerdict:
    """Check eps_j b_jk + eps_k b_kj = 0 (j != k) and b_ii = 0.

    Violations are reported as 0-based ``(j, k)`` pairs with ``j <= k``.
    """
    B = np.asarray(B, dtype=float)
    m = sig.dim
    if B.shape != (m, m):
        raise DimensionError(f"matrix of shape {B.shape} does not match {sig}")
    eps = sig.array
    bad = []
    for j in range(m):
        if abs(B[j, j]) > CONFORMAL_MATRIX_TOL:
            bad.append((j, j))
        for k in range(j + 1, m):
            if abs(eps[j] * B[j, k] + eps[k] * B[k, j]) > CONFORMAL_MATRIX_TOL:
                bad.append((j, k))
    return MatrixVerdict(not bad, tuple(bad))


@dataclass(frozen=True)
class ConformalMatrix:
    """A validated infinitesimal isometry matrix of the container."""

    B: np.ndarray
    sig: Signature

    def __post_init__(self):
        B = np.array(self.B, dtype=float)
        verdict = validate_conformal_matrix(self.sig, B)
        if not verdict.valid:
            raise ValueError(f"matrix violates the Killing constraint at {list(verdict.violations)}")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)

    @classmethod
    def zero(cls, sig: Signature) -> "ConformalMatrix":
        return cls(np.zeros((sig.dim, sig.dim)), sig)

    @classmethod
    def from_generator(cls, sig: Signature, S) -> "ConformalMatrix":
        """``eta @ S`` for an antisymmetric ``S`` always satisfies the constraint."""
        S = np.asarray(S, dtype=float)
        return cls(np.diag(sig.array) @ (S - S.T) / 2.0, sig)


def project_tangent(sig: Signature, x, w, tol: float = QUADRIC_TOL) -> np.ndarray:
    """Orthogonal projection of ``w`` onto the tangent space of the quadric through ``x``."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    xx = inner(sig, x, x)
    eps_q = 1.0 if xx > 0 else -1.0
    if abs(xx - eps_q) > tol:
        raise OffQuadricError(f"<x,x> = {xx!r} is not +-1 within {tol}")
    return w - eps_q * inner(sig, w, x) * x


def tangent_basis(sig: Signature, x) -> np.ndarray:
    """Rows span the quadric tangent space at ``x`` (Euclidean-orthonormal)."""
    x = np.asarray(x, dtype=float)
    _, _, vt = np.linalg.svd((sig.array * x)[None, :])
    return vt[1:]
