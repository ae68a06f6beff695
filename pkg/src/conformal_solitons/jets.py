"""Forward-mode differentiation with truncated multivariate Taylor jets.

A :class:`Jet` carries an array-valued quantity together with its partial
derivatives up to order three with respect to ``nvars`` parameters.  The
derivative of order ``k`` has shape ``value.shape + (nvars,) * k`` and is kept
in exactly symmetric canonical form.  Jets may be truncated below order three;
arithmetic between jets of different order truncates to the lower one, which
is what happens after :meth:`Jet.diff`.

Scalar functions (:func:`exp`, :func:`sin`, ...) dispatch on their argument,
so a map written with them evaluates on plain floats and on jets alike.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, JetEvaluationError

MAX_ORDER = 3
_PARAM_LETTERS = "pqr"

# central finite-difference steps used by fd_check, per derivative order
FD_STEPS = {1: 1e-5, 2: 1e-4, 3: 5e-3}


@functools.lru_cache(maxsize=None)
def _canonical_index(n: int, k: int):
    grid = np.indices((n,) * k).reshape(k, -1)
    srt = np.sort(grid, axis=0)
    return tuple(srt[i].reshape((n,) * k) for i in range(k))


def _canonical(t: np.ndarray, k: int) -> np.ndarray:
    """Copy each entry with sorted trailing indices to all its permutations."""
    if k < 2:
        return t
    n = t.shape[-1]
    return t[(Ellipsis,) + _canonical_index(n, k)]


def _swap_last2(t):
    return np.swapaxes(t, -1, -2)


def _cyc_first(t):
    # t[..., i, j, k] symmetric in (j, k): returns t_ijk + t_jik + t_kij
    return t + np.swapaxes(t, -3, -2) + np.moveaxis(t, -3, -1)


def _cyc_last(t):
    # t[..., i, j, k] symmetric in (i, j): returns t_ijk + t_ikj + t_jki
    return t + np.swapaxes(t, -2, -1) + np.moveaxis(t, -1, -3)


def _outer(x, p, y, q):
    """Broadcast product of an order-p and an order-q derivative tensor."""
    xs = x.reshape(x.shape + (1,) * q)
    if p:
        ys = y.reshape(y.shape[: y.ndim - q] + (1,) * p + y.shape[y.ndim - q :])
    else:
        ys = y
    return xs * ys


def _leibniz(a: "Jet", b: "Jet", op) -> "Jet":
    order = min(a.order, b.order)
    A = (a.value,) + a.derivs
    B = (b.value,) + b.derivs
    value = op(A[0], 0, B[0], 0)
    derivs = []
    if order >= 1:
        derivs.append(op(A[0], 0, B[1], 1) + op(A[1], 1, B[0], 0))
    if order >= 2:
        t = op(A[1], 1, B[1], 1)
        d2 = op(A[0], 0, B[2], 2) + op(A[2], 2, B[0], 0) + t + _swap_last2(t)
        derivs.append(_canonical(d2, 2))
    if order >= 3:
        d3 = (
            op(A[0], 0, B[3], 3)
            + op(A[3], 3, B[0], 0)
            + _cyc_first(op(A[1], 1, B[2], 2))
            + _cyc_last(op(A[2], 2, B[1], 1))
        )
        derivs.append(_canonical(d3, 3))
    return Jet(value, derivs, a.nvars)


class Jet:
    """Array-valued truncated Taylor jet of order <= 3."""

    __slots__ = ("value", "derivs", "nvars")
    # make ndarray operators defer to the reflected Jet methods
    __array_ufunc__ = None

    def __init__(self, value, derivs, nvars: int):
        self.value = np.asarray(value, dtype=float)
        self.derivs = tuple(np.asarray(d, dtype=float) for d in derivs)
        self.nvars = int(nvars)
        if len(self.derivs) > MAX_ORDER:
            raise ValueError("jets are truncated at order 3")

    # construction ---------------------------------------------------------
    @classmethod
    def constant(cls, value, nvars: int, order: int = MAX_ORDER) -> "Jet":
        value = np.asarray(value, dtype=float)
        derivs = [np.zeros(value.shape + (nvars,) * k) for k in range(1, order + 1)]
        return cls(value, derivs, nvars)

    @classmethod
    def variables(cls, u, order: int = MAX_ORDER) -> list["Jet"]:
        """Independent coordinate jets seeded at the point ``u``."""
        u = np.asarray(u, dtype=float).ravel()
        n = u.size
        out = []
        for i in range(n):
            d = [np.eye(n)[i]] + [np.zeros((n,) * k) for k in range(2, order + 1)]
            out.append(cls(u[i], d[:order], n))
        return out

    # inspection -----------------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.derivs)

    @property
    def shape(self):
        return self.value.shape

    @property
    def d1(self):
        return self.derivs[0] if self.order >= 1 else None

    @property
    def d2(self):
        return self.derivs[1] if self.order >= 2 else None

    @property
    def d3(self):
        return self.derivs[2] if self.order >= 3 else None

    def __repr__(self):
        return f"Jet(value={self.value!r}, order={self.order}, nvars={self.nvars})"

    def truncate(self, order: int) -> "Jet":
        return Jet(self.value, self.derivs[:order], self.nvars)

    # structural operations on the value axes --------------------------------
    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx) or len(idx) > self.value.ndim:
            raise IndexError("jet indexing applies to value axes only")
        return Jet(self.value[idx], [d[idx] for d in self.derivs], self.nvars)

    def transpose(self, axes) -> "Jet":
        nd = self.value.ndim
        axes = tuple(axes)
        derivs = [
            np.transpose(d, axes + tuple(range(nd, nd + k)))
            for k, d in enumerate(self.derivs, start=1)
        ]
        return Jet(np.transpose(self.value, axes), derivs, self.nvars)

    @property
    def T(self) -> "Jet":
        return self.transpose(tuple(reversed(range(self.value.ndim))))

    def sum(self, axis: int) -> "Jet":
        axis = axis % self.value.ndim
        return Jet(self.value.sum(axis), [d.sum(axis) for d in self.derivs], self.nvars)

    def diff(self) -> "Jet":
        """Jet of the gradient; the new value axis is appended last."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet(self.derivs[0], self.derivs[1:], self.nvars)

    def partial(self, i: int) -> "Jet":
        g = self.diff()
        return g[(slice(None),) * self.value.ndim + (i,)]

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise DimensionError("jets over different parameter counts")
            return other
        return Jet.constant(other, self.nvars, self.order)

    def __add__(self, other):
        o = self._coerce(other)
        k = min(self.order, o.order)
        derivs = [self.derivs[i] + o.derivs[i] for i in range(k)]
        return Jet(self.value + o.value, derivs, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, [-d for d in self.derivs], self.nvars)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return Jet(self.value * other, [d * other for d in self.derivs], self.nvars)
        return _leibniz(self, self._coerce(other), _outer)

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return _leibniz(self._coerce(other), self, _outer)

    def __truediv__(self, other):
        if np.isscalar(other):
            return Jet(self.value / other, [d / other for d in self.derivs], self.nvars)
        o = self._coerce(other)
        out = self * reciprocal(o)
        # value slot must match plain division bit for bit
        out.value = self.value / o.value
        return out

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(p * log(self))
        return power(self, p)


def is_jet(x) -> bool:
    return isinstance(x, Jet)


def einsum(spec: str, a, b) -> Jet:
    """Bilinear contraction of two jets, ``spec`` naming only value axes."""
    if not isinstance(a, Jet) and not isinstance(b, Jet):
        return np.einsum(spec, a, b)
    if not isinstance(a, Jet):
        a = b._coerce(a)
    if not isinstance(b, Jet):
        b = a._coerce(b)
    ins, out = spec.replace(" ", "").split("->")
    sa, sb = ins.split(",")
    if any(ch in _PARAM_LETTERS for ch in spec):
        raise ValueError(f"letters {_PARAM_LETTERS!r} are reserved")

    def op(x, p, y, q):
        pa, pb = _PARAM_LETTERS[:p], _PARAM_LETTERS[p : p + q]
        return np.einsum(f"{sa}{pa},{sb}{pb}->{out}{pa}{pb}", x, y)

    return _leibniz(a, b, op)


def constant_linear(spec: str, M, j: Jet) -> Jet:
    """Apply a constant tensor ``M`` to jet ``j`` (``spec`` like ``'ab,b->a'``)."""
    ins, out = spec.replace(" ", "").split("->")
    sm, sj = ins.split(",")
    derivs = []
    for k, d in enumerate(j.derivs, start=1):
        pl = _PARAM_LETTERS[:k]
        derivs.append(np.einsum(f"{sm},{sj}{pl}->{out}{pl}", M, d))
    return Jet(np.einsum(spec, M, j.value), derivs, j.nvars)


def stack(items: Sequence, nvars: int | None = None) -> Jet:
    """Stack scalar or array jets (or constants) along a new leading axis."""
    jets = [x for x in items if isinstance(x, Jet)]
    if not jets:
        raise ValueError("stack needs at least one jet")
    nv = jets[0].nvars if nvars is None else nvars
    order = min(j.order for j in jets)
    full = [x if isinstance(x, Jet) else Jet.constant(x, nv, order) for x in items]
    value = np.stack([x.value for x in full])
    derivs = [np.stack([x.derivs[k] for x in full]) for k in range(order)]
    return Jet(value, derivs, nv)


def _apply_unary(u: Jet, f0, f1, f2, f3, name: str) -> Jet:
    for arr in (f0, f1, f2, f3)[: u.order + 1]:
        if not np.all(np.isfinite(arr)):
            raise JetEvaluationError(f"non-finite result in {name} at value {u.value!r}")
    derivs = []
    if u.order >= 1:
        u1 = u.derivs[0]
        derivs.append(f1[..., None] * u1)
    if u.order >= 2:
        u2 = u.derivs[1]
        uu = _outer(u1, 1, u1, 1)
        derivs.append(_canonical(f2[..., None, None] * uu + f1[..., None, None] * u2, 2))
    if u.order >= 3:
        u3 = u.derivs[2]
        uuu = _outer(uu, 2, u1, 1)
        mix = _cyc_last(_outer(u2, 2, u1, 1))
        e3 = (Ellipsis, None, None, None)
        derivs.append(_canonical(f3[e3] * uuu + f2[e3] * mix + f1[e3] * u3, 3))
    return Jet(f0, derivs, u.nvars)


def _unary(name: str, plain: Callable, derivatives: Callable):
    def fn(x):
        if isinstance(x, Jet):
            with np.errstate(all="ignore"):
                v = x.value
                f0 = plain(v)
                f1, f2, f3 = derivatives(v, f0)
            return _apply_unary(x, f0, np.asarray(f1, float), np.asarray(f2, float),
                                np.asarray(f3, float), name)
        with np.errstate(all="ignore"):
            out = plain(x)
        if not np.all(np.isfinite(out)):
            raise JetEvaluationError(f"non-finite result in {name} at {x!r}")
        return out

    fn.__name__ = name
    fn.__qualname__ = name
    return fn


exp = _unary("exp", np.exp, lambda v, f: (f, f, f))
log = _unary("log", np.log, lambda v, f: (1 / v, -1 / v**2, 2 / v**3))
sin = _unary("sin", np.sin, lambda v, f: (np.cos(v), -f, -np.cos(v)))
cos = _unary("cos", np.cos, lambda v, f: (-np.sin(v), -f, np.sin(v)))
sinh = _unary("sinh", np.sinh, lambda v, f: (np.cosh(v), f, np.cosh(v)))
cosh = _unary("cosh", np.cosh, lambda v, f: (np.sinh(v), f, np.sinh(v)))
sqrt = _unary(
    "sqrt",
    np.sqrt,
    lambda v, f: (0.5 / f, -0.25 / (f * v), 0.375 / (f * v * v)),
)
reciprocal = _unary("reciprocal", lambda v: 1.0 / v, lambda v, f: (-f * f, 2 * f**3, -6 * f**4))


def power(x, p: float):
    """``x ** p`` for a real exponent ``p`` (integer exponents allow negative bases)."""
    p = float(p)

    def derivs(v, f):
        return (p * np.power(v, p - 1), p * (p - 1) * np.power(v, p - 2),
                p * (p - 1) * (p - 2) * np.power(v, p - 3))

    return _unary("power", lambda v: np.power(v, p), derivs)(x)


def abs_(x):
    if isinstance(x, Jet):
        return x * np.sign(x.value)
    return np.abs(x)


def inv(m: Jet) -> Jet:
    """Inverse of a square-matrix jet via two Newton steps (exact to order 3)."""
    if m.value.ndim != 2 or m.value.shape[0] != m.value.shape[1]:
        raise DimensionError("inv expects a square matrix jet")
    k = m.value.shape[0]
    m0inv = np.linalg.inv(m.value)
    x = Jet.constant(m0inv, m.nvars, m.order)
    two = 2.0 * np.eye(k)
    for _ in range(2):
        x = einsum("ij,jk->ik", x, two - einsum("ij,jk->ik", m, x))
    x.value = m0inv
    return x


# ---------------------------------------------------------------------------
# smooth maps


@dataclass(frozen=True)
class SmoothMap:
    """A map from an open parameter box into R^m, evaluable on floats and jets.

    ``func`` receives a list of ``n_in`` coordinates (floats or scalar jets)
    and returns a scalar or a sequence of scalars built from the functions of
    this module and ordinary arithmetic.
    """

    func: Callable
    n_in: int
    lo: tuple
    hi: tuple
    name: str = ""

    @classmethod
    def on_box(cls, func, lo, hi, name=""):
        lo = tuple(float(v) for v in np.atleast_1d(lo))
        hi = tuple(float(v) for v in np.atleast_1d(hi))
        return cls(func, len(lo), lo, hi, name)

    @classmethod
    def unbounded(cls, func, n_in, name=""):
        return cls(func, n_in, (-np.inf,) * n_in, (np.inf,) * n_in, name)

    def check_domain(self, u, margin: float = 0.0) -> np.ndarray:
        u = np.asarray(u, dtype=float).ravel()
        if u.size != self.n_in:
            raise DimensionError(f"{self.name or 'map'} expects {self.n_in} parameters, got {u.size}")
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        if not (np.all(u - margin > lo) and np.all(u + margin < hi)):
            raise DomainError(f"point {u.tolist()} outside domain of {self.name or 'map'} (margin {margin})")
        return u

    def __call__(self, u) -> np.ndarray:
        u = self.check_domain(u)
        out = self.func([float(v) for v in u])
        out = np.asarray(out if np.ndim(out) else float(out), dtype=float)
        if not np.all(np.isfinite(out)):
            raise JetEvaluationError(f"non-finite value of {self.name or 'map'} at {u.tolist()}")
        return out

    def jet(self, u, order: int = MAX_ORDER) -> Jet:
        """Jet of the map at ``u``; scalar maps give a 0-d jet, others a vector jet."""
        u = self.check_domain(u)
        vars_ = Jet.variables(u, order)
        out = self.func(vars_)
        if isinstance(out, Jet):
            return out
        if np.isscalar(out):
            return Jet.constant(out, len(vars_), order)
        return stack(list(out), nvars=len(vars_))


def jet_eval(f: SmoothMap, u) -> list[Jet]:
    """Per-output jets of ``f`` at ``u`` (value, d1, d2, d3)."""
    j = f.jet(u)
    if j.value.ndim == 0:
        return [j]
    return [j[i] for i in range(j.value.shape[0])]


def _stencil(order: int):
    if order == 1:
        return np.array([-1, 0, 1]), np.array([-0.5, 0.0, 0.5])
    if order == 2:
        return np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])
    if order == 3:
        return np.array([-2, -1, 0, 1, 2]), np.array([-0.5, 1.0, 0.0, -1.0, 0.5])
    raise ValueError("order must be 1, 2 or 3")


def fd_derivative(f: Callable, u, index: tuple, h: float) -> np.ndarray:
    """Central finite difference of a plain-valued ``f`` for one multi-index."""
    u = np.asarray(u, dtype=float)
    counts = {}
    for i in index:
        counts[i] = counts.get(i, 0) + 1
    axes = list(counts.items())
    stencils = [_stencil(c) for _, c in axes]
    total = 0.0
    for combo in itertools.product(*[range(len(s[0])) for s in stencils]):
        w = 1.0
        du = np.zeros_like(u)
        for (axis, _), (offs, wts), c in zip(axes, stencils, combo):
            w *= wts[c]
            du[axis] += offs[c] * h
        if w != 0.0:
            total = total + w * np.asarray(f(u + du), dtype=float)
    return total / h ** len(index)


def fd_check(f, u, order: int, step: float | None = None) -> float:
    """Max |jet derivative - central finite difference| over all outputs/indices.

    ``f`` is a :class:`SmoothMap` or anything with ``__call__`` and ``jet``.
    """
    if order not in FD_STEPS:
        raise ValueError("order must be 1, 2 or 3")
    h = FD_STEPS[order] if step is None else step
    u = np.asarray(u, dtype=float).ravel()
    if hasattr(f, "check_domain"):
        f.check_domain(u, margin=2 * h)
    jet = f.jet(u)
    if jet.order < order:
        raise ValueError(f"jet of order {jet.order} cannot be checked at order {order}")
    d = jet.derivs[order - 1]
    n = u.size
    worst = 0.0
    for index in itertools.combinations_with_replacement(range(n), order):
        approx = fd_derivative(f, u, index, h)
        exact = d[(Ellipsis,) + index]
        worst = max(worst, float(np.max(np.abs(exact - approx))))
    return worst
