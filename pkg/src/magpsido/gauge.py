"""Magnetic fields, the radial-integration gauge, and segment phase factors.

The phase attached to an ordered pair (x, y) is exp(-i I(x,y)) with
I(x,y) = int_0^1 <y - x, A(x + s(y-x))> ds, evaluated by fixed-order
Gauss-Legendre quadrature, or in closed form (midpoint rule) when the
potential is linear.
"""
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from . import _kernels
from .errors import ConfigError
from .potentials import parse_params
from .quadrature import gauss_legendre_01


@dataclass
class MagneticField:
    """Antisymmetric two-form with components B_jk, stored for j < k only."""

    dimension: int
    components: dict  # (j, k) with j < k -> callable x(...,d) -> (...)
    smoothness: str = "general"  # constant | polynomial | general
    constant_matrix: Optional[np.ndarray] = None
    field_id: str = ""

    def component(self, j, k, x):
        """B_jk(x) with antisymmetry B_jk = -B_kj built in."""
        if j == k:
            return np.zeros(np.asarray(x).shape[:-1])
        if j < k:
            fun = self.components.get((j, k))
            sign = 1.0
        else:
            fun = self.components.get((k, j))
            sign = -1.0
        if fun is None:
            return np.zeros(np.asarray(x).shape[:-1])
        return sign * np.asarray(fun(x), dtype=float)

    @property
    def is_zero(self):
        return not self.components

    def closedness_residual(self, radius=4.0, density=8, h=1e-4):
        """Finite-difference residual of dB = 0; identically 0 for d <= 2."""
        d = self.dimension
        if d <= 2:
            return 0.0
        axes = [np.linspace(-radius, radius, density)] * d
        X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        worst = 0.0
        for i in range(d):
            for j in range(i + 1, d):
                for k in range(j + 1, d):
                    def dpart(a, b, axis):
                        e = np.zeros(d)
                        e[axis] = h
                        return (self.component(a, b, X + e)
                                - self.component(a, b, X - e)) / (2 * h)

                    res = dpart(j, k, i) - dpart(i, k, j) + dpart(i, j, k)
                    worst = max(worst, float(np.abs(res).max()))
        return worst


def zero_field(dimension):
    return MagneticField(dimension, {}, smoothness="constant",
                         constant_matrix=np.zeros((dimension, dimension)),
                         field_id="zero")


def constant_field_2d(b):
    mat = np.array([[0.0, b], [-b, 0.0]])
    comps = {} if b == 0.0 else {(0, 1): lambda x: np.full(np.asarray(x).shape[:-1], b)}
    return MagneticField(2, comps, smoothness="constant",
                         constant_matrix=mat, field_id=f"constant2d:b={b}")


def cos_field_2d(amp=1.0):
    """B_12(x) = amp * cos(x_1); smooth, bounded with all derivatives."""
    comps = {(0, 1): lambda x: amp * np.cos(np.asarray(x)[..., 0])}
    return MagneticField(2, comps, smoothness="general", field_id=f"cos2d:amp={amp}")


def field_from_id(fid, dimension):
    name, _, rest = fid.partition(":")
    name = name.strip()
    params = parse_params(rest)
    if name == "zero":
        return zero_field(dimension)
    if name == "constant2d":
        if dimension != 2:
            raise ConfigError("constant2d needs d=2")
        return constant_field_2d(params.get("b", 1.0))
    if name == "cos2d":
        if dimension != 2:
            raise ConfigError("cos2d needs d=2")
        return cos_field_2d(params.get("amp", 1.0))
    raise ConfigError(f"unknown field {fid!r}")


@dataclass
class GaugeData:
    """A vector potential for a field, plus the segment-phase evaluator."""

    field: MagneticField
    potential: Callable  # X (...,d) -> (...,d)
    phase_quadrature_order: int = 16
    linear: Optional[Tuple[np.ndarray, np.ndarray]] = None  # A(x) = W x + c
    gauge_id: str = "transversal"

    @property
    def dimension(self):
        return self.field.dimension


def transversal_gauge(B, quadrature_order=16):
    """Radial-integration potential A_j(x) = -sum_k x_k int_0^1 s B_jk(s x) ds."""
    d = B.dimension
    if B.smoothness == "constant" and B.constant_matrix is not None:
        W = -0.5 * B.constant_matrix

        def A(X):
            X = np.asarray(X, dtype=float)
            return X @ W.T

        return GaugeData(B, A, quadrature_order, linear=(W, np.zeros(d)))

    s_nodes, s_weights = gauss_legendre_01(quadrature_order)

    def A(X):
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape)
        for j in range(d):
            acc = np.zeros(X.shape[:-1])
            for k in range(d):
                if j == k:
                    continue
                radial = np.zeros(X.shape[:-1])
                for s, w in zip(s_nodes, s_weights):
                    radial = radial + w * s * B.component(j, k, s * X)
                acc += X[..., k] * radial
            out[..., j] = -acc
        return out

    return GaugeData(B, A, quadrature_order)


def line_integral_A(g, x, y):
    """int_0^1 <y-x, A(x + s(y-x))> ds along the straight segment."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = y - x
    if g.linear is not None:
        W, c = g.linear
        mid = 0.5 * (x + y)
        return (diff * (mid @ W.T + c)).sum(axis=-1)
    s_nodes, s_weights = gauss_legendre_01(g.phase_quadrature_order)
    acc = np.zeros(np.broadcast(x[..., 0], y[..., 0]).shape)
    for s, w in zip(s_nodes, s_weights):
        acc = acc + w * (diff * g.potential(x + s * diff)).sum(axis=-1)
    return acc


def magnetic_phase(g, x, y):
    """Unit-modulus pair phase exp(-i int_[x,y] A)."""
    if g.field.is_zero and g.linear is not None and not g.linear[0].any() \
            and not g.linear[1].any():
        return np.ones(np.broadcast(np.asarray(x)[..., 0], np.asarray(y)[..., 0]).shape,
                       dtype=complex)
    return np.exp(-1j * line_integral_A(g, x, y))


def gauge_transform(g, chi, grad_chi=None, h=1e-6):
    """Shift the potential by a gradient: A -> A + grad(chi), same field."""
    d = g.dimension
    if grad_chi is None:
        def grad_chi(X):
            X = np.asarray(X, dtype=float)
            out = np.zeros(X.shape)
            for axis in range(d):
                e = np.zeros(d)
                e[axis] = h
                out[..., axis] = (chi(X + e) - chi(X - e)) / (2 * h)
            return out

    base_A = g.potential

    def A(X):
        return base_A(X) + grad_chi(X)

    return GaugeData(g.field, A, g.phase_quadrature_order, linear=None,
                     gauge_id=g.gauge_id + "+grad")


def phase_table(g, nodes, chunk=65536):
    """Pair phase matrix omega[j,k] over flat node lists (hot path)."""
    nodes = np.asarray(nodes, dtype=float)
    N = nodes.shape[0]
    if g.field.is_zero and g.linear is not None and not g.linear[0].any() \
            and not g.linear[1].any():
        return np.ones((N, N), dtype=complex)
    if g.linear is not None:
        W, c = g.linear
        return np.exp(-1j * _kernels.linear_pair_exponent(nodes, W, c))
    s_nodes, s_weights = gauss_legendre_01(g.phase_quadrature_order)
    out = np.empty((N, N), dtype=complex)
    rows_per_chunk = max(1, chunk // N)
    for start in range(0, N, rows_per_chunk):
        stop = min(N, start + rows_per_chunk)
        x = nodes[start:stop, None, :]
        y = nodes[None, :, :]
        diff = y - x
        acc = np.zeros((stop - start, N))
        for s, w in zip(s_nodes, s_weights):
            acc += w * (diff * g.potential(x + s * diff)).sum(axis=-1)
        out[start:stop] = np.exp(-1j * acc)
    return out


def potential_residual(g, radius=4.0, density=32, h=1e-4):
    """Max finite-difference residual of (dA)_jk = B_jk on a sample lattice."""
    d = g.dimension
    axes = [np.linspace(-radius, radius, density)] * d
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    worst = 0.0
    for j in range(d):
        for k in range(j + 1, d):
            ej = np.zeros(d); ej[j] = h
            ek = np.zeros(d); ek[k] = h
            dAk_dj = (g.potential(X + ej)[..., k] - g.potential(X - ej)[..., k]) / (2 * h)
            dAj_dk = (g.potential(X + ek)[..., j] - g.potential(X - ek)[..., j]) / (2 * h)
            res = dAk_dj - dAj_dk - g.field.component(j, k, X)
            worst = max(worst, float(np.abs(res).max()))
    return worst
