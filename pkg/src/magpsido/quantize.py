"""Dense discretization of phase-space operators on a periodic grid.

The grid couples n even nodes per axis on [-L, L) with the exact DFT dual
frequencies (pi/L) k, k in [-n/2, n/2). A symbol a becomes the matrix

    H[j,k] = n^{-d} sum_eta e^{i <x_j - x_k, eta>} omega(x_j, x_k)
             a((x_j + x_k)/2, eta),

assembled from one inverse DFT per midpoint. Displacements wrap with period
2L (the frequency sum is an exact DFT); the pair phase omega is evaluated on
the true, unwrapped segment.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import _kernels
from .errors import AssemblyError, BudgetError, ConfigError, NotApplicableError, UnsupportedOrderError
from .gauge import phase_table
from .symbols import p_s_symbol

AMPLITUDE_BUDGET = 10**10


@dataclass(frozen=True)
class Grid:
    """Periodic tensor grid: nodes -L + j h, h = 2L/n, and its DFT dual."""

    dimension: int
    half_length: float
    points_per_axis: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigError("dimension must be 1 or 2")
        if self.points_per_axis % 2 != 0 or self.points_per_axis < 4:
            raise ConfigError("points_per_axis must be even and >= 4")
        if self.half_length <= 0:
            raise ConfigError("half_length must be positive")

    @property
    def n(self):
        return self.points_per_axis

    @property
    def L(self):
        return self.half_length

    @property
    def h(self):
        return 2.0 * self.half_length / self.points_per_axis

    @property
    def size(self):
        return self.points_per_axis**self.dimension

    @property
    def axis(self):
        return -self.L + self.h * np.arange(self.n)

    @property
    def eta_axis(self):
        """Dual frequencies in DFT order; includes -n/2, excludes +n/2."""
        return (np.pi / self.L) * (np.fft.fftfreq(self.n) * self.n)

    @property
    def nodes(self):
        ax = self.axis
        if self.dimension == 1:
            return ax[:, None]
        X1, X2 = np.meshgrid(ax, ax, indexing="ij")
        return np.stack([X1.ravel(), X2.ravel()], axis=-1)

    @property
    def eta_nodes(self):
        ea = self.eta_axis
        if self.dimension == 1:
            return ea[:, None]
        E1, E2 = np.meshgrid(ea, ea, indexing="ij")
        return np.stack([E1.ravel(), E2.ravel()], axis=-1)

    @property
    def midpoint_axis(self):
        return -self.L + (self.h / 2.0) * np.arange(2 * self.n - 1)

    @property
    def midpoints(self):
        ma = self.midpoint_axis
        if self.dimension == 1:
            return ma[:, None]
        M1, M2 = np.meshgrid(ma, ma, indexing="ij")
        return np.stack([M1.ravel(), M2.ravel()], axis=-1)

    @property
    def nyquist(self):
        return np.pi * self.n / (2.0 * self.L)


@dataclass
class GridFunction:
    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)
        if self.values.size != self.grid.size:
            raise ConfigError("value vector length does not match grid")

    def l2_norm(self):
        return float(self.grid.h ** (self.grid.dimension / 2.0)
                     * np.linalg.norm(self.values))


@dataclass
class OperatorMatrix:
    """Dense operator with its grid and Hermiticity bookkeeping."""

    entries: np.ndarray
    grid: Grid
    symbol_id: str = ""
    hermiticity_defect: float = 0.0
    symmetrized: bool = False
    notes: Tuple[str, ...] = ()

    @property
    def matrix(self):
        return self.entries

    def apply(self, u):
        return GridFunction(self.entries @ u.values, self.grid)


def _eval_midpoint_table(sym, grid, chunk_rows=None):
    """Symbol values a(m, eta) on midpoint x dual lattices, shaped for ifft."""
    n, d = grid.n, grid.dimension
    mids = grid.midpoints
    etas = grid.eta_nodes
    n_mid = mids.shape[0]
    vals = np.empty((n_mid, grid.size), dtype=complex)
    if chunk_rows is None:
        chunk_rows = max(1, int(2e7) // grid.size)
    for start in range(0, n_mid, chunk_rows):
        stop = min(n_mid, start + chunk_rows)
        vals[start:stop] = sym.eval(mids[start:stop, None, :], etas[None, :, :])
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        raise AssemblyError(
            f"non-finite symbol value at midpoint {mids[bad[0]]}, eta {etas[bad[1]]}")
    return vals.reshape((2 * n - 1,) * d + (n,) * d)


def _midpoint_transform(sym, grid):
    """T[m, r] = n^{-d} sum_q a(m, eta_q) e^{i 2 pi r.q / n} for every midpoint."""
    d = grid.dimension
    vals = _eval_midpoint_table(sym, grid)
    axes = tuple(range(d, 2 * d))
    return np.fft.ifftn(vals, axes=axes)


def kernel_table(sym, grid):
    """Midpoint kernel K(m, z) = (2L)^{-d} sum_eta e^{i<z,eta>} a(m, eta).

    Indexed by the midpoint lattice (spacing h/2) and the wrapped displacement
    lattice z = r h, r in [0, n) per axis.
    """
    if sym.dimension != grid.dimension:
        raise ConfigError("symbol and grid dimensions differ")
    return _midpoint_transform(sym, grid) / grid.h**grid.dimension


def hermitize(op):
    """(H + H*)/2 with the pre-symmetrization defect recorded; idempotent."""
    H = op.entries
    scale = np.linalg.norm(H)
    defect = float(np.linalg.norm(H - H.conj().T) / scale) if scale > 0 else 0.0
    if op.symmetrized:
        return op
    return OperatorMatrix(0.5 * (H + H.conj().T), op.grid, op.symbol_id,
                          hermiticity_defect=defect, symmetrized=True,
                          notes=op.notes)


def op_weyl(sym, g, grid):
    """Quantize a symbol against a gauge; symmetrizes real-flagged symbols."""
    if sym.dimension != grid.dimension or g.dimension != grid.dimension:
        raise ConfigError("dimension mismatch between symbol, gauge, and grid")
    T = _midpoint_transform(sym, grid)
    omega = phase_table(g, grid.nodes)
    H = _kernels.weyl_gather(T, omega, grid.n, grid.dimension)
    op = OperatorMatrix(H, grid, symbol_id=sym.symbol_id)
    if sym.real:
        op = hermitize(op)
    return op


def op_amplitude(amp, g, grid, allow_large=False, symbol_id="amplitude"):
    """Quantize a three-argument amplitude amp(x, y, eta) by direct frequency
    summation per matrix entry (O(n^{3d}); guarded by a size budget)."""
    n, d = grid.n, grid.dimension
    if not allow_large and grid.size**3 > AMPLITUDE_BUDGET:
        raise BudgetError(
            f"n^(3d) = {grid.size ** 3:.3g} exceeds budget; pass allow_large=True")
    nodes = grid.nodes
    etas = grid.eta_nodes
    omega = phase_table(g, nodes)
    H = np.empty((grid.size, grid.size), dtype=complex)
    for jflat in range(grid.size):
        j_multi = (jflat,) if d == 1 else (jflat // n, jflat % n)
        M = amp(nodes[jflat], nodes[:, None, :], etas[None, :, :])
        row = _kernels.amplitude_row(M, j_multi, n, d)
        H[jflat] = omega[jflat] * row
    if not np.all(np.isfinite(H)):
        raise AssemblyError("amplitude produced non-finite operator entries")
    return OperatorMatrix(H, grid, symbol_id=symbol_id)


def reduce_amplitude(amp, t, grid, xs=None, etas=None, allow_large=False):
    """Collapse an amplitude to a two-argument symbol table along the slice
    x = t x + (1-t) y:

        a_t(x, eta) = n^{-d} sum_{z, zeta} e^{i<z,zeta>}
                      amp(x + (1-t) z, x - t z, eta + zeta)

    with z on the node lattice and zeta on the dual lattice. Valid for
    rapidly decaying amplitudes; returns the table on (xs, etas).
    """
    if not 0.0 <= t <= 1.0:
        raise ConfigError("t must lie in [0, 1]")
    d = grid.dimension
    Z = grid.nodes
    ZE = grid.eta_nodes
    if xs is None:
        xs = grid.nodes
    if etas is None:
        etas = grid.eta_nodes
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    etas = np.atleast_2d(np.asarray(etas, dtype=float))
    work = xs.shape[0] * etas.shape[0] * grid.size**2
    if not allow_large and work > AMPLITUDE_BUDGET:
        raise BudgetError(f"reduction workload {work:.3g} exceeds budget")
    phase = np.exp(1j * (Z[:, None, :] * ZE[None, :, :]).sum(-1))
    out = np.empty((xs.shape[0], etas.shape[0]), dtype=complex)
    for i, x in enumerate(xs):
        xp = x + (1.0 - t) * Z
        xm = x - t * Z
        for q, e in enumerate(etas):
            vals = amp(xp[:, None, :], xm[:, None, :], e + ZE[None, :, :])
            out[i, q] = (phase * vals).sum() / grid.size
    return out


def op_ps(s, g, grid):
    """Quantization of the weight symbol <eta>^s; Hermitian by symmetrization."""
    return op_weyl(p_s_symbol(s, grid.dimension), g, grid)


def sobolev_norm(u, s, g, ps_operator=None):
    """sqrt(||u||^2 + ||P_s u||^2) in the discrete L^2 norm (s >= 0)."""
    if s < 0:
        raise NotApplicableError("dual-order norms are out of scope")
    if ps_operator is None:
        ps_operator = op_ps(s, g, u.grid)
    base = u.l2_norm()
    psu = ps_operator.apply(u).l2_norm()
    return float(np.sqrt(base**2 + psu**2))


def mag_derivative(alpha, u, g):
    """(D - A)^alpha u with D = -i d/dx by spectral differentiation and A as
    pointwise multiplication; rightmost factor applies first."""
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    grid = u.grid
    d = grid.dimension
    if len(alpha) != d:
        raise ConfigError("multi-index length must match dimension")
    if sum(alpha) > 4:
        raise UnsupportedOrderError("covariant derivative order capped at 4")
    shape = (grid.n,) * d
    vals = u.values.reshape(shape)
    Avals = g.potential(grid.nodes).reshape(shape + (d,))
    eta = grid.eta_axis
    for axis in range(d - 1, -1, -1):
        mult = eta if d == 1 else np.expand_dims(eta, axis=1 - axis)
        for _ in range(alpha[axis]):
            Du = np.fft.ifft(mult * np.fft.fft(vals, axis=axis), axis=axis)
            vals = Du - Avals[..., axis] * vals
    return GridFunction(vals.ravel(), grid)


def fourier_mode(grid, k_multi):
    """Unit plane wave e^{i <eta_k, x>} for an integer frequency multi-index."""
    k_multi = tuple(int(k) for k in np.atleast_1d(k_multi))
    eta = (np.pi / grid.L) * np.asarray(k_multi, dtype=float)
    vals = np.exp(1j * (grid.nodes * eta).sum(axis=-1))
    return GridFunction(vals, grid)
