"""Square-root kinetic semigroup: explicit convolution kernel, modified
Bessel evaluators, smeared-potential (Kato-type) estimates, form sums with
singular potentials, the magnetic/non-magnetic semigroup comparison, and the
pointwise eigenfunction bound chain.

Kernel convention: kernel_t generates exp(-t H0) for H0 = sqrt(1 - Laplace),
so its integral equals e^{-t} and its Fourier transform is e^{-t <eta>}.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, NotApplicableError
from .gauge import transversal_gauge, zero_field
from .potentials import potential_from_id
from .quadrature import gauss_legendre_0t
from .quantize import OperatorMatrix, op_weyl
from .spectral import matrix_exp_neg
from .symbols import bracket, relativistic_symbol

EULER_GAMMA = 0.5772156649015328606


# ---------------------------------------------------------------------------
# modified Bessel K for integer and half-integer orders
# ---------------------------------------------------------------------------

def _check_order(nu):
    two_nu = 2.0 * nu
    if nu < 0 or abs(two_nu - round(two_nu)) > 1e-12:
        raise ConfigError("order must satisfy 2 nu in N")
    return round(two_nu)


def _k01_series(z, terms=40):
    """Ascending series for K_0 and K_1; accurate for z <= 2."""
    z = np.asarray(z, dtype=float)
    q = z * z / 4.0
    log_half_z = np.log(z / 2.0)
    i0 = np.ones_like(z)
    k0_sum = np.zeros_like(z)
    i1 = np.ones_like(z)
    # k = 0 term of the digamma sum: psi(1) + psi(2) = 1 - 2 gamma
    k1_sum = np.full_like(z, 1.0 - 2.0 * EULER_GAMMA)
    term_i0 = np.ones_like(z)
    term_i1 = np.ones_like(z)
    harmonic = 0.0
    for k in range(1, terms):
        term_i0 = term_i0 * q / k**2
        harmonic += 1.0 / k
        i0 = i0 + term_i0
        k0_sum = k0_sum + term_i0 * harmonic
        term_i1 = term_i1 * q / (k * (k + 1))
        i1 = i1 + term_i1
        k1_sum = k1_sum + term_i1 * (2.0 * harmonic + 1.0 / (k + 1) - 2.0 * EULER_GAMMA)
    i1 = 0.5 * z * i1
    k0 = -(log_half_z + EULER_GAMMA) * i0 + k0_sum
    k1 = 1.0 / z + log_half_z * i1 - 0.25 * z * k1_sum
    return k0, k1


_COSH_GRID = None


def _cosh_grid():
    global _COSH_GRID
    if _COSH_GRID is None:
        T = math.acosh(745.0 / 2.0)
        t = np.linspace(0.0, T, 640)
        _COSH_GRID = (t, np.cosh(t), t[1] - t[0])
    return _COSH_GRID


def _k_integral(nu, z, chunk=8192):
    """K_nu(z) = int_0^inf e^{-z cosh t} cosh(nu t) dt by trapezoid; z > 2."""
    z = np.asarray(z, dtype=float)
    t, cosh_t, dt = _cosh_grid()
    cosh_nut = np.cosh(nu * t)
    out = np.empty_like(z)
    flat = z.reshape(-1)
    res = out.reshape(-1)
    for start in range(0, flat.size, chunk):
        stop = min(flat.size, start + chunk)
        integrand = np.exp(-flat[start:stop, None] * cosh_t[None, :]) * cosh_nut[None, :]
        res[start:stop] = np.trapezoid(integrand, dx=dt, axis=1)
    return out


def _k01(z):
    z = np.asarray(z, dtype=float)
    small = z <= 2.0
    k0 = np.empty_like(z)
    k1 = np.empty_like(z)
    if small.any():
        k0s, k1s = _k01_series(z[small])
        k0[small] = k0s
        k1[small] = k1s
    if (~small).any():
        k0[~small] = _k_integral(0.0, z[~small])
        k1[~small] = _k_integral(1.0, z[~small])
    return k0, k1


def bessel_k(nu, z):
    """K_nu(z) for z > 0 and integer or half-integer nu >= 0.

    Half-integer orders start from the closed form
    K_{1/2}(z) = sqrt(pi/(2z)) e^{-z}; integer orders from the ascending
    series (z <= 2) or the cosh-integral representation (z > 2). Higher
    orders follow the stable upward recurrence
    K_{nu+1} = K_{nu-1} + (2 nu / z) K_nu.
    """
    two_nu = _check_order(nu)
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if (z <= 0).any():
        raise ConfigError("argument must be positive")
    if two_nu % 2 == 1:
        k_half = np.sqrt(np.pi / (2.0 * z)) * np.exp(-z)
        prev, cur = k_half, k_half  # K_{-1/2} = K_{1/2}
        order = 0.5
        while order < nu - 1e-12:
            prev, cur = cur, prev + (2.0 * order / z) * cur
            order += 1.0
        out = cur
    else:
        k0, k1 = _k01(z)
        if nu == 0:
            out = k0
        else:
            prev, cur = k0, k1
            order = 1.0
            while order < nu - 1e-12:
                prev, cur = cur, prev + (2.0 * order / z) * cur
                order += 1.0
            out = cur
    return float(out[0]) if scalar else out


def bessel_k_series(nu, z):
    """Ascending-series oracle; integer nu in {0,1}, trustworthy for z <= 2."""
    if nu not in (0, 1):
        raise ConfigError("series oracle implemented for nu in {0, 1}")
    k0, k1 = _k01_series(np.asarray(z, dtype=float))
    return k0 if nu == 0 else k1


def bessel_k_asymptotic(nu, z, terms=12):
    """Large-argument expansion sqrt(pi/2z) e^{-z} (1 + sum a_k / z^k).

    Divergent series; useful as an oracle only for z well above ~10.
    """
    z = np.asarray(z, dtype=float)
    acc = np.ones_like(z)
    term = np.ones_like(z)
    mu = 4.0 * nu**2
    for k in range(1, terms + 1):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        acc = acc + term
    return np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) * acc


# ---------------------------------------------------------------------------
# semigroup kernel
# ---------------------------------------------------------------------------

def kernel_pt(t, x, d):
    """Convolution kernel of exp(-t sqrt(1 - Laplace)) in d dimensions:

        p_t(x) = (2 pi)^{-(d+1)/2} 2 t (|x|^2 + t^2)^{-(d+1)/4}
                 K_{(d+1)/2}(sqrt(|x|^2 + t^2)).

    Positions carry a trailing axis of length d. Integral over R^d is e^{-t}.
    """
    if t <= 0:
        raise NotApplicableError("t must be positive")
    x = np.asarray(x, dtype=float)
    r2 = (x * x).sum(axis=-1) + t * t
    nu = (d + 1) / 2.0
    root = np.sqrt(r2)
    return ((2.0 * np.pi) ** (-(d + 1) / 2.0) * 2.0 * t
            * r2 ** (-(d + 1) / 4.0) * bessel_k(nu, root))


def displacement_lattice(grid):
    """Wrapped displacements z = r h in DFT index order, trailing axis d."""
    n, d = grid.n, grid.dimension
    z_ax = grid.h * (np.fft.fftfreq(n) * n)
    if d == 1:
        return z_ax[:, None]
    Z1, Z2 = np.meshgrid(z_ax, z_ax, indexing="ij")
    return np.stack([Z1, Z2], axis=-1)


def semigroup_checks(t, s, grid):
    """Three kernel diagnostics on the grid:

    conv:  max relative error of the lattice convolution p_t * p_s against
           p_{t+s} on |z| <= L/2;
    fourier: max error of the lattice transform of p_t against e^{-t <eta>}
           on the low-frequency quarter;
    mass:  |h^d sum p_t - e^{-t}|.
    """
    if t <= 0 or s <= 0:
        raise NotApplicableError("t and s must be positive")
    d = grid.dimension
    Z = displacement_lattice(grid)
    pt = kernel_pt(t, Z, d)
    ps = kernel_pt(s, Z, d)
    pts = kernel_pt(t + s, Z, d)
    hd = grid.h**d
    conv = hd * np.fft.ifftn(np.fft.fftn(pt) * np.fft.fftn(ps)).real
    radius = np.sqrt((Z * Z).sum(axis=-1))
    window = radius <= grid.L / 2.0
    conv_res = float(np.abs(conv[window] - pts[window]).max() / pts[window].max())
    ft = hd * np.fft.fftn(pt).real
    eta = grid.eta_nodes.reshape(Z.shape)
    symbol = np.exp(-t * bracket(eta))
    low = bracket(eta) <= 1.0 + grid.nyquist / 4.0
    fourier_res = float(np.abs(ft[low] - symbol[low]).max())
    mass_res = float(abs(hd * pt.sum() - math.exp(-t)))
    return {"conv": conv_res, "fourier": fourier_res, "mass": mass_res}


# ---------------------------------------------------------------------------
# Kato-type smeared estimate
# ---------------------------------------------------------------------------

def _as_node_values(W, grid):
    vals = W(grid.nodes) if callable(W) else np.asarray(W, dtype=float).reshape(-1)
    if vals.shape[0] != grid.size:
        raise ConfigError("potential values do not match the grid")
    if not np.all(np.isfinite(vals)):
        raise ConfigError("non-finite potential value at a node; "
                          "declare a singularity and pass cell averages")
    return vals


def kato_estimate(W, t, grid, quad_order=16):
    """sup_x int_0^t (exp(-s H0) W)(x) ds on the periodic grid.

    The semigroup acts spectrally (multiplier e^{-s <eta>} on the dual
    lattice), which keeps the flat-potential identity
    int_0^t e^{-s} ds = 1 - e^{-t} exact uniformly in s.
    """
    if t <= 0:
        raise NotApplicableError("t must be positive")
    vals = _as_node_values(W, grid)
    if (vals < 0).any():
        raise ConfigError("Kato estimate expects W >= 0")
    shape = (grid.n,) * grid.dimension
    what = np.fft.fftn(vals.reshape(shape))
    br = bracket(grid.eta_nodes).reshape(shape)
    nodes, weights = gauss_legendre_0t(quad_order, t)
    acc = np.zeros(shape)
    for s, w in zip(nodes, weights):
        acc += w * np.fft.ifftn(np.exp(-s * br) * what).real
    return float(acc.max())


def kato_scan(W, t0, grid, halvings=6, quad_order=16):
    """Rows (t, sup_value) for t = t0 / 2^k; the limit t -> 0 diagnoses the
    smeared-potential class."""
    rows = []
    t = float(t0)
    for _ in range(halvings + 1):
        rows.append((t, kato_estimate(W, t, grid, quad_order)))
        t /= 2.0
    return rows


# ---------------------------------------------------------------------------
# form sums and semigroup comparisons
# ---------------------------------------------------------------------------

@dataclass
class PotentialSpec:
    """V = V_plus - V_minus with both parts nonnegative."""

    V_plus: Optional[Callable] = None
    V_minus: Optional[Callable] = None
    kato_flag: bool = False
    potential_id: str = ""

    def plus_values(self, grid):
        return (np.zeros(grid.size) if self.V_plus is None
                else np.maximum(_as_node_values(self.V_plus, grid), 0.0))

    def minus_values(self, grid):
        return (np.zeros(grid.size) if self.V_minus is None
                else np.maximum(_as_node_values(self.V_minus, grid), 0.0))


def potential_spec_from_id(pid, kato_flag=True):
    """Split a catalog potential into nonnegative attractive/repulsive parts."""
    v, meta = potential_from_id(pid)

    def vplus(x):
        return np.maximum(v(x), 0.0)

    def vminus(x):
        return np.maximum(-v(x), 0.0)

    return PotentialSpec(vplus, vminus, kato_flag=kato_flag, potential_id=meta["id"])


def build_form_sum(g, V, grid, bound_warn=0.9):
    """H = op_weyl(<eta>, gauge) + diag(V_plus - V_minus), symmetrized.

    When the attractive part is sizable its form bound against the zero-field
    operator is estimated; a warning note is attached above `bound_warn`.
    """
    base = op_weyl(relativistic_symbol(grid.dimension), g, grid)
    vp = V.plus_values(grid)
    vm = V.minus_values(grid)
    H = base.entries + np.diag(vp - vm)
    notes = ()
    if vm.any():
        beta = _form_bound_estimate(vm, grid)
        if beta > bound_warn:
            notes = (f"V_minus form bound estimate {beta:.3f} exceeds {bound_warn}",)
    op = OperatorMatrix(H, grid, symbol_id=f"form_sum({V.potential_id})",
                        notes=notes)
    return hermitize_keep_notes(op)


def hermitize_keep_notes(op):
    from .quantize import hermitize

    out = hermitize(op)
    return OperatorMatrix(out.entries, out.grid, out.symbol_id,
                          out.hermiticity_defect, out.symmetrized, op.notes)


def _form_bound_estimate(vm, grid):
    """Largest eigenvalue of H0^{-1/2} V_minus H0^{-1/2} at zero field."""
    g0 = transversal_gauge(zero_field(grid.dimension))
    H0 = op_weyl(relativistic_symbol(grid.dimension), g0, grid)
    lam, Vecs = np.linalg.eigh(H0.entries)
    lam = np.maximum(lam, 1e-12)
    A = (np.sqrt(vm)[:, None] * Vecs) * (lam**-0.5)[None, :]
    return float(np.linalg.svd(A, compute_uv=False)[0] ** 2)


def diamagnetic_check(g, V, t, trials, grid, seed=0):
    """Pointwise comparison |exp(-tH) u| <= exp(-tH(0, -V_minus)) |u|.

    Returns the worst signed excess over random complex trials plus one
    nonnegative trial; `violation` clips at zero.
    """
    if t <= 0:
        raise NotApplicableError("t must be positive")
    H = build_form_sum(g, V, grid)
    cmp_spec = PotentialSpec(None, V.V_minus, V.kato_flag, V.potential_id)
    g0 = transversal_gauge(zero_field(grid.dimension))
    Hcmp = build_form_sum(g0, cmp_spec, grid)
    E = matrix_exp_neg(H, t)
    E0 = matrix_exp_neg(Hcmp, t).real
    rng = np.random.default_rng(seed)
    signed = -np.inf
    for k in range(trials + 1):
        if k == 0:
            u = np.abs(rng.standard_normal(grid.size))  # nonnegative trial
        else:
            u = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        excess = np.abs(E @ u) - E0 @ np.abs(u)
        signed = max(signed, float(excess.max()))
    return {"signed_max": signed, "violation": max(0.0, signed)}


def pointwise_bound_check(g, V, lam, u, eps, p, grid, window_frac=0.5):
    """Grid verification of the pointwise decay chain for an eigenpair.

    (i) the comparison kernel exp(-H(0,-V_minus))/h^d is entrywise above
        -1e-10 and below C_p e^{-<x-y>/p} with C_p fitted on the band
        |x - y| <= window_frac * L;
    (ii) sup_x f_eps(x) |u(x)| <= C_p e^lam (int e^{-2|z|(1/p - eps)} dz)^{1/2}
        ||f_eps u||, all integrals by grid sums.

    Requires eps < 1/p.
    """
    if eps >= 1.0 / p:
        raise ConfigError("chain needs eps < 1/p")
    d = grid.dimension
    hd = grid.h**d
    uvec = np.asarray(u.values if hasattr(u, "values") else u, dtype=complex)
    uvec = uvec / (np.linalg.norm(uvec) * grid.h ** (d / 2.0))  # discrete L2 = 1
    cmp_spec = PotentialSpec(None, V.V_minus, V.kato_flag, V.potential_id)
    g0 = transversal_gauge(zero_field(d))
    Hcmp = build_form_sum(g0, cmp_spec, grid)
    kern = matrix_exp_neg(Hcmp, 1.0).real / hd
    kernel_min = float(kern.min())
    nodes = grid.nodes
    diff = nodes[:, None, :] - nodes[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    band = dist <= window_frac * grid.L
    envelope = np.exp(-np.sqrt(1.0 + dist**2) / p)
    C_hat = float((kern[band] / envelope[band]).max())
    fw = np.exp(bracket(eps * nodes) - 1.0)
    lhs = float((fw * np.abs(uvec)).max())
    decay_mass = hd * float(np.sum(np.exp(-2.0 * np.sqrt((nodes**2).sum(-1))
                                          * (1.0 / p - eps))))
    weighted_norm = float(np.sqrt(hd * np.sum((fw * np.abs(uvec)) ** 2)))
    rhs = C_hat * math.exp(lam) * math.sqrt(decay_mass) * weighted_norm
    return {
        "C_hat": C_hat,
        "kernel_min": kernel_min,
        "kernel_margin": 1e-10 + kernel_min,   # positive iff entries > -1e-10
        "chain_lhs": lhs,
        "chain_rhs": rhs,
        "chain_margin": rhs - lhs,
    }
