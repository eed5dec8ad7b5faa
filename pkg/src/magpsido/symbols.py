"""Frequency-space symbols: evaluation, derivatives, analytic continuation,
and the quantitative class checks (seminorms, ellipticity, factorial
derivative growth).

Evaluation convention: every symbol callback receives position and frequency
arguments as numpy arrays whose trailing axis has length `dimension`, and the
arguments broadcast against each other; the result drops the trailing axis.
"""
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ConfigError, NotApplicableError, StripViolationError, UnsupportedOrderError
from .potentials import parse_params, potential_from_id

DERIVATIVE_BUDGET = 6


def bracket(eta):
    """<eta> = sqrt(1 + |eta|^2), trailing axis summed."""
    eta = np.asarray(eta)
    return np.sqrt(1.0 + (eta * eta).sum(axis=-1))


def bracket_c(zeta):
    """Analytic <zeta> = (1 + sum zeta_j^2)^(1/2), principal branch."""
    zeta = np.asarray(zeta)
    return np.sqrt(1.0 + (zeta * zeta).sum(axis=-1) + 0j)


def multi_indices(d, max_total):
    """All multi-indices of dimension d with 1 <= |alpha| <= max_total."""
    out = []
    for total in range(1, max_total + 1):
        for combo in itertools.product(range(total + 1), repeat=d):
            if sum(combo) == total:
                out.append(combo)
    return out


@dataclass
class HormanderSymbol:
    """An order-m symbol a(x, eta) with optional analytic frequency extension.

    `analytic_ext(x, zeta)` must agree with `eval` for real zeta and be
    analytic per frequency coordinate on the strip |Im zeta_j| < strip_delta.
    `eta_grad`, when given, is the closed-form frequency gradient, valid at
    complex arguments inside the strip.
    """

    order: float
    eval: Callable
    dimension: int
    analytic_ext: Optional[Callable] = None
    strip_delta: Optional[float] = None
    ellipticity: Optional[Tuple[float, float]] = None
    eta_grad: Optional[Callable] = None
    real: bool = False
    symbol_id: str = ""
    h_fd: float = 1e-4
    eta_deriv: Callable = field(init=False, repr=False)

    def __post_init__(self):
        self.eta_deriv = lambda alpha, x, eta: eta_derivative(self, alpha, x, eta)

    def __call__(self, x, eta):
        return self.eval(x, eta)


def _fd_step(sym, eta_axis_vals):
    return sym.h_fd * np.maximum(1.0, np.abs(eta_axis_vals))


def _fd_eta_derivative(sym, alpha, x, eta, h_fd=None):
    """Nested central differences along frequency axes."""
    eta = np.asarray(eta, dtype=float)

    def rec(alpha_left, pts):
        for axis in range(sym.dimension):
            if alpha_left[axis] > 0:
                step = (h_fd if h_fd is not None
                        else sym.h_fd * max(1.0, float(np.abs(pts[..., axis]).max())))
                e = np.zeros(sym.dimension)
                e[axis] = step
                lowered = tuple(a - (1 if i == axis else 0)
                                for i, a in enumerate(alpha_left))
                return (rec(lowered, pts + e) - rec(lowered, pts - e)) / (2 * step)
        return np.asarray(sym.eval(x, pts), dtype=complex)

    return rec(tuple(alpha), eta)


def _contour_eta_derivative(sym, alpha, x, eta, nodes=32):
    """Cauchy-integral derivative on a polydisc of radius strip_delta/2."""
    rho = 0.5 * sym.strip_delta
    d = sym.dimension
    theta = 2.0 * np.pi * (np.arange(nodes) + 0.5) / nodes
    ring = rho * np.exp(1j * theta)
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if d == 1:
        zeta = eta[..., None, :] + ring[:, None]
        vals = sym.analytic_ext(x[..., None, :], zeta)
        k = alpha[0]
        coeff = math.factorial(k) / (rho**k * nodes)
        return coeff * (vals * np.exp(-1j * k * theta)).sum(axis=-1)
    if d == 2:
        k1, k2 = alpha
        shift = np.zeros((nodes, nodes, 2), dtype=complex)
        shift[..., 0] = ring[:, None]
        shift[..., 1] = ring[None, :]
        zeta = eta[..., None, None, :] + shift
        vals = sym.analytic_ext(x[..., None, None, :], zeta)
        phase = np.exp(-1j * k1 * theta)[:, None] * np.exp(-1j * k2 * theta)[None, :]
        coeff = (math.factorial(k1) * math.factorial(k2)) / (rho ** (k1 + k2) * nodes**2)
        return coeff * (vals * phase).sum(axis=(-2, -1))
    raise UnsupportedOrderError("contour derivatives implemented for d <= 2")


def eta_derivative(sym, alpha, x, eta, h_fd=None, force_fd=False):
    """d^alpha/d eta^alpha of the symbol at (x, eta).

    Closed form via `eta_grad` for first order, Cauchy contour quadrature when
    an analytic extension exists, nested central differences otherwise.
    """
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    if len(alpha) != sym.dimension:
        raise UnsupportedOrderError("multi-index length must match dimension")
    total = sum(alpha)
    if total > DERIVATIVE_BUDGET:
        raise UnsupportedOrderError(
            f"derivative order {total} exceeds budget {DERIVATIVE_BUDGET}")
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if total == 0:
        return np.asarray(sym.eval(x, eta), dtype=complex)
    if not force_fd:
        if total == 1 and sym.eta_grad is not None:
            axis = alpha.index(1)
            return np.asarray(sym.eta_grad(x, eta)[..., axis], dtype=complex)
        if sym.analytic_ext is not None and sym.strip_delta is not None:
            return _contour_eta_derivative(sym, alpha, x, eta)
    return _fd_eta_derivative(sym, alpha, x, eta, h_fd=h_fd)


def _x_derivative(sym, alpha, x, eta, h=1e-5):
    """Central finite differences in position, nested per axis."""

    def rec(alpha_left, pts):
        for axis in range(sym.dimension):
            if alpha_left[axis] > 0:
                e = np.zeros(sym.dimension)
                e[axis] = h
                lowered = tuple(a - (1 if i == axis else 0)
                                for i, a in enumerate(alpha_left))
                return (rec(lowered, pts + e) - rec(lowered, pts - e)) / (2 * h)
        return np.asarray(sym.eval(pts, eta), dtype=complex)

    return rec(tuple(alpha), np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SampleBox:
    """Tensor-product sampling region |x_i| <= x_radius, |eta_i| <= eta_radius."""

    x_radius: float
    eta_radius: float


def _lattice(radius, density):
    return np.linspace(-radius, radius, density)


def _sample_points(sym, box, density):
    d = sym.dimension
    xs = _lattice(box.x_radius, density)
    es = _lattice(box.eta_radius, density)
    X = np.stack(np.meshgrid(*([xs] * d), indexing="ij"), axis=-1).reshape(-1, d)
    E = np.stack(np.meshgrid(*([es] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return X[:, None, :], E[None, :, :]


def seminorm_estimate(sym, alpha, beta, box, grid_density=64):
    """Sampled seminorm sup <eta>^(-m+|beta|) |d^alpha_x d^beta_eta a|."""
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    beta = tuple(int(b) for b in np.atleast_1d(beta))
    if sum(alpha) + sum(beta) > DERIVATIVE_BUDGET:
        raise UnsupportedOrderError(
            f"|alpha|+|beta| exceeds budget {DERIVATIVE_BUDGET}")
    if box.x_radius < 0 or box.eta_radius < 0 or grid_density < 2:
        raise ConfigError("sample box must be nonempty")
    X, E = _sample_points(sym, box, grid_density)
    if sum(alpha) == 0:
        vals = eta_derivative(sym, beta, X, E) if sum(beta) else sym.eval(X, E)
    else:
        if sum(beta) > 0:
            # mixed derivative: difference the eta-derivative in x
            def mixed(pts):
                return eta_derivative(sym, beta, pts, E)

            h = 1e-5
            vals = _nested_x_fd(mixed, alpha, X, sym.dimension, h)
        else:
            vals = _x_derivative(sym, alpha, X, E)
    weight = bracket(E) ** (-sym.order + sum(beta))
    return float(np.abs(vals * weight).max())


def _nested_x_fd(fun, alpha, pts, d, h):
    def rec(alpha_left, p):
        for axis in range(d):
            if alpha_left[axis] > 0:
                e = np.zeros(d)
                e[axis] = h
                lowered = tuple(a - (1 if i == axis else 0)
                                for i, a in enumerate(alpha_left))
                return (rec(lowered, p + e) - rec(lowered, p - e)) / (2 * h)
        return np.asarray(fun(p), dtype=complex)

    return rec(tuple(alpha), pts)


@dataclass(frozen=True)
class EllipticityResult:
    is_elliptic: bool
    C_hat: float
    R_hat: float


def _annulus_constants(sym, box_radius, density, radii):
    d = sym.dimension
    xs = _lattice(min(box_radius, 8.0), min(density, 33) if d == 2 else density)
    es = _lattice(box_radius, density)
    X = np.stack(np.meshgrid(*([xs] * d), indexing="ij"), axis=-1).reshape(-1, d)
    E = np.stack(np.meshgrid(*([es] * d), indexing="ij"), axis=-1).reshape(-1, d)
    ratio = np.abs(sym.eval(X[:, None, :], E[None, :, :])) / bracket(E[None, :, :]) ** sym.order
    ratio = ratio.min(axis=0)  # worst x per eta sample
    norms = np.sqrt((E * E).sum(axis=-1))
    out = []
    for r in radii:
        mask = norms >= r
        out.append(float(ratio[mask].min()) if mask.any() else np.inf)
    return out


def ellipticity_check(sym, box_radius, grid_density=64, floor=1e-8):
    """Scan for |a(x,eta)| >= C <eta>^m on dyadic annuli |eta| in [R, box_radius].

    R_hat is the smallest dyadic radius >= 1 whose annulus constant reaches
    half of the outermost one; C_hat is the constant there. The constant must
    also be stable under sampling refinement: symbols with frequency zeros
    produce constants that keep shrinking as the lattice resolves the zeros,
    and are rejected.
    """
    if sym.order <= 0:
        raise NotApplicableError("ellipticity scan needs positive order")
    radii = []
    r = 1.0
    while r <= box_radius / 2:
        radii.append(r)
        r *= 2
    if not radii:
        radii = [box_radius / 2]
    coarse = _annulus_constants(sym, box_radius, grid_density, radii)
    fine = _annulus_constants(sym, box_radius, 2 * grid_density + 1, radii)
    c_outer = fine[-1]
    r_hat, c_hat, c_hat_coarse = radii[-1], c_outer, coarse[-1]
    for r, c, cc in zip(radii, fine, coarse):
        if c >= 0.5 * c_outer:
            r_hat, c_hat, c_hat_coarse = r, c, cc
            break
    stable = c_hat >= 0.6 * max(c_hat_coarse, floor)
    return EllipticityResult(bool(c_hat > floor and stable), c_hat, r_hat)


@dataclass(frozen=True)
class CauchyBoundResult:
    passed: bool
    worst_ratio: float
    constant: float


def cauchy_derivative_bound_check(sym, max_order, box, grid_density=24, slack=1.5):
    """Check |d^alpha_eta a| <= C (2/delta)^|alpha| alpha! <eta>^m on samples.

    C is the order-0 seminorm over the box times `slack`.
    """
    if sym.analytic_ext is None or sym.strip_delta is None:
        raise NotApplicableError("symbol carries no analytic extension")
    if max_order > DERIVATIVE_BUDGET:
        raise UnsupportedOrderError("max_order exceeds budget")
    zero = (0,) * sym.dimension
    C = slack * seminorm_estimate(sym, zero, zero, box, grid_density)
    X, E = _sample_points(sym, box, grid_density)
    weight = bracket(E) ** sym.order
    worst = 0.0
    for alpha in multi_indices(sym.dimension, max_order):
        lhs = np.abs(eta_derivative(sym, alpha, X, E))
        fact = 1.0
        for a in alpha:
            fact *= math.factorial(a)
        rhs = C * (2.0 / sym.strip_delta) ** sum(alpha) * fact * weight
        worst = max(worst, float((lhs / rhs).max()))
    return CauchyBoundResult(worst <= 1.0, worst, C)


def eval_analytic(sym, x, eta, xi):
    """Evaluate the analytic extension at eta + i xi inside the strip."""
    if sym.analytic_ext is None or sym.strip_delta is None:
        raise NotApplicableError("symbol carries no analytic extension")
    xi = np.asarray(xi, dtype=float)
    worst = float(np.abs(xi).max())
    if worst >= sym.strip_delta:
        raise StripViolationError(
            f"|Im zeta| = {worst:.6g} outside strip of half-width {sym.strip_delta:.6g}")
    zeta = np.asarray(eta, dtype=float) + 1j * xi
    return sym.analytic_ext(np.asarray(x, dtype=float), zeta)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def p_s_symbol(s, dimension):
    """<eta>^s with its analytic extension and strip 1/(2 sqrt(d))."""
    delta = 1.0 / (2.0 * math.sqrt(dimension))

    def ev(x, eta):
        return bracket(eta) ** s + 0.0 * np.asarray(x).sum(axis=-1)

    def ext(x, zeta):
        return bracket_c(zeta) ** s + 0.0 * np.asarray(x).sum(axis=-1)

    def grad(x, zeta):
        zeta = np.asarray(zeta)
        br = (bracket_c(zeta) if np.iscomplexobj(zeta) else bracket(zeta) + 0j)
        return s * zeta * (br ** (s - 2.0))[..., None]

    return HormanderSymbol(
        order=float(s), eval=ev, dimension=dimension, analytic_ext=ext,
        strip_delta=delta, ellipticity=(1.0, 1.0) if s > 0 else None,
        eta_grad=grad, real=True, symbol_id=f"p_s:s={s}")


def relativistic_symbol(dimension):
    sym = p_s_symbol(1.0, dimension)
    sym.symbol_id = "relativistic"
    return sym


def kinetic_symbol(dimension):
    """|eta|^2, entire in the frequencies."""

    def ev(x, eta):
        eta = np.asarray(eta)
        return (eta * eta).sum(axis=-1) + 0.0 * np.asarray(x).sum(axis=-1)

    def ext(x, zeta):
        zeta = np.asarray(zeta)
        return (zeta * zeta).sum(axis=-1) + 0.0 * np.asarray(x).sum(axis=-1)

    def grad(x, zeta):
        return 2.0 * np.asarray(zeta) + 0j

    return HormanderSymbol(
        order=2.0, eval=ev, dimension=dimension, analytic_ext=ext,
        strip_delta=1.0, ellipticity=(0.5, 1.0), eta_grad=grad, real=True,
        symbol_id="kinetic")


def _with_potential(base, v, vmeta, dimension):
    """base symbol plus an x-only term v(x)."""
    vsup = float(vmeta.get("sup", 1.0))
    base_ev, base_ext, base_grad = base.eval, base.analytic_ext, base.eta_grad

    def ev(x, eta):
        return base_ev(x, eta) + v(x)

    def ext(x, zeta):
        return base_ext(x, zeta) + v(x)

    if base.order > 0:
        # |a| >= <eta>^m (C_base - vsup/<R>^m) for |eta| >= R
        R = max(base.ellipticity[1], (4.0 * vsup) ** (1.0 / base.order) + 1.0)
        C = base.ellipticity[0] - vsup / (1.0 + R**2) ** (base.order / 2.0)
        ell = (max(C, 1e-6), R)
    else:
        ell = None
    return HormanderSymbol(
        order=base.order, eval=ev, dimension=dimension,
        analytic_ext=ext, strip_delta=base.strip_delta, ellipticity=ell,
        eta_grad=base_grad, real=base.real,
        symbol_id=f"{base.symbol_id}+{vmeta['id']}")


def negative_order_symbol(v, vmeta, dimension):
    """<eta>^{-1} (1 + v(x))."""
    base = p_s_symbol(-1.0, dimension)

    def ev(x, eta):
        return bracket(eta) ** (-1.0) * (1.0 + v(x))

    def ext(x, zeta):
        return bracket_c(zeta) ** (-1.0) * (1.0 + v(x))

    def grad(x, zeta):
        zeta = np.asarray(zeta)
        br = bracket_c(zeta)
        return (-(br**-3.0) * (1.0 + v(x)))[..., None] * zeta

    return HormanderSymbol(
        order=-1.0, eval=ev, dimension=dimension, analytic_ext=ext,
        strip_delta=base.strip_delta, ellipticity=None, eta_grad=grad,
        real=True, symbol_id=f"neg_order+{vmeta['id']}")


_BASES = {
    "relativistic": relativistic_symbol,
    "kinetic": kinetic_symbol,
}


def symbol_from_id(sid, dimension):
    """Resolve ids like 'relativistic', 'p_s:s=-1', 'kinetic+gauss_well:depth=2,width=1'."""
    sid = sid.strip()
    if sid.startswith("p_s"):
        _, _, rest = sid.partition(":")
        params = parse_params(rest)
        if "s" not in params:
            raise ConfigError("p_s symbol needs s=<real>")
        return p_s_symbol(params["s"], dimension)
    base_id, _, pot_id = sid.partition("+")
    if base_id == "neg_order":
        if not pot_id:
            one = (lambda x: 0.0 * np.asarray(x, dtype=float).sum(axis=-1))
            return negative_order_symbol(one, {"id": "zero", "sup": 0.0}, dimension)
        v, meta = potential_from_id(pot_id)
        return negative_order_symbol(v, meta, dimension)
    if base_id not in _BASES:
        raise ConfigError(f"unknown symbol {base_id!r}")
    base = _BASES[base_id](dimension)
    if not pot_id:
        return base
    v, meta = potential_from_id(pot_id)
    return _with_potential(base, v, meta, dimension)
