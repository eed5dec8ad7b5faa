"""Scenario configuration, verification suites, and report emission.

Each suite check is named after the module invariant it exercises; exit
status of the CLI `verify` command is wired to the `passed` flags here.
"""
import csv
import hashlib
import json
import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field as dc_field
from typing import Optional

import numpy as np

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

from . import decay as dk
from . import relativistic as rel
from .errors import ConfigError, MagpsidoError
from .gauge import field_from_id, gauge_transform, transversal_gauge, zero_field, potential_residual
from .quantize import (Grid, GridFunction, fourier_mode, hermitize, mag_derivative,
                       op_amplitude, op_ps, op_weyl, sobolev_norm)
from .spectral import (SpectralWindow, discrete_spectrum_select, eig_hermitian,
                       matrix_exp_neg, projector_rank, riesz_projector)
from .symbols import SampleBox, bracket, cauchy_derivative_bound_check, symbol_from_id

SUITE_NAMES = ("quantize-core", "lemmas-weights", "thm1-rapid-decay",
               "thm2-exp-decay", "thm3-relativistic")

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "symbol": {"type": "string"},
        "field": {"type": "string"},
        "potential": {"type": ["string", "null"]},
        "grid": {
            "type": "object",
            "properties": {
                "d": {"type": "integer", "enum": [1, 2]},
                "L": {"type": "number", "exclusiveMinimum": 0},
                "n": {"type": "integer", "minimum": 4},
            },
            "required": ["d", "L", "n"],
            "additionalProperties": False,
        },
        "weight": {
            "type": "object",
            "properties": {
                "kind": {"type": "string", "enum": ["polynomial", "exponential"]},
                "p": {"type": "integer", "minimum": 1},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "eps_list": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "window": {"type": ["array", "null"], "items": {"type": "number"},
                   "minItems": 2, "maxItems": 2},
        "suites": {"type": "array", "items": {"type": "string", "enum": list(SUITE_NAMES)}},
        "gauge_chi": {"type": ["string", "null"], "enum": ["bilinear", "quadratic", None]},
        "essential_threshold": {"type": "number"},
        "margin": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "output_dir": {"type": ["string", "null"]},
    },
    "required": ["symbol", "grid"],
    "additionalProperties": False,
}

_DEFAULTS = {
    "field": "zero",
    "potential": None,
    "weight": {"kind": "exponential", "p": 1},
    "eps_list": [0.0125, 0.025, 0.05, 0.1],
    "window": None,
    "suites": [],
    "gauge_chi": None,
    "essential_threshold": 1.0,
    "margin": 0.05,
    "seed": 1234,
    "output_dir": None,
}


@dataclass
class ScenarioConfig:
    symbol: str
    grid: dict
    field: str = "zero"
    potential: Optional[str] = None
    weight: dict = dc_field(default_factory=lambda: dict(_DEFAULTS["weight"]))
    eps_list: list = dc_field(default_factory=lambda: list(_DEFAULTS["eps_list"]))
    window: Optional[list] = None
    suites: list = dc_field(default_factory=list)
    gauge_chi: Optional[str] = None
    essential_threshold: float = 1.0
    margin: float = 0.05
    seed: int = 1234
    output_dir: Optional[str] = None

    @classmethod
    def from_dict(cls, raw):
        merged = dict(_DEFAULTS)
        merged.update(raw)
        validate_config(merged)
        return cls(**merged)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return asdict(self)

    def canonical_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def config_hash(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def make_grid(self):
        return Grid(self.grid["d"], float(self.grid["L"]), int(self.grid["n"]))

    def make_weight(self):
        return dk.WeightFamily(self.weight["kind"], int(self.weight.get("p", 1)))


def validate_config(raw):
    """Schema validation plus the numeric lints the schema cannot express."""
    if jsonschema is not None:
        try:
            jsonschema.validate(raw, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config schema violation: {exc.message}") from exc
    g = raw["grid"]
    if g["n"] % 2:
        raise ConfigError("grid n must be even")
    lint_config(raw)


def _momentum_scale(raw):
    """Decay-relevant momentum scale: sqrt(well depth), at least 1."""
    scale = 1.0
    for text in (raw.get("symbol", ""), raw.get("potential") or ""):
        if "gauss_well" in text and "depth=" in text:
            try:
                depth = float(text.split("depth=")[1].split(",")[0])
                scale = max(scale, math.sqrt(abs(depth)))
            except ValueError:
                pass
    return scale


def lint_config(raw):
    g = raw["grid"]
    nyquist = math.pi * g["n"] / (2.0 * g["L"])
    scale = _momentum_scale(raw)
    decay_suites = {"thm1-rapid-decay", "thm2-exp-decay"} & set(raw.get("suites", []))
    factor = 8.0 if decay_suites else 2.0
    if nyquist < factor * scale:
        raise ConfigError(
            f"frequency headroom lint: Nyquist {nyquist:.2f} < "
            f"{factor} x momentum scale {scale:.2f}; enlarge n or shrink L")
    eps_list = sorted(raw.get("eps_list", []))
    if raw.get("eps_list") and list(raw["eps_list"]) != eps_list:
        raise ConfigError("eps_list must be sorted ascending")
    for eps in eps_list:
        if not 0.0 < eps <= 1.0:
            raise ConfigError("eps values must lie in (0, 1]")
        if raw.get("weight", {}).get("kind", "exponential") == "exponential":
            if math.hypot(1.0, eps * g["L"]) - 1.0 > 690.0:
                raise ConfigError(f"eps={eps} overflows the exponential weight")


@dataclass
class Check:
    name: str
    invariant: str
    passed: bool
    margin: float
    details: str = ""

    def row(self, suite):
        return (suite, self.name, self.invariant, self.passed, f"{self.margin:.6g}",
                self.details)


def _ctx(cfg):
    grid = cfg.make_grid()
    sym = symbol_from_id(cfg.symbol, grid.dimension)
    gauge = transversal_gauge(field_from_id(cfg.field, grid.dimension))
    if cfg.gauge_chi:
        chi, grad = _named_chi(cfg.gauge_chi, grid.dimension)
        gauge = gauge_transform(gauge, chi, grad)
    rng = np.random.default_rng(cfg.seed)
    return grid, sym, gauge, rng


def scenario_context(cfg):
    """Grid, symbol, and (possibly gauge-shifted) gauge for a config."""
    grid, sym, gauge, _ = _ctx(cfg)
    return grid, sym, gauge


def _named_chi(name, d):
    """Gauge-shift functions selectable from configs (potential override)."""
    if name == "quadratic":
        return (lambda X: 0.5 * (np.asarray(X) ** 2).sum(-1),
                lambda X: np.asarray(X, dtype=float).copy())
    if name == "bilinear":
        if d == 1:
            return (lambda X: 0.5 * np.asarray(X)[..., 0] ** 2,
                    lambda X: np.asarray(X, dtype=float).copy())
        return (lambda X: np.asarray(X)[..., 0] * np.asarray(X)[..., 1],
                lambda X: np.stack([np.asarray(X)[..., 1], np.asarray(X)[..., 0]],
                                   axis=-1))
    raise ConfigError(f"unknown gauge_chi {name!r}")


def _chi_for_dimension(d):
    return _named_chi("bilinear", d)


def _small_grid(grid, cap_1d=64, cap_2d=12):
    cap = cap_1d if grid.dimension == 1 else cap_2d
    n = min(grid.n, cap)
    return Grid(grid.dimension, grid.L, n)


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def suite_quantize_core(cfg):
    grid, sym, gauge, rng = _ctx(cfg)
    d = grid.dimension
    checks = []

    one = symbol_from_id("p_s:s=0", d)
    ident = op_weyl(one, gauge, grid).entries
    dev = float(np.abs(ident - np.eye(grid.size)).max())
    checks.append(Check("identity-reproduction", "quantize/identity", dev < 1e-12,
                        1e-12 - dev, f"max deviation {dev:.3e}"))

    def vfun(x):
        return -np.exp(-(np.asarray(x) ** 2).sum(-1) / 2.0)

    from .symbols import HormanderSymbol

    pure_mult = HormanderSymbol(
        order=0.0, eval=lambda x, eta: vfun(x) + 0.0 * np.asarray(eta).sum(-1),
        dimension=d, real=True, symbol_id="mult:v")
    Hm = op_weyl(pure_mult, gauge, grid).entries
    diag_dev = float(np.abs(Hm - np.diag(vfun(grid.nodes))).max())
    checks.append(Check("multiplication-exactness", "quantize/multiplication",
                        diag_dev < 1e-12, 1e-12 - diag_dev,
                        f"max deviation {diag_dev:.3e}"))

    g0 = transversal_gauge(zero_field(d))
    kin = symbol_from_id("kinetic", d)
    gl = _small_grid(grid)
    Hk = op_weyl(kin, g0, gl).entries
    eta = gl.eta_nodes
    ref = _fft_multiplier_reference((eta**2).sum(-1), gl)
    lap_err = float(np.linalg.norm(Hk - ref) / np.linalg.norm(ref))
    checks.append(Check("fft-laplacian", "quantize/fft-oracle", lap_err < 1e-10,
                        1e-10 - lap_err, f"relative frobenius {lap_err:.3e}"))

    P1 = op_ps(1.0, g0, gl).entries
    Pm1 = op_ps(-1.0, g0, gl).entries
    inv_err = float(np.abs(P1 @ Pm1 - np.eye(gl.size)).max())
    checks.append(Check("ps-inverse", "quantize/ps-pair", inv_err < 1e-10,
                        1e-10 - inv_err, f"|P1 P-1 - I| {inv_err:.3e}"))

    H = op_weyl(sym, gauge, grid)
    defect = H.hermiticity_defect
    checks.append(Check("hermiticity-defect", "quantize/defect", defect < 1e-8,
                        1e-8 - defect, f"defect {defect:.3e}"))

    chi, grad_chi = _chi_for_dimension(d)
    gauge2 = gauge_transform(gauge, chi, grad_chi)
    H2 = op_weyl(sym, gauge2, grid)
    dec = eig_hermitian(H)
    dec2 = eig_hermitian(H2)
    scale = max(float(np.abs(dec.eigenvalues).max()), 1e-12)
    spec_diff = float(np.abs(dec.eigenvalues - dec2.eigenvalues).max() / scale)
    phase = np.exp(1j * chi(grid.nodes))
    W = phase[:, None] * dec.eigenvectors
    vec_res = float(np.linalg.norm(H2.entries @ W - W * dec.eigenvalues[None, :],
                                   axis=0).max() / scale)
    checks.append(Check("gauge-covariance-spectrum", "quantize/gauge-covariance",
                        spec_diff < 1e-8, 1e-8 - spec_diff,
                        f"relative spectrum diff {spec_diff:.3e}"))
    checks.append(Check("gauge-covariance-vectors", "quantize/gauge-covariance",
                        vec_res < 1e-6, 1e-6 - vec_res,
                        f"phase-aligned residual {vec_res:.3e}"))

    ga = _small_grid(grid, cap_1d=48, cap_2d=10)

    def mid_amp(x, y, e):
        return sym.eval(0.5 * (np.asarray(x, dtype=float) + np.asarray(y, dtype=float)), e)

    Ha = op_amplitude(mid_amp, gauge, ga).entries
    Hw = op_weyl(sym, gauge, ga)
    Hw_raw = Hw.entries if not Hw.symmetrized else op_weyl_unsym(sym, gauge, ga)
    amp_dev = float(np.abs(Ha - Hw_raw).max() / max(np.abs(Hw_raw).max(), 1e-300))
    checks.append(Check("amplitude-midpoint-coincidence", "quantize/amplitude",
                        amp_dev < 1e-12, 1e-12 - amp_dev,
                        f"max deviation {amp_dev:.3e}"))

    if d == 1:
        checks.append(_graph_norm_check(cfg, grid, sym, gauge))
        checks.append(_sobolev_char_check(cfg, grid, gauge))

    res = potential_residual(gauge, radius=min(4.0, grid.L / 2), density=16)
    checks.append(Check("potential-consistency", "gauge/dA-equals-B", res < 1e-6,
                        1e-6 - res, f"dA-B residual {res:.3e}"))
    return checks


def op_weyl_unsym(sym, gauge, grid):
    """Assembly without the real-symbol symmetrization (oracle use)."""
    from . import _kernels
    from .gauge import phase_table
    from .quantize import _midpoint_transform

    T = _midpoint_transform(sym, grid)
    omega = phase_table(gauge, grid.nodes)
    return _kernels.weyl_gather(T, omega, grid.n, grid.dimension)


def _fft_multiplier_reference(mult_flat, grid):
    """F^* diag(mult) F for the grid's DFT (oracle for x-free symbols)."""
    nodes = grid.nodes
    eta = grid.eta_nodes
    F = np.exp(-1j * (eta[:, None, :] * nodes[None, :, :]).sum(-1))
    return (F.conj().T * mult_flat[None, :]) @ F / grid.size


def _graph_norm_check(cfg, grid, sym, gauge, tol=0.2):
    ratios = []
    for g in (Grid(grid.dimension, grid.L, grid.n // 2), grid):
        H = op_weyl(symbol_from_id("relativistic", 1), gauge, g)
        P1 = op_ps(1.0, gauge, g)
        vals = []
        for k in (0, 1, 3, 7):
            u = fourier_mode(g, (k,))
            Hu = H.apply(u)
            vals.append(sobolev_norm(u, 1.0, gauge, ps_operator=P1)
                        / (u.l2_norm() + Hu.l2_norm()))
        rng = np.random.default_rng(cfg.seed)
        for _ in range(4):
            u = GridFunction(rng.standard_normal(g.size)
                             + 1j * rng.standard_normal(g.size), g)
            Hu = H.apply(u)
            vals.append(sobolev_norm(u, 1.0, gauge, ps_operator=P1)
                        / (u.l2_norm() + Hu.l2_norm()))
        ratios.append((min(vals), max(vals)))
    spread = [hi / lo for lo, hi in ratios]
    drift = abs(spread[1] - spread[0]) / spread[0]
    return Check("graph-norm-equivalence", "quantize/graph-norm", drift < tol,
                 tol - drift,
                 f"interval {ratios[1][0]:.4f}..{ratios[1][1]:.4f}, drift {drift:.3f}")


def _sobolev_char_check(cfg, grid, gauge, tol=0.2):
    spreads = []
    for g in (Grid(grid.dimension, grid.L, grid.n // 2), grid):
        P1 = op_ps(1.0, gauge, g)
        rng = np.random.default_rng(cfg.seed + 1)
        vals = []
        for k in (0, 1, 3, 7):
            u = fourier_mode(g, (k,))
            lhs = sobolev_norm(u, 1.0, gauge, ps_operator=P1) ** 2
            du = mag_derivative((1,), u, gauge)
            rhs = u.l2_norm() ** 2 + du.l2_norm() ** 2
            vals.append(lhs / rhs)
        for _ in range(4):
            u = GridFunction(rng.standard_normal(g.size)
                             + 1j * rng.standard_normal(g.size), g)
            lhs = sobolev_norm(u, 1.0, gauge, ps_operator=P1) ** 2
            du = mag_derivative((1,), u, gauge)
            rhs = u.l2_norm() ** 2 + du.l2_norm() ** 2
            vals.append(lhs / rhs)
        spreads.append(max(vals) / min(vals))
    drift = abs(spreads[1] - spreads[0]) / spreads[0]
    return Check("sobolev-characterization", "quantize/sobolev-eq", drift < tol,
                 tol - drift, f"spread {spreads[1]:.4f}, drift {drift:.3f}")


def suite_lemmas_weights(cfg):
    grid, sym, gauge, rng = _ctx(cfg)
    d = grid.dimension
    checks = []

    box = SampleBox(4.0, 8.0)
    cres = cauchy_derivative_bound_check(sym, 4, box, grid_density=16)
    checks.append(Check("cauchy-derivative-bound", "symbols/factorial-growth",
                        cres.passed, 1.0 - cres.worst_ratio,
                        f"worst ratio {cres.worst_ratio:.4f}"))

    pairs = (rng.uniform(-5, 5, size=(10000, d)), rng.uniform(-5, 5, size=(10000, d)))
    worst_b = 0.0
    for eps in cfg.eps_list + [1.0]:
        worst_b = max(worst_b, float(np.linalg.norm(
            dk.b_shift(eps, pairs[0], pairs[1]), axis=-1).max()))
    checks.append(Check("shift-field-bound", "decay/b-bound", worst_b <= 1.0,
                        1.0 - worst_b, f"max |b| {worst_b:.6f}"))

    w_exp = dk.WeightFamily("exponential")
    res_exp = max(dk.weight_taylor_identity_check(w_exp, eps, pairs)
                  for eps in cfg.eps_list + [0.3, 1.0])
    checks.append(Check("exp-weight-identity", "decay/ratio-identity",
                        res_exp < 1e-12, 1e-12 - res_exp, f"residual {res_exp:.3e}"))

    res_poly = max(
        dk.weight_taylor_identity_check(dk.WeightFamily("polynomial", p=2), 1.0, pairs),
        dk.weight_taylor_identity_check(dk.WeightFamily("polynomial", p=4), 1.0, pairs),
        dk.weight_taylor_identity_check(dk.WeightFamily("polynomial", p=3), 0.2, pairs),
    )
    checks.append(Check("poly-weight-identity", "decay/taylor-identity",
                        res_poly < 1e-10, 1e-10 - res_poly, f"residual {res_poly:.3e}"))

    cap = dk.analytic_eps_cap(sym)
    eps = min(0.05, cap) if cap else 0.05
    Hraw = op_weyl_unsym(sym, gauge, grid)
    f = dk.WeightFamily("exponential")(eps, grid.nodes)
    lhs = (f[:, None] / f[None, :]) * Hraw
    Ec = op_amplitude(dk.amplitude_c_eps(sym, eps), gauge, grid).entries
    scale = np.linalg.norm(Hraw)
    ratio = float(np.linalg.norm(lhs - Ec) / scale)
    checks.append(Check("conjugation-amplitude-match", "decay/shift-conjugation",
                        ratio < 1e-3, 1e-3 - ratio, f"eps={eps}, ratio {ratio:.3e}"))

    Ed = op_amplitude(dk.amplitude_d_eps(sym, eps), gauge, grid).entries
    res4 = float(np.linalg.norm(Ec - Hraw - eps * Ed) / scale)
    checks.append(Check("remainder-amplitude-identity", "decay/first-order-split",
                        res4 < 1e-8, 1e-8 - res4, f"residual ratio {res4:.3e}"))
    return checks


def _bound_state(cfg, grid, sym, gauge):
    H = op_weyl(sym, gauge, grid)
    dec = eig_hermitian(H)
    win = SpectralWindow(cfg.essential_threshold, cfg.margin)
    found = discrete_spectrum_select(dec, win)
    return H, dec, found


def suite_thm1_rapid_decay(cfg):
    grid, sym, gauge, rng = _ctx(cfg)
    checks = []
    H, dec, found = _bound_state(cfg, grid, sym, gauge)
    checks.append(Check("discrete-spectrum-nonempty", "spectral/window",
                        len(found) > 0, float(len(found)),
                        f"{len(found)} eigenvalues below threshold"))
    if not found:
        return checks
    lam0, u0, gap = found[0]
    u = GridFunction(u0, grid)
    window = tuple(cfg.window) if cfg.window else dk.default_window(grid)
    fit = dk.decay_fit(u, "polynomial", window)
    checks.append(Check("rapid-decay-order", "decay/polynomial-rate",
                        fit.rate >= 6.0 and fit.r_squared > 0.9, fit.rate - 6.0,
                        f"p-hat {fit.rate:.2f}, R2 {fit.r_squared:.4f}"))

    w = cfg.make_weight()
    eps = cfg.eps_list[len(cfg.eps_list) // 2]
    Heps = dk.conjugate_operator(H, w, eps)
    fvals = w(eps, grid.nodes)
    v = fvals * u0
    res = float(np.linalg.norm(Heps.entries @ v - lam0 * v) / np.linalg.norm(v))
    scale = max(float(np.abs(dec.eigenvalues).max()), 1.0)
    checks.append(Check("weighted-eigenvector", "decay/eigenvector-transport",
                        res / scale < 1e-8, 1e-8 - res / scale,
                        f"residual {res:.3e}"))

    lam_c = np.sort(np.linalg.eigvals(Heps.entries).real)
    diff = float(np.abs(lam_c - dec.eigenvalues).max() / scale)
    checks.append(Check("similarity-spectrum", "decay/conjugation-isospectral",
                        diff < 1e-9, 1e-9 - diff, f"relative diff {diff:.3e}"))
    return checks


def suite_thm2_exp_decay(cfg):
    grid, sym, gauge, rng = _ctx(cfg)
    checks = []
    H, dec, found = _bound_state(cfg, grid, sym, gauge)
    checks.append(Check("discrete-spectrum-nonempty", "spectral/window",
                        len(found) > 0, float(len(found)),
                        f"{len(found)} eigenvalues below threshold"))
    if not found:
        return checks
    lam0, u0, gap = found[0]
    u = GridFunction(u0, grid)
    window = tuple(cfg.window) if cfg.window else dk.default_window(grid)
    fit = dk.decay_fit(u, "exponential", window)
    checks.append(Check("exponential-decay-fit", "decay/exponential-rate",
                        fit.rate > 0 and fit.r_squared > 0.98,
                        min(fit.rate, fit.r_squared - 0.98),
                        f"beta-hat {fit.rate:.4f}, R2 {fit.r_squared:.5f}"))

    w = cfg.make_weight()
    rows, eps0 = dk.uniform_bound_sweep(H, w, sorted(cfg.eps_list))
    bounds = [r[1] for r in rows]
    variation = max(bounds) / max(min(bounds), 1e-300)
    checks.append(Check("uniform-relative-bound", "decay/uniform-sweep",
                        variation < 3.0, 3.0 - variation,
                        f"variation {variation:.2f}x over {cfg.eps_list}"))

    est = dk.epsilon0_estimate(sym, H, w, cfg.eps_list)
    ok = est["empirical_eps0"] is not None
    checks.append(Check("epsilon0-estimates", "decay/eps0",
                        ok, float(est["empirical_eps0"] or 0.0),
                        f"analytic {est['analytic_eps0']}, empirical {est['empirical_eps0']}"))

    radius = 0.5 * min(gap, abs(cfg.essential_threshold - lam0))
    P = riesz_projector(H.entries, lam0, radius)
    idem = float(np.linalg.norm(P @ P - P))
    rank = projector_rank(P)
    mult = int(np.sum(np.abs(dec.eigenvalues - lam0) < 1e-10))
    checks.append(Check("riesz-projector", "spectral/contour-projector",
                        idem < 1e-8 and rank == mult, 1e-8 - idem,
                        f"|P^2-P| {idem:.3e}, rank {rank}, multiplicity {mult}"))

    certificate_eps = fit.rate / 2.0
    fw = np.exp(certificate_eps * bracket(grid.nodes))
    weighted = fw * np.abs(u0)
    radii = np.sqrt((grid.nodes**2).sum(-1))
    inside = radii <= 0.8 * grid.L
    argmax_r = float(radii[inside][np.argmax(weighted[inside])])
    checks.append(Check("weighted-sup-certificate", "decay/weighted-sup",
                        argmax_r < 0.5 * grid.L, 0.5 * grid.L - argmax_r,
                        f"weighted profile peaks at |x| = {argmax_r:.2f}"))

    lam_c = np.sort(np.linalg.eigvals(
        dk.conjugate_operator(H, w, cfg.eps_list[-1]).entries).real)
    scale = max(float(np.abs(dec.eigenvalues).max()), 1.0)
    diff = float(np.abs(lam_c - dec.eigenvalues).max() / scale)
    checks.append(Check("similarity-spectrum", "decay/conjugation-isospectral",
                        diff < 1e-9, 1e-9 - diff, f"relative diff {diff:.3e}"))
    return checks


def suite_thm3_relativistic(cfg):
    grid, sym, gauge, rng = _ctx(cfg)
    d = grid.dimension
    checks = []

    k12 = rel.bessel_k(0.5, 1.0)
    ref = math.sqrt(math.pi / 2.0) * math.exp(-1.0)
    err = abs(k12 - ref)
    checks.append(Check("bessel-half-integer", "relativistic/closed-form",
                        err < 1e-9, 1e-9 - err, f"K_1/2(1) error {err:.2e}"))

    zs = np.linspace(0.1, 20.0, 64)
    worst = 0.0
    for nu in (1.0, 2.0, 3.0, 1.5, 2.5):
        lhs = rel.bessel_k(nu + 1.0, zs)
        rhs = rel.bessel_k(nu - 1.0, zs) + (2.0 * nu / zs) * rel.bessel_k(nu, zs)
        worst = max(worst, float((np.abs(lhs - rhs) / lhs).max()))
    checks.append(Check("bessel-recurrence", "relativistic/recurrence",
                        worst < 1e-12, 1e-12 - worst, f"residual {worst:.2e}"))

    mass_grid = Grid(1, 40.0, 2048)
    Z = rel.displacement_lattice(mass_grid)
    mass = abs(mass_grid.h * rel.kernel_pt(1.0, Z, 1).sum() - math.exp(-1.0))
    checks.append(Check("kernel-mass", "relativistic/normalization",
                        mass < 1e-5, 1e-5 - mass, f"|h sum p_1 - e^-1| {mass:.2e}"))

    conv = [rel.semigroup_checks(0.5, 0.5, Grid(1, 10.0, n))["conv"]
            for n in (64, 128, 256)]
    decreasing = conv[0] > conv[1] > conv[2]
    checks.append(Check("semigroup-convolution", "relativistic/semigroup-law",
                        decreasing and conv[-1] < 1e-4, 1e-4 - conv[-1],
                        f"residuals {conv[0]:.2e} > {conv[1]:.2e} > {conv[2]:.2e}"))

    kato_grid = Grid(1, 20.0, 512)
    flat = rel.kato_estimate(np.ones(kato_grid.size), 1.0, kato_grid)
    flat_err = abs(flat - (1.0 - math.exp(-1.0)))
    checks.append(Check("kato-flat-identity", "relativistic/kato-flat",
                        flat_err < 1e-6, 1e-6 - flat_err, f"error {flat_err:.2e}"))

    bump = np.exp(-(kato_grid.nodes**2).sum(-1))
    scan = rel.kato_scan(bump, 1.0, kato_grid, halvings=5)
    vals = [v for _, v in scan]
    mono = all(a >= b for a, b in zip(vals, vals[1:]))
    checks.append(Check("kato-scan-vanishes", "relativistic/kato-limit",
                        mono and vals[-1] < 0.1 * vals[0], 0.1 * vals[0] - vals[-1],
                        f"t-scan {vals[0]:.4f} -> {vals[-1]:.5f}"))

    cons = []
    for n in (64, 128):
        gk = Grid(1, 20.0, n)
        g0 = transversal_gauge(zero_field(1))
        H0 = op_weyl(symbol_from_id("relativistic", 1), g0, gk)
        E = matrix_exp_neg(H0, 1.0)
        diffs = gk.nodes[:, None, :] - gk.nodes[None, :, :]
        dist = np.sqrt((diffs**2).sum(-1))
        K = gk.h * rel.kernel_pt(1.0, diffs, 1)
        band = dist <= gk.L / 2.0
        cons.append(float(np.abs((E.real - K))[band].max() / K.max()))
    checks.append(Check("exp-matches-kernel", "relativistic/kernel-consistency",
                        cons[1] < cons[0] and cons[1] < 1e-3, 1e-3 - cons[1],
                        f"residuals {cons[0]:.2e} -> {cons[1]:.2e}"))

    dia_grid = Grid(2, 5.0, 16)
    from .gauge import constant_field_2d

    gb = transversal_gauge(constant_field_2d(1.0))
    dia = rel.diamagnetic_check(gb, rel.PotentialSpec(), 1.0, 10, dia_grid,
                                seed=cfg.seed)
    checks.append(Check("diamagnetic-domination", "relativistic/diamagnetic",
                        dia["violation"] < 1e-2, 1e-2 - dia["violation"],
                        f"violation {dia['violation']:.3e} (signed {dia['signed_max']:.3e})"))

    g0 = transversal_gauge(zero_field(d))
    if d == 1:
        well = rel.potential_spec_from_id(cfg.potential
                                          or "gauss_well:depth=2,width=1")
        Hfs = rel.build_form_sum(g0, well, grid)
        decfs = eig_hermitian(Hfs)
        below = int((decfs.eigenvalues < cfg.essential_threshold - cfg.margin).sum())
        checks.append(Check("form-sum-bound-state", "relativistic/form-sum",
                            below >= 1, float(below),
                            f"{below} eigenvalues below threshold"))
        rep = rel.pointwise_bound_check(
            g0, well, float(decfs.eigenvalues[0]), decfs.eigenvectors[:, 0],
            eps=0.1, p=2.0, grid=grid)
        ok = rep["kernel_margin"] > 0 and rep["chain_margin"] > 0
        checks.append(Check("pointwise-bound-chain", "relativistic/decay-chain",
                            ok, rep["chain_margin"],
                            f"C_hat {rep['C_hat']:.3f}, chain margin "
                            f"{rep['chain_margin']:.3f}, kernel min {rep['kernel_min']:.2e}"))

        vplus = rel.PotentialSpec(
            V_plus=lambda x: bracket(np.asarray(x, dtype=float)) - 1.0,
            potential_id="linear-growth")
        Hp = rel.build_form_sum(g0, vplus, grid)
        lam_min = float(np.linalg.eigvalsh(Hp.entries)[0])
        base_min = 1.0
        checks.append(Check("weyl-lower-bound", "relativistic/weyl-shift",
                            lam_min >= base_min - 1e-8, lam_min - base_min + 1e-8,
                            f"lambda_min {lam_min:.6f} >= {base_min}"))
    return checks


_SUITES = {
    "quantize-core": suite_quantize_core,
    "lemmas-weights": suite_lemmas_weights,
    "thm1-rapid-decay": suite_thm1_rapid_decay,
    "thm2-exp-decay": suite_thm2_exp_decay,
    "thm3-relativistic": suite_thm3_relativistic,
}


def verify_suite(name, cfg):
    """Run one named suite; returns its check list."""
    if name not in _SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {SUITE_NAMES}")
    return _SUITES[name](cfg)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class ScenarioReport:
    config: dict
    config_hash: str
    suites: dict                 # name -> list of check dicts
    spectra_summary: Optional[dict] = None
    decay_fits: Optional[list] = None
    sweep_table: Optional[list] = None
    timings: dict = dc_field(default_factory=dict)
    incomplete: bool = False

    @property
    def all_passed(self):
        return all(c["passed"] for checks in self.suites.values() for c in checks)

    def to_dict(self):
        out = asdict(self)
        out["all_passed"] = self.all_passed
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _spectra_summary(cfg):
    grid, sym, gauge, _ = _ctx(cfg)
    H = op_weyl(sym, gauge, grid)
    if not H.symmetrized:
        H = hermitize(H)
    dec = eig_hermitian(H)
    win = SpectralWindow(cfg.essential_threshold, cfg.margin)
    found = discrete_spectrum_select(dec, win)
    lam = dec.eigenvalues
    gaps = np.diff(lam)
    return {
        "lowest": [float(v) for v in lam[:8]],
        "residual": dec.residual,
        "discrete_count": len(found),
        "min_gap": float(gaps.min()) if gaps.size else 0.0,
        "hermiticity_defect": H.hermiticity_defect,
    }


def run_scenario(cfg, out_path=None):
    """Execute the configured suites; deterministic given config + seed."""
    suites = {}
    timings = {}
    incomplete = False
    for name in cfg.suites:
        t0 = time.perf_counter()
        try:
            checks = verify_suite(name, cfg)
        except MagpsidoError as exc:
            checks = [Check("suite-error", f"{name}/error", False, -1.0, str(exc))]
            incomplete = True
        timings[name] = time.perf_counter() - t0
        suites[name] = [asdict(c) for c in checks]
    t0 = time.perf_counter()
    spectra = _spectra_summary(cfg)
    timings["spectra"] = time.perf_counter() - t0
    report = ScenarioReport(cfg.to_dict(), cfg.config_hash(), suites,
                            spectra_summary=spectra, timings=timings,
                            incomplete=incomplete)
    if out_path:
        write_atomic(out_path, report.to_json())
    return report


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def emit_report(report, fmt, out_path):
    """Serialize a report: one JSON file or a CSV bundle directory."""
    if fmt == "json":
        return [write_atomic(out_path, report.to_json())]
    if fmt != "csv-bundle":
        raise ConfigError(f"unknown report format {fmt!r}")
    os.makedirs(out_path, exist_ok=True)
    written = []
    checks_path = os.path.join(out_path, "checks.csv")
    with open(checks_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("suite", "check", "invariant", "passed", "margin", "details"))
        for suite, checks in sorted(report.suites.items()):
            for c in checks:
                writer.writerow((suite, c["name"], c["invariant"], c["passed"],
                                 f"{c['margin']:.6g}", c["details"]))
    written.append(checks_path)
    if report.spectra_summary:
        spath = os.path.join(out_path, "spectrum.csv")
        with open(spath, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("index", "eigenvalue", "gap", "residual"))
            lows = report.spectra_summary["lowest"]
            res = report.spectra_summary["residual"]
            for i, lam in enumerate(lows):
                gap = (lows[i + 1] - lam) if i + 1 < len(lows) else ""
                writer.writerow((i, f"{lam:.12g}", gap, f"{res:.3e}"))
        written.append(spath)
    if report.sweep_table:
        wpath = os.path.join(out_path, "sweep.csv")
        write_sweep_csv(report.sweep_table, wpath)
        written.append(wpath)
    meta = {"config": report.config, "config_hash": report.config_hash,
            "all_passed": report.all_passed, "incomplete": report.incomplete}
    mpath = os.path.join(out_path, "meta.json")
    write_atomic(mpath, json.dumps(meta, sort_keys=True, indent=2))
    written.append(mpath)
    return written


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("epsilon", "rel_bound", "eps_rel_bound", "flag"))
        for eps, rb, erb, flag in rows:
            writer.writerow((eps, f"{rb:.12g}", f"{erb:.12g}", flag))
    return path


def write_spectrum_csv(dec, path):
    lam = dec.eigenvalues
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("index", "eigenvalue", "gap", "residual"))
        for i, v in enumerate(lam):
            others = np.abs(np.delete(lam, i) - v)
            gap = float(others.min()) if others.size else 0.0
            writer.writerow((i, f"{v:.12g}", f"{gap:.12g}", f"{dec.residual:.3e}"))
    return path


def write_kato_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("t", "sup_value"))
        for t, v in rows:
            writer.writerow((f"{t:.12g}", f"{v:.12g}"))
    return path


def merge_reports(in_dir, out_path):
    """Combine per-run JSON reports from a directory into one file."""
    merged = {"reports": []}
    for name in sorted(os.listdir(in_dir)):
        if not name.endswith(".json"):
            continue
        with open(os.path.join(in_dir, name)) as fh:
            merged["reports"].append(json.load(fh))
    merged["all_passed"] = all(r.get("all_passed", False) for r in merged["reports"])
    write_atomic(out_path, json.dumps(merged, sort_keys=True, indent=2))
    return out_path
