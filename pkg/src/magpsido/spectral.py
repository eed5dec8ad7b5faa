"""Dense Hermitian eigensolving, resolvents, semigroups, relative bounds,
and contour spectral projectors."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ContourError, ConvergenceError, NotApplicableError, SingularShiftError
from .quantize import GridFunction, OperatorMatrix


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray      # ascending
    eigenvectors: np.ndarray     # unitary columns
    residual: float

    def __iter__(self):
        return iter((self.eigenvalues, self.eigenvectors))


def eig_hermitian(op):
    """Full LAPACK decomposition of a symmetrized operator."""
    if isinstance(op, OperatorMatrix):
        if not op.symmetrized:
            defect = float(np.linalg.norm(op.entries - op.entries.conj().T)
                           / max(np.linalg.norm(op.entries), 1e-300))
            if defect > 1e-12:
                raise NotApplicableError(
                    f"matrix not symmetrized (defect {defect:.3e}); hermitize first")
        H = op.entries
    else:
        H = np.asarray(op)
    lam, V = np.linalg.eigh(H)
    scale = max(float(np.abs(lam).max()), 1e-300)
    residual = float(np.linalg.norm(H @ V - V * lam[None, :], axis=0).max() / scale)
    return EigenDecomposition(lam, V, residual)


@dataclass(frozen=True)
class SpectralWindow:
    """Below essential_threshold - margin counts as discrete spectrum."""

    essential_threshold: float
    margin: float = 0.05

    def __post_init__(self):
        if self.margin <= 0:
            raise NotApplicableError("margin must be positive")


def discrete_spectrum_select(dec, win):
    """Eigenpairs below the window cutoff, each with its spectral gap."""
    lam = dec.eigenvalues
    cutoff = win.essential_threshold - win.margin
    out = []
    for i, lv in enumerate(lam):
        if lv >= cutoff:
            break
        gaps = np.abs(np.delete(lam, i) - lv)
        gap = float(gaps.min()) if gaps.size else np.inf
        out.append((float(lv), dec.eigenvectors[:, i], gap))
    return out


def resolvent_apply(H, z, w, min_distance=1e-10):
    """Solve (H - z) u = w by LU with partial pivoting.

    The factorization's condition estimate guards against shifts closer than
    `min_distance` to the spectrum; the solve is also residual-checked.
    """
    mat = H.entries if isinstance(H, OperatorMatrix) else np.asarray(H)
    grid = H.grid if isinstance(H, OperatorMatrix) else None
    rhs = w.values if isinstance(w, GridFunction) else np.asarray(w, dtype=complex)
    A = (mat - z * np.eye(mat.shape[0])).astype(complex)
    lu, piv = sla.lu_factor(A)
    anorm = float(np.linalg.norm(A, 1))
    rcond = float(sla.lapack.zgecon(lu, anorm)[0])
    if rcond * anorm < min_distance:  # sigma_min estimate for normal A
        lam = np.linalg.eigvalsh(mat) if _hermitian(mat) else np.linalg.eigvals(mat)
        nearest = lam[np.argmin(np.abs(lam - z))]
        raise SingularShiftError(
            f"shift {z} within {rcond * anorm:.3e} of the spectrum",
            nearest_eigenvalue=complex(nearest))
    u = sla.lu_solve((lu, piv), rhs)
    res = float(np.linalg.norm(A @ u - rhs) / max(np.linalg.norm(rhs), 1e-300))
    if res > 1e-9:
        lam = np.linalg.eigvalsh(mat) if _hermitian(mat) else np.linalg.eigvals(mat)
        nearest = lam[np.argmin(np.abs(lam - z))]
        raise SingularShiftError(
            f"solve residual {res:.3e} for shift {z}",
            nearest_eigenvalue=complex(nearest))
    if grid is not None and isinstance(w, GridFunction):
        return GridFunction(u, grid)
    return u


def _hermitian(mat, tol=1e-10):
    return np.linalg.norm(mat - mat.conj().T) <= tol * max(np.linalg.norm(mat), 1e-300)


def matrix_exp_neg(H, t):
    """exp(-t H) through the eigendecomposition (t >= 0)."""
    if t < 0:
        raise NotApplicableError("t must be nonnegative")
    dec = eig_hermitian(H)
    lam, V = dec.eigenvalues, dec.eigenvectors
    return (V * np.exp(-t * lam)[None, :]) @ V.conj().T


def relative_bound(R, H, z=1j, tol=1e-8, max_iter=500, seed=0, block=8):
    """Spectral norm of R (H - z)^{-1} by block power iteration.

    Subspace iteration on the normal map keeps the power-iteration budget
    (tol, max_iter) workable when the top singular values cluster; a scalar
    iteration would need thousands of steps on near-degenerate tops.
    """
    Rm = R.entries if isinstance(R, OperatorMatrix) else np.asarray(R)
    Hm = H.entries if isinstance(H, OperatorMatrix) else np.asarray(H)
    if not Rm.any():
        return 0.0
    n = Hm.shape[0]
    A = Hm - z * np.eye(n)
    lu = sla.lu_factor(A)
    luH = sla.lu_factor(A.conj().T)
    b = min(block, n)
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((n, b)) + 1j * rng.standard_normal((n, b))
    V, _ = np.linalg.qr(V)
    sigma = 0.0
    for _ in range(max_iter):
        W = Rm @ sla.lu_solve(lu, V)
        new_sigma = float(np.linalg.svd(W, compute_uv=False)[0])
        U = sla.lu_solve(luH, Rm.conj().T @ W)
        norms = np.linalg.norm(U, axis=0)
        if norms.max() == 0.0:
            return 0.0
        V, _ = np.linalg.qr(U)
        if abs(new_sigma - sigma) < tol * max(1.0, new_sigma):
            return new_sigma
        sigma = new_sigma
    raise ConvergenceError(
        f"block power iteration did not converge in {max_iter} steps",
        last_gap=abs(new_sigma - sigma))


def riesz_projector(H, center, radius, num_nodes=32):
    """Trapezoidal contour quadrature of (2 pi i)^{-1} oint (mu - H)^{-1} dmu.

    The displayed orientation (mu - H)^{-1} is fixed by requiring P^2 = P.
    """
    mat = H.entries if isinstance(H, OperatorMatrix) else np.asarray(H)
    n = mat.shape[0]
    lam = np.linalg.eigvalsh(mat) if _hermitian(mat) else np.linalg.eigvals(mat)
    dist = np.abs(np.abs(lam - center) - radius)
    if dist.min() < 0.1 * radius:
        raise ContourError(
            f"eigenvalue {lam[np.argmin(dist)]:.6g} within 10% of the contour")
    theta = 2.0 * np.pi * (np.arange(num_nodes) + 0.5) / num_nodes
    P = np.zeros((n, n), dtype=complex)
    eye = np.eye(n)
    for th in theta:
        mu = center + radius * np.exp(1j * th)
        P += radius * np.exp(1j * th) * np.linalg.solve(mu * eye - mat, eye)
    return P / num_nodes


def projector_rank(P, threshold=0.5):
    """Rank by counting singular values above threshold."""
    return int((np.linalg.svd(P, compute_uv=False) > threshold).sum())
