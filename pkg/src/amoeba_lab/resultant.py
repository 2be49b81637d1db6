"""Solving two bivariate equations in (C*)^2 by Sylvester elimination.

The eliminant ``R(x) = det S(x)`` of the Sylvester matrix ``S(x)`` of two
polynomials in ``y`` is never expanded; its roots are the eigenvalues of the
block companion pencil of the matrix polynomial ``S(x) = sum_k S_k x^k``,
which keeps roots at zero and infinity structurally separated from the
finite ones.  Each root is back-substituted into the first polynomial and
the candidate pairs are polished by Newton's method on the full system.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .laurent import LaurentPoly, dense_matrix

log = logging.getLogger(__name__)


class DegenerateResultantError(RuntimeError):
    """The eliminant vanishes identically or its leading part collapses."""


@dataclass
class SystemSolution:
    points: np.ndarray  # (n, 2) complex, deduplicated, in (C*)^2
    residuals: np.ndarray  # scaled residual per point
    eliminated: str
    warnings: list[str] = field(default_factory=list)


def _cleared(p: LaurentPoly, swap: bool) -> np.ndarray:
    """Dense ``C[a, b]``: coefficient of ``x^a y^b`` (roles swapped if asked)."""
    C, _, _ = dense_matrix(p)
    return C.T if swap else C


def sylvester_pencil(P: np.ndarray, Q: np.ndarray) -> list[np.ndarray]:
    """Coefficient matrices ``S_k`` of the Sylvester matrix polynomial in x.

    ``P[a, b]`` is the coefficient of ``x^a y^b``; elimination is over ``y``.
    """
    m = P.shape[1] - 1
    n = Q.shape[1] - 1
    size = m + n
    deg = max(P.shape[0], Q.shape[0]) - 1
    S = [np.zeros((size, size)) for _ in range(deg + 1)]
    if size == 0:
        return [np.ones((1, 1))]
    for r in range(n):
        for b in range(m + 1):
            col = r + (m - b)
            for a in range(P.shape[0]):
                S[a][r, col] = P[a, b]
    for r in range(m):
        for b in range(n + 1):
            col = r + (n - b)
            for a in range(Q.shape[0]):
                S[a][n + r, col] = Q[a, b]
    return S


def eliminant_roots(S: list[np.ndarray], rtol: float = 1e-11) -> np.ndarray:
    """Finite nonzero roots of ``det(sum_k S_k x^k)``."""
    d = len(S) - 1
    n = S[0].shape[0]
    while d > 0 and not np.any(S[d]):
        d -= 1
    if d == 0:
        if abs(np.linalg.det(S[0])) == 0.0:
            raise DegenerateResultantError("eliminant is identically zero")
        return np.empty(0, dtype=complex)
    N = n * d
    A = np.zeros((N, N))
    B = np.eye(N)
    A[: N - n, n:] = np.eye(N - n)
    for k in range(d):
        A[N - n :, k * n : (k + 1) * n] = -S[k]
    B[N - n :, N - n :] = S[d]
    alpha, beta = scipy.linalg.eig(A, B, right=False, homogeneous_eigvals=True)
    scale = max(np.abs(A).max(), np.abs(B).max())
    mag_a = np.abs(alpha)
    mag_b = np.abs(beta)
    if np.sum((mag_a < 1e-10 * scale) & (mag_b < 1e-10 * scale)) > 0:
        raise DegenerateResultantError("singular pencil: the two curves share a component")
    finite = mag_b > rtol * np.maximum(mag_a, 1e-300)
    roots = alpha[finite] / beta[finite]
    if finite.sum() == 0:
        raise DegenerateResultantError("leading coefficient collapse: no finite eliminant roots")
    return roots


def _monomials(p: LaurentPoly, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x[:, None] ** p.exponents[:, 0] * y[:, None] ** p.exponents[:, 1]


def _log_parts(p: LaurentPoly, x, y):
    """(value, x*d/dx, y*d/dy, magnitude) at each point."""
    m = _monomials(p, x, y)
    c = p.coefficients
    return m @ c, m @ (p.exponents[:, 0] * c), m @ (p.exponents[:, 1] * c), np.abs(m) @ np.abs(c)


def newton_polish(f: LaurentPoly, h: LaurentPoly, z: np.ndarray, iters: int = 30) -> np.ndarray:
    """Batched Newton on (log x, log y) for the system ``f = h = 0``.

    The Jacobian rows are the logarithmic derivatives, which keeps the
    iteration scale-free for solutions far from the unit torus.
    """
    z = np.array(z, dtype=complex).reshape(-1, 2)
    active = np.ones(len(z), dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(iters):
            if not active.any():
                break
            x, y = z[active, 0], z[active, 1]
            F, Fu, Fv, _ = _log_parts(f, x, y)
            H, Hu, Hv, _ = _log_parts(h, x, y)
            det = Fu * Hv - Fv * Hu
            du = (-F * Hv + H * Fv) / det
            dv = (-Fu * H + Hu * F) / det
            ok = np.isfinite(du) & np.isfinite(dv) & (np.abs(du) <= 5) & (np.abs(dv) <= 5)
            idx = np.flatnonzero(active)
            z[idx[ok], 0] = x[ok] * np.exp(du[ok])
            z[idx[ok], 1] = y[ok] * np.exp(dv[ok])
            done = ~ok | ((np.abs(du) <= 1e-15) & (np.abs(dv) <= 1e-15))
            active[idx[done]] = False
    return z


def scaled_residual(p: LaurentPoly, z: np.ndarray) -> np.ndarray:
    F, _, _, mag = _log_parts(p, z[:, 0], z[:, 1])
    with np.errstate(all="ignore"):
        return np.where(mag > 0, np.abs(F) / mag, np.inf)


def cluster(points: np.ndarray, tol: float) -> list[np.ndarray]:
    """Greedy clustering of complex points by relative distance."""
    out: list[np.ndarray] = []
    for z in points:
        for w in out:
            if np.all(np.abs(z - w) <= tol * np.maximum(1.0, np.abs(w))):
                break
        else:
            out.append(z)
    return out


def solve_system(
    f: LaurentPoly,
    h: LaurentPoly,
    *,
    residual_tol: float = 1e-7,
    cluster_tol: float = 1e-6,
    boundary_tol: float = 1e-9,
    eliminate: str | None = None,
) -> SystemSolution:
    """All common zeros of ``f`` and ``h`` in (C*)^2."""
    if eliminate is None:
        # smaller Sylvester pencil first
        fy = f.degree_range("y")
        hy = h.degree_range("y")
        fx = f.degree_range("x")
        hx = h.degree_range("x")
        size_y = (fy[1] - fy[0] + hy[1] - hy[0]) * max(fx[1] - fx[0], hx[1] - hx[0])
        size_x = (fx[1] - fx[0] + hx[1] - hx[0]) * max(fy[1] - fy[0], hy[1] - hy[0])
        eliminate = "y" if size_y <= size_x else "x"
    swap = eliminate == "x"
    P = _cleared(f, swap)
    Q = _cleared(h, swap)
    roots = eliminant_roots(sylvester_pencil(P, Q))
    roots = roots[(np.abs(roots) > boundary_tol) & np.isfinite(roots)]

    warnings = []
    starts = []
    for r in cluster(roots.reshape(-1, 1), cluster_tol):
        r0 = complex(r[0])
        # free-variable polynomial of f at the eliminated root
        coeffs = np.polynomial.polynomial.polyval(r0, P)  # ascending in the free variable
        nz = np.nonzero(np.abs(coeffs) > 1e-14 * np.abs(coeffs).max())[0]
        if nz.size < 2:
            continue
        trimmed = coeffs[nz[0] : nz[-1] + 1]
        for t in np.roots(trimmed[::-1]):
            if abs(t) > boundary_tol:
                starts.append((t, r0) if swap else (r0, t))
    candidates = []
    if starts:
        z = newton_polish(f, h, np.array(starts, dtype=complex))
        mag = np.abs(z)
        good = np.all(np.isfinite(z), axis=1) & np.all((mag > boundary_tol) & (mag < 1 / boundary_tol), axis=1)
        z = z[good]
        res = np.maximum(scaled_residual(f, z), scaled_residual(h, z))
        candidates = [(z[k], float(res[k])) for k in range(len(z)) if res[k] < residual_tol]
    points: list[np.ndarray] = []
    residuals: list[float] = []
    for z, res in sorted(candidates, key=lambda c: c[1]):
        if not any(np.all(np.abs(z - w) <= cluster_tol * np.maximum(1.0, np.abs(w))) for w in points):
            points.append(z)
            residuals.append(res)
    pts = np.array(points, dtype=complex).reshape(-1, 2)
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            if np.all(np.abs(pts[a] - pts[b]) < 1e-5 * np.maximum(1.0, np.abs(pts[a]))):
                warnings.append("ill-conditioned: two solutions within 1e-5")
    return SystemSolution(pts, np.array(residuals), eliminate, warnings)
