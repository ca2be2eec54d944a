"""Recursive least squares, the lagged regression system, and total least squares."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .battery import ArxTheta

MIN_SEGMENT = 5
VQQ_TOL = 1e-12
GAP_RTOL = 1e-9


class EstimationError(ValueError):
    pass


class UninformativeSegment(EstimationError):
    """TLS has no unique solution on this segment."""


@dataclass(frozen=True)
class RlsState:
    theta_hat: np.ndarray
    p: np.ndarray

    @classmethod
    def initial(cls, theta0=(0.0, 0.0, 0.0), p0_diag=(1e6, 1e6, 1e6)) -> "RlsState":
        return cls(np.array(theta0, dtype=float), np.diag(np.asarray(p0_diag, dtype=float)))


def rls_step(state: RlsState, vbar_k: float, phi_k, lam: float) -> RlsState:
    """One forgetting-factor RLS update; ``phi_k = [vbar_{k-1}, i_k, i_{k-1}]``."""
    if not 0 < lam <= 1:
        raise EstimationError(f"forgetting factor must be in (0, 1], got {lam}")
    phi = np.asarray(phi_k, dtype=float)
    p = state.p
    p_phi = p @ phi
    gain = p_phi / (lam + phi @ p_phi)
    theta = state.theta_hat + gain * (vbar_k - state.theta_hat @ phi)
    p_new = (p - np.outer(gain, phi @ p)) / lam
    return RlsState(theta, 0.5 * (p_new + p_new.T))


class Regression(NamedTuple):
    """``y`` (newest first) and the matching rows ``[vbar_{j-1}, i_j, i_{j-1}]`` of ``x``."""

    y: np.ndarray
    x: np.ndarray


def build_regression(vbar, current) -> Regression:
    vbar = np.asarray(vbar, dtype=float)
    current = np.asarray(current, dtype=float)
    if vbar.shape != current.shape or vbar.ndim != 1:
        raise EstimationError("vbar and current must be equal-length 1-D series")
    if len(vbar) < MIN_SEGMENT:
        raise EstimationError(f"segment too short: {len(vbar)} < {MIN_SEGMENT}")
    y = vbar[:0:-1]
    x = np.column_stack([vbar[-2::-1], current[:0:-1], current[-2::-1]])
    return Regression(y, x)


class SvdResult(NamedTuple):
    """``h = u @ diag(sigma) @ v.T`` with ``u`` m x n, ``v`` n x n."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def svd(h) -> SvdResult:
    """Thin SVD by one-sided Jacobi rotations (compiled when available)."""
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] < h.shape[1]:
        raise EstimationError(f"need an m x n matrix with m >= n, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise EstimationError("non-finite entries in matrix")
    a, v, _ = kernels.jacobi_rotate(h)
    sigma = np.sqrt(np.einsum("ij,ij->j", a, a))
    order = np.argsort(-sigma, kind="stable")
    sigma, a, v = sigma[order], a[:, order], v[:, order]
    u = np.zeros_like(a)
    nz = sigma > 0
    u[:, nz] = a[:, nz] / sigma[nz]
    if not nz.all():
        u = _complete_basis(u, nz)
    return SvdResult(u, sigma, v)


def _complete_basis(u: np.ndarray, filled: np.ndarray) -> np.ndarray:
    """Fill the zero-singular-value columns of ``u`` with orthonormal vectors."""
    m = u.shape[0]
    basis = [u[:, j] for j in np.flatnonzero(filled)]
    for j in np.flatnonzero(~filled):
        best = None
        for k in range(m):
            cand = np.zeros(m)
            cand[k] = 1.0
            for _ in range(2):  # re-orthogonalise for stability
                for b in basis:
                    cand -= (b @ cand) * b
            norm = np.linalg.norm(cand)
            if best is None or norm > best[0]:
                best = (norm, cand)
            if norm > 0.5:
                break
        vec = best[1] / best[0]
        basis.append(vec)
        u[:, j] = vec
    return u


def tls_solve(reg: Regression) -> ArxTheta:
    """Total least squares via the right singular vector of the smallest singular value."""
    h = np.column_stack([reg.x, reg.y])
    res = svd(h)
    s = res.sigma
    if s[-2] - s[-1] <= GAP_RTOL * s[0]:
        raise UninformativeSegment("smallest singular values coincide; solution not unique")
    vec = res.v[:, -1]
    if abs(vec[-1]) < VQQ_TOL:
        raise UninformativeSegment(f"|v_qq| = {abs(vec[-1]):.3g} below {VQQ_TOL}")
    return ArxTheta(*(-vec[:-1] / vec[-1]).tolist())
