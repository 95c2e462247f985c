"""Direction-finding subproblem.

For a tuple ``a`` of the partition set the objective is

    phi_x(a, u) = max_j psi_e(J_{a_j}(x) u) + 1/2 ||u||^2

With a polyhedral cone, ``psi_e(J u) = max_i c_{j,i} . u`` where
``c_{j,i} = J_{a_j}^T a_i / (a_i . e)``.  So the subproblem is
``min_u max_l c_l . u + 1/2 ||u||^2``.  Writing the max as a max over the
simplex, ``max_{lam} (C^T lam) . u``, and swapping min and max (the function
is convex in ``u`` and linear in ``lam``) gives ``u = -C^T lam`` and the dual
``max_lam -1/2 ||C^T lam||^2``.  Hence the optimal ``u`` is minus the
least-norm point ``z`` of ``conv{c_l}``, the optimal value is
``-1/2 ||z||^2``, and ``lam`` are the multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cone import Cone, scalarize
from .errors import NonConvergence, NotStationary
from .instances import Instance, jacobians
from .partition import DEFAULT_CAP, MinDecomposition, decompose, partition_tuples

TOL_MNP = 1e-12
TOL_SUB = 1e-9
TOL_STAT = 1e-4
MAX_MNP_ITERS = 1000


def _affine_minimizer(P: np.ndarray) -> np.ndarray:
    """Weights (summing to 1) of the least-norm point of the affine hull of rows of P."""
    if P.shape[0] == 1:
        return np.ones(1)
    # the base weight is 1 - sum(beta) and so only absolutely accurate;
    # anchoring at the shortest point keeps that error harmless
    b = int(np.argmin(np.einsum("ij,ij->i", P, P)))
    others = np.delete(np.arange(P.shape[0]), b)
    base = P[b]
    D = (P[others] - base).T
    beta, *_ = np.linalg.lstsq(D, -base, rcond=None)
    # iterative refinement; points of very different norms otherwise leave
    # z . c inaccurate at the level of eps * |c|^2
    for _ in range(2):
        resid = base + D @ beta
        delta, *_ = np.linalg.lstsq(D, -resid, rcond=None)
        beta = beta + delta
    alpha = np.empty(P.shape[0])
    alpha[b] = 1.0 - beta.sum()
    alpha[others] = beta
    return alpha


def min_norm_point(points, tol: float = TOL_MNP, max_iter: int = MAX_MNP_ITERS):
    """Least-norm point of the convex hull of ``points`` (Wolfe's algorithm).

    Returns ``(z, weights)`` with ``z = weights @ points`` and ``weights`` on
    the unit simplex.  Stops once ``z . c >= |z|^2 - tol (1 + |z|^2)`` for
    every point ``c``.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    L = P.shape[0]
    if L == 0:
        raise ValueError("need at least one point")
    sq = np.einsum("ij,ij->i", P, P)
    # floor for the optimality test: rounding error of the dot products z . c
    scale = 64 * np.finfo(float).eps * float(np.sqrt(sq.max()))
    corral = [int(np.argmin(sq))]
    lam = np.ones(1)
    z = P[corral[0]].copy()
    eps = 1e-15

    for it in range(max_iter):
        zz = z @ z
        dots = P @ z
        j = int(np.argmin(dots))
        if dots[j] >= zz - tol * (1.0 + zz) - scale * np.sqrt(zz) or j in corral:
            break
        corral.append(j)
        lam = np.append(lam, 0.0)
        # minor cycles: move toward the affine minimizer of the corral,
        # dropping points whose weight would turn negative
        while True:
            alpha = _affine_minimizer(P[corral])
            if np.all(alpha > eps):
                lam = alpha
                break
            neg = alpha <= eps
            denom = lam - alpha
            ratios = np.full(lam.shape, np.inf)
            ok = neg & (denom > 0)
            ratios[ok] = lam[ok] / denom[ok]
            ratios[neg & ~ok] = 0.0
            leaving = int(np.argmin(ratios))
            theta = min(1.0, float(ratios[leaving]))
            lam = theta * alpha + (1.0 - theta) * lam
            keep = lam > eps
            keep[leaving] = False
            if not keep.any():
                keep[int(np.argmax(lam))] = True
            corral = [c for c, k in zip(corral, keep) if k]
            lam = lam[keep]
            lam = lam / lam.sum()
        if len(corral) > P.shape[1]:
            # affine hull is the whole space, so its least-norm point is 0
            z_new = np.zeros(P.shape[1])
        else:
            z_new = lam @ P[corral]
        if z_new @ z_new >= zz and j not in corral:
            # no progress possible at working precision
            break
        z = z_new
    else:
        zz = z @ z
        residual = float(zz - tol * (1 + zz) - scale * np.sqrt(zz) - np.min(P @ z))
        weights = np.zeros(L)
        weights[corral] = lam
        raise NonConvergence(z, weights, residual, max_iter)

    if 1 < len(corral) <= P.shape[1]:
        z, lam = _polish(P[corral], z, lam)
    weights = np.zeros(L)
    weights[corral] = lam
    return z, weights


def _polish(S: np.ndarray, z: np.ndarray, lam: np.ndarray):
    """Enforce ``(c_i - c_b) . z = 0`` on the final corral.

    Corrections move along the differences ``c_i - c_b`` so ``z`` stays in
    the affine hull.  With long, nearly parallel rows this pins ``z . c_i``
    far more tightly than forming ``lam @ S``.
    """
    b = int(np.argmax(lam))
    others = np.delete(np.arange(S.shape[0]), b)
    D = S[others] - S[b]
    for _ in range(2):
        y, *_ = np.linalg.lstsq(D.T, z, rcond=None)
        new_lam = lam.copy()
        new_lam[others] -= y
        new_lam[b] += y.sum()
        if np.any(new_lam < 0):
            break
        z_new = z - D.T @ y
        dots = S @ z_new
        if np.ptp(dots) >= np.ptp(S @ z):
            break
        z, lam = z_new, new_lam
    return z, lam


def wolfe_residual(points, z) -> float:
    """How far ``z`` is from satisfying Wolfe's criterion (<= 0 means satisfied)."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    z = np.asarray(z, dtype=float)
    zz = z @ z
    return float(zz - np.min(P @ z)) / (1.0 + zz)


def assemble_rows(instance: Instance, cone: Cone, x, a: Sequence[int], jac: np.ndarray | None = None) -> np.ndarray:
    """Argument-space vectors ``c_{j,i}``, ordered tuple-position major.

    Row ``j * r + i`` corresponds to tuple position ``j`` and dual row ``i``.
    """
    J = jacobians(instance, x, a) if jac is None else jac[np.asarray(a, dtype=int)]
    # (w, m, n) x (r, m) -> (w, r, n)
    rows = np.einsum("wmn,rm->wrn", J, cone.scaled_rows)
    return rows.reshape(-1, instance.n)


def phi_value(instance: Instance, cone: Cone, x, a, u, jac: np.ndarray | None = None) -> float:
    """``max_j psi_e(J_{a_j} u) + 1/2 |u|^2`` evaluated directly."""
    J = jacobians(instance, x, a) if jac is None else jac[np.asarray(a, dtype=int)]
    u = np.asarray(u, dtype=float)
    return float(np.max(scalarize(cone, J @ u)) + 0.5 * u @ u)


@dataclass(frozen=True)
class TupleSolution:
    a: tuple[int, ...]
    u: np.ndarray
    value: float
    weights: np.ndarray  # shape (w * r,), simplex


def solve_tuple(instance: Instance, cone: Cone, x, a, jac: np.ndarray | None = None) -> TupleSolution:
    a = tuple(int(i) for i in a)
    if jac is None:
        jac = jacobians(instance, x)
    rows = assemble_rows(instance, cone, x, a, jac)
    z, weights = min_norm_point(rows)
    u = -z
    value = phi_value(instance, cone, x, a, u, jac)
    gap = abs(value + 0.5 * u @ u)
    floor = 64 * np.finfo(float).eps * np.abs(rows).max() * np.abs(u).sum()
    if gap > TOL_SUB * (1.0 + u @ u) + floor:
        raise NonConvergence(z, weights, gap, 0, f"duality gap {gap:.3e} after min-norm-point solve")
    return TupleSolution(a, u, value, weights)


@dataclass(frozen=True)
class DirectionResult:
    a: tuple[int, ...]
    u: np.ndarray
    phi: float
    weights: np.ndarray
    decomposition: MinDecomposition
    per_tuple_values: list = field(default_factory=list)

    @property
    def norm_u(self) -> float:
        return float(np.linalg.norm(self.u))


def best_direction(instance: Instance, cone: Cone, x, cap: int = DEFAULT_CAP,
                   decomp: MinDecomposition | None = None,
                   jac: np.ndarray | None = None) -> DirectionResult:
    """Minimize ``phi_x(a, u)`` over the partition set and all directions.

    Ties within ``TOL_SUB`` keep the earliest tuple in lexicographic order.
    """
    if decomp is None:
        decomp = decompose(instance, cone, x)
    if jac is None:
        jac = jacobians(instance, x)
    best = None
    values = []
    for a in partition_tuples(decomp, cap):
        sol = solve_tuple(instance, cone, x, a, jac)
        values.append((sol.a, sol.value))
        if best is None or sol.value < best.value - TOL_SUB:
            best = sol
    return DirectionResult(best.a, best.u, best.value, best.weights, decomp, values)


def stationarity_certificate(result: DirectionResult, cone: Cone, tol_stat: float = TOL_STAT) -> np.ndarray:
    """Multipliers ``mu_j`` in K* (shape ``(w, m)``) for the chosen tuple.

    ``mu_j = sum_i lam_{j,i} a_i / (a_i . e)``, so ``sum_j J_{a_j}^T mu_j = -u``.
    """
    if result.norm_u > tol_stat:
        raise NotStationary(f"|u| = {result.norm_u:.3e} exceeds {tol_stat:g}")
    lam = result.weights.reshape(len(result.a), cone.r)
    return lam @ cone.scaled_rows


def certificate_residual(instance: Instance, x, a, mu) -> float:
    """``|sum_j J_{a_j}(x)^T mu_j|``."""
    J = jacobians(instance, x, a)
    return float(np.linalg.norm(np.einsum("wmn,wm->n", J, np.asarray(mu))))
