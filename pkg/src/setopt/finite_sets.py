"""Minimal elements of finite vector sets and the lower set less relations.

Points are passed as an ``(N, m)`` array; results are index arrays into it so
callers can map back to selection indices.
"""

from __future__ import annotations

import numpy as np

from .cone import TOL_CONE, Cone, in_cone, in_int_cone, presort_value
from .errors import DimensionMismatch

#: Relative tolerance for treating two image points as the same value.
TOL_EQ = 1e-9


def as_points(points, m: int | None = None) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise DimensionMismatch(f"expected a nonempty (N, m) array, got shape {pts.shape}")
    if m is not None and pts.shape[1] != m:
        raise DimensionMismatch(f"points have dimension {pts.shape[1]}, cone has {m}")
    return pts


def values_equal(y, z, tol: float = TOL_EQ):
    """Vector equality up to ``tol`` relative to the larger sup-norm (floored at 1)."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.max(np.abs(y), axis=-1), np.max(np.abs(z), axis=-1)))
    return np.max(np.abs(y - z), axis=-1) <= tol * scale


def _pairwise(points: np.ndarray):
    """``diff[i, j] = points[i] - points[j]`` and the matching equality mask."""
    diff = points[:, None, :] - points[None, :, :]
    size = np.maximum(1.0, np.max(np.abs(points), axis=1))
    scale = np.maximum(size[:, None], size[None, :])
    equal = np.max(np.abs(diff), axis=-1) <= TOL_EQ * scale
    return diff, equal


def minimal_naive(points, cone: Cone) -> np.ndarray:
    """All indices whose value is minimal, by exhaustive pairwise comparison."""
    pts = as_points(points, cone.m)
    diff, equal = _pairwise(pts)
    dominated = in_cone(cone, diff) & ~equal
    return np.flatnonzero(~dominated.any(axis=1))


def weakly_minimal_naive(points, cone: Cone) -> np.ndarray:
    """Indices not strictly dominated by any point of a different value."""
    pts = as_points(points, cone.m)
    diff, equal = _pairwise(pts)
    # points equal up to TOL_EQ never dominate each other, matching minimal_naive
    strictly = in_int_cone(cone, diff) & ~equal
    return np.flatnonzero(~strictly.any(axis=1))


def minimal_presort(points, cone: Cone, comparisons: list | None = None) -> np.ndarray:
    """Minimal values via presorting and one forward pass.

    Indices are sorted by the strongly monotone key ``presort_value`` (stable,
    so ties keep index order) and each candidate is kept iff no point kept so
    far dominates it.  A point can only be dominated by points with a smaller
    key, so the forward pass is exact.  One index is returned per distinct
    minimal value, in presort order.

    If ``comparisons`` is given, every ``(candidate, kept)`` pair that is
    compared is appended to it.
    """
    pts = as_points(points, cone.m)
    keys = presort_value(cone, pts)
    order = np.argsort(keys, kind="stable")
    rows = cone.dual_rows.T
    abs_rows = np.abs(rows)
    kept = np.empty(len(order), dtype=int)
    kept_pts = np.empty_like(pts)
    count = 0
    for idx in order:
        if count:
            if comparisons is not None:
                comparisons.extend((int(idx), int(k)) for k in kept[:count])
            # same test as cone.leq(kept, candidate), inlined for speed
            d = pts[idx] - kept_pts[:count]
            if (d @ rows >= -TOL_CONE * (np.abs(d) @ abs_rows)).all(axis=1).any():
                continue
        kept[count] = idx
        kept_pts[count] = pts[idx]
        count += 1
    return kept[:count].copy()


def lower_less(A, B, cone: Cone) -> bool:
    """``A <=^l B``: every b in B lies in A + K."""
    A = as_points(A, cone.m)
    B = as_points(B, cone.m)
    covered = in_cone(cone, B[:, None, :] - A[None, :, :]).any(axis=1)
    return bool(covered.all())


def strict_lower_less(A, B, cone: Cone) -> bool:
    """``A <^l B``: every b in B lies in A + int K."""
    A = as_points(A, cone.m)
    B = as_points(B, cone.m)
    covered = in_int_cone(cone, B[:, None, :] - A[None, :, :]).any(axis=1)
    return bool(covered.all())


def domination_check(points, cone: Cone, minimal=None) -> bool:
    """Every point is dominated by (or equal to) some minimal point.

    ``minimal`` may pass precomputed indices from :func:`minimal_naive`.
    """
    pts = as_points(points, cone.m)
    mins = pts[minimal_naive(pts, cone) if minimal is None else np.asarray(minimal, dtype=int)]
    return lower_less(mins, pts, cone)
