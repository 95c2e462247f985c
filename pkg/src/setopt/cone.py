"""Polyhedral ordering cones and the scalarizing functional they induce.

A cone is stored through its dual rows ``a_1, ..., a_r``::

    K = { y : a_i . y >= 0 for every i }

together with a direction ``e`` in the interior of ``K``.  With this
representation the scalarization

    psi_e(y) = min { t : t*e - y in K }

has the closed form ``max_i (a_i . y) / (a_i . e)``, and the dual cone ``K*``
is the conic hull of the rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotPointed, NotSolid, ZeroRow

#: Relative tolerance used by the membership tests.
TOL_CONE = 1e-10


@dataclass(frozen=True, eq=False)
class Cone:
    dual_rows: np.ndarray
    e: np.ndarray

    @property
    def m(self) -> int:
        return self.dual_rows.shape[1]

    @property
    def r(self) -> int:
        return self.dual_rows.shape[0]

    @property
    def row_scale(self) -> np.ndarray:
        """``a_i . e`` for every row (strictly positive)."""
        return self.dual_rows @ self.e

    @property
    def scaled_rows(self) -> np.ndarray:
        """Rows divided by ``a_i . e``; ``psi_e(y) = max(scaled_rows @ y)``."""
        return self.dual_rows / self.row_scale[:, None]

    @property
    def is_orthant(self) -> bool:
        return (
            self.dual_rows.shape[0] == self.m
            and np.array_equal(self.dual_rows, np.eye(self.m))
            and np.array_equal(self.e, np.ones(self.m))
        )

    def to_dict(self) -> dict:
        return {"dual_rows": self.dual_rows.tolist(), "e": self.e.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Cone":
        return validate(data["dual_rows"], data["e"])

    def __repr__(self) -> str:
        if self.is_orthant:
            return f"Cone(orthant, m={self.m})"
        return f"Cone(r={self.r}, m={self.m}, e={self.e.tolist()})"


def make_orthant(m: int) -> Cone:
    """Standard ordering cone R^m_+ with ``e = (1, ..., 1)``."""
    if m < 1:
        raise ValueError(f"orthant dimension must be >= 1, got {m}")
    rows = np.eye(m)
    e = np.ones(m)
    rows.setflags(write=False)
    e.setflags(write=False)
    return Cone(rows, e)


def validate(dual_rows, e) -> Cone:
    """Build a :class:`Cone` after checking it is solid, pointed and has no zero rows."""
    rows = np.array(dual_rows, dtype=float, ndmin=2)
    e = np.array(e, dtype=float).ravel()
    if rows.ndim != 2 or rows.shape[1] != e.shape[0]:
        raise DimensionMismatch(
            f"dual rows of shape {rows.shape} do not match e of length {e.shape[0]}"
        )
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0.0):
        raise ZeroRow(f"row {int(np.argmin(norms))} is the zero vector")
    scale = rows @ e
    bad = np.flatnonzero(scale <= 0.0)
    if bad.size:
        raise NotSolid(f"a_{int(bad[0])} . e = {scale[bad[0]]:g} is not positive")
    if np.linalg.matrix_rank(rows) < rows.shape[1]:
        raise NotPointed(
            f"dual rows have rank {np.linalg.matrix_rank(rows)} < m = {rows.shape[1]}"
        )
    rows.setflags(write=False)
    e.setflags(write=False)
    return Cone(rows, e)


def _check(cone: Cone, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != cone.m:
        raise DimensionMismatch(f"expected vectors of dimension {cone.m}, got {y.shape}")
    return y


def scalarize(cone: Cone, y) -> float | np.ndarray:
    """Gerstewitz functional ``psi_e``; accepts a vector or a stack of vectors."""
    y = _check(cone, y)
    return np.max(y @ cone.scaled_rows.T, axis=-1)


def _margins(cone: Cone, y: np.ndarray):
    # slack scales with the rounding bound of each dot product, row by row;
    # a norm-of-y slack would misclassify strongly anisotropic differences
    if cone.is_orthant:
        return y, TOL_CONE * np.abs(y)
    prod = y @ cone.dual_rows.T
    slack = TOL_CONE * (np.abs(y) @ np.abs(cone.dual_rows).T)
    return prod, slack


def in_cone(cone: Cone, y) -> bool | np.ndarray:
    y = _check(cone, y)
    prod, slack = _margins(cone, y)
    return np.all(prod >= -slack, axis=-1)


def in_int_cone(cone: Cone, y) -> bool | np.ndarray:
    y = _check(cone, y)
    prod, slack = _margins(cone, y)
    return np.all(prod > slack, axis=-1)


def leq(cone: Cone, y, z) -> bool | np.ndarray:
    """``y <= z`` in the cone order, i.e. ``z - y`` in K."""
    return in_cone(cone, np.asarray(z, dtype=float) - np.asarray(y, dtype=float))


def lt(cone: Cone, y, z) -> bool | np.ndarray:
    """Strict order: ``z - y`` in int K."""
    return in_int_cone(cone, np.asarray(z, dtype=float) - np.asarray(y, dtype=float))


def presort_value(cone: Cone, y) -> float | np.ndarray:
    """Strongly monotone presort key ``sum_i (a_i . y) / (a_i . e)``.

    Reduces to ``sum(y)`` on the standard orthant.
    """
    y = _check(cone, y)
    return np.sum(y @ cone.scaled_rows.T, axis=-1)


def lipschitz_constant(cone: Cone) -> float:
    """Lipschitz constant of ``psi_e`` w.r.t. the Euclidean norm."""
    return float(np.max(np.linalg.norm(cone.scaled_rows, axis=1)))
