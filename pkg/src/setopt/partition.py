"""Minimal-value decomposition of ``F(x)`` and its partition set.

For a point ``x`` the distinct minimal values ``v_1, ..., v_w`` of ``F(x)`` are
enumerated in order of first occurrence among the selections.  Group ``j``
holds every selection index attaining ``v_j``; the partition set is the
Cartesian product of the groups.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .cone import Cone
from .errors import CapExceeded
from .finite_sets import minimal_presort, values_equal, weakly_minimal_naive
from .instances import Instance, evaluate

DEFAULT_CAP = 4096


@dataclass(frozen=True)
class MinDecomposition:
    values: np.ndarray  # F(x), shape (p, m)
    minimal_values: np.ndarray  # shape (omega, m)
    groups: tuple[tuple[int, ...], ...]
    weak_active: tuple[int, ...]

    @property
    def omega(self) -> int:
        return len(self.groups)

    @property
    def active(self) -> tuple[int, ...]:
        return tuple(sorted(i for g in self.groups for i in g))

    @property
    def partition_size(self) -> int:
        return math.prod(len(g) for g in self.groups)


def decompose_values(values, cone: Cone) -> MinDecomposition:
    values = np.asarray(values, dtype=float)
    reps = sorted(int(i) for i in minimal_presort(values, cone))
    assigned = np.zeros(values.shape[0], dtype=bool)
    groups = []
    for rep in reps:
        # first-occurrence representative: earliest index carrying this value
        members = np.flatnonzero(values_equal(values, values[rep]) & ~assigned)
        if members.size == 0:
            continue
        assigned[members] = True
        groups.append(members)
    groups.sort(key=lambda g: g[0])
    minimal = np.array([values[g[0]] for g in groups])
    weak = tuple(int(i) for i in weakly_minimal_naive(values, cone))
    return MinDecomposition(
        values=values,
        minimal_values=minimal,
        groups=tuple(tuple(int(i) for i in g) for g in groups),
        weak_active=weak,
    )


def decompose(instance: Instance, cone: Cone, x) -> MinDecomposition:
    return decompose_values(evaluate(instance, x), cone)


def partition_tuples(decomp: MinDecomposition, cap: int = DEFAULT_CAP) -> Iterator[tuple[int, ...]]:
    """Tuples of the partition set in lexicographic order.

    Raises :class:`CapExceeded` before yielding anything if the set is too large.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    size = decomp.partition_size
    if size > cap:
        raise CapExceeded(size, cap)
    return itertools.product(*decomp.groups)


def is_min_equal_wmin(decomp: MinDecomposition) -> bool:
    """Whether every weakly minimal value of ``F(x)`` is also minimal."""
    active = set(decomp.active)
    return all(i in active for i in decomp.weak_active)


@dataclass(frozen=True)
class RegularityReport:
    omega_at_x: int
    omega_min: int
    omega_max: int
    min_equals_wmin: bool
    samples: int
    radius: float

    @property
    def verdict(self) -> str:
        if self.omega_min == self.omega_max == self.omega_at_x and self.min_equals_wmin:
            return "consistent with regular"
        if self.omega_min != self.omega_max or self.omega_min != self.omega_at_x:
            return "witnessed non-constant omega"
        return "Min != WMin at x"


def regularity_probe(instance: Instance, cone: Cone, x, radius: float, samples: int,
                     rng: np.random.Generator | None = None) -> RegularityReport:
    """Sample omega uniformly in a ball around ``x``; evidence only, not a proof."""
    if radius <= 0 or samples < 1:
        raise ValueError("radius must be positive and samples >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    x = np.asarray(x, dtype=float).ravel()
    here = decompose(instance, cone, x)
    n = x.shape[0]
    direction = rng.standard_normal((samples, n))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radii = radius * rng.random(samples) ** (1.0 / n)
    omegas = [decompose(instance, cone, x + r * d).omega for r, d in zip(radii, direction)]
    return RegularityReport(
        omega_at_x=here.omega,
        omega_min=min(omegas),
        omega_max=max(omegas),
        min_equals_wmin=is_min_equal_wmin(here),
        samples=samples,
        radius=radius,
    )
