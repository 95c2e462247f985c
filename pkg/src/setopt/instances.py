"""Set-valued objectives given by finitely many smooth selections.

An :class:`Instance` bundles two vectorized callables:

* ``values(x)``    -> array ``(p, m)``, row ``i`` is ``f^i(x)``
* ``jacobians(x)`` -> array ``(p, m, n)``, slice ``i`` is the Jacobian of ``f^i``

Selections are indexed from 0.  Evaluators must be pure functions of ``x``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .cone import Cone, make_orthant
from .errors import DimensionMismatch, NonFiniteValue, UnknownInstance


@dataclass(frozen=True, eq=False)
class Instance:
    name: str
    n: int
    m: int
    p: int
    values: Callable[[np.ndarray], np.ndarray]
    jacobians: Callable[[np.ndarray], np.ndarray]
    sampling_box: np.ndarray
    cone: Cone | None = None
    meta: dict = field(default_factory=dict)

    def default_cone(self) -> Cone:
        return self.cone if self.cone is not None else make_orthant(self.m)


def _point(instance: Instance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != instance.n:
        raise DimensionMismatch(f"{instance.name} expects x of dimension {instance.n}, got {x.shape[0]}")
    return x


def _check_finite(arr: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        bad = np.flatnonzero(~np.isfinite(arr.reshape(arr.shape[0], -1)).all(axis=1))
        raise NonFiniteValue(int(bad[0]), what)
    return arr


def evaluate(instance: Instance, x) -> np.ndarray:
    """The image ``F(x)`` as a ``(p, m)`` array, selection order preserved."""
    vals = np.asarray(instance.values(_point(instance, x)), dtype=float)
    if vals.shape != (instance.p, instance.m):
        raise DimensionMismatch(f"values returned shape {vals.shape}, expected {(instance.p, instance.m)}")
    return _check_finite(vals, "value")


def jacobians(instance: Instance, x, indices: Sequence[int] | None = None) -> np.ndarray:
    jac = np.asarray(instance.jacobians(_point(instance, x)), dtype=float)
    if jac.shape != (instance.p, instance.m, instance.n):
        raise DimensionMismatch(
            f"jacobians returned shape {jac.shape}, expected {(instance.p, instance.m, instance.n)}"
        )
    if indices is not None:
        jac = jac[np.asarray(indices, dtype=int)]
    return _check_finite(jac, "jacobian")


def jacobian(instance: Instance, i: int, x) -> np.ndarray:
    """Analytic ``m x n`` Jacobian of selection ``i`` at ``x``."""
    if not 0 <= i < instance.p:
        raise IndexError(f"selection index {i} out of range for p={instance.p}")
    return jacobians(instance, x, [i])[0]


def fd_check(instance: Instance, x, h: float = 1e-5) -> float:
    """Max relative deviation between analytic and central-difference Jacobians.

    Relative error uses ``max(1, |analytic entry|)`` as denominator.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = _point(instance, x)
    analytic = jacobians(instance, x)
    numeric = np.empty_like(analytic)
    for k in range(instance.n):
        step = np.zeros(instance.n)
        step[k] = h
        numeric[:, :, k] = (evaluate(instance, x + step) - evaluate(instance, x - step)) / (2 * h)
    return float(np.max(np.abs(numeric - analytic) / np.maximum(1.0, np.abs(analytic))))


def from_selections(
    name: str,
    n: int,
    m: int,
    selections: Sequence[Callable],
    selection_jacobians: Sequence[Callable],
    sampling_box,
    cone: Cone | None = None,
) -> Instance:
    """Wrap per-selection callables ``x -> f^i(x)`` and ``x -> Df^i(x)``."""
    if len(selections) != len(selection_jacobians) or not selections:
        raise ValueError("need one Jacobian per selection and at least one selection")

    def values(x):
        return np.array([np.reshape(f(x), m) for f in selections], dtype=float)

    def jacs(x):
        return np.array([np.reshape(J(x), (m, n)) for J in selection_jacobians], dtype=float)

    return Instance(name, n, m, len(selections), values, jacs, _box(sampling_box, n), cone)


def _box(box, n: int) -> np.ndarray:
    box = np.array(box, dtype=float)
    if box.shape == (2,):
        box = np.tile(box, (n, 1))
    if box.shape != (n, 2) or np.any(box[:, 0] > box[:, 1]):
        raise ValueError(f"sampling box must be {n} pairs [low, high]")
    return box


# --------------------------------------------------------------------------
# Quadratic family:  f^i_k(x) = 1/2 ||x - c_{i,k}||^2 + o_{i,k}


def quadratic_family(name: str, centers, offsets=None, sampling_box=None, cone=None, meta=None) -> Instance:
    """Instance whose components are shifted squared distances.

    ``centers`` has shape ``(p, m, n)``; ``offsets`` (default zero) ``(p, m)``.
    """
    centers = np.array(centers, dtype=float)
    if centers.ndim != 3:
        raise DimensionMismatch("centers must have shape (p, m, n)")
    p, m, n = centers.shape
    offsets = np.zeros((p, m)) if offsets is None else np.array(offsets, dtype=float)
    if offsets.shape != (p, m):
        raise DimensionMismatch(f"offsets must have shape {(p, m)}")
    centers.setflags(write=False)
    offsets.setflags(write=False)

    def values(x):
        d = x - centers
        return 0.5 * np.einsum("pmn,pmn->pm", d, d) + offsets

    def jacs(x):
        return x - centers

    if sampling_box is None:
        lo, hi = centers.min(), centers.max()
        sampling_box = [lo - 1.0, hi + 1.0]
    return Instance(name, n, m, p, values, jacs, _box(sampling_box, n), cone, dict(meta or {}))


# --------------------------------------------------------------------------
# Built-in test instances


def _test1() -> Instance:
    # f^i(x) = (x, x/2 sin x) + sin^2(x) * (2s-1) * (1, -1),  s = (i-1)/4
    slope = 2 * (np.arange(5) / 4.0) - 1.0
    direction = np.stack([slope, -slope], axis=1)

    def values(x):
        t = x[0]
        base = np.array([t, 0.5 * t * np.sin(t)])
        return base + np.sin(t) ** 2 * direction

    def jacs(x):
        t = x[0]
        dbase = np.array([1.0, 0.5 * np.sin(t) + 0.5 * t * np.cos(t)])
        d = dbase + 2 * np.sin(t) * np.cos(t) * direction
        return d[:, :, None]

    return Instance("test1", 1, 2, 5, values, jacs, _box([-5 * np.pi, 5 * np.pi], 1))


def uncertainty_grid() -> np.ndarray:
    """The 100 uncertainty points ``U = U1 x U1``, enumerated row-major."""
    u1 = -1.0 + 2.0 * np.arange(10) / 9.0
    return np.array([(a, b) for a in u1 for b in u1])


TEST2_LOCATIONS = np.array([[0.0, 0.0], [8.0, 0.0], [0.0, 8.0]])


def _test2() -> Instance:
    grid = uncertainty_grid()
    centers = TEST2_LOCATIONS[None, :, :] + grid[:, None, :]
    return quadratic_family(
        "test2",
        centers,
        sampling_box=[-50.0, 50.0],
        meta={"locations": TEST2_LOCATIONS.tolist(), "grid": grid.tolist()},
    )


def _test3() -> Instance:
    theta = 2 * np.pi * np.arange(100) / 100.0
    c3 = np.cos(theta) ** 3
    s3 = np.sin(theta) ** 3

    def values(x):
        x1, x2 = x
        first = np.exp(x1 / 2) * np.cos(x2) + x1 * np.cos(x2) * c3 - x2 * np.sin(x2) * s3
        # exponent x2/20 in the second component differs from x1/2 in the first; kept as defined
        second = np.exp(x2 / 20) * np.sin(x1) + x1 * np.sin(x2) * c3 + x2 * np.cos(x2) * s3
        return np.stack([first, second], axis=1)

    def jacs(x):
        x1, x2 = x
        sx2, cx2 = np.sin(x2), np.cos(x2)
        d11 = 0.5 * np.exp(x1 / 2) * cx2 + cx2 * c3
        d12 = -np.exp(x1 / 2) * sx2 - x1 * sx2 * c3 - (sx2 + x2 * cx2) * s3
        d21 = np.exp(x2 / 20) * np.cos(x1) + sx2 * c3
        d22 = np.exp(x2 / 20) * np.sin(x1) / 20 + x1 * cx2 * c3 + (cx2 - x2 * sx2) * s3
        return np.stack([np.stack([d11, d12], axis=1), np.stack([d21, d22], axis=1)], axis=1)

    return Instance("test3", 2, 2, 100, values, jacs, _box([-10 * np.pi, 10 * np.pi], 2))


_REGISTRY: dict[str, Callable[[], Instance]] = {
    "test1": _test1,
    "test2": _test2,
    "test3": _test3,
}


def register(name: str, factory: Callable[[], Instance]) -> None:
    """Make a user-defined instance available to :func:`builtin` and the CLI."""
    _REGISTRY[name] = factory


def builtin(name: str) -> Instance:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownInstance(f"unknown instance {name!r}; known: {sorted(_REGISTRY)}") from None
    return factory()


def from_json(data: dict) -> Instance:
    """Instance from a JSON descriptor (see README for the schema)."""
    from .cone import validate

    cone = None
    if data.get("cone") is not None:
        cone = validate(data["cone"]["dual_rows"], data["cone"]["e"])
    if "builtin" in data:
        inst = builtin(data["builtin"])
        if cone is not None:
            if cone.m != inst.m:
                raise DimensionMismatch(f"cone dimension {cone.m} != instance m={inst.m}")
            inst = Instance(inst.name, inst.n, inst.m, inst.p, inst.values, inst.jacobians,
                            inst.sampling_box, cone, inst.meta)
        return inst
    centers = np.array(data["centers"], dtype=float)
    p, m, n = centers.shape
    for key, expected in (("n", n), ("m", m), ("p", p)):
        if key in data and int(data[key]) != expected:
            raise DimensionMismatch(f"declared {key}={data[key]} but centers imply {expected}")
    if cone is not None and cone.m != m:
        raise DimensionMismatch(f"cone dimension {cone.m} != instance m={m}")
    return quadratic_family(
        data.get("name", "quadratic"),
        centers,
        data.get("offsets"),
        data.get("sampling_box"),
        cone,
    )


def load(name_or_path: str) -> Instance:
    """Resolve a CLI ``--instance`` argument: a registered name or a JSON file."""
    if name_or_path in _REGISTRY:
        return builtin(name_or_path)
    path = Path(name_or_path)
    if path.suffix == ".json" or path.exists():
        with open(path) as fh:
            return from_json(json.load(fh))
    raise UnknownInstance(f"{name_or_path!r} is neither a registered instance nor a JSON file")
