"""Herglotz functions on the unit disk: holomorphic, with nonnegative real part.

Three representations are supported:

* :class:`AtomicMeasure` -- a finite convex combination of Herglotz kernels,
  ``sum_j w_j (e^{i theta_j} + w) / (e^{i theta_j} - w)``.
* :class:`RationalCayleyPlus` -- ``1/(1 - w) + a`` with ``a > 0``.  Note that
  its value at the origin is ``1 + a``, not 1.
* :class:`Constant` -- ``p(w) = value``.

All evaluation routines accept scalars or numpy arrays of points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, InvariantError

DEFAULT_RADII = (0.1, 0.3, 0.5, 0.7, 0.9, 0.95)
DEFAULT_N_ANGLES = 64

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class AtomicMeasure:
    atoms: tuple  # ((theta, weight), ...)

    def __post_init__(self):
        atoms = tuple((float(t), float(lam)) for t, lam in self.atoms)
        if not atoms:
            raise InvariantError("atomic measure needs at least one atom")
        weights = np.array([lam for _, lam in atoms])
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvariantError("atomic measure weights must be nonnegative")
        total = weights.sum()
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise InvariantError(f"atomic measure weights must sum to 1, got {float(total)!r}")
        object.__setattr__(self, "atoms", atoms)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([t for t, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([lam for _, lam in self.atoms])


@dataclass(frozen=True)
class RationalCayleyPlus:
    a: float

    def __post_init__(self):
        if not np.isfinite(self.a) or self.a <= 0:
            raise InvariantError(f"RationalCayleyPlus needs a > 0, got {self.a}")
        object.__setattr__(self, "a", float(self.a))


@dataclass(frozen=True)
class Constant:
    value: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0:
            raise InvariantError(f"constant Herglotz function needs value >= 0, got {self.value}")
        object.__setattr__(self, "value", float(self.value))


HerglotzSpec = Union[AtomicMeasure, RationalCayleyPlus, Constant]


def single_atom(theta: float = 0.0) -> AtomicMeasure:
    return AtomicMeasure(((theta, 1.0),))


def evaluate(h: HerglotzSpec, w, order: int = 0):
    """Evaluate p(w), p'(w) or p''(w) (``order`` 0, 1 or 2).

    Raises DomainError if any point has modulus >= 1.
    """
    w_arr = np.asarray(w, dtype=complex)
    if np.any(~(np.abs(w_arr) < 1)):
        raise DomainError("Herglotz function evaluated outside the open unit disk")
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")

    if isinstance(h, Constant):
        out = np.full(w_arr.shape, h.value if order == 0 else 0.0, dtype=complex)
    elif isinstance(h, RationalCayleyPlus):
        r = 1.0 / (1.0 - w_arr)
        out = (r + h.a, r * r, 2.0 * r ** 3)[order]
    elif isinstance(h, AtomicMeasure):
        out = np.zeros(w_arr.shape, dtype=complex)
        # (e + w)/(e - w) = -1 + 2e/(e - w)
        for theta, lam in h.atoms:
            if lam == 0.0:
                continue
            e = np.exp(1j * theta)
            r = 1.0 / (e - w_arr)
            if order == 0:
                out += lam * (2.0 * e * r - 1.0)
            elif order == 1:
                out += lam * (2.0 * e * r * r)
            else:
                out += lam * (4.0 * e * r ** 3)
    else:
        raise TypeError(f"not a Herglotz spec: {h!r}")

    if np.ndim(w) == 0:
        return complex(out)
    return out


@dataclass(frozen=True)
class ValidationReport:
    min_real_part: float
    value_at_0: complex
    n_points: int

    @property
    def passed(self) -> bool:
        return self.min_real_part >= -1e-9

    def to_dict(self) -> dict:
        return {
            "min_real_part": self.min_real_part,
            "value_at_0": [self.value_at_0.real, self.value_at_0.imag],
            "n_points": self.n_points,
            "passed": self.passed,
        }


def validate(h: HerglotzSpec, radii: Sequence[float] = DEFAULT_RADII,
             n_angles: int = DEFAULT_N_ANGLES) -> ValidationReport:
    """Check Re p >= 0 on a polar grid of ``radii`` x ``n_angles`` points."""
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0 or n_angles < 1:
        raise InvariantError("validation grid is empty")
    if np.any(radii <= 0) or np.any(radii >= 1):
        raise DomainError("validation radii must lie in (0, 1)")
    angles = 2 * np.pi * np.arange(n_angles) / n_angles
    pts = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    vals = evaluate(h, pts)
    return ValidationReport(float(vals.real.min()), evaluate(h, 0.0), pts.size)


def to_json(h: HerglotzSpec) -> dict:
    if isinstance(h, AtomicMeasure):
        return {"variant": "atomic", "atoms": [[t, lam] for t, lam in h.atoms]}
    if isinstance(h, RationalCayleyPlus):
        return {"variant": "rational_cayley_plus", "a": h.a}
    if isinstance(h, Constant):
        return {"variant": "constant", "value": h.value}
    raise TypeError(f"not a Herglotz spec: {h!r}")


def from_json(obj: dict) -> HerglotzSpec:
    """Inverse of :func:`to_json`.  Raises InvariantError on bad content."""
    if not isinstance(obj, dict) or "variant" not in obj:
        raise InvariantError("herglotz spec must be an object with a 'variant' key")
    variant = obj["variant"]
    if variant == "atomic":
        atoms = obj.get("atoms")
        if not isinstance(atoms, list) or not all(
                isinstance(a, (list, tuple)) and len(a) == 2 for a in atoms):
            raise InvariantError("herglotz.atoms must be a list of [theta, weight] pairs")
        return AtomicMeasure(tuple(tuple(a) for a in atoms))
    if variant == "rational_cayley_plus":
        if "a" not in obj:
            raise InvariantError("herglotz.a is required for rational_cayley_plus")
        return RationalCayleyPlus(obj["a"])
    if variant == "constant":
        return Constant(obj.get("value", 1.0))
    raise InvariantError(f"unknown herglotz variant {variant!r}")
