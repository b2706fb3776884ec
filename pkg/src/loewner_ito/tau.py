"""Unit-modulus driver functions tau: R^n -> circle, and derivatives of log tau.

Built-in drivers carry analytic log-derivatives; :class:`Sampled` wraps an
arbitrary callable and is differentiated with central differences.  The
differences are taken on tau itself and converted with

    grad log tau = grad tau / tau
    hess log tau = hess tau / tau - grad tau grad tau^T / tau^2

so no branch of the complex logarithm is ever chosen.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Union

import numpy as np

from .errors import DomainError, InvariantError, ResolutionError

DEFAULT_FD_STEP = 1e-4


@dataclass(frozen=True)
class Exponential:
    """tau(y) = exp(i kappa . y) with real kappa."""

    kappa: tuple

    def __post_init__(self):
        kappa = tuple(float(k) for k in np.atleast_1d(self.kappa))
        if not kappa or not all(np.isfinite(kappa)):
            raise InvariantError("kappa must be a nonempty vector of finite reals")
        object.__setattr__(self, "kappa", kappa)

    @property
    def n_dims(self) -> int:
        return len(self.kappa)


@dataclass(frozen=True)
class SquareExponent:
    """tau(y) = exp(i y_1^2); further coordinates are ignored."""

    n_dims: int = 1


@dataclass(frozen=True)
class ProductExponent:
    """tau(y) = exp(i y_1 y_2)."""

    n_dims: int = 2

    def __post_init__(self):
        if self.n_dims < 2:
            raise InvariantError("ProductExponent needs n_dims >= 2")


@dataclass(frozen=True)
class Sampled:
    """A driver known only through point evaluations.

    ``resolution`` is the smallest spacing at which ``func`` carries
    information (e.g. the spacing of a lookup table behind it); finite
    differences with a smaller step are refused.
    """

    func: Callable[[np.ndarray], complex]
    n_dims: int
    resolution: float = 0.0


TauDriver = Union[Exponential, SquareExponent, ProductExponent, Sampled]


class LogDerivatives(NamedTuple):
    gradient: np.ndarray  # complex, shape (n,)
    hessian: np.ndarray  # complex, shape (n, n)


def _check_dim(d: TauDriver, y) -> np.ndarray:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (d.n_dims,):
        raise DomainError(f"driver expects a vector of length {d.n_dims}, got shape {y.shape}")
    return y


def _exponent(d: TauDriver, y: np.ndarray):
    """The real phase theta with tau = exp(i theta); vectorised over leading axes."""
    if isinstance(d, Exponential):
        return y @ np.asarray(d.kappa)
    if isinstance(d, SquareExponent):
        return y[..., 0] ** 2
    if isinstance(d, ProductExponent):
        return y[..., 0] * y[..., 1]
    raise TypeError(f"no closed-form phase for {d!r}")


def evaluate_tau(d: TauDriver, y) -> complex:
    y = _check_dim(d, y)
    if isinstance(d, Sampled):
        val = complex(d.func(y))
        if abs(abs(val) - 1.0) > 1e-12:
            raise InvariantError(f"sampled driver returned |tau| = {abs(val)!r} at y = {y}")
        return val
    return complex(np.exp(1j * _exponent(d, y)))


def evaluate_tau_batch(d: TauDriver, ys: np.ndarray) -> np.ndarray:
    """Evaluate tau on an array of points with shape (..., n_dims)."""
    ys = np.asarray(ys, dtype=float)
    if ys.shape[-1] != d.n_dims:
        raise DomainError(f"driver expects vectors of length {d.n_dims}")
    if isinstance(d, Sampled):
        flat = ys.reshape(-1, d.n_dims)
        out = np.array([evaluate_tau(d, y) for y in flat], dtype=complex)
        return out.reshape(ys.shape[:-1])
    return np.exp(1j * _exponent(d, ys))


def _analytic(d: TauDriver, y: np.ndarray) -> LogDerivatives:
    n = d.n_dims
    grad = np.zeros(n, dtype=complex)
    hess = np.zeros((n, n), dtype=complex)
    if isinstance(d, Exponential):
        grad[:] = 1j * np.asarray(d.kappa)
    elif isinstance(d, SquareExponent):
        grad[0] = 2j * y[0]
        hess[0, 0] = 2j
    elif isinstance(d, ProductExponent):
        grad[0] = 1j * y[1]
        grad[1] = 1j * y[0]
        hess[0, 1] = hess[1, 0] = 1j
    else:
        raise TypeError(f"no analytic derivatives for {d!r}")
    return LogDerivatives(grad, hess)


def _central_differences(d: TauDriver, y: np.ndarray, step: float) -> LogDerivatives:
    n = d.n_dims
    f = lambda v: evaluate_tau(d, v)  # noqa: E731
    eye = np.eye(n) * step
    t0 = f(y)
    plus = np.array([f(y + eye[i]) for i in range(n)])
    minus = np.array([f(y - eye[i]) for i in range(n)])
    dtau = (plus - minus) / (2 * step)
    d2tau = np.empty((n, n), dtype=complex)
    for i in range(n):
        d2tau[i, i] = (plus[i] - 2 * t0 + minus[i]) / step ** 2
        for j in range(i + 1, n):
            mixed = (f(y + eye[i] + eye[j]) - f(y + eye[i] - eye[j])
                     - f(y - eye[i] + eye[j]) + f(y - eye[i] - eye[j])) / (4 * step ** 2)
            d2tau[i, j] = d2tau[j, i] = mixed
    grad = dtau / t0
    hess = d2tau / t0 - np.outer(grad, grad)
    return LogDerivatives(grad, hess)


def log_derivatives(d: TauDriver, y, fd_step: float = DEFAULT_FD_STEP,
                    method: str = "analytic") -> LogDerivatives:
    """Gradient and Hessian of log tau at ``y``.

    ``method="fd"`` forces central differences for built-in drivers; Sampled
    drivers always use them.
    """
    y = _check_dim(d, y)
    if method not in ("analytic", "fd"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(d, Sampled) or method == "fd":
        if not fd_step > 0:
            raise ValueError("fd_step must be positive")
        if isinstance(d, Sampled) and fd_step < d.resolution:
            raise ResolutionError(
                f"fd_step {fd_step} is below the sampled driver resolution {d.resolution}")
        return _central_differences(d, y, fd_step)
    return _analytic(d, y)


def to_json(d: TauDriver) -> dict:
    if isinstance(d, Exponential):
        return {"variant": "exponential", "kappa": list(d.kappa)}
    if isinstance(d, SquareExponent):
        return {"variant": "square_exponent", "n_dims": d.n_dims}
    if isinstance(d, ProductExponent):
        return {"variant": "product_exponent", "n_dims": d.n_dims}
    raise TypeError(f"{type(d).__name__} drivers are not serialisable")


def from_json(obj: dict) -> TauDriver:
    if not isinstance(obj, dict) or "variant" not in obj:
        raise InvariantError("tau spec must be an object with a 'variant' key")
    variant = obj["variant"]
    if variant == "exponential":
        if "kappa" not in obj:
            raise InvariantError("tau.kappa is required for the exponential driver")
        return Exponential(tuple(obj["kappa"]))
    if variant == "square_exponent":
        return SquareExponent(int(obj.get("n_dims", 1)))
    if variant == "product_exponent":
        return ProductExponent(int(obj.get("n_dims", 2)))
    raise InvariantError(f"unknown tau variant {variant!r}")
