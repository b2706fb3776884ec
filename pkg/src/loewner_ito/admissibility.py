"""Which drivers tau turn the randomized Loewner chain into an Ito diffusion?

A driver is admissible exactly when log tau is affine in y, i.e. tau is
exp(i kappa . y) up to a constant phase.  :func:`classify` tests this through
the Hessian of log tau (diagonal and mixed entries reported separately: the
product driver exp(i y1 y2) has zero diagonal and fails only on the mixed
entry) together with constancy of the log-gradient over the grid.

:func:`fiber_variation` is the independent check: it evaluates the drift and
diffusion of dpsi across the fiber {(psi0 tau(y), y)} and measures how much
they move.  For admissible drivers they depend on psi alone.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .herglotz import Constant, HerglotzSpec
from .ito import effective_coefficients
from .tau import DEFAULT_FD_STEP, Sampled, TauDriver, evaluate_tau, log_derivatives

ANALYTIC_TOL = 1e-10
FD_TOL = 1e-4


@dataclass(frozen=True)
class ClassifierReport:
    admissible: bool
    kappa: Optional[tuple]
    max_diagonal_residual: float
    max_mixed_residual: float
    kappa_variation: float
    grid: tuple
    tol: float
    method: str

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "kappa": None if self.kappa is None else list(self.kappa),
            "max_diagonal_residual": self.max_diagonal_residual,
            "max_mixed_residual": self.max_mixed_residual,
            "kappa_variation": self.kappa_variation,
            "grid": [list(pt) for pt in self.grid],
            "tol": self.tol,
            "method": self.method,
        }


def unit_grid(n_dims: int, values: Sequence[float] = (0.0, 1.0)) -> list:
    """The product grid values^n, e.g. {0, 1}^n."""
    return [np.array(pt, dtype=float) for pt in itertools.product(values, repeat=n_dims)]


def classify(d: TauDriver, grid=None, tol: Optional[float] = None, method: str = "analytic",
             fd_step: float = DEFAULT_FD_STEP) -> ClassifierReport:
    """Decide admissibility of ``d`` from log-tau derivatives on ``grid``.

    Defaults: grid {-1, 0, 1}^n; tol 1e-10 for analytic derivatives and 1e-4
    when finite differences are used.
    """
    if grid is None:
        grid = unit_grid(d.n_dims, (-1.0, 0.0, 1.0))
    grid = [np.atleast_1d(np.asarray(y, dtype=float)) for y in grid]
    if not grid:
        raise ValueError("classifier grid is empty")
    uses_fd = method == "fd" or isinstance(d, Sampled)
    if tol is None:
        tol = FD_TOL if uses_fd else ANALYTIC_TOL

    grads, diag, mixed = [], 0.0, 0.0
    off = ~np.eye(d.n_dims, dtype=bool)
    for y in grid:
        g, hess = log_derivatives(d, y, fd_step=fd_step, method=method)
        grads.append(g)
        diag = max(diag, float(np.max(np.abs(np.diag(hess)))))
        if off.any():
            mixed = max(mixed, float(np.max(np.abs(hess[off]))))
    grads = np.array(grads)
    variation = float(np.max(np.abs(grads - grads[0])))
    admissible = diag <= tol and mixed <= tol and variation <= tol
    kappa = tuple(float(k) for k in grads.mean(axis=0).imag) if admissible else None
    return ClassifierReport(admissible, kappa, diag, mixed, variation,
                            tuple(tuple(float(v) for v in y) for y in grid), float(tol),
                            "fd" if uses_fd else "analytic")


@dataclass(frozen=True)
class FiberReport:
    max_variation: float
    drift_variation: float
    diffusion_variation: float
    uninformative: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _spread(values: np.ndarray) -> float:
    """Max pairwise modulus difference."""
    return float(np.max(np.abs(values[:, None] - values[None, :])))


def fiber_variation(d: TauDriver, p: HerglotzSpec = Constant(), psi0: complex = 0.5,
                    y_grid=None, method: str = "analytic") -> FiberReport:
    """Spread of the dpsi coefficients over states (psi0 tau(y), y), y in ``y_grid``.

    ``y_grid`` defaults to {0, 1}^n.  A fiber through psi0 = 0 is flagged as
    uninformative since every psi-proportional term vanishes there.
    """
    if not abs(psi0) < 1:
        raise ValueError("psi0 must lie in the open unit disk")
    if y_grid is None:
        y_grid = unit_grid(d.n_dims)
    y_grid = [np.atleast_1d(np.asarray(y, dtype=float)) for y in y_grid]
    drifts, diffs = [], []
    for y in y_grid:
        c = effective_coefficients(psi0 * evaluate_tau(d, y), y, d, p, method=method)
        drifts.append(c.drift)
        diffs.append(c.diffusion)
    drift_var = _spread(np.array(drifts))
    diffs = np.array(diffs)
    diff_var = max(_spread(diffs[:, j]) for j in range(diffs.shape[1]))
    return FiberReport(max(drift_var, diff_var), drift_var, diff_var, psi0 == 0)
