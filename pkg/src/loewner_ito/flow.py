"""Pathwise integration of the radial Loewner ODE, classical and randomized.

Classical flow:      dphi/dt = -phi p(phi),                phi_0 = z
Randomized flow:     dphi/dt = (tau - phi)^2 / tau p(phi / tau)

where tau = tau(B_t) is frozen at the left endpoint of every step.  All
integrators march a whole batch of trajectories at once; a trajectory that
comes within ``EPS_BOUNDARY`` of the unit circle stops and records an exit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import herglotz
from .errors import DomainError
from .herglotz import HerglotzSpec
from .paths import BrownianEnsemble, BrownianPath, TimeGrid
from .tau import TauDriver, evaluate_tau_batch

EPS_BOUNDARY = 1e-6

CLASSICAL_SCHEMES = ("euler", "heun", "rk4")
RANDOMIZED_SCHEMES = ("euler", "heun")


@dataclass(frozen=True)
class Exit:
    step: int  # index of the first grid point that was not recorded
    reason: str


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: TimeGrid
    states: np.ndarray
    exit: Optional[Exit] = None

    @property
    def times(self) -> np.ndarray:
        return self.grid.times()[: len(self.states)]

    @property
    def final(self) -> complex:
        return complex(self.states[-1])

    @property
    def completed(self) -> bool:
        return self.exit is None


def safe_herglotz(p: HerglotzSpec, w: np.ndarray) -> np.ndarray:
    """Evaluate p on the points inside the disk; NaN elsewhere."""
    out = np.full(w.shape, np.nan, dtype=complex)
    inside = np.abs(w) < 1
    if inside.any():
        out[inside] = herglotz.evaluate(p, w[inside])
    return out


def march(step: Callable[[np.ndarray, int, np.ndarray], np.ndarray], z0: np.ndarray,
          n_steps: int):
    """Run ``state <- step(state, j, alive)`` for j = 0..n_steps-1 on a batch.

    ``alive`` holds the row indices still being integrated.  Rows whose new
    state is non-finite or has modulus above 1 - EPS_BOUNDARY stop there and
    their remaining entries stay NaN.  Returns (states, exit_step, reasons).
    """
    z0 = np.asarray(z0, dtype=complex)
    m = z0.shape[0]
    states = np.full((m, n_steps + 1), np.nan, dtype=complex)
    states[:, 0] = z0
    exit_step = np.full(m, -1)
    reasons = [None] * m
    alive = np.arange(m)
    if np.any(~(np.abs(z0) < 1)):
        raise DomainError("initial points must lie in the open unit disk")
    cur = z0.copy()
    for j in range(n_steps):
        if alive.size == 0:
            break
        new = step(cur, j, alive)
        with np.errstate(invalid="ignore"):
            finite = np.isfinite(new)
            mod = np.abs(new)
            ok = finite & (mod <= 1 - EPS_BOUNDARY)
        if not ok.all():
            for r in np.flatnonzero(~ok):
                row = alive[r]
                exit_step[row] = j + 1
                reasons[row] = "boundary" if finite[r] else "stage_left_disk"
            alive = alive[ok]
            new = new[ok]
        states[alive, j + 1] = new
        cur = new
    return states, exit_step, reasons


def to_trajectories(grid: TimeGrid, states, exit_step, reasons) -> list:
    out = []
    for row in range(states.shape[0]):
        if exit_step[row] < 0:
            out.append(Trajectory(grid, states[row].copy()))
        else:
            k = int(exit_step[row])
            out.append(Trajectory(grid, states[row, :k].copy(), Exit(k, reasons[row])))
    return out


def _check_scheme(scheme: str, allowed: Sequence[str]) -> str:
    scheme = scheme.lower()
    if scheme not in allowed:
        raise ValueError(f"scheme must be one of {allowed}, got {scheme!r}")
    return scheme


def integrate_classical_batch(zs, p: HerglotzSpec, grid: TimeGrid, scheme: str = "rk4") -> list:
    """Integrate the classical flow from every point in ``zs``."""
    scheme = _check_scheme(scheme, CLASSICAL_SCHEMES)
    h = grid.h

    def f(w):
        return -w * safe_herglotz(p, w)

    def step(w, j, alive):
        k1 = f(w)
        if scheme == "euler":
            return w + h * k1
        if scheme == "heun":
            k2 = f(w + h * k1)
            return w + 0.5 * h * (k1 + k2)
        k2 = f(w + 0.5 * h * k1)
        k3 = f(w + 0.5 * h * k2)
        k4 = f(w + h * k3)
        return w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    return to_trajectories(grid, *march(step, zs, grid.n_steps))


def integrate_classical(z: complex, p: HerglotzSpec, grid: TimeGrid, scheme: str = "rk4") -> Trajectory:
    return integrate_classical_batch([z], p, grid, scheme)[0]


def tau_along(d: TauDriver, values: np.ndarray) -> np.ndarray:
    """tau at every grid point of every path; ``values`` is (paths, dims, steps+1)."""
    values = np.asarray(values, dtype=float)
    if values.shape[-2] != d.n_dims:
        raise DomainError(f"path dimension {values.shape[-2]} does not match driver dimension {d.n_dims}")
    return evaluate_tau_batch(d, np.swapaxes(values, -1, -2))


def randomized_rhs(p: HerglotzSpec, phi: np.ndarray, tau: np.ndarray) -> np.ndarray:
    return ((tau - phi) ** 2 / tau) * safe_herglotz(p, phi / tau)


def integrate_randomized_batch(z, p: HerglotzSpec, d: TauDriver, values: np.ndarray,
                               grid: TimeGrid, scheme: str = "euler") -> list:
    """Integrate the randomized flow from ``z`` along each path in ``values``.

    ``z`` is either one point shared by all paths or one point per path.
    """
    scheme = _check_scheme(scheme, RANDOMIZED_SCHEMES)
    tau = tau_along(d, values)
    if tau.shape[-1] != grid.n_steps + 1:
        raise DomainError("path length does not match the time grid")
    h = grid.h
    z0 = np.broadcast_to(np.asarray(z, dtype=complex), (tau.shape[0],)).copy()

    def step(phi, j, alive):
        t = tau[alive, j]
        k1 = randomized_rhs(p, phi, t)
        if scheme == "euler":
            return phi + h * k1
        k2 = randomized_rhs(p, phi + h * k1, t)
        return phi + 0.5 * h * (k1 + k2)

    return to_trajectories(grid, *march(step, z0, grid.n_steps))


def integrate_randomized(z: complex, p: HerglotzSpec, d: TauDriver, path: BrownianPath,
                         scheme: str = "euler") -> Trajectory:
    return integrate_randomized_batch(z, p, d, path.values[None], path.grid, scheme)[0]


def integrate_randomized_ensemble(z, p: HerglotzSpec, d: TauDriver, ensemble: BrownianEnsemble,
                                  scheme: str = "euler") -> list:
    return integrate_randomized_batch(z, p, d, ensemble.values, ensemble.grid, scheme)
