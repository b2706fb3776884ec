"""The substitution psi = phi / tau(B) and the Ito diffusion it produces.

For an exponential driver tau(y) = exp(i kappa . y) the process psi solves

    dpsi = (-|kappa|^2 psi / 2 + (psi - 1)^2 p(psi)) dt - i psi kappa . dB,

a time-homogeneous SDE in psi alone.  :func:`effective_coefficients` computes
the dt and dB coefficients of dpsi for *any* driver via the product rule
applied to phi * (1/tau(B)); for non-exponential drivers they depend on B
and not only on psi, which is what the admissibility tests probe.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import herglotz
from .flow import (Trajectory, integrate_randomized_batch, march, safe_herglotz,
                   to_trajectories)
from .herglotz import HerglotzSpec
from .parallel import map_ordered
from .paths import BrownianEnsemble, BrownianPath, TimeGrid, refine
from .tau import Exponential, TauDriver, evaluate_tau, log_derivatives


def canonical_substitution(phi, y, kappa):
    """psi = phi * exp(-i kappa . y).

    ``y`` may carry leading batch axes: shape (..., n) against ``kappa`` of
    shape (n,).
    """
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        y = y[None]
    if y.shape[-1] != kappa.shape[0]:
        raise ValueError(f"y has {y.shape[-1]} components, kappa has {kappa.shape[0]}")
    out = phi * np.exp(-1j * (y @ kappa))
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DiffusionCoefficients:
    drift: complex
    diffusion: np.ndarray = field(compare=False)


def effective_coefficients(phi: complex, y, d: TauDriver, p: HerglotzSpec,
                           method: str = "analytic", fd_step: float = 1e-4) -> DiffusionCoefficients:
    """Coefficients of dt and dB_j in dpsi at the joint state (phi, y).

    With g = log tau and u = 1/tau = exp(-g):

        du/dy_j       = -g_j u
        d2u/dy_j^2    = (g_j^2 - g_jj) u
        drift         = (1 - psi)^2 p(psi) + (phi / 2) sum_j d2u/dy_j^2
        diffusion_j   = phi du/dy_j
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    tau = evaluate_tau(d, y)
    u = 1.0 / tau
    psi = phi * u
    grad, hess = log_derivatives(d, y, fd_step=fd_step, method=method)
    du = -grad * u
    d2u = (grad ** 2 - np.diag(hess)) * u
    drift = (1 - psi) ** 2 * herglotz.evaluate(p, psi) + 0.5 * phi * d2u.sum()
    return DiffusionCoefficients(complex(drift), phi * du)


def exponential_coefficients(psi: complex, kappa, p: HerglotzSpec) -> DiffusionCoefficients:
    """Closed-form coefficients of the diffusion for tau = exp(i kappa . y)."""
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    drift = -0.5 * (kappa @ kappa) * psi + (psi - 1) ** 2 * herglotz.evaluate(p, psi)
    return DiffusionCoefficients(complex(drift), -1j * kappa * psi)


def sde_drift(psi: np.ndarray, k2: float, p: HerglotzSpec) -> np.ndarray:
    return (psi - 1) ** 2 * safe_herglotz(p, psi) - (0.5 * k2) * psi


def integrate_sde_batch(z, kappa, p: HerglotzSpec, increments: np.ndarray, grid: TimeGrid) -> list:
    """Euler-Maruyama on a batch of paths; ``increments`` is (paths, dims, steps).

    psi_{j+1} = psi_j + h drift(psi_j) - i psi_j (kappa . dB_j)
    """
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    increments = np.asarray(increments, dtype=float)
    if increments.shape[1] != kappa.shape[0]:
        raise ValueError(f"path has {increments.shape[1]} dimensions, kappa has {kappa.shape[0]}")
    if increments.shape[2] != grid.n_steps:
        raise ValueError("increments do not match the time grid")
    k2 = float(kappa @ kappa)
    kdb = np.einsum("d,pdn->pn", kappa, increments)
    h = grid.h
    z0 = np.broadcast_to(np.asarray(z, dtype=complex), (increments.shape[0],)).copy()

    def step(psi, j, alive):
        return psi + h * sde_drift(psi, k2, p) + (-1j * psi) * kdb[alive, j]

    return to_trajectories(grid, *march(step, z0, grid.n_steps))


def integrate_sde(z: complex, kappa, p: HerglotzSpec, path: BrownianPath,
                  grid: Optional[TimeGrid] = None) -> Trajectory:
    grid = path.grid if grid is None else grid
    return integrate_sde_batch(z, kappa, p, path.increments[None], grid)[0]


@dataclass(frozen=True)
class LevelResult:
    h: float
    rms_discrepancy: float
    excluded: int
    path_count: int


@dataclass(frozen=True)
class ConvergenceReport:
    levels: tuple
    estimated_order: Optional[float]

    @property
    def monotone(self) -> bool:
        rms = [lv.rms_discrepancy for lv in self.levels]
        return all(b < a for a, b in zip(rms, rms[1:]))

    def to_dict(self) -> dict:
        return {
            "levels": [
                {"h": lv.h, "rms_discrepancy": lv.rms_discrepancy,
                 "excluded": lv.excluded, "path_count": lv.path_count}
                for lv in self.levels
            ],
            "estimated_order": self.estimated_order,
        }


def estimate_order(hs: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(error) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if hs.size < 2 or not np.all(np.isfinite(errors)) or np.any(errors <= 0):
        return None
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


def _max_discrepancy(z, kappa, p, values, increments, grid, scheme):
    """Per-path max-over-time |psi_ode - psi_sde|, NaN for excluded paths."""
    d = Exponential(tuple(kappa))
    odes = integrate_randomized_batch(z, p, d, values, grid, scheme)
    sdes = integrate_sde_batch(z, kappa, p, increments, grid)
    out = np.full(len(odes), np.nan)
    for i, (ode, sde) in enumerate(zip(odes, sdes)):
        if ode.completed and sde.completed:
            psi_ode = canonical_substitution(ode.states, values[i].T, kappa)
            out[i] = np.max(np.abs(psi_ode - sde.states))
    return out


def verify_transform(z: complex, kappa, p: HerglotzSpec, ensemble: BrownianEnsemble,
                     n_levels: int = 5, scheme: str = "euler", workers: int = 1,
                     chunk_size: int = 64) -> ConvergenceReport:
    """Shared-noise comparison of the substituted ODE solution with the SDE.

    Level 0 uses ``ensemble`` as given; each later level refines it once.
    Paths exiting the disk on either side are dropped and counted.
    """
    kappa = tuple(float(k) for k in np.atleast_1d(kappa))
    if len(kappa) != ensemble.n_dims:
        raise ValueError("kappa dimension does not match the ensemble")
    if n_levels < 1:
        raise ValueError("need at least one level")
    levels = []
    e = ensemble
    for lv in range(n_levels):
        if lv:
            e = refine(e)
        chunks = [slice(s, min(s + chunk_size, e.n_paths)) for s in range(0, e.n_paths, chunk_size)]
        parts = map_ordered(
            lambda sl, e=e: _max_discrepancy(z, kappa, p, e.values[sl], e.increments[sl], e.grid, scheme),
            chunks, workers)
        disc = np.concatenate(parts)
        kept = disc[np.isfinite(disc)]
        rms = float(np.sqrt(np.mean(kept ** 2))) if kept.size else float("nan")
        levels.append(LevelResult(e.grid.h, rms, int(disc.size - kept.size), int(kept.size)))
    order = estimate_order([lv.h for lv in levels], [lv.rms_discrepancy for lv in levels])
    return ConvergenceReport(tuple(levels), order)
