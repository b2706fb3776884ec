"""Infinitesimal generator of the psi diffusion on polynomial test functions.

    A f(z) = a(z) f'(z) - (|kappa|^2 / 2) z^2 f''(z),
    a(z)   = -|kappa|^2 z / 2 + (1 - z)^2 p(z)

The closed form is checked against the short-time Monte Carlo quotient
(E f(psi_h) - f(z)) / h, with psi_h produced by Euler-Maruyama sub-steps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from . import herglotz
from .flow import EPS_BOUNDARY, safe_herglotz
from .herglotz import HerglotzSpec
from .parallel import map_ordered

DEFAULT_H = 1e-3
DEFAULT_SUBSTEPS = 8
BLOCK_SIZE = 8192


@dataclass(frozen=True)
class PolynomialTestFunction:
    """f(z) = sum_j c_j z^j."""

    coefficients: tuple

    def __post_init__(self):
        coefs = tuple(complex(c) for c in self.coefficients)
        if not coefs:
            raise ValueError("polynomial needs at least one coefficient")
        if not all(np.isfinite(c) for c in coefs):
            raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "coefficients", coefs)

    @classmethod
    def monomial(cls, degree: int) -> "PolynomialTestFunction":
        return cls((0,) * degree + (1,))

    def __call__(self, z, derivative: int = 0):
        c = np.asarray(self.coefficients)
        if derivative:
            c = P.polyder(c, derivative) if c.size > derivative else np.zeros(1, dtype=complex)
        return P.polyval(z, c)

    def __add__(self, other):
        return PolynomialTestFunction(tuple(P.polyadd(self.coefficients, other.coefficients)))

    def scaled(self, alpha: complex) -> "PolynomialTestFunction":
        return PolynomialTestFunction(tuple(alpha * np.asarray(self.coefficients)))


def apply_generator(f: PolynomialTestFunction, z: complex, kappa, p: HerglotzSpec) -> complex:
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    k2 = float(kappa @ kappa)
    a = -0.5 * k2 * z + (1 - z) ** 2 * herglotz.evaluate(p, z)
    return complex(a * f(z, 1) - 0.5 * k2 * z ** 2 * f(z, 2))


def apply_scalar_generator(f: PolynomialTestFunction, z: complex, k: float, p: HerglotzSpec) -> complex:
    """The one-noise form, written in terms of a scalar wave number k."""
    return complex((-z / 2 * k ** 2 + (1 - z) ** 2 * herglotz.evaluate(p, z)) * f(z, 1)
                   - 0.5 * k ** 2 * z ** 2 * f(z, 2))


@dataclass(frozen=True)
class GeneratorReport:
    closed_form: complex
    mc_estimate: complex
    stderr: float
    h: float
    n_samples: int
    z: complex
    excluded: int = 0
    substeps: int = DEFAULT_SUBSTEPS

    @property
    def flagged(self) -> bool:
        """More than 1% of samples left the disk within [0, h]."""
        return self.excluded > 0.01 * self.n_samples

    @property
    def error(self) -> float:
        return abs(self.mc_estimate - self.closed_form)

    def to_dict(self) -> dict:
        c = lambda v: [v.real, v.imag]  # noqa: E731
        return {
            "closed_form": c(self.closed_form),
            "mc_estimate": c(self.mc_estimate),
            "stderr": self.stderr,
            "h": self.h,
            "n_samples": self.n_samples,
            "z": c(self.z),
            "excluded": self.excluded,
            "substeps": self.substeps,
            "flagged": self.flagged,
        }


def sample_endpoints(z: complex, kappa, p: HerglotzSpec, h: float, n: int, rng: np.random.Generator,
                     substeps: int = DEFAULT_SUBSTEPS) -> np.ndarray:
    """n independent Euler-Maruyama endpoints psi_h from psi_0 = z (NaN on exit)."""
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    k2 = float(kappa @ kappa)
    dt = h / substeps
    dw = rng.standard_normal((substeps, n, kappa.size)) * np.sqrt(dt)
    kdb = dw @ kappa
    psi = np.full(n, z, dtype=complex)
    for s in range(substeps):
        drift = (psi - 1) ** 2 * safe_herglotz(p, psi) - (0.5 * k2) * psi
        psi = psi + dt * drift + (-1j * psi) * kdb[s]
        with np.errstate(invalid="ignore"):
            psi[~(np.abs(psi) <= 1 - EPS_BOUNDARY)] = np.nan
    return psi


def estimate_generator_mc(f: PolynomialTestFunction, z: complex, kappa, p: HerglotzSpec,
                          h: float = DEFAULT_H, n_samples: int = 100_000, seed: int = 0,
                          substeps: int = DEFAULT_SUBSTEPS, workers: int = 1) -> GeneratorReport:
    """Monte Carlo estimate of A f(z) from (f(psi_h) - f(z)) / h.

    Samples are drawn in fixed blocks of ``BLOCK_SIZE``, each seeded from
    (seed, block index), so the result does not depend on ``workers``.
    """
    if not 0 < h <= 1e-2:
        raise ValueError(f"h must lie in (0, 1e-2], got {h}")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    starts = range(0, n_samples, BLOCK_SIZE)

    def block(b):
        start = b * BLOCK_SIZE
        n = min(BLOCK_SIZE, n_samples - start)
        ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=(b,))
        return sample_endpoints(z, kappa, p, h, n, np.random.Generator(np.random.PCG64(ss)), substeps)

    psi_h = np.concatenate(map_ordered(block, range(len(starts)), workers))
    kept = psi_h[np.isfinite(psi_h)]
    values = (f(kept) - f(z)) / h
    n = values.size
    mean = values.mean() if n else complex("nan")
    if n > 1:
        dev = values - mean
        stderr = float(np.sqrt((dev.real ** 2 + dev.imag ** 2).sum() / (n - 1) / n))
    else:
        stderr = float("nan")
    return GeneratorReport(apply_generator(f, z, kappa, p), complex(mean), stderr, h,
                           n_samples, complex(z), int(n_samples - n), substeps)
