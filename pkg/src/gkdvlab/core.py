"""Shared value types: nonlinearity exponent, periodic grid, snapshots, trajectories.

The domain is the periodic interval [-L/2, L/2).  All quadrature is the
rectangle rule, which is spectrally exact for band-limited periodic
integrands, and all derivatives are Fourier derivatives with the Nyquist
mode zeroed for odd orders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "Exponent",
    "GridSpec",
    "Field",
    "ConservedRecord",
    "Trajectory",
    "as_exponent",
    "integrate",
    "spectral_derivative",
]


@dataclass(frozen=True)
class Exponent:
    """Integer nonlinearity power p >= 2 of u_t + (u_xx + u^p)_x = 0."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or isinstance(self.p, bool):
            raise DomainError(f"nonlinearity power must be an integer, got {self.p!r}")
        if self.p < 2:
            raise DomainError(f"nonlinearity power must be >= 2, got {self.p}")

    @property
    def sigma(self) -> float:
        """Criticality index; negative below p = 5, zero at p = 5."""
        return 0.5 - 2.0 / (self.p - 1)

    @property
    def odd(self) -> bool:
        """True when u -> -u is a symmetry of the equation."""
        return self.p % 2 == 1


def as_exponent(p: "int | Exponent") -> Exponent:
    return p if isinstance(p, Exponent) else Exponent(int(p))


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Periodic spatial grid on [-L/2, L/2) with N points, plus the time step.

    ``dt`` may be None for analysis-only grids (e.g. fields loaded from
    snapshots); the time stepper refuses to run without it.
    """

    L: float
    N: int
    dt: Optional[float] = None

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError(f"domain length must be positive, got {self.L}")
        if not _is_power_of_two(self.N) or self.N < 64:
            raise DomainError(f"N must be a power of two >= 64, got {self.N}")
        if self.dt is not None and not self.dt > 0:
            raise DomainError(f"time step must be positive, got {self.dt}")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.L / 2 + self.dx * np.arange(self.N)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Non-negative wavenumbers of the real FFT, length N//2 + 1."""
        k = 2 * np.pi * np.fft.rfftfreq(self.N, d=self.dx)
        k.setflags(write=False)
        return k

    def require_dt(self) -> float:
        if self.dt is None:
            raise DomainError("grid carries no time step; construct it with dt set")
        return self.dt


@dataclass(eq=False)
class Field:
    """One real solution snapshot u(t, .) on a grid.

    ``meta`` holds optional bookkeeping (e.g. superposition interaction
    integrals) and never participates in numerics.
    """

    grid: GridSpec
    p: int
    t: float
    values: np.ndarray
    meta: Optional[dict] = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.N,):
            raise DomainError(f"expected {self.grid.N} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("field contains non-finite values")
        as_exponent(self.p)
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray, t: Optional[float] = None) -> "Field":
        return Field(self.grid, self.p, self.t if t is None else t, values)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x


@dataclass(frozen=True)
class ConservedRecord:
    """Per-frame conserved quantities and the boundary watchdog amplitude."""

    t: float
    mass: float
    energy: float
    h2_invariant: Optional[float]
    boundary_amplitude: float


@dataclass
class Trajectory:
    """Time-ordered solution frames with their conserved-quantity records."""

    frames: list
    records: list
    truncated: bool = False
    failure: Optional[str] = None
    boundary_flagged: bool = False

    def __post_init__(self):
        ts = [f.t for f in self.frames]
        if any(t1 <= t0 for t0, t1 in zip(ts, ts[1:])):
            raise DomainError("trajectory time stamps must be strictly increasing")
        if self.frames:
            g0, p0 = self.frames[0].grid, self.frames[0].p
            if any(f.grid != g0 or f.p != p0 for f in self.frames[1:]):
                raise DomainError("all frames must share one grid and exponent")

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, i) -> Field:
        return self.frames[i]

    @property
    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.frames])

    @property
    def grid(self) -> GridSpec:
        return self.frames[0].grid

    def conservation_drift(self) -> dict:
        """Max absolute deviation of mass/energy (and the KdV H2 invariant)
        from their initial values over the stored records."""
        if not self.records:
            return {"mass": 0.0, "energy": 0.0, "h2_invariant": None}
        m0 = self.records[0].mass
        e0 = self.records[0].energy
        out = {
            "mass": max(abs(r.mass - m0) for r in self.records),
            "energy": max(abs(r.energy - e0) for r in self.records),
        }
        h0 = self.records[0].h2_invariant
        if h0 is None:
            out["h2_invariant"] = None
        else:
            out["h2_invariant"] = max(abs(r.h2_invariant - h0) for r in self.records)
        return out


def integrate(values: np.ndarray, grid: GridSpec) -> float:
    """Rectangle-rule integral over the periodic domain."""
    return float(np.sum(values) * grid.dx)


def spectral_derivative(values: np.ndarray, grid: GridSpec, order: int = 1) -> np.ndarray:
    """Fourier derivative of given order; Nyquist zeroed for odd orders."""
    vhat = np.fft.rfft(values)
    k = grid.k.copy()
    if order % 2 == 1:
        k[-1] = 0.0
    return np.fft.irfft((1j * k) ** order * vhat, n=grid.N)


def weighted_quadrature(u_sq: np.ndarray, weight: np.ndarray, grid: GridSpec) -> float:
    return float(np.sum(u_sq * weight) * grid.dx)


def window_indices(grid: GridSpec, frac: float = 0.02) -> np.ndarray:
    """Indices of the boundary margin cells (both edges)."""
    m = max(2, int(round(frac * grid.N)))
    return np.r_[0:m, grid.N - m : grid.N]
