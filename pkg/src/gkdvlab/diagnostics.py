"""Numerical evaluation of the functionals used to certify soliton dynamics.

This module turns the analysis apparatus into measurements: tail masses and
non-dispersion certificates, smoothed weights with closed-form derivatives,
the almost-monotone weighted mass I, localized masses and modified energies
on a partition of unity, the localized quadratic (Weinstein-type) form and
its companion functional with an Abel-transformed twin, and least-squares
exponential decay fits in time and in space.

All integrals use the same rectangle quadrature as the solver; half-line
integrals weight the cell containing the cut by fractional coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .core import Field, GridSpec, Trajectory, integrate, spectral_derivative
from .errors import (
    DomainError,
    GKdVLabError,
    KappaRangeError,
    NonPositiveValueError,
    SpectralTailError,
)
from .profiles import sech, soliton_profile, soliton_profile_derivative
from .solver import energy, mass, sobolev_norm

__all__ = [
    "PhiWeight",
    "PsiWeight",
    "Partition",
    "DecayFit",
    "tail_mass",
    "nondispersion_profile",
    "tilde_m",
    "monotone_functional",
    "localized_mass",
    "localized_energy",
    "monotonicity_report",
    "MonotonicityReport",
    "weinstein_H",
    "weinstein_F",
    "WeinsteinF",
    "fit_exponential_decay",
    "fit_spatial_decay",
    "fit_translation",
    "random_smooth_field",
    "project_orthogonal",
    "sample_coercivity",
    "CoercivityFit",
]


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class PhiWeight:
    """Decreasing weight 1/2 - arctan(exp(kappa x))/pi with closed-form
    derivatives; transitions from 1/2 to 0 around the origin."""

    kappa: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise KappaRangeError(f"kappa must be positive, got {self.kappa}")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        t = np.arctan(np.exp(-self.kappa * np.abs(x))) / np.pi
        return np.where(x >= 0, t, 0.5 - t)

    def deriv(self, x):
        x = np.asarray(x, dtype=np.float64)
        return -self.kappa / (2 * np.pi) * sech(self.kappa * x)

    def third_deriv(self, x):
        x = np.asarray(x, dtype=np.float64)
        y = self.kappa * x
        s, th = sech(y), np.tanh(y)
        return self.kappa**3 / (2 * np.pi) * s * (s**2 - th**2)


@dataclass(frozen=True)
class PsiWeight:
    """Decreasing weight (2/pi) arctan(exp(-sqrt(nu) x / 2)) going from 1 to 0."""

    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise KappaRangeError(f"nu must be positive, got {self.nu}")

    @property
    def s(self) -> float:
        return math.sqrt(self.nu) / 2.0

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        t = (2.0 / np.pi) * np.arctan(np.exp(-self.s * np.abs(x)))
        return np.where(x >= 0, t, 1.0 - t)

    def deriv(self, x):
        x = np.asarray(x, dtype=np.float64)
        return -self.s / np.pi * sech(self.s * x)

    def third_deriv(self, x):
        x = np.asarray(x, dtype=np.float64)
        y = self.s * x
        sh, th = sech(y), np.tanh(y)
        return -self.s**3 / np.pi * sh * (sh**2 - th**2)


@dataclass(frozen=True)
class Partition:
    """Partition of unity adapted to ordered soliton centers.

    ``midpoints`` are the N-1 half-way points between consecutive centers;
    psi_i is the PsiWeight translated to midpoint i (psi_N identically 1)
    and phi_i = psi_i - psi_{i-1} telescopes to 1.
    """

    nu: float
    midpoints: tuple

    def __post_init__(self):
        object.__setattr__(self, "midpoints", tuple(float(m) for m in self.midpoints))
        if any(b <= a for a, b in zip(self.midpoints, self.midpoints[1:])):
            raise DomainError(f"midpoints must be strictly increasing: {self.midpoints}")
        PsiWeight(self.nu)

    @property
    def n(self) -> int:
        return len(self.midpoints) + 1

    def psi(self, i: int, x) -> np.ndarray:
        """psi_i on points x; i runs from 1 to n, psi_n == 1."""
        if not 1 <= i <= self.n:
            raise IndexError(f"psi index {i} outside 1..{self.n}")
        x = np.asarray(x, dtype=np.float64)
        if i == self.n:
            return np.ones_like(x)
        return PsiWeight(self.nu)(x - self.midpoints[i - 1])

    def phi(self, i: int, x) -> np.ndarray:
        """phi_i = psi_i - psi_{i-1} (phi_1 = psi_1, phi_n = 1 - psi_{n-1})."""
        if not 1 <= i <= self.n:
            raise IndexError(f"phi index {i} outside 1..{self.n}")
        if i == 1:
            return self.psi(1, x)
        return self.psi(i, x) - self.psi(i - 1, x)

    @staticmethod
    def from_centers(centers: Sequence[float], nu: float) -> "Partition":
        centers = list(centers)
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise DomainError(f"centers must be strictly increasing: {centers}")
        mids = [(a + b) / 2.0 for a, b in zip(centers, centers[1:])]
        return Partition(nu, tuple(mids))


# ---------------------------------------------------------------------------
# tail mass and the non-dispersion certificate


def tail_mass(u: Field, xstar: float) -> float:
    """int_{x < xstar} u^2 dx with fractional weighting of the cut cell."""
    g = u.grid
    if not -g.L / 2 <= xstar < g.L / 2:
        raise DomainError(f"xstar={xstar} outside [{-g.L/2}, {g.L/2})")
    u_sq = u.values**2
    idx = int(math.floor((xstar + g.L / 2) / g.dx))
    idx = min(idx, g.N - 1)
    total = float(np.sum(u_sq[:idx]) * g.dx)
    total += float(u_sq[idx] * (xstar - g.x[idx]))
    return total


def nondispersion_profile(traj: Trajectory, rho: float, R: float) -> float:
    """Certified tail-mass bound: max over frames of the mass left of
    rho t - R.  Large values flag dispersive leakage to the left."""
    if not rho > 0 or not R > 0:
        raise DomainError("rho and R must be positive")
    return max(tail_mass(f, rho * f.t - R) for f in traj.frames)


def tilde_m(a: float, b: float) -> float:
    """Smooth surrogate 1 + (a+b)/2 - sqrt(1 + ((b-a)/2)^2) of min(a, b);
    always within [min(a,b), min(a,b)+1] and symmetric in its arguments."""
    return 1.0 + (a + b) / 2.0 - math.sqrt(1.0 + ((b - a) / 2.0) ** 2)


def monotone_functional(
    traj: Trajectory,
    t0: float,
    x0: float,
    f_slope: float,
    mtilde: Callable[[float], float],
    kappa: Optional[float] = None,
    eta_margin: float = 0.5,
    boundary_rel: float = 1e-8,
) -> Tuple[np.ndarray, np.ndarray]:
    """Weighted-mass time series I(t) = int u^2(t, x) phi(x - mtilde(t)
    - x0 + f(t) - f(t0)) dx over frames with t >= t0, f affine of slope
    ``f_slope``.

    When ``kappa`` is omitted it is set to sqrt(eta/2) with eta =
    eta_margin * (min slope of mtilde over the frames - f_slope); the gap
    must be positive for the weight to chase the mass from behind.
    """
    frames = [f for f in traj.frames if f.t >= t0 - 1e-12]
    if not frames:
        raise DomainError(f"no frames at or after t0={t0}")
    ts = np.array([f.t for f in frames])
    ms = np.array([float(mtilde(t)) for t in ts])
    if kappa is None:
        if len(ts) < 2:
            raise DomainError("cannot infer kappa from a single frame")
        slopes = np.diff(ms) / np.diff(ts)
        gap = float(np.min(slopes)) - f_slope
        if gap <= 0:
            raise DomainError(
                f"slope gap min(mtilde') - f_slope = {gap:g} must be positive"
            )
        kappa = math.sqrt(eta_margin * gap / 2.0)
    phi = PhiWeight(kappa)

    out = np.empty(len(frames))
    g = frames[0].grid
    edge = np.r_[0 : max(2, g.N // 50), g.N - max(2, g.N // 50) : g.N]
    for j, (f, mt) in enumerate(zip(frames, ms)):
        arg = g.x - mt - x0 + f_slope * (f.t - t0)
        w = phi(arg)
        contrib = f.values**2 * w
        total_mass = mass(f)
        if float(np.sum(contrib[edge]) * g.dx) > boundary_rel * max(total_mass, 1e-300):
            raise DomainError(
                f"weighted mass near the periodic boundary at t={f.t:g}; "
                "domain too small for this functional"
            )
        out[j] = float(np.sum(contrib) * g.dx)
    return ts, out


# ---------------------------------------------------------------------------
# localized mass / modified energy and their monotonicity report


def localized_mass(u: Field, part: Partition, i: int) -> float:
    """int u^2 psi_i dx; equals the full mass for i = n."""
    w = part.psi(i, u.grid.x)
    return integrate(u.values**2 * w, u.grid)


def localized_energy(u: Field, part: Partition, i: int, kappa: float, c1: float) -> float:
    """Modified localized energy int (u_x^2/2 - u^{p+1}/(p+1) + kappa u^2) psi_i dx.

    ``kappa`` must lie in (0, c1/4) with c1 the smallest soliton speed; the
    compensating kappa u^2 term is what makes the quantity almost monotone.
    """
    if not 0 < kappa < c1 / 4.0:
        raise KappaRangeError(f"kappa={kappa} outside (0, c1/4) = (0, {c1/4.0})")
    w = part.psi(i, u.grid.x)
    ux = spectral_derivative(u.values, u.grid, 1)
    dens = 0.5 * ux**2 - u.values ** (u.p + 1) / (u.p + 1) + kappa * u.values**2
    return integrate(dens * w, u.grid)


@dataclass
class MonotonicityReport:
    """Pairwise deficits of the localized quantities along a trajectory.

    A positive deficit means the quantity decreased between two sampled
    times; deficits are admissible up to K1 exp(-nu^{3/2} t / 4), and
    anything beyond ``threshold`` (10x the conservation drift) is flagged.
    """

    nu: float
    kappa: float
    K1: float
    max_deficit_mass: float
    max_deficit_energy: float
    threshold_mass: float
    threshold_energy: float
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def monotonicity_report(
    traj: Trajectory,
    midpoints_per_frame: Sequence[Sequence[float]],
    kappa: float,
    nu: float,
    c1: Optional[float] = None,
) -> MonotonicityReport:
    """Check almost-monotonicity of every localized mass and modified energy.

    ``midpoints_per_frame`` supplies the partition midpoints for each stored
    frame (typically half-way points of modulation-tracked centers).
    """
    if len(midpoints_per_frame) != len(traj.frames):
        raise DomainError("need one midpoint list per trajectory frame")
    if c1 is not None and not 0 < kappa < c1 / 4.0:
        raise KappaRangeError(f"kappa={kappa} outside (0, c1/4) = (0, {c1/4.0})")
    nsol = len(midpoints_per_frame[0]) + 1
    c1_eff = c1 if c1 is not None else 4.0 * kappa * 1.0001

    times = traj.times
    Ms = np.empty((len(traj), nsol))
    Es = np.empty((len(traj), nsol))
    for a, (f, mids) in enumerate(zip(traj.frames, midpoints_per_frame)):
        part = Partition(nu, tuple(mids))
        if part.n != nsol:
            raise DomainError("midpoint count changed along the trajectory")
        for i in range(1, nsol + 1):
            Ms[a, i - 1] = localized_mass(f, part, i)
            Es[a, i - 1] = localized_energy(f, part, i, kappa, c1_eff)

    drift = traj.conservation_drift()
    thr_m = 10.0 * drift["mass"] + 1e-13 * max(1.0, abs(traj.records[0].mass))
    thr_e = 10.0 * drift["energy"] + 1e-13 * max(1.0, abs(traj.records[0].energy))

    K1 = 0.0
    max_dm = -np.inf
    max_de = -np.inf
    violations = []
    decay = np.exp(-(nu**1.5) / 4.0 * times)
    for a in range(len(traj)):
        for b in range(a + 1, len(traj)):
            dm = Ms[a] - Ms[b]
            de = Es[a] - Es[b]
            max_dm = max(max_dm, dm.max())
            max_de = max(max_de, de.max())
            K1 = max(K1, dm.max() / decay[a], de.max() / decay[a])
            for i in range(nsol):
                if dm[i] > thr_m:
                    violations.append(("mass", i + 1, times[a], times[b], float(dm[i])))
                if de[i] > thr_e:
                    violations.append(("energy", i + 1, times[a], times[b], float(de[i])))
    return MonotonicityReport(
        nu=nu,
        kappa=kappa,
        K1=float(max(K1, 0.0)),
        max_deficit_mass=float(max_dm),
        max_deficit_energy=float(max_de),
        threshold_mass=thr_m,
        threshold_energy=thr_e,
        violations=violations,
    )


# ---------------------------------------------------------------------------
# Weinstein-type functionals


def _check_ordered_solitons(solitons: Sequence[Tuple[float, float]]):
    centers = [a for _, a in solitons]
    if any(b <= a for a, b in zip(centers, centers[1:])):
        raise DomainError(f"soliton centers must be strictly increasing: {centers}")
    for c, _ in solitons:
        if not c > 0:
            raise DomainError(f"soliton speed must be positive, got {c}")


def weinstein_H(eps: Field, solitons: Sequence[Tuple[float, float]], part: Partition) -> float:
    """Localized quadratic form sum_i c_i^{-2} int (eps_x^2 + c_i eps^2
    - p R_i^{p-1} eps^2) phi_i dx around the given (speed, center) pairs.

    No positivity is implied unless eps satisfies the translation
    orthogonality conditions; see ``sample_coercivity``.
    """
    _check_ordered_solitons(solitons)
    x = eps.grid.x
    ex = spectral_derivative(eps.values, eps.grid, 1)
    e2 = eps.values**2
    total = 0.0
    for i, (c, a) in enumerate(solitons, start=1):
        R = soliton_profile(eps.p, c, x - a)
        dens = ex**2 + c * e2 - eps.p * R ** (eps.p - 1) * e2
        total += integrate(dens * part.phi(i, x), eps.grid) / c**2
    return total


@dataclass(frozen=True)
class WeinsteinF:
    direct: float
    abel: float


def weinstein_F(
    u: Field,
    solitons: Sequence[Tuple[float, float]],
    part: Partition,
    kappa: float,
) -> WeinsteinF:
    """Weighted energy-mass combination sum_i c_i^{-2} (int (u_x^2/2
    - u^{p+1}/(p+1)) phi_i + (c_i/2) int u^2 phi_i), together with its
    summation-by-parts twin built from the localized masses and modified
    energies.  The two agree identically; a gross mismatch means a broken
    partition and raises."""
    _check_ordered_solitons(solitons)
    x = u.grid.x
    speeds = [c for c, _ in solitons]
    c1 = speeds[0]
    if not 0 < kappa < c1 / 4.0:
        raise KappaRangeError(f"kappa={kappa} outside (0, c1/4) = (0, {c1/4.0})")
    ux = spectral_derivative(u.values, u.grid, 1)
    edens = 0.5 * ux**2 - u.values ** (u.p + 1) / (u.p + 1)
    u2 = u.values**2

    direct = 0.0
    for i, c in enumerate(speeds, start=1):
        w = part.phi(i, x)
        direct += (integrate(edens * w, u.grid) + 0.5 * c * integrate(u2 * w, u.grid)) / c**2

    n = len(speeds)
    abel = 0.0
    for i in range(1, n):
        ci, cj = speeds[i - 1], speeds[i]
        Mi = localized_mass(u, part, i)
        Ei = localized_energy(u, part, i, kappa, c1)
        abel += (1.0 / ci**2 - 1.0 / cj**2) * Ei
        abel += (1.0 / ci - 1.0 / cj) * (0.5 - kappa * (1.0 / ci + 1.0 / cj)) * Mi
    cn = speeds[-1]
    abel += localized_energy(u, part, n, kappa, c1) / cn**2
    abel += (0.5 - kappa / cn) * localized_mass(u, part, n) / cn

    scale = max(1.0, abs(direct))
    if abs(direct - abel) > 1e-8 * scale:
        raise GKdVLabError(
            f"summation-by-parts mismatch: direct={direct!r}, abel={abel!r}"
        )
    return WeinsteinF(direct=direct, abel=abel)


# ---------------------------------------------------------------------------
# decay fits


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential fit: value ~ amplitude * exp(-rate * arg)."""

    rate: float
    amplitude: float
    residual: float
    window: Tuple[float, float]


def _trimmed(arg: np.ndarray, trim: float) -> np.ndarray:
    lo, hi = arg.min(), arg.max()
    span = hi - lo
    return (arg >= lo + trim * span) & (arg <= hi - trim * span)


def fit_exponential_decay(
    times: Sequence[float], values: Sequence[float], trim: float = 0.1
) -> DecayFit:
    """Fit log(value) against t by least squares; rate is minus the slope.

    The first and last ``trim`` fractions of the time window are excluded
    to avoid transients and floor effects.
    """
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if t.size < 8:
        raise DomainError(f"need at least 8 samples, got {t.size}")
    if np.any(v <= 0):
        raise NonPositiveValueError("all values must be positive for a log-linear fit")
    keep = _trimmed(t, trim)
    if keep.sum() < 2:
        keep = np.ones_like(t, dtype=bool)
    t, v = t[keep], v[keep]
    slope, intercept = np.polyfit(t, np.log(v), 1)
    resid = np.log(v) - (slope * t + intercept)
    return DecayFit(
        rate=float(-slope),
        amplitude=float(np.exp(intercept)),
        residual=float(np.sqrt(np.mean(resid**2))),
        window=(float(t.min()), float(t.max())),
    )


def fit_spatial_decay(
    u: Field,
    s: int,
    centers: Sequence[float],
    side: str = "right",
    trim: float = 0.1,
    rel_floor: float = 1e-12,
    tail_tol: float = 1e-8,
) -> DecayFit:
    """Fit the spatial decay exponent of |d^s u / dx^s| away from the centers.

    The derivative is spectral, so it is only trusted when the top third of
    its spectrum carries at most ``tail_tol`` of the energy; points below
    ``rel_floor`` times the peak are excluded as roundoff floor.
    """
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    d = u.values if s == 0 else spectral_derivative(u.values, u.grid, s)
    dhat = np.abs(np.fft.rfft(d)) ** 2
    top = dhat[2 * dhat.size // 3 :]
    denom = float(np.sum(dhat))
    if denom > 0 and float(np.sum(top)) / denom > tail_tol:
        raise SpectralTailError(
            f"top third of the derivative spectrum holds "
            f"{float(np.sum(top)) / denom:.2e} of the energy (> {tail_tol:g})"
        )
    x = u.grid.x
    if side == "right":
        ref = max(centers)
        mask = x > ref
        dist = x - ref
    else:
        ref = min(centers)
        mask = x < ref
        dist = ref - x
    amp = np.abs(d)
    mask &= amp > rel_floor * amp.max()
    if mask.sum() < 8:
        raise DomainError("fewer than 8 usable points on the requested side")
    dist, amp = dist[mask], amp[mask]
    keep = _trimmed(dist, trim)
    if keep.sum() >= 8:
        dist, amp = dist[keep], amp[keep]
    slope, intercept = np.polyfit(dist, np.log(amp), 1)
    resid = np.log(amp) - (slope * dist + intercept)
    return DecayFit(
        rate=float(-slope),
        amplitude=float(np.exp(intercept)),
        residual=float(np.sqrt(np.mean(resid**2))),
        window=(float(dist.min()), float(dist.max())),
    )


def fit_translation(
    u: Field, profile: Callable[[np.ndarray], np.ndarray], halfwidth: Optional[float] = None
) -> Tuple[float, float]:
    """Best translate of a reference profile: returns (shift, L2 distance),
    minimizing ||u - profile(. - a)|| over a.

    The coarse shift comes from the cross-correlation peak; the refinement
    is a bounded scalar minimization within one grid cell.
    """
    g = u.grid
    ref = profile(g.x)
    corr = np.fft.irfft(np.fft.rfft(u.values) * np.conj(np.fft.rfft(ref)), n=g.N)
    a0 = float(np.argmax(corr)) * g.dx
    if a0 > g.L / 2:
        a0 -= g.L

    def dist(a: float) -> float:
        return math.sqrt(max(integrate((u.values - profile(g.x - a)) ** 2, g), 0.0))

    hw = 2 * g.dx if halfwidth is None else halfwidth
    res = minimize_scalar(dist, bounds=(a0 - hw, a0 + hw), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x), float(res.fun)


# ---------------------------------------------------------------------------
# coercivity sampling


def random_smooth_field(
    grid: GridSpec, p: int, rng: np.random.Generator, k_cutoff: float = 2.0
) -> Field:
    """Random real field with Gaussian-damped spectrum; unit L2 norm."""
    nk = grid.N // 2 + 1
    coef = rng.standard_normal(nk) + 1j * rng.standard_normal(nk)
    coef *= np.exp(-((grid.k / k_cutoff) ** 2))
    coef[0] = coef[0].real
    coef[-1] = 0.0
    v = np.fft.irfft(coef, n=grid.N)
    v /= math.sqrt(max(integrate(v**2, grid), 1e-300))
    return Field(grid, p, 0.0, v)


def project_orthogonal(eps: Field, directions: Sequence[np.ndarray]) -> Field:
    """L2-project out the span of the given direction vectors."""
    g = eps.grid
    dirs = [np.asarray(d, dtype=np.float64) for d in directions]
    gram = np.array([[integrate(a * b, g) for b in dirs] for a in dirs])
    rhs = np.array([integrate(eps.values * d, g) for d in dirs])
    alpha = np.linalg.solve(gram, rhs)
    v = eps.values - sum(a * d for a, d in zip(alpha, dirs))
    return eps.with_values(v)


@dataclass(frozen=True)
class CoercivityFit:
    """Smallest single constant lambda0 <= lambda_max with
    ||eps||_{H1}^2 <= lambda0 H + (1/lambda0) sum_i (int eps R_i)^2
    across every sample; ``feasible`` is False when no constant works."""

    lambda0: float
    feasible: bool
    n_samples: int
    worst_margin: float


def sample_coercivity(
    solitons: Sequence[Tuple[float, float]],
    part: Partition,
    grid: GridSpec,
    p: int,
    n_samples: int = 100,
    eps_h1: float = 1e-2,
    seed: int = 0,
    lambda_max: float = 100.0,
) -> CoercivityFit:
    """Empirical coercivity study of the localized quadratic form.

    Draws random smooth fields, projects them orthogonal to every
    translation direction d/dx R_i, rescales to the requested H1 size, and
    searches for one lambda0 making the coercivity inequality hold for all
    of them.
    """
    _check_ordered_solitons(solitons)
    rng = np.random.default_rng(seed)
    x = grid.x
    dirs = [soliton_profile_derivative(p, c, x - a) for c, a in solitons]
    Rs = [soliton_profile(p, c, x - a) for c, a in solitons]

    G = np.empty(n_samples)
    Hv = np.empty(n_samples)
    S = np.empty(n_samples)
    for j in range(n_samples):
        eps = project_orthogonal(random_smooth_field(grid, p, rng), dirs)
        scale = eps_h1 / sobolev_norm(eps, 1.0)
        eps = eps.with_values(eps.values * scale)
        G[j] = sobolev_norm(eps, 1.0) ** 2
        Hv[j] = weinstein_H(eps, solitons, part)
        S[j] = sum(integrate(eps.values * R, grid) ** 2 for R in Rs)

    lams = np.geomspace(1e-3, lambda_max, 4000)
    margin = lams[None, :] * Hv[:, None] + S[:, None] / lams[None, :] - G[:, None]
    worst = margin.min(axis=0)
    feasible = worst >= 0
    if feasible.any():
        idx = int(np.argmax(feasible))
        return CoercivityFit(
            lambda0=float(lams[idx]),
            feasible=True,
            n_samples=n_samples,
            worst_margin=float(worst[idx]),
        )
    idx = int(np.argmax(worst))
    return CoercivityFit(
        lambda0=float(lams[idx]),
        feasible=False,
        n_samples=n_samples,
        worst_margin=float(worst[idx]),
    )
