"""Discrete counting measures: energies, potentials, the closeness
functional over the Green function, and smoothed (surface-averaged)
variants used by the discrepancy bound."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import CoincidentPointsError, SingularityError
from .kernel import KernelSpec, require_newtonian
from .sets import MEMBERSHIP_TOL, CompactSetModel, EquilibriumOracle, distance_to_set

# Fixed chunk size of the deterministic pairwise reduction. Partial sums
# are always taken over these exact slices, in slice order, so results
# are bitwise identical for any worker count.
_REDUCTION_CHUNK = 4096


@dataclass(frozen=True)
class PointConfig:
    """An ordered n-tuple of points in R^d with its counting measure.

    Order is significant (greedy prefixes) and preserved by the CSV
    round-trip. The underlying array is read-only.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a (n, dim) array with n >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("all points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def prefix(self, m: int) -> "PointConfig":
        return PointConfig(self.points[:m])


def write_points_csv(config: PointConfig, path) -> None:
    """CSV with header x1..xd, one point per row, round-trip precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i+1}" for i in range(config.dim)])
        for row in config.points:
            w.writerow([repr(float(v)) for v in row])


def read_points_csv(path) -> PointConfig:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        dim = len(header)
        expected = [f"x{i+1}" for i in range(dim)]
        if header != expected:
            raise ValueError(f"bad point CSV header {header!r}, expected {expected!r}")
        rows = [[float(v) for v in row] for row in r if row]
    return PointConfig(np.array(rows, dtype=float))


def _deterministic_sum(values: np.ndarray, workers: int = 1) -> float:
    """Chunked tree reduction with a layout independent of worker count."""
    m = len(values)
    if m == 0:
        return 0.0
    bounds = range(0, m, _REDUCTION_CHUNK)
    if workers <= 1 or m <= _REDUCTION_CHUNK:
        partials = [float(np.add.reduce(values[a:a + _REDUCTION_CHUNK])) for a in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(lambda a: float(np.add.reduce(values[a:a + _REDUCTION_CHUNK])), bounds))
    total = 0.0
    for p in partials:  # fixed order regardless of scheduling
        total += p
    return total


def _pair_kernel_terms(X: PointConfig, spec: KernelSpec) -> np.ndarray:
    if X.dim != spec.dim:
        raise ValueError(f"config dimension {X.dim} != kernel dimension {spec.dim}")
    d = pdist(X.points)
    if np.any(d == 0.0):
        raise CoincidentPointsError("configuration contains coincident points")
    return d ** spec.exponent


def discrete_energy(X: PointConfig, spec: KernelSpec, workers: int = 1) -> float:
    """Normalized pair energy 2/(n(n-1)) * sum over j<k of k(x_j - x_k)."""
    if X.n < 2:
        raise ValueError("discrete energy needs n >= 2")
    terms = _pair_kernel_terms(X, spec)
    s = _deterministic_sum(terms, workers=workers)
    return 2.0 * s / (X.n * (X.n - 1))


def discrete_potential(X: PointConfig, spec: KernelSpec, y):
    """Potential of the counting measure: (1/n) sum over k of k(y - x_k).

    ``y`` may be one point (dim,) or a batch (m, dim). Raises if any
    evaluation point coincides with a configuration point.
    """
    if X.dim != spec.dim:
        raise ValueError(f"config dimension {X.dim} != kernel dimension {spec.dim}")
    yv = np.asarray(y, dtype=float)
    scalar = yv.ndim == 1
    pts = yv[None, :] if scalar else yv
    diff = pts[:, None, :] - X.points[None, :, :]
    r = np.linalg.norm(diff, axis=-1)
    if np.any(r == 0.0):
        raise SingularityError("potential evaluated at a configuration point")
    u = np.mean(r ** spec.exponent, axis=-1)
    return float(u[0]) if scalar else u


def closeness_m_E(X: PointConfig, E: CompactSetModel, oracle: EquilibriumOracle) -> float:
    """Average of the Green function over configuration points outside E.

    Exactly zero when every point lies in E (membership uses the
    distance threshold 1e-9 to absorb projection rounding).
    """
    dists = distance_to_set(E, X.points)
    outside = np.atleast_1d(dists) > MEMBERSHIP_TOL
    if not np.any(outside):
        return 0.0
    g = np.atleast_1d(oracle.green(X.points[outside]))
    return float(np.sum(g) / X.n)


@dataclass(frozen=True)
class SmoothedConfig:
    """A configuration with each atom spread uniformly over the sphere of
    radius ``radius`` about it (the surface-averaged smoothing of the
    counting measure)."""

    base: PointConfig
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("smoothing radius must be positive")


def smoothed_potential(S: SmoothedConfig, spec: KernelSpec, y):
    """Potential of the smoothed measure, finite everywhere.

    Each atom's surface average has the closed form
    max(r, |y - x_k|)**(2-d), valid in the Newtonian case.
    """
    require_newtonian(spec, "smoothed potential")
    yv = np.asarray(y, dtype=float)
    scalar = yv.ndim == 1
    pts = yv[None, :] if scalar else yv
    diff = pts[:, None, :] - S.base.points[None, :, :]
    r = np.linalg.norm(diff, axis=-1)
    u = np.mean(np.maximum(r, S.radius) ** (2.0 - spec.dim), axis=-1)
    return float(u[0]) if scalar else u


def smoothed_energy_terms(S: SmoothedConfig, spec: KernelSpec) -> float:
    """Upper bound on the smoothed self-energy:
    (n-1)/n * discrete energy + r**(2-d)/n."""
    require_newtonian(spec, "smoothed energy bound")
    n = S.base.n
    if n < 2:
        raise ValueError("smoothed energy bound needs n >= 2")
    e = discrete_energy(S.base, spec)
    return (n - 1) / n * e + S.radius ** (2.0 - spec.dim) / n


def _monomial_means(points: np.ndarray, degree: int) -> np.ndarray:
    cols = [points]
    if degree == 2:
        d = points.shape[1]
        quad = [points[:, i] * points[:, j] for i in range(d) for j in range(i, d)]
        cols.append(np.column_stack(quad))
    feats = np.column_stack(cols)
    return feats.mean(axis=0)


def moment_distance(
    X: PointConfig,
    oracle: EquilibriumOracle,
    degree: int = 2,
    samples: int = 100_000,
    seed: int = 0,
) -> float:
    """Max deviation of coordinate-monomial means (total degree <= degree)
    between the counting measure and a Monte Carlo draw of the
    equilibrium measure. Quantifies weak-star closeness through a fixed
    finite test family."""
    if degree not in (1, 2):
        raise ValueError("degree must be 1 or 2")
    mc = oracle.sampler(samples, seed)
    mx = _monomial_means(X.points, degree)
    mm = _monomial_means(mc, degree)
    return float(np.max(np.abs(mx - mm)))
