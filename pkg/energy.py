#!/usr/bin/env python3
"""
energy.py — logarithmic mutual energies of discrete and circle-regularized measures.

- Pairing (mu, nu) = sum_i sum_j w_i v_j * (-log |x_i - y_j|), in nats.
- Regularization replaces each point mass by the normalized arc-length measure
  on the circle |z - x| = eps. For two such circles at center distance r:
    r = 0      -> -log eps
    r > 2 eps  -> -log r            (disjoint discs, harmonic exterior potential)
    r <= 2 eps -> near pair: kernel estimate (paper-bound) or quadrature (exact)
- O(d^2) pair loops run over fixed row blocks; block sums are combined with
  math.fsum, so totals do not depend on how many worker threads ran the blocks.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
from scipy.integrate import quad

PAPER_BOUND = "paper-bound"
EXACT_QUADRATURE = "exact-quadrature"
MODES = (PAPER_BOUND, EXACT_QUADRATURE)

BLOCK_ROWS = 128
WEIGHT_TOL = 1e-15
RADICAND_TOL = 1e-12


class EnergyError(ValueError):
    pass


class InvalidEpsilon(EnergyError):
    pass


class EpsilonMismatch(EnergyError):
    pass


class NegativeRadicand(EnergyError):
    def __init__(self, message: str, radicand: float):
        super().__init__(message)
        self.radicand = radicand


class DegenerateMeasureWarning(UserWarning):
    """Every pair of a discrete pairing was a shared point."""


# ---------------- summation ----------------

class KahanSum:
    """Running compensated sum."""

    def __init__(self) -> None:
        self.sum = 0.0
        self.carry = 0.0

    def add(self, value: float) -> None:
        y = value - self.carry
        t = self.sum + y
        self.carry = (t - self.sum) - y
        self.sum = t

    @property
    def value(self) -> float:
        return self.sum


def kahan_total(values: Iterable[float]) -> float:
    acc = KahanSum()
    for v in values:
        acc.add(float(v))
    return acc.value


# ---------------- measures ----------------

def _as_weights(weights: np.ndarray, count: int) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if weights.size != count:
        raise EnergyError(f"{weights.size} weights for {count} points")
    if count and not np.all(weights > 0):
        raise EnergyError("weights must be positive")
    if count and abs(math.fsum(weights.tolist()) - 1.0) > WEIGHT_TOL:
        raise EnergyError(f"weights sum to {math.fsum(weights.tolist())!r}, not 1")
    return weights


@dataclass(frozen=True)
class DiscreteMeasure:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", _as_weights(self.weights, points.size))

    @classmethod
    def uniform(cls, points) -> "DiscreteMeasure":
        points = np.asarray(points, dtype=np.complex128).reshape(-1)
        if points.size == 0:
            raise EnergyError("a probability measure needs at least one point")
        return cls(points, np.full(points.size, 1.0 / points.size))

    @classmethod
    def from_conjugates(cls, roots) -> "DiscreteMeasure":
        return cls.uniform(roots.points)

    @property
    def size(self) -> int:
        return int(self.points.size)

    def regularize(self, epsilon: float) -> "RegularizedMeasure":
        return RegularizedMeasure(self.points, epsilon, self.weights)


@dataclass(frozen=True)
class RegularizedMeasure:
    centers: np.ndarray
    epsilon: float
    weights: np.ndarray

    def __post_init__(self) -> None:
        if not (isinstance(self.epsilon, (int, float)) and self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise InvalidEpsilon(f"circle radius must be a positive real, got {self.epsilon!r}")
        centers = np.asarray(self.centers, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "weights", _as_weights(self.weights, centers.size))

    @classmethod
    def uniform(cls, centers, epsilon: float) -> "RegularizedMeasure":
        return DiscreteMeasure.uniform(centers).regularize(epsilon)

    @property
    def discrete(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.centers, self.weights)

    @property
    def size(self) -> int:
        return int(self.centers.size)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Itemized pairing of two regularized measures."""
    total: float
    self_terms: float
    disjoint_pair_terms: float
    near_pair_terms: float
    near_pair_count: int
    mode: str
    near_pair_interval: tuple[float, float] = (0.0, 0.0)
    epsilon: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "self_terms": self.self_terms,
            "disjoint_pair_terms": self.disjoint_pair_terms,
            "near_pair_terms": self.near_pair_terms,
            "near_pair_count": self.near_pair_count,
            "mode": self.mode,
            "near_pair_interval": list(self.near_pair_interval),
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EnergyBreakdown":
        lo, hi = data.get("near_pair_interval", (0.0, 0.0))
        return cls(
            total=float(data["total"]),
            self_terms=float(data["self_terms"]),
            disjoint_pair_terms=float(data["disjoint_pair_terms"]),
            near_pair_terms=float(data["near_pair_terms"]),
            near_pair_count=int(data["near_pair_count"]),
            mode=str(data["mode"]),
            near_pair_interval=(float(lo), float(hi)),
            epsilon=data.get("epsilon"),
        )


def write_energy_json(path: Union[str, Path], payload: Union[EnergyBreakdown, dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = payload.to_dict() if isinstance(payload, EnergyBreakdown) else payload
    path.write_text(json.dumps(data, indent=2) + "\n")
    return path


# ---------------- kernels ----------------

def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise EnergyError(f"unknown energy mode {mode!r} (expected one of {', '.join(MODES)})")


def circle_pair_kernel(distance: float, epsilon: float) -> float:
    """(delta_{z,eps}, delta_{z',eps}) for |z - z'| = distance.

    Equals -int_0^1 max{log|w - eps e^{2 pi i s}|, log eps} ds. On the arc where
    |w + eps e^{it}| > eps the integrand is log eps + log(1 + rho^2 + 2 rho cos t)/2
    with rho = distance/eps; the arc is |t| < arccos(-rho/2).
    """
    if epsilon <= 0:
        raise InvalidEpsilon(f"circle radius must be positive, got {epsilon!r}")
    if distance < 0:
        raise EnergyError(f"distance must be nonnegative, got {distance!r}")
    if distance == 0:
        return -math.log(epsilon)
    if distance > 2.0 * epsilon:
        return -math.log(distance)
    rho = distance / epsilon
    edge = math.acos(-rho / 2.0)
    integral, _ = quad(lambda t: math.log1p(rho * rho + 2.0 * rho * math.cos(t)),
                       0.0, edge, epsabs=1e-14, epsrel=1e-13, limit=200)
    return -math.log(epsilon) - integral / (2.0 * math.pi)


def green_modulus_bound(dist: float) -> float:
    """g(z) <= dist(z, K)^(1/2) for a compact K of capacity 1 with connected complement."""
    if dist < 0:
        raise ValueError(f"distance must be nonnegative, got {dist!r}")
    return math.sqrt(dist)


# ---------------- pair engine ----------------

@dataclass(frozen=True)
class _PairSums:
    own: float
    far: float
    near_distances: np.ndarray
    near_weights: np.ndarray
    own_count: int
    pair_count: int


def _block_sums(x: np.ndarray, wx: np.ndarray, y: np.ndarray, wy: np.ndarray, start: int, stop: int,
                epsilon: Optional[float], same_measure: bool) -> _PairSums:
    xb = x[start:stop]
    dist = np.abs(xb[:, None] - y[None, :])
    weight = wx[start:stop, None] * wy[None, :]
    if same_measure:
        own = np.zeros(dist.shape, dtype=bool)
        rows = np.arange(stop - start)
        own[rows, rows + start] = True
    else:
        own = dist == 0.0
    if epsilon is None:
        far = ~own
    else:
        far = (dist > 2.0 * epsilon) & ~own
    near = ~(far | own)
    far_terms = np.where(far, weight * -np.log(np.where(far, dist, 1.0)), 0.0)
    own_terms = np.where(own, weight, 0.0)
    own_value = 0.0 if epsilon is None else float(np.sum(own_terms)) * -math.log(epsilon)
    return _PairSums(
        own=own_value,
        far=float(np.sum(far_terms)),
        near_distances=dist[near],
        near_weights=weight[near],
        own_count=int(own.sum()),
        pair_count=int(dist.size),
    )


def _pair_sums(x: np.ndarray, wx: np.ndarray, y: np.ndarray, wy: np.ndarray,
               epsilon: Optional[float], same_measure: bool, workers: int) -> list[_PairSums]:
    blocks = [(s, min(s + BLOCK_ROWS, x.size)) for s in range(0, x.size, BLOCK_ROWS)]

    def run(block: tuple[int, int]) -> _PairSums:
        return _block_sums(x, wx, y, wy, block[0], block[1], epsilon, same_measure)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, blocks))
    return [run(b) for b in blocks]


def discrete_energy(mu: DiscreteMeasure, nu: DiscreteMeasure, workers: int = 1) -> float:
    """Off-diagonal pairing of two discrete measures; shared points are excluded."""
    parts = _pair_sums(mu.points, mu.weights, nu.points, nu.weights, None,
                       same_measure=False, workers=workers)
    own = sum(p.own_count for p in parts)
    pairs = sum(p.pair_count for p in parts)
    if pairs and own == pairs:
        warnings.warn("discrete pairing has no off-diagonal pairs; returning 0",
                      DegenerateMeasureWarning, stacklevel=2)
        return 0.0
    return math.fsum(p.far for p in parts)


def _regularized_pairing(mu: RegularizedMeasure, nu: RegularizedMeasure, mode: str,
                         same_measure: bool, workers: int) -> EnergyBreakdown:
    _check_mode(mode)
    eps = mu.epsilon
    parts = _pair_sums(mu.centers, mu.weights, nu.centers, nu.weights, eps,
                       same_measure=same_measure, workers=workers)
    self_terms = math.fsum(p.own for p in parts)
    disjoint = math.fsum(p.far for p in parts)

    near_terms = KahanSum()
    lower = KahanSum()
    upper = KahanSum()
    count = 0
    kernel_lo = -math.log(4.0 * eps)
    kernel_hi = -math.log(eps)
    for p in parts:
        for dist, weight in zip(p.near_distances.tolist(), p.near_weights.tolist()):
            count += 1
            lower.add(weight * kernel_lo)
            upper.add(weight * kernel_hi)
            if mode == EXACT_QUADRATURE:
                near_terms.add(weight * circle_pair_kernel(dist, eps))
            elif same_measure:
                near_terms.add(weight * kernel_lo)
            else:
                near_terms.add(weight * kernel_hi)
    near = near_terms.value
    return EnergyBreakdown(
        total=math.fsum([self_terms, disjoint, near]),
        self_terms=self_terms,
        disjoint_pair_terms=disjoint,
        near_pair_terms=near,
        near_pair_count=count,
        mode=mode,
        near_pair_interval=(lower.value, upper.value),
        epsilon=eps,
    )


def regularized_self_energy(mu: RegularizedMeasure, mode: str = PAPER_BOUND,
                            workers: int = 1) -> EnergyBreakdown:
    """([F]_eps, [F]_eps).

    Paper-bound mode charges near pairs the lower estimate -log(4 eps); exact
    mode integrates the circle-circle kernel.
    """
    return _regularized_pairing(mu, mu, mode, same_measure=True, workers=workers)


def regularized_cross_energy(mu: RegularizedMeasure, nu: RegularizedMeasure,
                             mode: str = PAPER_BOUND, workers: int = 1) -> EnergyBreakdown:
    """([A]_eps, [B]_eps). Near pairs get -log eps in paper-bound mode."""
    if mu.epsilon != nu.epsilon:
        raise EpsilonMismatch(f"circle radii differ: {mu.epsilon!r} vs {nu.epsilon!r}")
    return _regularized_pairing(mu, nu, mode, same_measure=False, workers=workers)


@dataclass(frozen=True)
class MutualEnergy:
    self_mu: EnergyBreakdown
    cross: EnergyBreakdown
    self_nu: EnergyBreakdown
    radicand: float
    distance: float

    def to_dict(self) -> dict:
        return {
            "self_mu": self.self_mu.to_dict(),
            "cross": self.cross.to_dict(),
            "self_nu": self.self_nu.to_dict(),
            "minus_two_cross": -2.0 * self.cross.total,
            "radicand": self.radicand,
            "distance": self.distance,
        }


def mutual_energy_terms(mu: RegularizedMeasure, nu: RegularizedMeasure, mode: str = PAPER_BOUND,
                        workers: int = 1) -> MutualEnergy:
    cross = regularized_cross_energy(mu, nu, mode, workers)
    self_mu = regularized_self_energy(mu, mode, workers)
    self_nu = regularized_self_energy(nu, mode, workers)
    radicand = self_mu.total - 2.0 * cross.total + self_nu.total
    if radicand < -RADICAND_TOL:
        raise NegativeRadicand(f"energy of the difference is negative ({radicand:.3e})", radicand)
    return MutualEnergy(self_mu=self_mu, cross=cross, self_nu=self_nu,
                        radicand=radicand, distance=math.sqrt(max(radicand, 0.0)))


def mutual_energy_distance(mu: RegularizedMeasure, nu: RegularizedMeasure, mode: str = PAPER_BOUND,
                           workers: int = 1) -> float:
    """d_inf(mu, nu) = sqrt(self(mu) - 2 cross + self(nu))."""
    return mutual_energy_terms(mu, nu, mode, workers).distance
