#!/usr/bin/env python3
"""
rootsolve.py — all complex roots of a deflated periodicity polynomial.

- Never touches expanded coefficients: values and derivatives come from the n
  squaring steps (P, P') -> (P^2 + c, 2 P P' + 1), with the removed integer
  roots divided out analytically (quotient rule).
- Simultaneous Aberth-Ehrlich sweeps in double precision, Jacobi style: every
  point of a sweep is updated from the previous sweep's snapshot.
- Each converged root gets a few Newton steps in extended precision (mpmath)
  and is kept as a double-double pair (points + tails); residuals are measured
  at the full pair, and certify() repeats the measurement at a higher precision.
- Roots CSV: index,re,im,residual. re and im carry the polished value to 34
  significant digits, residual 17.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from mpmath.ctx_mp import MPContext

from critpoly import IterationSpec

# Significant digits for re and im in roots CSV files (covers a double-double pair).
ROOT_DIGITS = 34

# Orbit values beyond this are treated as escaped; only the log-derivative is tracked.
ESCAPE_MAGNITUDE = 1e100

GOLDEN_OFFSET = (math.sqrt(5.0) - 1.0) / 2.0


class RootSolveError(RuntimeError):
    pass


class NonConvergence(RootSolveError):
    def __init__(self, message: str, sweeps: int, worst: float):
        super().__init__(message)
        self.sweeps = sweeps
        self.worst = worst


class CollisionDetected(RootSolveError):
    def __init__(self, message: str, i: int, j: int, distance: float):
        super().__init__(message)
        self.i = i
        self.j = j
        self.distance = distance


class RootsFormatError(ValueError):
    """A roots CSV file could not be parsed."""


def root_disc_radius(a: int) -> float:
    """Radius of a disc about 0 containing M_a.

    For |c| > r_a the orbit of a passes the escape radius max(|c|, 2) by the
    second step; r_a solves (r - a^2)^2 = 2r. r_0 = 2, r_1 = 2 + sqrt(3).
    """
    a2 = float(a) * float(a)
    return a2 + 1.0 + math.sqrt(2.0 * a2 + 1.0)


@dataclass(frozen=True)
class SolverSettings:
    residual_tol: float = 1e-10
    step_tol: float = 1e-12               # relative to max(1, |c|)
    min_separation: float = 1e-8
    max_sweeps: int = 2000
    init_radius: Optional[float] = None   # None: 1.1 * root_disc_radius(a)
    polish_steps: int = 2
    polish_prec: int = 106
    certify_prec: int = 212


@dataclass(frozen=True)
class OrbitEvaluator:
    """c -> (f_c^n(a) - b) / prod (c - r) over the removed integer roots r."""
    spec: IterationSpec
    deflated_roots: tuple[int, ...] = (0,)

    @property
    def degree(self) -> int:
        return self.spec.expected_degree - len(self.deflated_roots)

    def _removed_log_derivative(self, c: np.ndarray) -> np.ndarray:
        total = np.zeros_like(c)
        for r in self.deflated_roots:
            total += 1.0 / (c - r)
        return total

    def evaluate(self, c: Union[complex, np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
        """Deflated value and derivative in double precision (no overflow guard)."""
        c = np.asarray(c, dtype=np.complex128)
        P = np.full_like(c, self.spec.a)
        dP = np.zeros_like(c)
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(self.spec.n):
                P, dP = P * P + c, 2.0 * P * dP + 1.0
            P = P - self.spec.b
            Q = np.ones_like(c)
            for r in self.deflated_roots:
                Q = Q * (c - r)
            value = P / Q
            deriv = dP / Q - value * self._removed_log_derivative(c)
        return value, deriv

    def newton_ratio(self, c: np.ndarray) -> np.ndarray:
        """p/p' for the deflated p, safe for points whose orbit escapes.

        Once |P_k| exceeds ESCAPE_MAGNITUDE the recurrence for P'/P reduces to
        r_{k+1} = 2 r_k, so escaped points keep a finite log-derivative.
        """
        c = np.asarray(c, dtype=np.complex128)
        P = np.full_like(c, self.spec.a)
        dP = np.zeros_like(c)
        log_deriv = np.zeros_like(c)
        live = np.ones(c.shape, dtype=bool)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            for _ in range(self.spec.n):
                P_next = P * P + c
                dP_next = 2.0 * P * dP + 1.0
                log_deriv = np.where(live, log_deriv, 2.0 * log_deriv)
                escaped_now = live & ~(np.abs(P_next) < ESCAPE_MAGNITUDE)
                log_deriv = np.where(escaped_now, dP_next / P_next, log_deriv)
                P = np.where(live, P_next, P)
                dP = np.where(live, dP_next, dP)
                live = live & ~escaped_now
            log_deriv = np.where(live, dP / (P - self.spec.b), log_deriv)
            log_deriv = log_deriv - self._removed_log_derivative(c)
            ratio = 1.0 / log_deriv
        return ratio

    def evaluate_mp(self, ctx: MPContext, c) -> tuple:
        """Deflated value and derivative at an mpc point of ``ctx``."""
        P = ctx.mpf(self.spec.a)
        dP = ctx.mpf(0)
        for _ in range(self.spec.n):
            P, dP = P * P + c, 2 * P * dP + 1
        P = P - self.spec.b
        Q = ctx.mpf(1)
        removed = ctx.mpf(0)
        for r in self.deflated_roots:
            Q = Q * (c - r)
            removed = removed + 1 / (c - r)
        value = P / Q
        return value, dP / Q - value * removed


@dataclass
class ConjugateSet:
    """Numerical Galois conjugates of one witness.

    ``points`` are the nearest doubles; ``tails`` hold the low-order parts so
    that points + tails is the extended-precision root (zeros when unknown).
    """
    points: np.ndarray
    residuals: np.ndarray
    label: str = ""
    tails: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=np.complex128).reshape(-1)
        self.residuals = np.asarray(self.residuals, dtype=np.float64).reshape(-1)
        if self.tails is None:
            self.tails = np.zeros_like(self.points)
        self.tails = np.asarray(self.tails, dtype=np.complex128).reshape(-1)
        if self.points.shape != self.residuals.shape or self.points.shape != self.tails.shape:
            raise ValueError("points, residuals and tails must have the same length")

    @property
    def degree(self) -> int:
        return int(self.points.size)

    def __len__(self) -> int:
        return self.degree


@dataclass(frozen=True)
class CertificationReport:
    passed: bool
    count: int
    max_residual: float
    min_separation: float
    conjugate_gap: float
    tol: float
    prec: int
    failures: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "count": self.count,
            "max_residual": self.max_residual,
            "min_separation": self.min_separation,
            "conjugate_gap": self.conjugate_gap,
            "tol": self.tol,
            "prec": self.prec,
            "failures": list(self.failures),
        }


# ---------------- Aberth sweeps ----------------

def initial_guesses(d: int, radius: float) -> np.ndarray:
    angles = 2.0 * np.pi * (np.arange(d) + GOLDEN_OFFSET) / d
    return radius * np.exp(1j * angles)


def _aberth_sweeps(ev: OrbitEvaluator, z: np.ndarray, cfg: SolverSettings) -> tuple[np.ndarray, int]:
    active = np.ones(z.size, dtype=bool)
    worst = math.inf
    for sweep in range(1, cfg.max_sweeps + 1):
        idx = np.flatnonzero(active)
        zi = z[idx]
        ratio = ev.newton_ratio(zi)
        rows = np.arange(idx.size)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            diff = zi[:, None] - z[None, :]
            diff[rows, idx] = 1.0
            inverse = 1.0 / diff
            inverse[rows, idx] = 0.0
            repulsion = inverse.sum(axis=1)
            step = ratio / (1.0 - ratio * repulsion)
        step = np.where(np.isfinite(step), step, ratio)
        step = np.where(np.isfinite(step), step, 0.0)
        z = z.copy()
        z[idx] = zi - step
        size = np.abs(step)
        worst = float(size.max()) if size.size else 0.0
        active[idx[size <= cfg.step_tol * np.maximum(1.0, np.abs(zi))]] = False
        if not active.any():
            return z, sweep
    raise NonConvergence(
        f"Aberth sweeps did not converge in {cfg.max_sweeps} sweeps "
        f"({int(active.sum())} points still moving, worst step {worst:.3e})",
        sweeps=cfg.max_sweeps, worst=worst)


def _closest_pair(points: np.ndarray) -> tuple[int, int, float]:
    if points.size < 2:
        return -1, -1, math.inf
    dist = np.abs(points[:, None] - points[None, :])
    np.fill_diagonal(dist, np.inf)
    flat = int(np.argmin(dist))
    i, j = divmod(flat, points.size)
    return i, j, float(dist[i, j])


def _conjugate_gap(points: np.ndarray) -> float:
    if points.size == 0:
        return 0.0
    dist = np.abs(np.conj(points)[:, None] - points[None, :])
    return float(dist.min(axis=1).max())


def _mp_context(prec: int) -> MPContext:
    ctx = MPContext()
    ctx.prec = prec
    return ctx


def _polish(ev: OrbitEvaluator, points: np.ndarray, steps: int,
            prec: int) -> tuple[np.ndarray, np.ndarray]:
    """Newton steps at ``prec`` bits; returns the double-double split (hi, lo)."""
    ctx = _mp_context(prec)
    hi = np.empty_like(points)
    lo = np.empty_like(points)
    for k, z in enumerate(points):
        c = ctx.mpc(z.real, z.imag)
        for _ in range(steps):
            value, deriv = ev.evaluate_mp(ctx, c)
            if deriv == 0:
                break
            c = c - value / deriv
        hi[k] = complex(c)
        lo[k] = complex(c - ctx.mpc(hi[k].real, hi[k].imag))
    return hi, lo


def _residuals(ev: OrbitEvaluator, points: np.ndarray, tails: np.ndarray, prec: int) -> np.ndarray:
    ctx = _mp_context(prec)
    out = np.empty(points.size, dtype=np.float64)
    for k, (z, t) in enumerate(zip(points, tails)):
        c = ctx.mpc(z.real, z.imag) + ctx.mpc(t.real, t.imag)
        value, _ = ev.evaluate_mp(ctx, c)
        out[k] = float(abs(value))
    return out


def solve_all_roots(ev: OrbitEvaluator, d: int, cfg: Optional[SolverSettings] = None,
                    label: str = "") -> ConjugateSet:
    """All d roots of the deflated polynomial behind ``ev``."""
    cfg = cfg or SolverSettings()
    if d != ev.degree:
        raise ValueError(f"degree {d} does not match the deflated degree {ev.degree}")
    if d == 0:
        return ConjugateSet(np.empty(0, dtype=np.complex128), np.empty(0), label=label)

    radius = cfg.init_radius or 1.1 * root_disc_radius(ev.spec.a)
    z, _ = _aberth_sweeps(ev, initial_guesses(d, radius), cfg)
    z, tails = _polish(ev, z, cfg.polish_steps, cfg.polish_prec)
    residuals = _residuals(ev, z, tails, cfg.polish_prec)

    worst = float(residuals.max())
    if not worst <= cfg.residual_tol:
        raise NonConvergence(
            f"worst residual {worst:.3e} above tolerance {cfg.residual_tol:.1e} "
            f"at c = {complex(z[int(np.argmax(residuals))]):.6g}",
            sweeps=cfg.max_sweeps, worst=worst)
    i, j, sep = _closest_pair(z)
    if sep < cfg.min_separation:
        raise CollisionDetected(
            f"approximations {i} and {j} are {sep:.3e} apart (min separation {cfg.min_separation:.1e})",
            i=i, j=j, distance=sep)
    return ConjugateSet(points=z, residuals=residuals, label=label, tails=tails)


def certify(roots: ConjugateSet, ev: OrbitEvaluator, tol: float = 1e-10, prec: int = 212,
            min_separation: float = 1e-8, conjugate_tol: float = 1e-10) -> CertificationReport:
    """Re-evaluate every root at ``prec`` bits and check residual, separation and conjugation."""
    points = roots.points
    residuals = _residuals(ev, points, roots.tails, prec) if points.size else np.empty(0)
    max_residual = float(residuals.max()) if residuals.size else 0.0
    _, _, sep = _closest_pair(points)
    gap = _conjugate_gap(points)

    failures = []
    if points.size != ev.degree:
        failures.append(f"expected {ev.degree} roots, found {points.size}")
    if not max_residual <= tol:
        failures.append(f"max residual {max_residual:.3e} > {tol:.1e}")
    if sep < min_separation:
        failures.append(f"min separation {sep:.3e} < {min_separation:.1e}")
    if not gap <= conjugate_tol:
        failures.append(f"conjugate gap {gap:.3e} > {conjugate_tol:.1e}")
    return CertificationReport(
        passed=not failures, count=int(points.size), max_residual=max_residual,
        min_separation=sep, conjugate_gap=gap, tol=tol, prec=prec, failures=tuple(failures))


# ---------------- roots CSV ----------------

ROOTS_HEADER = ["index", "re", "im", "residual"]

_CSV_CTX = _mp_context(256)


def _pair_text(hi: float, lo: float) -> str:
    return _CSV_CTX.nstr(_CSV_CTX.mpf(hi) + _CSV_CTX.mpf(lo), ROOT_DIGITS)


def _split_text(text: str) -> tuple[float, float]:
    """Decimal text -> (nearest double, remainder)."""
    x = _CSV_CTX.mpf(text)
    hi = float(x)
    return hi, float(x - hi)


def write_roots_csv(path: Union[str, Path], roots: ConjugateSet) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROOTS_HEADER)
        for k, (z, t, res) in enumerate(zip(roots.points, roots.tails, roots.residuals)):
            writer.writerow([k, _pair_text(z.real, t.real), _pair_text(z.imag, t.imag), f"{res:.17g}"])
    return path


def read_roots_csv(path: Union[str, Path], label: Optional[str] = None) -> ConjugateSet:
    path = Path(path)
    points: list[complex] = []
    tails: list[complex] = []
    residuals: list[float] = []
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ROOTS_HEADER:
                raise RootsFormatError(f"{path}:1: expected header {','.join(ROOTS_HEADER)}, got {header}")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 4:
                    raise RootsFormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
                try:
                    re_hi, re_lo = _split_text(row[1])
                    im_hi, im_lo = _split_text(row[2])
                    residuals.append(float(row[3]))
                except ValueError:
                    raise RootsFormatError(f"{path}:{lineno}: not a number in {row}") from None
                points.append(complex(re_hi, im_hi))
                tails.append(complex(re_lo, im_lo))
    except OSError as e:
        raise RootsFormatError(f"{path}: cannot read roots file: {e}") from e
    return ConjugateSet(points=np.array(points, dtype=np.complex128),
                        residuals=np.array(residuals, dtype=np.float64),
                        label=label if label is not None else path.stem,
                        tails=np.array(tails, dtype=np.complex128))


def evaluator_for(spec: IterationSpec, removed: Sequence[int]) -> OrbitEvaluator:
    return OrbitEvaluator(spec=spec, deflated_roots=tuple(int(r) for r in removed))
