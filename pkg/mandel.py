#!/usr/bin/env python3
"""
mandel.py — M_a membership checks and root point clouds.

- Orbit of a under z -> z^2 + c escapes once |z| > max(|c|, 2); that verdict is final.
- An orbit that comes back within return_tol of a is periodic to working precision
  and is reported bounded without spending the remaining iterations.
- Point clouds are plain CSV (re,im) for external plotting.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

BOUNDED = "bounded-so-far"
ESCAPED = "escaped"

CLOUD_HEADER = ["re", "im"]


class PointCloudError(OSError):
    def __init__(self, message: str, path: Union[str, Path]):
        super().__init__(f"{path}: {message}")
        self.path = Path(path)


@dataclass(frozen=True)
class OrbitCheck:
    c: complex
    a: int
    max_iter: int
    escape_radius: float
    escaped_at: Optional[int] = None
    returned_at: Optional[int] = None

    @property
    def escaped(self) -> bool:
        return self.escaped_at is not None

    @property
    def verdict(self) -> str:
        if self.escaped_at is None:
            return BOUNDED
        return f"{ESCAPED} at iteration {self.escaped_at}"

    def to_dict(self) -> dict:
        return {
            "c": [self.c.real, self.c.imag],
            "a": self.a,
            "max_iter": self.max_iter,
            "escape_radius": self.escape_radius,
            "verdict": self.verdict,
            "escaped_at": self.escaped_at,
            "returned_at": self.returned_at,
        }


def escape_radius(c: complex) -> float:
    return max(abs(c), 2.0)


def membership(c: complex, a: int, max_iter: int = 10_000, return_tol: float = 1e-8) -> OrbitCheck:
    """Iterate z <- z^2 + c from z = a; z_0 = a counts as iteration 0."""
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    c = complex(c)
    radius = escape_radius(c)
    start = complex(a)
    z = start
    for k in range(max_iter + 1):
        if abs(z) > radius:
            return OrbitCheck(c, a, max_iter, radius, escaped_at=k)
        if k and return_tol > 0 and abs(z - start) <= return_tol:
            return OrbitCheck(c, a, max_iter, radius, returned_at=k)
        z = z * z + c
    return OrbitCheck(c, a, max_iter, radius)


def orbit_magnitudes(c: complex, a: int, steps: int) -> list[float]:
    """|z_0|, ..., |z_steps|; stops early at inf."""
    z = complex(a)
    out = [abs(z)]
    for _ in range(steps):
        try:
            z = z * z + c
        except OverflowError:
            out.append(math.inf)
            break
        out.append(abs(z))
        if math.isinf(out[-1]):
            break
    return out


@dataclass(frozen=True)
class MembershipSummary:
    a: int
    count: int
    bounded: int
    escaped: tuple[int, ...]
    max_abs: float

    @property
    def passed(self) -> bool:
        return not self.escaped

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "count": self.count,
            "bounded": self.bounded,
            "escaped_indices": list(self.escaped),
            "max_abs": self.max_abs,
            "passed": self.passed,
        }


def membership_summary(points: Iterable[complex], a: int, max_iter: int = 10_000,
                       return_tol: float = 1e-8) -> MembershipSummary:
    points = [complex(p) for p in points]
    escaped = tuple(i for i, c in enumerate(points) if membership(c, a, max_iter, return_tol).escaped)
    return MembershipSummary(
        a=a,
        count=len(points),
        bounded=len(points) - len(escaped),
        escaped=escaped,
        max_abs=max((abs(p) for p in points), default=0.0),
    )


def emit_point_cloud(roots, path: Union[str, Path]) -> Path:
    """Write re,im rows for a ConjugateSet (or any iterable of complex)."""
    path = Path(path)
    points = getattr(roots, "points", roots)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CLOUD_HEADER)
            for z in np.asarray(points, dtype=np.complex128).reshape(-1):
                writer.writerow([format(float(z.real), ".17g"), format(float(z.imag), ".17g")])
    except OSError as e:
        raise PointCloudError(f"cannot write point cloud ({e.strerror or e})", path) from e
    return path


def read_point_cloud(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise PointCloudError(f"cannot read point cloud ({e.strerror or e})", path) from e
    if not rows or [h.strip() for h in rows[0]] != CLOUD_HEADER:
        raise PointCloudError("line 1: expected header re,im", path)
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            re_, im_ = row
            out.append(complex(float(re_), float(im_)))
        except ValueError as e:
            raise PointCloudError(f"line {lineno}: bad row {row!r} ({e})", path) from e
    return np.asarray(out, dtype=np.complex128)
