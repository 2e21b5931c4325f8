#!/usr/bin/env python3
"""
bounds.py — degree bound for parameters preperiodic for both witnesses.

- UB(d, eps): any degree-d algebraic integer c has
    d_inf(mu_0, mu_1) <= 2 * sqrt(-log|disc|/d^2 + 2 sqrt(eps) + log(1/eps)/d)
  with the Minkowski estimate log|disc| >= log(d^d/d! * (pi/4)^(d/2)).
- LB: d_inf([alpha]_eps, [beta]_eps) minus the distances from each regularized
  witness measure to its equilibrium measure.
- max degree: largest d with UB(d, eps(d)) >= LB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from scipy.special import gammaln

from energy import (
    PAPER_BOUND,
    DiscreteMeasure,
    MutualEnergy,
    NegativeRadicand,
    discrete_energy,
    mutual_energy_terms,
)

# Constants printed with the published S_{0,1} run (n = 11, eps = 1/1023^2).
PUBLISHED_CONSTANTS = {
    "discrete_self_alpha": -0.00839974,
    "discrete_self_beta": -0.00677444,
    "regularized_self_alpha": 0.00514961,
    "regularized_self_beta": 0.00677490,
    "minus_two_cross": 0.630005,
    "lower_bound_proposition": 0.623482,
    "lower_bound_theorem": 0.566325,
}

DEFAULT_SCAN_CAP = 10 ** 6
MONOTONE_FROM = 3


class NoBound(RuntimeError):
    def __init__(self, message: str, cap: int):
        super().__init__(message)
        self.cap = cap


def minkowski_log_disc(d: int) -> float:
    """log(d^d / d! * (pi/4)^(d/2)), via log-gamma."""
    if d < 1:
        raise ValueError(f"degree must be >= 1, got {d}")
    return d * math.log(d) - float(gammaln(d + 1)) + 0.5 * d * math.log(math.pi / 4.0)


def distance_to_equilibrium_bound(self_energy_discrete: float, d: int, eps: float) -> float:
    """sqrt(([c],[c]) + 2 sqrt(eps) + log(1/eps)/d), bounding d_inf(mu, [c]_eps)."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if d < 1:
        raise ValueError(f"degree must be >= 1, got {d}")
    radicand = self_energy_discrete + 2.0 * math.sqrt(eps) + math.log(1.0 / eps) / d
    if radicand < 0:
        raise NegativeRadicand(f"penalty radicand is negative at d={d}, eps={eps!r} ({radicand:.3e})",
                               radicand)
    return math.sqrt(radicand)


def upper_bound(d: int, eps: float) -> float:
    """UB(d, eps) on d_inf(mu_0, mu_1) for a degree-d parameter in S_{0,1}."""
    return 2.0 * distance_to_equilibrium_bound(-minkowski_log_disc(d) / (d * d), d, eps)


@dataclass(frozen=True)
class EpsilonRule:
    """eps(d) = scale * d^(-exponent)."""
    exponent: float = 2.0
    scale: float = 1.0

    def __call__(self, d: int) -> float:
        return self.scale * float(d) ** (-self.exponent)

    def describe(self) -> str:
        prefix = "" if self.scale == 1.0 else f"{self.scale!r} * "
        return f"eps(d) = {prefix}d^-{self.exponent:g}"

    def to_dict(self) -> dict:
        return {"exponent": self.exponent, "scale": self.scale, "description": self.describe()}


def _ub_or_none(d: int, rule: EpsilonRule) -> Optional[float]:
    try:
        return upper_bound(d, rule(d))
    except NegativeRadicand:
        return None


def solve_max_degree(lower_bound: float, rule: Optional[EpsilonRule] = None,
                     cap: int = DEFAULT_SCAN_CAP) -> int:
    """Largest d <= cap with UB(d, rule(d)) >= lower_bound; 0 when no degree qualifies.

    Scanning stops once UB has dropped below the bound while decreasing, from
    d = 3 on. Degrees with a negative UB radicand are not admissible.
    """
    if not lower_bound > 0:
        raise ValueError(f"lower bound must be positive, got {lower_bound!r}")
    rule = rule or EpsilonRule()
    best = 0
    previous: Optional[float] = None
    for d in range(1, cap + 1):
        ub = _ub_or_none(d, rule)
        if ub is not None and ub >= lower_bound:
            best = d
        elif d >= MONOTONE_FROM and (ub is None or (previous is not None and ub < previous)):
            return best
        previous = ub
    raise NoBound(f"upper bound stays above {lower_bound!r} up to d={cap}", cap)


def upper_bound_curve(degrees: Iterable[int], rule: Optional[EpsilonRule] = None) -> list[dict]:
    rule = rule or EpsilonRule()
    rows = []
    for d in sorted(set(int(d) for d in degrees if d >= 1)):
        eps = rule(d)
        rows.append({"degree": d, "epsilon": eps, "upper_bound": _ub_or_none(d, rule)})
    return rows


# ---------------- lower bound ----------------

@dataclass(frozen=True)
class LowerBound:
    value: float
    distance: float
    alpha_penalty: float
    beta_penalty: float
    alpha_self_discrete: float
    beta_self_discrete: float
    alpha_degree: int
    beta_degree: int
    epsilon: float
    mode: str
    energies: Optional[MutualEnergy] = None

    @property
    def informative(self) -> bool:
        return self.value > 0

    def to_dict(self) -> dict:
        out = {
            "value": self.value,
            "distance": self.distance,
            "alpha_penalty": self.alpha_penalty,
            "beta_penalty": self.beta_penalty,
            "alpha_self_discrete": self.alpha_self_discrete,
            "beta_self_discrete": self.beta_self_discrete,
            "alpha_degree": self.alpha_degree,
            "beta_degree": self.beta_degree,
            "epsilon": self.epsilon,
            "mode": self.mode,
            "informative": self.informative,
        }
        if self.energies is not None:
            out["energies"] = self.energies.to_dict()
        return out


def lower_bound_from_terms(distance: float, alpha_self: float, alpha_degree: int,
                           beta_self: float, beta_degree: int, eps: float, mode: str = PAPER_BOUND,
                           energies: Optional[MutualEnergy] = None) -> LowerBound:
    alpha_penalty = distance_to_equilibrium_bound(alpha_self, alpha_degree, eps)
    beta_penalty = distance_to_equilibrium_bound(beta_self, beta_degree, eps)
    return LowerBound(
        value=distance - alpha_penalty - beta_penalty,
        distance=distance,
        alpha_penalty=alpha_penalty,
        beta_penalty=beta_penalty,
        alpha_self_discrete=alpha_self,
        beta_self_discrete=beta_self,
        alpha_degree=alpha_degree,
        beta_degree=beta_degree,
        epsilon=eps,
        mode=mode,
        energies=energies,
    )


def _points(witness) -> DiscreteMeasure:
    if isinstance(witness, DiscreteMeasure):
        return witness
    return DiscreteMeasure.uniform(witness.points)


def assemble_lower_bound(alpha, beta, eps: float, mode: str = PAPER_BOUND, workers: int = 1,
                         alpha_self: Optional[float] = None,
                         beta_self: Optional[float] = None) -> LowerBound:
    """LB = d_inf([alpha]_eps, [beta]_eps) - d_inf(mu_a, [alpha]_eps) - d_inf(mu_b, [beta]_eps).

    alpha and beta are conjugate sets (anything with .points) or uniform
    DiscreteMeasures. Discrete self energies can be passed in when already known.
    """
    mu = _points(alpha)
    nu = _points(beta)
    if alpha_self is None:
        alpha_self = discrete_energy(mu, mu, workers=workers)
    if beta_self is None:
        beta_self = discrete_energy(nu, nu, workers=workers)
    energies = mutual_energy_terms(mu.regularize(eps), nu.regularize(eps), mode, workers)
    return lower_bound_from_terms(energies.distance, alpha_self, mu.size, beta_self, nu.size,
                                  eps, mode, energies)


# ---------------- report ----------------

@dataclass
class BoundReport:
    lower_bound: LowerBound
    max_degree: Optional[int]
    epsilon_rule: EpsilonRule
    witness_labels: tuple[str, str]
    ub_curve: list[dict] = field(default_factory=list)
    max_degree_at_constants: dict[str, int] = field(default_factory=dict)
    exact_lower_bound: Optional[LowerBound] = None

    @property
    def component_terms(self) -> dict:
        lb = self.lower_bound
        return {
            "distance": lb.distance,
            "alpha_penalty": lb.alpha_penalty,
            "beta_penalty": lb.beta_penalty,
            "minkowski_log_disc_at_max_degree": (
                minkowski_log_disc(self.max_degree) if self.max_degree else None),
        }

    def to_dict(self) -> dict:
        out = {
            "lower_bound": self.lower_bound.to_dict(),
            "max_degree": self.max_degree,
            "epsilon_rule": self.epsilon_rule.to_dict(),
            "witness_labels": list(self.witness_labels),
            "component_terms": self.component_terms,
            "ub_curve": self.ub_curve,
            "max_degree_at_constants": self.max_degree_at_constants,
            "deltas": {
                key: self.lower_bound.value - PUBLISHED_CONSTANTS[key]
                for key in ("lower_bound_proposition", "lower_bound_theorem")
            },
        }
        if self.exact_lower_bound is not None:
            out["exact_lower_bound"] = self.exact_lower_bound.to_dict()
        return out


def build_bound_report(lower: LowerBound, rule: Optional[EpsilonRule] = None,
                       witness_labels: tuple[str, str] = ("alpha", "beta"), window: int = 5,
                       exact: Optional[LowerBound] = None, cap: int = DEFAULT_SCAN_CAP) -> BoundReport:
    rule = rule or EpsilonRule()
    max_degree = solve_max_degree(lower.value, rule, cap) if lower.informative else None

    at_constants = {
        key: solve_max_degree(PUBLISHED_CONSTANTS[key], rule, cap)
        for key in ("lower_bound_proposition", "lower_bound_theorem")
    }
    centers = [d for d in at_constants.values() if d]
    if max_degree:
        centers.append(max_degree)
    degrees: list[int] = []
    for center in centers:
        degrees.extend(range(max(1, center - window), center + window + 1))

    return BoundReport(
        lower_bound=lower,
        max_degree=max_degree,
        epsilon_rule=rule,
        witness_labels=witness_labels,
        ub_curve=upper_bound_curve(degrees, rule),
        max_degree_at_constants=at_constants,
        exact_lower_bound=exact,
    )


def format_bound_table(report: Union[BoundReport, dict]) -> str:
    """Human-readable summary: LB terms, UB around the critical degrees, max degree."""
    data = report.to_dict() if isinstance(report, BoundReport) else report
    lb = data["lower_bound"]
    lines = [
        f"witnesses          {data['witness_labels'][0]} / {data['witness_labels'][1]}",
        f"epsilon (witness)  {lb['epsilon']:.6e}",
        f"d_inf([a],[b])     {lb['distance']:.6f}",
        f"penalty alpha      {lb['alpha_penalty']:.6f}",
        f"penalty beta       {lb['beta_penalty']:.6f}",
        f"lower bound        {lb['value']:.6f}  ({lb['mode']})",
    ]
    if "exact_lower_bound" in data:
        lines.append(f"lower bound        {data['exact_lower_bound']['value']:.6f}  "
                     f"({data['exact_lower_bound']['mode']})")
    for key, delta in data["deltas"].items():
        lines.append(f"  vs {PUBLISHED_CONSTANTS[key]:<8}      {delta:+.6f}  "
                     f"(max degree {data['max_degree_at_constants'][key]})")
    lines.append(f"rule               {data['epsilon_rule']['description']}")
    lines.append("")
    lines.append("  degree   upper bound")
    for row in data["ub_curve"]:
        ub = row["upper_bound"]
        value = "n/a" if ub is None else f"{ub:.6f}"
        marker = "  <- max degree" if row["degree"] == data["max_degree"] else ""
        lines.append(f"  {row['degree']:>6}   {value}{marker}")
    lines.append("")
    lines.append(f"max degree         {data['max_degree'] if data['max_degree'] else 'none (bound not informative)'}")
    return "\n".join(lines)
