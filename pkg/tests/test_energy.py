#!/usr/bin/env python3
"""
Unit tests for energy.py (logarithmic mutual energies)

Run with: pytest tests/ -v
"""
import json
import math
import os
import sys

import numpy as np
import pytest
from mpmath import clsin, pi as mp_pi

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from energy import (  # noqa: E402
    EXACT_QUADRATURE,
    PAPER_BOUND,
    DegenerateMeasureWarning,
    DiscreteMeasure,
    EnergyBreakdown,
    EnergyError,
    EpsilonMismatch,
    InvalidEpsilon,
    KahanSum,
    NegativeRadicand,
    RegularizedMeasure,
    circle_pair_kernel,
    discrete_energy,
    green_modulus_bound,
    kahan_total,
    mutual_energy_distance,
    mutual_energy_terms,
    regularized_cross_energy,
    regularized_self_energy,
    write_energy_json,
)

SEEDS = range(200)


def random_points(rng, count, cluster_eps=None):
    """Up to ``count`` points in the unit square, some within a few eps of each other."""
    pts = list(rng.uniform(-1, 1, count) + 1j * rng.uniform(-1, 1, count))
    if cluster_eps is not None and count >= 2:
        # plant a near pair
        pts[-1] = pts[0] + cluster_eps * rng.uniform(0.2, 1.9) * np.exp(2j * np.pi * rng.uniform())
    return np.array(pts)


def random_measure(rng, eps):
    count = int(rng.integers(1, 11))
    return RegularizedMeasure.uniform(random_points(rng, count, eps), eps)


def log_uniform_eps(rng):
    return float(10 ** rng.uniform(-6, -2))


# =============================================================================
# Measures
# =============================================================================
class TestMeasures:
    """Construction and validation."""

    def test_uniform_weights(self):
        mu = DiscreteMeasure.uniform([0, 1, 1j])
        assert mu.size == 3
        assert math.fsum(mu.weights) == pytest.approx(1.0, abs=1e-15)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(EnergyError):
            DiscreteMeasure([0, 1], [0.5, 0.6])

    def test_weights_must_be_positive(self):
        with pytest.raises(EnergyError):
            DiscreteMeasure([0, 1], [1.5, -0.5])

    @pytest.mark.parametrize("eps", [0.0, -1e-3, float("nan")])
    def test_invalid_epsilon(self, eps):
        with pytest.raises(InvalidEpsilon):
            RegularizedMeasure.uniform([0, 1], eps)

    def test_regularize_keeps_weights(self):
        mu = DiscreteMeasure([0, 2], [0.25, 0.75])
        reg = mu.regularize(1e-3)
        assert reg.epsilon == 1e-3
        assert np.array_equal(reg.weights, mu.weights)
        assert reg.discrete.size == 2


# =============================================================================
# discrete_energy()
# =============================================================================
class TestDiscreteEnergy:
    """Off-diagonal pairing of point masses."""

    def test_unit_separation(self):
        """Uniform on {0, 1}: every off-diagonal term is -log 1 = 0."""
        mu = DiscreteMeasure.uniform([0, 1])
        assert discrete_energy(mu, mu) == 0.0

    def test_two_points(self):
        """Uniform on {0, r}: (1/2)(-log r)."""
        mu = DiscreteMeasure.uniform([0, 0.1])
        assert discrete_energy(mu, mu) == pytest.approx(-0.5 * math.log(0.1), rel=1e-15)

    def test_shared_points_excluded(self):
        """Only exactly shared points drop out of a cross pairing."""
        mu = DiscreteMeasure.uniform([0, 2])
        nu = DiscreteMeasure.uniform([0, 4])
        expected = 0.25 * (-math.log(4) - math.log(2) - math.log(2))
        assert discrete_energy(mu, nu) == pytest.approx(expected, rel=1e-15)

    def test_all_shared_warns(self):
        mu = DiscreteMeasure.uniform([1 + 1j])
        with pytest.warns(DegenerateMeasureWarning):
            assert discrete_energy(mu, mu) == 0.0

    @pytest.mark.parametrize("seed", range(20))
    def test_symmetric(self, seed):
        rng = np.random.default_rng(seed)
        mu = DiscreteMeasure.uniform(random_points(rng, 10))
        nu = DiscreteMeasure.uniform(random_points(rng, 7))
        assert discrete_energy(mu, nu) == pytest.approx(discrete_energy(nu, mu), abs=1e-14)

    def test_agrees_with_kahan(self):
        """Blocked tree sum agrees with a sequential compensated sum."""
        rng = np.random.default_rng(11)
        pts = 0.1 * (rng.uniform(-1, 1, 300) + 1j * rng.uniform(-1, 1, 300))
        mu = DiscreteMeasure.uniform(pts)
        w = 1.0 / pts.size
        acc = KahanSum()
        for i in range(pts.size):
            for j in range(pts.size):
                if i != j:
                    acc.add(w * w * -math.log(abs(pts[i] - pts[j])))
        assert discrete_energy(mu, mu) == pytest.approx(acc.value, rel=1e-12)

    def test_thread_count_does_not_change_bits(self):
        rng = np.random.default_rng(5)
        mu = DiscreteMeasure.uniform(random_points(rng, 700))
        reg = mu.regularize(1e-4)
        base = discrete_energy(mu, mu, workers=1)
        base_reg = regularized_self_energy(reg, EXACT_QUADRATURE, workers=1)
        for workers in (4, 8):
            assert discrete_energy(mu, mu, workers=workers) == base
            assert regularized_self_energy(reg, EXACT_QUADRATURE, workers=workers) == base_reg


# =============================================================================
# KahanSum
# =============================================================================
class TestKahanSum:
    def test_recovers_small_terms(self):
        """1 + 1e-16 added 10^4 times keeps the small part."""
        values = [1.0] + [1e-16] * 10_000
        assert kahan_total(values) == pytest.approx(1.0 + 1e-12, rel=1e-15)
        assert sum(values) == 1.0


# =============================================================================
# circle_pair_kernel()
# =============================================================================
class TestCirclePairKernel:
    """Pairing of two circle measures of radius eps."""

    def test_coincident(self):
        assert circle_pair_kernel(0.0, 1e-3) == pytest.approx(-math.log(1e-3))

    def test_disjoint(self):
        assert circle_pair_kernel(0.5, 0.1) == -math.log(0.5)

    def test_unit_ratio_closed_form(self):
        """At distance eps the arc integral is 2 Cl_2(pi/3)."""
        eps = 1e-3
        expected = -math.log(eps) - float(clsin(2, mp_pi / 3)) / math.pi
        assert circle_pair_kernel(eps, eps) == pytest.approx(expected, abs=1e-12)

    def test_continuous_at_two_eps(self):
        """Tangent circles: the quadrature branch meets -log(2 eps)."""
        eps = 1e-4
        assert circle_pair_kernel(2 * eps, eps) == pytest.approx(-math.log(2 * eps), abs=1e-12)
        assert circle_pair_kernel(2 * eps * (1 + 1e-9), eps) == pytest.approx(-math.log(2 * eps), abs=1e-8)

    def test_continuous_at_zero(self):
        eps = 1e-2
        assert circle_pair_kernel(1e-9 * eps, eps) == pytest.approx(-math.log(eps), abs=1e-8)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_bounded_by_max_of_logs(self, seed):
        """-(term) >= max{log|z - z'|, log eps} for near pairs."""
        rng = np.random.default_rng(seed)
        eps = log_uniform_eps(rng)
        r = eps * rng.uniform(0.0, 2.0)
        floor = max(math.log(r) if r > 0 else -math.inf, math.log(eps))
        assert -circle_pair_kernel(r, eps) >= floor - 1e-12

    def test_rejects_bad_arguments(self):
        with pytest.raises(InvalidEpsilon):
            circle_pair_kernel(1.0, 0.0)
        with pytest.raises(EnergyError):
            circle_pair_kernel(-1.0, 0.1)


# =============================================================================
# regularized_self_energy() / regularized_cross_energy()
# =============================================================================
class TestRegularizedEnergies:
    """Self and cross pairings with the near-pair split."""

    @pytest.mark.parametrize("mode", [PAPER_BOUND, EXACT_QUADRATURE])
    def test_single_point(self, mode):
        b = regularized_self_energy(RegularizedMeasure.uniform([3 - 1j], 1e-5), mode)
        assert b.total == pytest.approx(-math.log(1e-5))
        assert b.near_pair_count == 0

    def test_far_cross(self):
        """{0} vs {10}: -log 10 for any eps < 5."""
        mu = RegularizedMeasure.uniform([0], 0.5)
        nu = RegularizedMeasure.uniform([10], 0.5)
        b = regularized_cross_energy(mu, nu)
        assert b.total == pytest.approx(-math.log(10))
        assert b.disjoint_pair_terms == b.total

    def test_near_cross_modes(self):
        """{0} vs {eps}: paper-bound gives -log eps, quadrature strictly less."""
        eps = 1e-3
        mu = RegularizedMeasure.uniform([0], eps)
        nu = RegularizedMeasure.uniform([eps], eps)
        paper = regularized_cross_energy(mu, nu, PAPER_BOUND)
        exact = regularized_cross_energy(mu, nu, EXACT_QUADRATURE)
        assert paper.total == pytest.approx(-math.log(eps))
        assert paper.near_pair_count == 1
        assert exact.total < paper.total
        lo, hi = paper.near_pair_interval
        assert lo == pytest.approx(-math.log(4 * eps))
        assert hi == pytest.approx(-math.log(eps))

    def test_self_near_pairs_use_lower_estimate(self):
        eps = 1e-3
        b = regularized_self_energy(RegularizedMeasure.uniform([0, eps], eps), PAPER_BOUND)
        assert b.near_pair_count == 2
        assert b.near_pair_terms == pytest.approx(0.5 * -math.log(4 * eps))

    def test_tie_counts_as_near(self):
        eps = 0.25
        b = regularized_cross_energy(RegularizedMeasure.uniform([0], eps),
                                     RegularizedMeasure.uniform([0.5], eps))
        assert b.near_pair_count == 1

    def test_epsilon_mismatch(self):
        with pytest.raises(EpsilonMismatch):
            regularized_cross_energy(RegularizedMeasure.uniform([0], 1e-3),
                                     RegularizedMeasure.uniform([1], 2e-3))

    @pytest.mark.parametrize("mode", [PAPER_BOUND, EXACT_QUADRATURE])
    @pytest.mark.parametrize("seed", range(30))
    def test_total_is_sum_of_parts(self, seed, mode):
        rng = np.random.default_rng(seed)
        eps = log_uniform_eps(rng)
        b = regularized_self_energy(random_measure(rng, eps), mode)
        assert b.total == pytest.approx(b.self_terms + b.disjoint_pair_terms + b.near_pair_terms, abs=1e-12)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_regularized_self_below_discrete_plus_log(self, seed):
        """([F]_eps, [F]_eps) <= ([F], [F]) - log(eps)/|F| in both modes."""
        rng = np.random.default_rng(seed)
        eps = log_uniform_eps(rng)
        count = int(rng.integers(2, 11))
        pts = random_points(rng, count, eps)
        mu = DiscreteMeasure.uniform(pts)
        bound = discrete_energy(mu, mu) - math.log(eps) / count
        for mode in (PAPER_BOUND, EXACT_QUADRATURE):
            assert regularized_self_energy(mu.regularize(eps), mode).total <= bound + 1e-12

    def test_breakdown_json(self, tmp_path):
        b = regularized_self_energy(RegularizedMeasure.uniform([0, 1e-3, 1], 1e-3), EXACT_QUADRATURE)
        path = write_energy_json(tmp_path / "e.json", b)
        data = json.loads(path.read_text())
        assert set(data) >= {"total", "self_terms", "disjoint_pair_terms", "near_pair_terms",
                             "near_pair_count", "mode"}
        assert EnergyBreakdown.from_dict(data) == b


# =============================================================================
# mutual_energy_distance()
# =============================================================================
class TestMutualEnergyDistance:
    """d_inf on regularized measures."""

    @pytest.mark.parametrize("mode", [PAPER_BOUND, EXACT_QUADRATURE])
    def test_identical_is_zero(self, mode):
        mu = RegularizedMeasure.uniform([0, 1, 2j], 1e-4)
        assert mutual_energy_distance(mu, mu, mode) == 0.0

    def test_far_pair_closed_form(self):
        eps = 1e-4
        mu = RegularizedMeasure.uniform([0], eps)
        nu = RegularizedMeasure.uniform([3], eps)
        expected = math.sqrt(-2 * math.log(eps) + 2 * math.log(3))
        assert mutual_energy_distance(mu, nu) == pytest.approx(expected, rel=1e-14)

    def test_terms(self):
        mu = RegularizedMeasure.uniform([0, 1], 1e-3)
        nu = RegularizedMeasure.uniform([5, 5j], 1e-3)
        t = mutual_energy_terms(mu, nu)
        assert t.radicand == pytest.approx(t.self_mu.total - 2 * t.cross.total + t.self_nu.total)
        assert t.distance == pytest.approx(math.sqrt(t.radicand))
        assert t.to_dict()["minus_two_cross"] == -2 * t.cross.total

    def test_negative_radicand_reported(self):
        """Paper-bound kernels are not a metric when near pairs exist."""
        eps = 1e-3
        mu = RegularizedMeasure.uniform([0, eps / 2], eps)
        with pytest.raises(NegativeRadicand) as info:
            mutual_energy_distance(mu, mu, PAPER_BOUND)
        assert info.value.radicand < -1e-12

    @pytest.mark.parametrize("seed", SEEDS)
    def test_metric_axioms(self, seed):
        """Symmetry, identity and the triangle inequality in exact mode."""
        rng = np.random.default_rng(seed)
        eps = log_uniform_eps(rng)
        A, B, C = (random_measure(rng, eps) for _ in range(3))
        d = lambda x, y: mutual_energy_distance(x, y, EXACT_QUADRATURE)  # noqa: E731
        ab, bc, ac = d(A, B), d(B, C), d(A, C)
        assert ab >= 0 and bc >= 0 and ac >= 0
        assert ab == pytest.approx(d(B, A), abs=1e-12)
        assert d(A, A) == 0.0
        assert ab > 0
        assert ac <= ab + bc + 1e-9


# =============================================================================
# green_modulus_bound()
# =============================================================================
class TestGreenModulusBound:
    def test_values(self):
        assert green_modulus_bound(0.0) == 0.0
        assert green_modulus_bound(1.0) == 1.0
        assert green_modulus_bound(1.0 / 1023 ** 2) == pytest.approx(1.0 / 1023)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            green_modulus_bound(-1e-3)


# =============================================================================
# Degree-1023 witnesses
# =============================================================================
@pytest.mark.slow
class TestWitnessEnergies:
    """Published constants at eps = 1/1023^2 (paper-bound mode)."""

    def test_discrete_self_energies(self, witness_energies):
        assert witness_energies.alpha_self_discrete == pytest.approx(-0.00839974, abs=2e-5)
        assert witness_energies.beta_self_discrete == pytest.approx(-0.00677444, abs=2e-5)

    def test_regularized_self_energies(self, witness_energies):
        e = witness_energies.energies
        assert e.self_mu.total == pytest.approx(0.00514961, abs=2e-5)
        assert e.self_nu.total == pytest.approx(0.00677490, abs=2e-5)

    def test_cross_energy(self, witness_energies):
        assert -2 * witness_energies.energies.cross.total == pytest.approx(0.630005, abs=5e-5)

    def test_distance(self, witness_energies):
        expected = math.sqrt(0.00514961 + 0.630005 + 0.00677490)
        assert witness_energies.distance == pytest.approx(expected, abs=1e-4)

    def test_cross_by_compensated_sum(self, f_witness, g_witness, witness_energies):
        """Cross pairing re-summed sequentially with Kahan over all 1023^2 pairs."""
        w = 1.0 / 1023 ** 2
        acc = KahanSum()
        beta = g_witness.roots.points
        for z in f_witness.roots.points:
            acc.add(float(np.sum(w * -np.log(np.abs(z - beta)))))
        assert acc.value == pytest.approx(witness_energies.energies.cross.total, abs=1e-12)
