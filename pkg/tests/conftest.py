"""Shared fixtures: the degree-1023 witnesses for initial values 0 and 1."""
import os
import sys
from dataclasses import dataclass

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from critpoly import IntPoly, IterationSpec, deflate_integer_roots, iterate_orbit_poly  # noqa: E402
from rootsolve import (  # noqa: E402
    ConjugateSet,
    OrbitEvaluator,
    SolverSettings,
    evaluator_for,
    solve_all_roots,
)

WITNESS_N = 11
WITNESS_EPS = 1.0 / 1023 ** 2


@dataclass
class Witness:
    spec: IterationSpec
    full: IntPoly
    poly: IntPoly
    removed: list
    evaluator: OrbitEvaluator
    roots: ConjugateSet


def _witness(a: int, label: str) -> Witness:
    spec = IterationSpec.periodic(a, WITNESS_N)
    full = iterate_orbit_poly(spec)
    poly, removed = deflate_integer_roots(full)
    ev = evaluator_for(spec, removed)
    roots = solve_all_roots(ev, ev.degree, SolverSettings(), label=label)
    return Witness(spec=spec, full=full, poly=poly, removed=removed, evaluator=ev, roots=roots)


@pytest.fixture(scope="session")
def g_witness():
    """Roots of G: f_c^11(0) = 0 with c = 0 removed (beta)."""
    return _witness(0, "G-roots")


@pytest.fixture(scope="session")
def f_witness():
    """Roots of F: f_c^11(1) = 1 with c = 0 removed (alpha)."""
    return _witness(1, "F-roots")


@pytest.fixture(scope="session")
def witness_energies(f_witness, g_witness):
    """Paper-bound lower bound at eps = 1/1023^2, shared by the energy and bound suites."""
    from bounds import assemble_lower_bound

    return assemble_lower_bound(f_witness.roots, g_witness.roots, WITNESS_EPS)
