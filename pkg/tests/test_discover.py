import warnings

import numpy as np
import pytest

from delay_sl.discover import (Candidate, StagnationWarning, coefficient_grid,
                               normalized_objective, polish_candidate, scan_kernels,
                               to_operator, unit_kernel)

from conftest import PI


@pytest.fixture(scope="module")
def chi1_candidates():
    return scan_kernels([(0.0,)], base="chi1")


def test_chi1_is_a_zero_mean_kernel(chi1_candidates):
    best = chi1_candidates[0]
    assert best.eta == pytest.approx(-1.0, abs=1e-8)
    assert best.objective < 1e-8
    assert best.residual < 1e-8


def test_constant_kernel_mean_bounded_away():
    # the k = 0 coefficient is the constant term
    assert normalized_objective((1.0,)) > 0.05
    assert normalized_objective((-4.0,)) == pytest.approx(normalized_objective((1.0,)), abs=1e-10)


def test_zero_vector_rejected():
    with pytest.raises(ValueError):
        unit_kernel((0.0, 0.0))
    with pytest.raises(ValueError):
        scan_kernels([(0.0, 0.0)])
    with pytest.raises(ValueError):
        unit_kernel((1.0,), base="chi7")


def test_coefficient_grid_shape():
    grid = coefficient_grid(2, levels=3)
    assert len(grid) == 8 and (0.0, 0.0) not in grid
    assert all(len(v) == 2 for v in grid)


def test_scan_is_sorted():
    found = scan_kernels(coefficient_grid(1, levels=5))
    obj = [c.objective for c in found]
    assert obj == sorted(obj)
    assert all(abs(c.eta) > 1e-6 for c in found)


@pytest.mark.parametrize("c", [2.0, -3.0])
def test_objective_scale_invariant(c):
    v = np.array([0.7, -1.1, 0.4])
    ref = normalized_objective(v)
    assert normalized_objective(c * v) == pytest.approx(ref, abs=1e-10)


def test_polish_at_chi1_stays_put(chi1_candidates):
    out = polish_candidate(chi1_candidates[0])
    assert out.status == "converged"
    assert out.coefficients == chi1_candidates[0].coefficients


def test_polish_from_perturbed_chi1():
    start = scan_kernels([(0.05,)], base="chi1")
    seed = min(start, key=lambda c: abs(c.eta + 1))
    assert seed.objective > 1e-6
    out = polish_candidate(seed)
    assert out.objective < 1e-6 and out.status == "converged"
    assert out.residual < 1e-6
    assert out.log[0]["mean"] == pytest.approx(seed.mean, abs=1e-12)


def test_polish_from_constant_kernel_terminates():
    seed = scan_kernels([(1.0,)])[0]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = polish_candidate(seed, max_steps=30, patience=5)
    stalled = [w for w in caught if issubclass(w.category, StagnationWarning)]
    assert out.status in ("converged", "stagnated", "max-steps")
    assert bool(stalled) == (out.status == "stagnated")
    if out.status == "converged":
        assert out.objective < 1e-10


def test_polish_requires_small_residual(chi1_candidates):
    c = chi1_candidates[0]
    bad = Candidate(c.coefficients, c.base, c.eta, c.mean, 1e-3, c.index, c.epsilon)
    with pytest.raises(ValueError):
        polish_candidate(bad)


@pytest.mark.parametrize("a", [PI / 3, 0.35 * PI, 0.39 * PI])
def test_export_to_operator(chi1_candidates, a):
    op, pair = to_operator(chi1_candidates[0], a)
    assert pair.verified and pair.residual < 1e-6
    assert abs(pair.mean) < 1e-8 * (PI - 2.5 * a)
    assert pair.eta == pytest.approx(-1.0, abs=1e-8)


def test_candidate_serialises(chi1_candidates):
    d = chi1_candidates[0].to_dict()
    assert d["base"] == "chi1" and d["objective"] == abs(d["mean"])
