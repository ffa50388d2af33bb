import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delay_sl.charfn import (CancellationWarning, ProblemSpec, char_fn_grid, char_fn_ode,
                             char_fn_repr, normalization, rho_of, sinc_kernel)
from delay_sl.spectrum import DEFAULT_GRID, make_family
from delay_sl.wtransform import compute_w

from conftest import PI, steps_oracle

A = 0.35 * PI
GRID = np.array(DEFAULT_GRID)


def free(nu, j):
    return ProblemSpec(nu, j, A)


def free_delta(nu, j, lam):
    rho = rho_of(lam)
    s = sinc_kernel(lam, rho, PI)
    if (nu, j) == (0, 1):
        return np.cos(rho * PI)
    if (nu, j) == (0, 0):
        return s
    if (nu, j) == (1, 1):
        return -lam * s
    return np.cos(rho * PI)


# -- unperturbed closed forms -----------------------------------------------------

@pytest.mark.parametrize("nu, j", [(0, 0), (0, 1), (1, 0), (1, 1)])
@pytest.mark.parametrize("method", ["ode", "repr"])
def test_free_problem(nu, j, method):
    lam = np.array([0.0, 0.25, 1.0, 2.7 + 1.1j, -4.0, 30.0])
    f = char_fn_ode if method == "ode" else char_fn_repr
    got = f(free(nu, j), lam)
    assert np.max(np.abs(got - free_delta(nu, j, lam)) / normalization(lam)) < 1e-13


def test_free_point_values():
    assert abs(char_fn_ode(free(0, 1), 0.25)) < 1e-15
    assert char_fn_ode(free(0, 0), 0.0) == pytest.approx(PI, abs=1e-15)
    assert abs(char_fn_repr(free(0, 0), 1.0)) < 1e-15


def test_grid_at_zeros_of_cosine():
    lams = [(n - 0.5) ** 2 for n in range(1, 6)]
    for s in char_fn_grid(free(0, 1), lams, "both"):
        assert abs(s.value) < 1e-12


def test_normalization_on_negative_axis():
    (s,) = char_fn_grid(free(0, 1), [-4.0], "ode")
    assert s.normalization == pytest.approx(np.cosh(2 * PI))
    assert s.normalized == pytest.approx(1.0, abs=1e-14)


def test_grid_method_validation():
    with pytest.raises(ValueError):
        char_fn_grid(free(0, 1), [1.0], "magic")


def test_problem_spec_validation(b1):
    with pytest.raises(ValueError):
        ProblemSpec(2, 0, A)
    with pytest.raises(ValueError):
        ProblemSpec(1, 0, 0.36 * PI, b1.member(1.0))


# -- independent ODE oracle -------------------------------------------------------

@pytest.fixture(scope="module")
def member(b0_smooth):
    return b0_smooth.member(1.5)


@pytest.mark.parametrize("lam", [-1.0, 1.7, 10.1])
@pytest.mark.parametrize("nu", [0, 1])
def test_against_scipy_oracle(member, lam, nu):
    y, dy = steps_oracle(member, A, lam, nu, member.breaks)
    for j, ref in ((0, y), (1, dy)):
        spec = ProblemSpec(nu, j, A, member)
        scale = 1 + abs(ref)
        assert abs(char_fn_ode(spec, lam) - ref) < 1e-7 * scale
        assert abs(char_fn_repr(spec, lam) - ref) < 1e-7 * scale


@pytest.mark.parametrize("nu, j", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_methods_agree_on_families(b1, b0_smooth, nu, j):
    lam = np.concatenate([GRID, [2.2 + 3j, -7 - 1j, 0.004, 1e-7]])
    norm = normalization(lam)
    for fam in (b1, b0_smooth):
        q = fam.member(-1 + 2j)
        spec = ProblemSpec(nu, j, A, q)
        d = np.abs(char_fn_ode(spec, lam) - char_fn_repr(spec, lam)) / norm
        assert np.max(d) < 1e-8


def test_both_method_discrepancy(b0_smooth):
    samples = char_fn_grid(ProblemSpec(0, 1, A, b0_smooth.member(1.0)), GRID, "both")
    assert max(s.discrepancy for s in samples) < 1e-8


@pytest.mark.parametrize("alpha", [1.0, -2.0, 3 + 4j])
@pytest.mark.parametrize("j", [0, 1])
def test_b1_repr_alpha_independent(b1, alpha, j):
    ref = char_fn_repr(ProblemSpec(1, j, A, b1.member(0.0)), GRID)
    got = char_fn_repr(ProblemSpec(1, j, A, b1.member(alpha)), GRID)
    assert np.max(np.abs(got - ref) / (1 + np.abs(ref))) < 1e-6


# -- structural properties --------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(st.floats(-30, 60), st.floats(-8, 8))
def test_conjugate_symmetry(re, im):
    q = make_family("B0-smooth", A).member(0.8)
    lam = complex(re, im)
    for method in (char_fn_ode, char_fn_repr):
        spec = ProblemSpec(0, 1, A, q)
        a, b = method(spec, lam), method(spec, lam.conjugate())
        assert abs(a - b.conjugate()) <= 1e-10 * (1 + abs(a))


@pytest.mark.parametrize("nu, j", [(0, 0), (1, 1)])
def test_mean_value_around_origin(b0_smooth, nu, j):
    spec = ProblemSpec(nu, j, A, b0_smooth.member(1.0))
    ring = 0.05 * np.exp(2j * PI * np.arange(64) / 64)
    for f in (char_fn_ode, char_fn_repr):
        assert abs(np.mean(f(spec, ring)) - f(spec, 0.0)) < 1e-8


def test_series_switch_is_seamless(b0_smooth):
    spec = ProblemSpec(0, 0, A, b0_smooth.member(2.0))
    lam = np.array([0.0099999, 0.0100001, -0.0099999j, 0.0100001j])
    d = np.abs(char_fn_repr(spec, lam) - char_fn_ode(spec, lam))
    assert np.max(d) < 1e-10


def test_cancellation_warning(b1):
    # nu = 0 with a nu = 1 family member: omega differs from int w_0
    q = make_family("negative-control", A).member(1.0)
    spec = ProblemSpec(0, 0, A, q)
    w = compute_w(0, q)
    with pytest.warns(CancellationWarning):
        char_fn_repr(spec, 1e-4, w, omega=spec.omega + 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        char_fn_repr(spec, 1e-4, w)


def test_layer_count_boundary(b1):
    lam = np.array([0.3, 5.0, 25.6 + 2j])
    vals = []
    for a in (PI / 3, PI / 3 + 1e-9):
        fam = make_family("B1", a)
        spec = ProblemSpec(1, 0, a, fam.member(1.0))
        vals.append(char_fn_ode(spec, lam))
        assert np.max(np.abs(vals[-1] - char_fn_repr(spec, lam))) < 1e-8
    assert np.max(np.abs(vals[0] - vals[1])) < 1e-6


@pytest.mark.parametrize("nu", [0, 1])
def test_omega_sensitivity(b1, nu):
    q = b1.member(1.0)
    spec = ProblemSpec(nu, nu, A, q)
    w = compute_w(nu, q)
    lam = np.array([0.3, 1.7, 5.0, 25.6])
    delta = 0.37
    base = char_fn_repr(spec, lam, w, spec.omega)
    moved = char_fn_repr(spec, lam, w, spec.omega + delta)
    rho = rho_of(lam)
    expected = (-lam) ** nu * (-delta) * np.cos(rho * (PI - A)) / (2 * lam)
    assert np.max(np.abs(moved - base - expected)) < 1e-12
