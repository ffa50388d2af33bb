import numpy as np
import pytest

from delay_sl.operator import DomainError
from delay_sl.potential import random_potential, zero_potential
from delay_sl.wtransform import (check_omega_identity, compute_Q, compute_w,
                                 compute_w_specialized, w_values)

from conftest import PI, quad_pieces

A = 0.35 * PI
ALPHAS = (0.0, 1.0, -2.0, 3 + 4j)


def scipy_terms(q, x):
    """The product term and the nested term of ``Q_nu`` with scipy ``quad`` (real ``q``)."""
    a = q.a
    f = lambda t: float(q(np.array([t]))[0])
    pts = list(q.breaks)
    integ = lambda lo, hi: quad_pieces(f, lo, hi, pts)
    first = integ(a, x - a / 2) * integ(x + a / 2, PI)
    kinks = pts + [b - x + a / 2 for b in pts]
    second = quad_pieces(lambda t: f(t) * integ(x + t - a / 2, PI), a, PI - x + a / 2,
                         kinks, limit=200)
    return first, second


@pytest.fixture(scope="module")
def rand_q():
    return random_potential(A, np.random.default_rng(7), start=A)


def test_Q_of_zero():
    q = zero_potential(A)
    assert np.all(compute_Q(0, q, np.linspace(1.5 * A, PI - A / 2, 5)) == 0)


@pytest.fixture(scope="module")
def oracle_terms(rand_q):
    xs = (1.5 * A + 0.02, 2.0, PI - A / 2 - 0.01)
    return [(x,) + scipy_terms(rand_q, x) for x in xs]


@pytest.mark.parametrize("nu", [0, 1])
def test_Q_against_scipy(rand_q, oracle_terms, nu):
    for x, first, second in oracle_terms:
        assert abs(compute_Q(nu, rand_q, x) - (first - (-1) ** nu * second)) < 1e-10


def test_Q_difference_is_doubled_term(rand_q, oracle_terms):
    for x, _, second in oracle_terms:
        diff = compute_Q(0, rand_q, x) - compute_Q(1, rand_q, x)
        assert abs(diff + 2 * second) < 1e-10


def test_Q_vanishes_for_tail_only_family(b1):
    q = b1.member(0.0)
    x = np.linspace(1.5 * A, PI - A / 2, 20)
    assert np.max(np.abs(compute_Q(1, q, x))) < 1e-13
    assert np.max(np.abs(compute_Q(0, q, x))) < 1e-13


@pytest.mark.parametrize("c", [2.0, -1.0, 1 + 1j])
def test_Q_quadratic_in_q(rand_q, c):
    from delay_sl.functions import Scaled
    from delay_sl.potential import PiecewisePotential, Segment
    scaled = PiecewisePotential(A, [Segment(s.lo, s.hi, s.role, Scaled(c, s.fn))
                                    for s in rand_q.segments])
    x = np.random.default_rng(1).uniform(1.5 * A, PI - A / 2, 50)
    for nu in (0, 1):
        lhs = compute_Q(nu, scaled, x)
        assert np.max(np.abs(lhs - c ** 2 * compute_Q(nu, rand_q, x))) < 1e-12


def test_Q_domain(rand_q):
    with pytest.raises(DomainError):
        compute_Q(0, rand_q, 1.0)


def test_w_passthrough(rand_q):
    x = np.concatenate([np.linspace(A + 1e-3, 1.5 * A - 1e-3, 9),
                        np.linspace(PI - A / 2 + 1e-3, PI, 9)])
    for nu in (0, 1):
        assert np.all(w_values(nu, rand_q, x) == rand_q(x))


def test_w_of_zero():
    w = compute_w(1, zero_potential(A))
    assert np.all(w.values == 0)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_w1_for_b1(b1, alpha):
    q = b1.member(alpha)
    w = compute_w(1, q)
    x = w.nodes
    head = x < 2.5 * A
    assert np.max(np.abs(w.values[head])) < 1e-8 * (1 + abs(alpha) ** 2)
    assert np.max(np.abs(w.values[~head] - b1.h(x[~head]))) < 1e-12


@pytest.mark.parametrize("alpha", ALPHAS)
def test_w0_for_smooth_family(b0_smooth, alpha):
    q = b0_smooth.member(alpha)
    w = compute_w(0, q)
    x = w.nodes
    lead = x < PI - A / 2
    assert np.max(np.abs(w.values[lead])) < 1e-8 * (1 + abs(alpha) ** 2)
    rest = ~lead
    assert np.max(np.abs(w.values[rest] - q(x[rest]))) < 1e-12


@pytest.mark.parametrize("family", ["B0", "B1", "B0-smooth"])
def test_w_alpha_invariance(family):
    from delay_sl.spectrum import make_family
    fam = make_family(family, A)
    ref = compute_w(fam.nu, fam.member(0.0))
    for alpha in ALPHAS[1:]:
        d = compute_w(fam.nu, fam.member(alpha)).sup_distance(ref)
        assert d < 1e-8 * (1 + abs(alpha) ** 2)


def test_specialized_agrees_on_random(random_potentials):
    for q in random_potentials:
        scale = (1 + q.l1_norm()) ** 2
        for nu in (0, 1):
            d = compute_w(nu, q).sup_distance(compute_w_specialized(nu, q))
            assert d < 1e-9 * scale


@pytest.mark.parametrize("alpha", [0.7, -1.3 + 2j])
def test_specialized_agrees_on_b0(alpha):
    from delay_sl.spectrum import make_family
    q = make_family("B0", A).member(alpha)
    d = compute_w(0, q).sup_distance(compute_w_specialized(0, q))
    assert d < 1e-9 * (1 + q.l1_norm()) ** 2


def test_specialized_branch_two_annihilates(b1):
    w = compute_w_specialized(1, b1.member(2.5))
    mask = (w.nodes > 1.5 * A) & (w.nodes < PI - A)
    assert np.max(np.abs(w.values[mask])) < 1e-10


def test_specialized_rejects_early_support(rand_q):
    with pytest.raises(DomainError):
        compute_w_specialized(0, rand_q)


def test_omega_identity_zero():
    r = check_omega_identity(zero_potential(A))
    assert (r["omega"], r["integral_w0"], r["gap"]) == (0, 0, 0)


def test_omega_identity_random(random_potentials, rand_q):
    for q in random_potentials + [rand_q]:
        r = check_omega_identity(q)
        assert r["gap"] < 1e-9 * (1 + q.l1_norm()) ** 2


def test_no_identity_for_nu_one(control):
    q = control.member(1.0)
    gap = abs(compute_w(1, q).integral() - check_omega_identity(q)["omega"])
    assert gap > 1e-6
