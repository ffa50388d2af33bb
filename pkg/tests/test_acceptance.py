"""Acceptance criteria 1-10, one PASS/FAIL line each."""
import numpy as np
import pytest

from delay_sl.charfn import ProblemSpec, char_fn_ode, char_fn_repr, normalization
from delay_sl.numerics import Rectangle
from delay_sl.operator import builtin_eigenpair, eigen_residual, rescale_to_unit
from delay_sl.potential import check_w21
from delay_sl.spectrum import (DEFAULT_GRID, isospec_check, locate_spectrum, make_family,
                               negative_control, verify_theorem_chain)
from delay_sl.wtransform import check_omega_identity, compute_w, compute_w_specialized

from conftest import PI

DELAYS = (PI / 3, 0.35 * PI, 0.39 * PI)
ALPHAS = (0.0, 1.0, -2.0, 3 + 4j)
NODES = 256


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def pairs():
    return {a: builtin_eigenpair(a, 1) for a in DELAYS}


def test_criterion_01_eigen_relation(pairs, capsys):
    worst = 0.0
    for a, (op, p) in pairs.items():
        nodes = op.core().grid(NODES).nodes
        worst = max(worst, eigen_residual(op, p.e, -1.0, nodes), p.residual)
    report(capsys, 1, worst < 1e-8, f"max relative residual {worst:.2e} (< 1e-8)")


def test_criterion_02_zero_mean(pairs, capsys):
    worst = 0.0
    for a, (op, p) in pairs.items():
        rule = op.core().grid(NODES)
        quad = abs(rule.integrate(p.e(rule.nodes)))
        worst = max(worst, abs(p.mean), quad)
    report(capsys, 2, worst < 1e-12, f"max |mean| {worst:.2e} (< 1e-12)")


def test_criterion_03_b1_invariance(b1, capsys):
    v = isospec_check(b1, ALPHAS, DEFAULT_GRID, methods=("ode", "repr"))
    both_j = {p["j"] for p in v.to_dict()["per_point"]} == {0, 1}
    ok = v.verdict and v.deviation < 1e-6 and both_j
    report(capsys, 3, ok, f"deviation {v.deviation:.2e} (< 1e-6), "
                          f"method gap {v.method_discrepancy:.1e}")


def test_criterion_04_smooth_invariance(capsys):
    worst, gaps, finite, continuous = 0.0, 0.0, True, True
    for a in (0.35 * PI, 0.39 * PI):
        fam = make_family("B0-smooth", a)
        worst = max(worst, isospec_check(fam, ALPHAS, DEFAULT_GRID).deviation)
        for alpha in ALPHAS:
            rep = check_w21(fam.member(alpha))
            continuous &= rep["continuous"]
            finite &= bool(np.isfinite(rep["derivative_l2"]))
            gaps = max(gaps, max(g["gap"] for g in rep["junction_gaps"]))
    ok = worst < 1e-6 and continuous and finite and gaps < 1e-10
    report(capsys, 4, ok, f"deviation {worst:.2e} (< 1e-6), max junction gap {gaps:.1e}, "
                          f"derivative L2 finite: {finite}")


def test_criterion_05_negative_control(capsys):
    a = 0.35 * PI
    r = negative_control(a, (0.0, 1.0), DEFAULT_GRID)
    ok = (abs(r["mean_of_e"]) > 0.01 * (PI - 2.5 * a)
          and r["w1_invariance"] < 1e-8
          and r["delta_deviation"] > 1e-3
          and abs(r["omega_difference"][1]) > 1e-3
          and r["omega_gap"] < 1e-8)
    report(capsys, 5, ok, f"|mean| {abs(r['mean_of_e']):.3f}, w1 dev {r['w1_invariance']:.1e}, "
                          f"delta dev {r['delta_deviation']:.2e}, "
                          f"omega shift {abs(r['omega_difference'][1]):.3f}, "
                          f"gap to -2*alpha*I {r['omega_gap']:.1e}")


def test_criterion_06_oracle_cross_validation(random_potentials, capsys):
    grid = np.asarray(DEFAULT_GRID)
    charfn_gap, w_gap = 0.0, 0.0
    for q in random_potentials:
        for nu in (0, 1):
            for j in (0, 1):
                spec = ProblemSpec(nu, j, q.a, q)
                d = np.abs(char_fn_ode(spec, grid) - char_fn_repr(spec, grid))
                charfn_gap = max(charfn_gap, float(np.max(d / normalization(grid))))
            scale = (1 + q.l1_norm()) ** 2
            dist = compute_w(nu, q).sup_distance(compute_w_specialized(nu, q))
            w_gap = max(w_gap, dist / scale)
    ok = charfn_gap < 1e-8 and w_gap < 1e-9
    report(capsys, 6, ok, f"charfn gap {charfn_gap:.1e} (< 1e-8), "
                          f"w gap / scale {w_gap:.1e} (< 1e-9)")


def test_criterion_07_omega_identity(random_potentials, capsys):
    worst = max(check_omega_identity(q)["gap"] / (1 + q.l1_norm()) ** 2
                for q in random_potentials)
    report(capsys, 7, worst < 1e-9, f"max scaled gap {worst:.1e} (< 1e-9)")


def test_criterion_08_unperturbed_spectra(capsys):
    a = 0.35 * PI
    cases = [((0, 1), Rectangle(0.0, 5.25, -1.0, 1.0), [(n - 0.5) ** 2 for n in range(1, 6)], 5),
             ((0, 0), Rectangle(0.0, 5.25, -1.0, 1.0), [n ** 2 for n in range(1, 6)], 5),
             # zero in rho is double at the origin
             ((1, 1), Rectangle(-0.3, 5.3, -0.7, 0.7), [n ** 2 for n in range(6)], 7)]
    worst, counts_ok = 0.0, True
    for (nu, j), win, expected, count in cases:
        rep = locate_spectrum(ProblemSpec(nu, j, a), win)
        lams = sorted((z for z, _, _ in rep.eigenvalues), key=lambda z: z.real)
        counts_ok &= rep.consistent and rep.count == count and len(lams) == len(expected)
        if len(lams) == len(expected):
            worst = max(worst, float(np.max(np.abs(np.array(lams) - expected))))
        else:
            worst = np.inf
    report(capsys, 8, counts_ok and worst < 1e-8,
           f"max eigenvalue error {worst:.1e} (< 1e-8), counts exact: {counts_ok}")


def test_criterion_09_unit_rescaling(pairs, capsys):
    xi = np.linspace(0.0, 1.0, 100)
    eps_ref = np.cos(PI * xi) + np.cos(2 * PI * xi)
    chi_ref = 1.5 * PI ** 2 * np.cos(PI * np.sqrt(10) * (1 - xi) / 2)
    res, pointwise = 0.0, 0.0
    for a, (op, p) in pairs.items():
        u = rescale_to_unit(op, p, 1)
        res = max(res, u.residual)
        pointwise = max(pointwise, float(np.max(np.abs(u.epsilon(xi) - eps_ref))),
                        float(np.max(np.abs(u.chi(xi) - chi_ref))))
    ok = res < 1e-8 and pointwise < 1e-12
    report(capsys, 9, ok, f"unit residual {res:.1e} (< 1e-8), "
                          f"pointwise error {pointwise:.1e} (< 1e-12)")


EXPECTED_CHAIN = {
    "B1": dict.fromkeys(("eigen_relation", "mean_value", "w_invariance", "omega_invariance",
                         "delta_invariance"), "pass"),
    "B0-smooth": {"eigen_relation": "pass", "mean_value": "not-required", "w_invariance": "pass",
                  "omega_invariance": "pass", "delta_invariance": "pass"},
    "negative-control": {"eigen_relation": "pass", "mean_value": "fail", "w_invariance": "pass",
                         "omega_invariance": "fail", "delta_invariance": "fail"},
}


def test_criterion_10_theorem_chain(b1, b0_smooth, control, capsys):
    got = {}
    for name, fam in (("B1", b1), ("B0-smooth", b0_smooth), ("negative-control", control)):
        r = verify_theorem_chain(fam, 1.0)
        got[name] = {k: v["status"] for k, v in r["links"].items()}
    bad = [n for n in EXPECTED_CHAIN if got[n] != EXPECTED_CHAIN[n]]
    report(capsys, 10, not bad, "patterns match" if not bad else f"mismatch for {bad}")
