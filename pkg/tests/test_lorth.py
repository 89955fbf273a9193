"""Bootstrap of L-orthogonal recurrence coefficients and the sigma/tau ladder."""

from fractions import Fraction

import numpy as np
import pytest

from ertl import (ClosedFormExample, RegularityBreakdown, bootstrap_recurrence,
                  compute_moments, compute_moments_exact, discrete_spec, eval_Q,
                  example1_coeffs, example2_coeffs, orthogonality_residual,
                  q_at_zero, tau, triangle_from_coeffs)


@pytest.fixture(scope="module")
def ex1_boot(ex1_spec):
    table = compute_moments(ex1_spec, 0.0, 9)
    return table, *bootstrap_recurrence(table, 8, p=1.0, q=2.0)


@pytest.fixture(scope="module")
def ten_node_boot(ten_node_spec):
    table = compute_moments(ten_node_spec, 0.3, 9)
    return table, *bootstrap_recurrence(table, 8, p=1.0, q=2.0)


def test_bootstrap_example1_closed_form(ex1_boot):
    _, lp, rc = ex1_boot
    for n in range(1, 8):
        assert abs(rc.beta[n - 1] - np.sqrt(2.0)) < 1e-8
        if n >= 2:
            assert abs(rc.alpha[n - 2] - (n - 1) / 2.0) < 1e-8


def test_bootstrap_two_point_by_hand():
    table = compute_moments(discrete_spec([1.0, 2.0], [1.0, 1.0]), 0.0, 3)
    _, rc = bootstrap_recurrence(table, 2)
    assert rc.beta[0] == pytest.approx(4.0 / 3.0)


def test_bootstrap_example2_matches_l_recursion(ex2_spec):
    table = compute_moments(ex2_spec, 0.5, 7)
    _, rc = bootstrap_recurrence(table, 6, p=1.0, q=2.0)
    ref = example2_coeffs(ClosedFormExample("example2", 1.0, 2.0), 0.5, 6)
    assert max(abs(a - b) for a, b in zip(rc.beta, ref.beta)) < 1e-7
    assert max(abs(a - b) for a, b in zip(rc.alpha, ref.alpha)) < 1e-7


def test_bootstrap_breaks_down_on_unit_mass():
    table = compute_moments(discrete_spec([1.0], [1.0]), 0.0, 4)
    with pytest.raises(RegularityBreakdown):
        bootstrap_recurrence(table, 3)


def test_bootstrap_positivity(ten_node_boot):
    _, _, rc = ten_node_boot
    assert all(b.real > 0 and abs(b.imag) < 1e-12 for b in rc.beta)
    assert all(a.real > 0 and abs(a.imag) < 1e-12 for a in rc.alpha)


# -- polynomial evaluation ------------------------------------------------------

def test_eval_Q_degree_zero_and_first_root(ex1_boot):
    _, _, rc = ex1_boot
    assert eval_Q(rc, 0, 3.7 + 1j) == 1
    assert abs(eval_Q(rc, 1, rc.beta[0])) < 1e-15


def test_eval_Q_matches_coefficient_triangle(ex1_boot):
    _, lp, rc = ex1_boot
    for n, x in ((3, 1.0), (5, 0.3 + 0.7j), (8, -2.0)):
        horner = sum(lp.rows[n][j] * x ** j for j in range(n + 1))
        val = eval_Q(rc, n, x)
        assert abs(val - horner) <= 1e-12 * max(1.0, abs(horner))


def test_route_equivalence_triangle(ex1_boot):
    _, lp, rc = ex1_boot
    rows = triangle_from_coeffs(rc.beta, rc.alpha, 8)
    for n in range(9):
        for j in range(n + 1):
            ref = lp.rows[n][j]
            assert abs(rows[n][j] - ref) <= 1e-11 * max(1.0, abs(ref))


def test_q_at_zero_product_form(ex1_boot):
    _, _, rc = ex1_boot
    assert q_at_zero(rc, 1) == -rc.beta[0]
    # beta_n = sqrt(q): Q_4(0) = (+1) q^2 = 4
    assert abs(q_at_zero(rc, 4) - 4.0) < 1e-7
    for n in (3, 6):
        assert abs(q_at_zero(rc, n) - eval_Q(rc, n, 0.0)) <= 1e-13 * abs(q_at_zero(rc, n))


def test_q_at_zero_random_positive(ten_node_boot):
    _, _, rc = ten_node_boot
    v = q_at_zero(rc, 6)
    assert abs(v - eval_Q(rc, 6, 0.0)) <= 1e-13 * abs(v)


# -- sigma/tau identities -------------------------------------------------------

def test_constant_term_recursion(ex1_boot):
    # a_{n,0} = (-1)^n beta_n ... beta_1
    _, lp, rc = ex1_boot
    for n in range(1, 9):
        ref = q_at_zero(rc, n)
        assert abs(lp.rows[n][0] - ref) <= 1e-10 * abs(ref)


def test_abzeros_identity(ex1_boot):
    # alpha_{n+1} + beta_{n+1} = a_{n,n-1} - a_{n+1,n}
    _, lp, rc = ex1_boot
    for n in range(1, 8):
        lhs = rc.alpha_at(n + 1) + rc.beta_at(n + 1)
        rhs = lp.rows[n][n - 1] - lp.rows[n + 1][n]
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_sigxi_sigman_product_identities(ten_node_boot):
    _, lp, rc = ten_node_boot
    prod_alpha = 1.0 + 0j
    for n in range(0, 8):
        if n >= 1:
            prod_alpha *= rc.alpha_at(n + 1)
        sig = lp.sigma_diag[n]
        assert abs(sig - prod_alpha * lp.sigma_diag[0]) <= 1e-10 * abs(sig)
        expect_minus = sig / (rc.beta_at(n + 1) * lp.rows[n][0]) if n >= 1 else None
        if n >= 1 and n + 1 <= rc.N:
            assert abs(lp.sigma_minus[n] - expect_minus) <= 1e-10 * abs(lp.sigma_minus[n])


def test_tau_two_routes_quadrature(ex1_boot):
    table, lp, rc = ex1_boot
    for n in (0, 3, 5, 7):
        tau(table, rc, lp, n)  # raises MismatchBeyondTolerance on failure


def test_tau_n0_is_first_moment(ten_node_boot):
    table, lp, rc = ten_node_boot
    t0 = tau(table, rc, lp, 0)
    assert abs(t0 - table.nu_at(1)) <= 1e-12 * abs(t0)
    # the n = 0 closed form is nu_0 (alpha_2 + beta_1) = L[x]
    closed = table.nu_at(0) * (rc.alpha_at(2) + rc.beta_at(1))
    assert abs(closed - table.nu_at(1)) <= 1e-10 * abs(t0)


def test_tau_exact_rational():
    spec = discrete_spec([1, 2], [1, 1])
    table = compute_moments_exact(spec, 0.0, 3)
    lp, rc = bootstrap_recurrence(table, 2)
    assert tau(table, rc, lp, 1) == Fraction(1)  # 1*(1-4/3) + 2*(2-4/3)


def test_exact_rational_agrees_with_float_bootstrap():
    spec = discrete_spec([1, 2, 4, 8], [1, 1, 1, 1])
    ft = compute_moments(spec, 0.0, 5)
    et = compute_moments_exact(spec, 0.0, 5)
    lpf, rcf = bootstrap_recurrence(ft, 4)
    lpe, rce = bootstrap_recurrence(et, 4)
    for bf, be in zip(rcf.beta, rce.beta):
        assert abs(bf - float(be)) <= 1e-12 * abs(float(be))
    for af, ae in zip(rcf.alpha, rce.alpha):
        assert abs(af - float(ae)) <= 1e-12 * abs(float(ae))


def test_orthogonality_residual_levels(ex1_boot):
    table, lp, _ = ex1_boot
    assert orthogonality_residual(table, lp, 1) < 1e-12
    assert orthogonality_residual(table, lp, 6) < 1e-9


def test_beta_sum_identity(ex1_spec):
    # sum_k beta_dot_k/beta_k = -p alpha_{n+1} + q alpha_{n+1}/(beta_{n+1} beta_n)
    h = 1e-4
    boots = {}
    for t in (0.5 - h, 0.5, 0.5 + h):
        table = compute_moments(ex1_spec, t, 9)
        boots[t] = bootstrap_recurrence(table, 8, p=1.0, q=2.0)[1]
    rc = boots[0.5]
    for n in range(1, 7):
        lhs = 0.0 + 0j
        for k in range(1, n + 1):
            bdot = (boots[0.5 + h].beta[k - 1] - boots[0.5 - h].beta[k - 1]) / (2 * h)
            lhs += bdot / rc.beta[k - 1]
        rhs = (-rc.p * rc.alpha_at(n + 1)
               + rc.q * rc.alpha_at(n + 1) / (rc.beta_at(n + 1) * rc.beta_at(n)))
        assert abs(lhs - rhs) < 1e-5


def test_depth_cap_enforced(ex1_boot):
    table, _, _ = ex1_boot
    with pytest.raises(ValueError):
        bootstrap_recurrence(table, 30)


def test_random_discrete_sweep_identities(rng):
    # seeded sweep standing in for a property test: route equivalence and the
    # product identities on random positive measures
    for trial in range(5):
        m = 8
        nodes = np.sort(rng.uniform(0.2, 6.0, m))
        while np.min(np.diff(nodes)) < 1e-3:
            nodes = np.sort(rng.uniform(0.2, 6.0, m))
        weights = rng.uniform(0.2, 2.0, m)
        spec = discrete_spec(nodes, weights, p=1.0, q=1.0)
        table = compute_moments(spec, float(rng.uniform(0, 0.5)), 7)
        lp, rc = bootstrap_recurrence(table, 6, p=1.0, q=1.0)
        rows = triangle_from_coeffs(rc.beta, rc.alpha, 6)
        for n in range(7):
            for j in range(n + 1):
                ref = lp.rows[n][j]
                assert abs(rows[n][j] - ref) <= 1e-10 * max(1.0, abs(ref))
        for n in range(1, 7):
            assert orthogonality_residual(table, lp, n) < 1e-9
        for n in range(5):
            tau(table, rc, lp, n)
