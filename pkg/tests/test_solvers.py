import math

import numpy as np
import pytest

from _oracles import siso_grid_mmf, user_rate
from outagebf import sampling
from outagebf.model import SisoInstance
from outagebf.outage import outage_lhs_all, outage_lhs_siso
from outagebf.solvers import (
    VertexSliceContext,
    feasibility_fixed_point,
    min_power_response,
    mmf_bisection,
    mmf_modulus_bound,
    mmf_upper_bound,
    outage_balancing_siso,
    single_user_objective_F,
    single_user_objective_f,
    srm_rates_from_powers,
)

LN2 = math.log(2.0)


def test_rates_match_independent_bisection(two_user_instance):
    p = [0.8, 0.6]
    rates = srm_rates_from_powers(two_user_instance, p)
    for i in range(2):
        assert rates[i] == pytest.approx(user_rate(two_user_instance, p, i), abs=1e-9)


def test_rates_silent_user_zero(two_user_instance):
    rates = srm_rates_from_powers(two_user_instance, [0.0, 0.5])
    assert rates[0] == 0.0
    assert rates[1] > 0.0
    with pytest.raises(ValueError):
        srm_rates_from_powers(two_user_instance, [-0.1, 0.5])


def test_rates_saturate_constraints(three_user_instance):
    # plugging the rate profile back in gives equality for every active user
    p = np.array([0.9, 0.5, 0.8])
    rates = srm_rates_from_powers(three_user_instance, p)
    lhs = outage_lhs_all(three_user_instance, p, rates)
    assert np.allclose(lhs, 1.0, atol=1e-11)


def test_min_power_response_inverts_constraint(two_user_instance):
    resp = min_power_response(two_user_instance, 0, [0.0, 0.6], 0.3)
    assert outage_lhs_siso(two_user_instance, [resp, 0.6], 0.3, 0) == pytest.approx(
        1.0, abs=1e-12
    )
    assert min_power_response(two_user_instance, 0, [0.0, 0.6], 0.0) == 0.0
    with pytest.raises(ValueError):
        min_power_response(two_user_instance, 0, [0.0, 0.6], -0.2)


def test_min_power_response_monotone(two_user_instance):
    resp = [
        min_power_response(two_user_instance, 1, [0.5, 0.0], R)
        for R in (0.05, 0.1, 0.2, 0.4)
    ]
    assert resp == sorted(resp)
    more_interf = min_power_response(two_user_instance, 1, [0.9, 0.0], 0.2)
    assert more_interf > resp[2]


def test_feasibility_fixed_point_low_rate(two_user_instance):
    res = feasibility_fixed_point(two_user_instance, 0.2, keep_trace=True)
    assert res.feasible
    assert res.status == "feasible"
    assert res.residual <= 1e-9
    assert np.all(res.p <= two_user_instance.P + 1e-12)
    # iterates grow monotonically from zero
    tr = np.array(res.trace)
    assert tr[0].tolist() == [0.0, 0.0]
    assert np.all(np.diff(tr, axis=0) >= -1e-15)


def test_feasibility_fixed_point_high_rate(two_user_instance):
    res = feasibility_fixed_point(two_user_instance, 5.0)
    assert not res.feasible
    res2 = feasibility_fixed_point(two_user_instance, 0.0)
    assert res2.feasible
    assert np.all(res2.p == 0.0)
    with pytest.raises(ValueError):
        feasibility_fixed_point(two_user_instance, -0.1)


def test_feasibility_witness_meets_targets(two_user_instance):
    R_bar = 0.15
    res = feasibility_fixed_point(two_user_instance, R_bar)
    targets = two_user_instance.alpha * R_bar
    lhs = outage_lhs_all(two_user_instance, res.p, targets)
    assert np.all(lhs <= 1.0 + 1e-9)


def test_feasibility_monotone_in_rate(two_user_instance):
    # once infeasible, larger targets stay infeasible
    verdicts = [
        feasibility_fixed_point(two_user_instance, r).feasible
        for r in np.linspace(0.0, 0.5, 11)
    ]
    assert verdicts == sorted(verdicts, reverse=True)


def test_mmf_upper_bound_no_interference_exact():
    inst = SisoInstance(
        Q=[[1.3]], sigma2=[0.8], rho=[0.88], P=[0.9], alpha=[1.4]
    )
    exact = math.log1p(0.9 * 1.3 * math.log(1 / 0.88) / 0.8) / LN2 / 1.4
    assert mmf_upper_bound(inst) == pytest.approx(exact, rel=1e-15)
    sol = mmf_bisection(inst, 1e-7)
    assert exact - 1e-7 < sol.R <= exact


def test_mmf_bisection_frozen(two_user_instance):
    sol = mmf_bisection(two_user_instance, 1e-6)
    assert sol.R == pytest.approx(0.23503278502250963, rel=1e-12)
    assert sol.iterations == 19  # ceil(log2(upper/delta))
    assert sol.binding_users == (0, 1)
    ub = mmf_upper_bound(two_user_instance)
    assert sol.iterations == math.ceil(math.log2(ub / 1e-6))


def test_mmf_bisection_trace_contract(two_user_instance):
    sol = mmf_bisection(two_user_instance, 1e-5)
    lo, hi = sol.trace[-1]
    assert hi - lo < 1e-5
    assert sol.R == lo
    # bracket never widens, and feasible midpoints sit below infeasible ones
    for (l0, h0), (l1, h1) in zip(sol.trace, sol.trace[1:]):
        assert l1 >= l0 and h1 <= h0
    feas = [m for m, ok in sol.tested if ok]
    infeas = [m for m, ok in sol.tested if not ok]
    if feas and infeas:
        assert max(feas) < min(infeas)


def test_mmf_agrees_with_grid_oracle(two_user_instance, three_user_instance):
    for inst in (two_user_instance, three_user_instance):
        sol = mmf_bisection(inst, 1e-6)
        r_grid = siso_grid_mmf(inst, 0.02)
        band = 1e-6 + mmf_modulus_bound(inst, 0.02)
        assert r_grid - 1e-6 <= sol.R <= r_grid + band


def test_mmf_witness_feasible(three_user_instance):
    sol = mmf_bisection(three_user_instance, 1e-6)
    lhs = outage_lhs_all(three_user_instance, sol.p, three_user_instance.alpha * sol.R)
    assert np.all(lhs <= 1.0 + 1e-9)
    assert np.all(sol.p <= three_user_instance.P + 1e-12)
    assert sol.binding_users  # someone must sit at the minimum


def test_mmf_rejects_bad_delta(two_user_instance):
    with pytest.raises(ValueError):
        mmf_bisection(two_user_instance, 0.0)


def test_modulus_bound_scales_linearly(two_user_instance):
    m1 = mmf_modulus_bound(two_user_instance, 0.1)
    m2 = mmf_modulus_bound(two_user_instance, 0.2)
    assert m1 > 0
    assert m2 == pytest.approx(2 * m1, rel=1e-12)


def test_balancing_frozen(two_user_instance):
    rho_star, p = outage_balancing_siso(two_user_instance, [0.1, 0.1])
    assert rho_star == pytest.approx(0.9423789978027344, abs=1e-12)
    inst_at = SisoInstance(
        Q=two_user_instance.Q,
        sigma2=two_user_instance.sigma2,
        rho=np.full(2, rho_star),
        P=two_user_instance.P,
        alpha=two_user_instance.alpha,
    )
    lhs = outage_lhs_all(inst_at, p, np.array([0.1, 0.1]))
    assert np.all(lhs <= 1.0 + 1e-9)


def test_balancing_monotone_in_targets(two_user_instance):
    lo_targets, _ = outage_balancing_siso(two_user_instance, [0.05, 0.05])
    hi_targets, _ = outage_balancing_siso(two_user_instance, [0.2, 0.2])
    assert lo_targets > hi_targets  # easier targets admit a stricter floor


def test_balancing_unachievable(two_user_instance):
    with pytest.raises(ValueError, match="unachievable"):
        outage_balancing_siso(two_user_instance, [50.0, 50.0])
    with pytest.raises(ValueError, match="shape"):
        outage_balancing_siso(two_user_instance, [0.1])


def test_single_user_objective_derivative():
    rng = np.random.default_rng(31)
    h = 1e-5
    for _ in range(15):
        ctx = sampling.random_vertex_slice(rng)
        for p in rng.uniform(0.05, 0.95, size=2):
            fd = (
                single_user_objective_F(p + h, ctx)
                - single_user_objective_F(p - h, ctx)
            ) / (2 * h)
            f = single_user_objective_f(float(p), ctx)
            assert abs(f - fd) <= 1e-6 * max(1.0, abs(f))


def test_single_user_objective_no_neighbors_monotone():
    # without edge terms the slice reduces to own-rate gain vs partner loss
    ctx = VertexSliceContext(partner_power=0.0)
    vals = [single_user_objective_F(p, ctx) for p in (0.0, 0.3, 0.6, 1.0)]
    assert vals == sorted(vals)  # own rate only: strictly increasing
    ctx2 = VertexSliceContext(partner_power=1.0)
    assert single_user_objective_f(0.0, ctx2) != 0.0


def test_random_instances_keep_bisection_inside_box():
    rng = np.random.default_rng(44)
    for _ in range(10):
        K = int(rng.integers(1, 4))
        inst = sampling.random_siso_instance(rng, K)
        sol = mmf_bisection(inst, 1e-4)
        assert 0.0 <= sol.R <= mmf_upper_bound(inst)
        assert np.all(sol.p >= 0.0)
        assert np.all(sol.p <= inst.P + 1e-12)
