import math

import numpy as np
import pytest

from _oracles import zeta_bisect
from outagebf.model import WeightedGraph
from outagebf.reductions import (
    CertificateError,
    assignment_from_beamformers,
    beamformers_from_assignment,
    check_feasibility_certificate,
    cut_from_powers,
    gadget_constants,
    powers_from_cut,
    reduce_3sat,
    reduce_maxcut,
    srm_value_identity,
)
from outagebf.solvers import srm_rates_from_powers

LN2 = math.log(2.0)


# -- Max-Cut gadget ----------------------------------------------------------

def test_reduce_maxcut_layout(path_graph):
    gad = reduce_maxcut(path_graph)
    inst, um = gad.instance, gad.usermap
    assert um.K == 2 * (3 + 2) == 10
    assert um.roles[:4] == (
        ("vertex", 1, 0),
        ("vertex", 1, 1),
        ("vertex", 2, 0),
        ("vertex", 2, 1),
    )
    assert np.all(inst.sigma2 == 0.1)
    assert np.all(inst.rho == 0.95)
    # vertex users: budget 1 weight 1; edge users: budget 0.7 weight w/(2W)
    for k, role in enumerate(um.roles):
        if role[0] == "vertex":
            assert inst.P[k] == 1.0 and inst.alpha[k] == 1.0
        else:
            assert inst.P[k] == 0.7
            assert inst.alpha[k] == pytest.approx(1.0 / 4.0)


def test_reduce_maxcut_wiring(path_graph):
    gad = reduce_maxcut(path_graph)
    Q, um = gad.instance.Q, gad.usermap
    # vertex pairs interfere mutually; edge user e_ij hears v_i0 and v_j1
    assert Q[um.vertex(1, 0), um.vertex(1, 1)] == 1.0
    assert Q[um.vertex(1, 1), um.vertex(1, 0)] == 1.0
    e12 = um.edge(1, 2)
    assert Q[um.vertex(1, 0), e12] == 1.0
    assert Q[um.vertex(2, 1), e12] == 1.0
    assert Q[um.vertex(1, 1), e12] == 0.0
    assert Q[um.vertex(2, 0), e12] == 0.0
    # edge users never interfere with anyone
    assert np.all(Q[e12] == np.eye(10)[e12])
    # no coupling across distinct vertices
    assert Q[um.vertex(1, 0), um.vertex(2, 0)] == 0.0


def test_reduce_maxcut_rejects_disconnected():
    with pytest.raises(ValueError, match="disconnected"):
        reduce_maxcut(WeightedGraph(V=3, edges=((1, 2, 1.0),)))


def test_gadget_roots_frozen(single_edge_graph):
    gad = reduce_maxcut(single_edge_graph)
    assert gad.zeta_solo == pytest.approx(0.5129329438755086, rel=1e-12)
    assert gad.zeta_paired == pytest.approx(0.04762983335018944, rel=1e-12)
    assert gad.rate_solo == pytest.approx(0.5973480459273376, rel=1e-12)
    assert gad.edge_rates[(0, 0)] == pytest.approx(0.4426017835025995, rel=1e-12)
    assert gad.edge_rates[(1, 1)] == pytest.approx(0.024742388625194064, rel=1e-12)
    assert gad.edge_rates[(0, 1)] == gad.edge_rates[(1, 0)]
    assert gad.cut_gain == pytest.approx(0.37271166065214034, rel=1e-12)
    assert gad.cut_gain > 0


def test_powers_from_cut_pattern(path_graph):
    gad = reduce_maxcut(path_graph)
    p = powers_from_cut((2,), gad)
    assert p.tolist() == [1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.7, 0.7, 0.7, 0.7]
    with pytest.raises(ValueError, match="outside"):
        powers_from_cut((4,), gad)


def test_cut_recovery_roundtrip(path_graph):
    gad = reduce_maxcut(path_graph)
    for mask in range(8):
        S = tuple(v for v in (1, 2, 3) if (mask >> (v - 1)) & 1)
        assert cut_from_powers(powers_from_cut(S, gad), gad) == S


def test_cut_from_powers_rejects_non_patterns(path_graph):
    gad = reduce_maxcut(path_graph)
    p = powers_from_cut((2,), gad)
    bad = p.copy()
    bad[0] = 0.5  # vertex user off the {0, 1} pattern
    with pytest.raises(CertificateError, match="vertex 1"):
        cut_from_powers(bad, gad)
    bad = p.copy()
    bad[1] = 1.0  # both users of vertex 1 active
    with pytest.raises(CertificateError, match="vertex 1"):
        cut_from_powers(bad, gad)
    bad = p.copy()
    bad[6] = 0.2  # edge user off budget
    with pytest.raises(CertificateError, match="edge user"):
        cut_from_powers(bad, gad)
    with pytest.raises(ValueError, match="shape"):
        cut_from_powers(p[:-1], gad)


def test_cut_identity_exact_on_all_patterns(path_graph):
    gad = reduce_maxcut(path_graph)
    alpha = gad.instance.alpha
    for mask in range(8):
        S = tuple(v for v in (1, 2, 3) if (mask >> (v - 1)) & 1)
        direct = float(alpha @ srm_rates_from_powers(gad.instance, powers_from_cut(S, gad)))
        assert direct == pytest.approx(srm_value_identity(path_graph, S, gad), abs=1e-9)


def test_cut_identity_affine_in_cutweight(path_graph):
    gad = reduce_maxcut(path_graph)
    v_empty = srm_value_identity(path_graph, (), gad)
    v_best = srm_value_identity(path_graph, (2,), gad)
    gain = gad.cut_gain / (2.0 * gad.total_weight)
    assert v_best - v_empty == pytest.approx(gain * 2.0, rel=1e-12)
    assert v_best == pytest.approx(2.0257162238459094, rel=1e-12)


def test_edgeless_graph_identity():
    gad = reduce_maxcut(WeightedGraph(V=1, edges=()))
    assert gad.usermap.K == 2
    assert srm_value_identity(gad.graph, (), gad) == pytest.approx(gad.rate_solo)
    assert srm_value_identity(gad.graph, (1,), gad) == pytest.approx(gad.rate_solo)


def test_gadget_constants_reference_table():
    table = gadget_constants()
    refs = {
        "vertex_rate_solo": 0.5973,
        "vertex_rate_paired": 0.0671,
        "edge_rate_quiet": 0.4426,
        "double_activation_penalty": 0.4631,
        "paired_product_bound": 0.0537,
        "edge_slope_bound": 0.6181,
    }
    assert set(table) == set(refs)
    for name, (computed, reference) in table.items():
        assert reference == refs[name]
        assert abs(computed - reference) <= 5e-4, name


# -- 3-SAT gadget ------------------------------------------------------------

def test_reduce_3sat_layout(small_cnf):
    gad = reduce_3sat(small_cnf)
    inst, um = gad.instance, gad.usermap
    assert um.K == 5 * 4 + 2 == 22
    assert inst.Nt == 2
    assert gad.rbar == 1.0
    assert np.all(inst.rho == 0.9)
    assert np.all(inst.P == 1.0)
    assert np.all(inst.alpha == 1.0)
    # anchor noise makes the lone constraint bind at full power and target 1
    anchor = um.vertex(1, 0)
    assert inst.sigma2[anchor] == pytest.approx(math.log(1 / 0.9), rel=1e-15)
    assert inst.sigma2[um.vertex(1, 3)] == pytest.approx(
        math.log((10 / 11) / 0.9), rel=1e-15
    )
    assert inst.sigma2[um.clause(1)] == 0.01


def test_reduce_3sat_coupling_blocks(small_cnf):
    gad = reduce_3sat(small_cnf)
    Qcov, um = gad.instance.Qcov, gad.usermap
    u0 = um.vertex(1, 0)
    assert np.array_equal(Qcov[u0, u0], np.eye(2))
    A1 = np.array([[1.0, 1.0], [1.0, 1.0]]) / 10.0
    A3 = np.array([[1.0, 1.0j], [-1.0j, 1.0]]) / 10.0
    assert np.array_equal(Qcov[u0, um.vertex(1, 1)], A1)
    assert np.array_equal(Qcov[u0, um.vertex(1, 3)], A3)
    # second clause (2, -3, -4): positive literal picks the second coordinate
    c2 = um.clause(2)
    assert np.array_equal(Qcov[um.vertex(2, 0), c2], np.diag([0.0, 1.0]) / 25.0)
    assert np.array_equal(Qcov[um.vertex(3, 0), c2], np.diag([1.0, 0.0]) / 25.0)
    assert np.array_equal(Qcov[um.vertex(4, 0), c2], np.diag([1.0, 0.0]) / 25.0)
    # variable 1 does not appear in clause 2
    assert np.all(Qcov[um.vertex(1, 0), c2] == 0.0)


def test_canonical_certificate_shape(small_cnf):
    gad = reduce_3sat(small_cnf)
    beams = beamformers_from_assignment((1, 0, 1, 0), gad)
    assert beams.w.shape == (22, 2)
    assert np.allclose(beams.powers(), 1.0)
    um = gad.usermap
    assert beams.w[um.vertex(1, 0)].tolist() == [1.0, 0.0]
    assert beams.w[um.vertex(2, 0)].tolist() == [0.0, 1.0]
    assert beams.w[um.clause(1)].tolist() == [1.0, 0.0]
    with pytest.raises(ValueError):
        beamformers_from_assignment((1, 0, 1), gad)
    with pytest.raises(ValueError):
        beamformers_from_assignment((1, 0, 2, 0), gad)


def test_assignment_roundtrip(small_cnf):
    gad = reduce_3sat(small_cnf)
    for a in ((0, 0, 0, 0), (1, 1, 1, 1), (0, 1, 0, 1)):
        beams = beamformers_from_assignment(a, gad)
        assert assignment_from_beamformers(beams, gad) == a


def test_assignment_rejects_off_axis(small_cnf):
    gad = reduce_3sat(small_cnf)
    beams = beamformers_from_assignment((0, 0, 0, 0), gad)
    w = beams.w.copy()
    w[gad.usermap.vertex(1, 0)] = [math.sqrt(0.5), math.sqrt(0.5)]
    from outagebf.model import BeamformerSet

    with pytest.raises(CertificateError, match="variable 1"):
        assignment_from_beamformers(BeamformerSet(w=w), gad)


def test_certificate_feasible_iff_satisfying(small_cnf):
    gad = reduce_3sat(small_cnf)
    rep = check_feasibility_certificate(gad, beamformers_from_assignment((0, 0, 1, 0), gad))
    assert rep.feasible
    # variable constraints bind at exactly 1, so the "violation" is roundoff
    assert rep.max_constraint_violation <= 1e-12
    assert rep.max_power_violation <= 1e-12
    bad = check_feasibility_certificate(gad, beamformers_from_assignment((0, 0, 0, 0), gad))
    assert not bad.feasible
    # the all-false assignment leaves clause 1 with three unsatisfied literals
    assert bad.max_constraint_violation == pytest.approx(0.022552164032269006, rel=1e-12)


def test_variable_constraints_bind_at_canonical(small_cnf):
    gad = reduce_3sat(small_cnf)
    for a in ((0, 0, 1, 0), (1, 1, 1, 1), (0, 1, 0, 1)):
        rep = check_feasibility_certificate(gad, beamformers_from_assignment(a, gad))
        variable_lhs = rep.lhs[: 5 * 4]
        assert np.max(np.abs(variable_lhs - 1.0)) <= 1e-9


def test_clause_lhs_counts_unsatisfied_literals(small_cnf):
    gad = reduce_3sat(small_cnf)
    expected = [0.9 * math.exp(0.01) * 1.04**s for s in range(4)]
    # clause 1 = (x1 | x2 | x3): pick assignments hitting each unsat count s
    c1 = gad.usermap.clause(1)
    cases = {(1, 1, 1, 0): 0, (1, 1, 0, 0): 1, (1, 0, 0, 0): 2, (0, 0, 0, 0): 3}
    for a, s in cases.items():
        rep = check_feasibility_certificate(gad, beamformers_from_assignment(a, gad))
        assert rep.lhs[c1] == pytest.approx(expected[s], rel=1e-12)
    assert expected[2] == pytest.approx(0.9832232346464126, rel=1e-12)
    assert expected[3] == pytest.approx(1.022552164032269, rel=1e-12)


def test_forcing_users_reject_off_axis_beams(small_cnf):
    # tilting one variable beam off-axis must break a forcing constraint
    gad = reduce_3sat(small_cnf)
    beams = beamformers_from_assignment((1, 1, 1, 1), gad)
    w = beams.w.copy()
    w[gad.usermap.vertex(1, 0)] = [math.sqrt(0.5), math.sqrt(0.5)]
    from outagebf.model import BeamformerSet

    rep = check_feasibility_certificate(gad, BeamformerSet(w=w))
    assert not rep.feasible
    forcing = [gad.usermap.vertex(1, l) for l in range(1, 5)]
    assert np.max(rep.lhs[forcing]) > 1.0 + 1e-6


def test_certificate_respects_budgets(small_cnf):
    gad = reduce_3sat(small_cnf)
    beams = beamformers_from_assignment((1, 0, 1, 0), gad)
    from outagebf.model import BeamformerSet

    scaled = BeamformerSet(w=beams.w * 1.001)
    rep = check_feasibility_certificate(gad, scaled)
    assert rep.max_power_violation > 1e-12
    assert not rep.feasible


def test_gadget_zetas_vs_oracle(single_edge_graph):
    gad = reduce_maxcut(single_edge_graph)
    assert gad.zeta_solo == pytest.approx(zeta_bisect(0.1, 0.95), rel=1e-12)
    assert gad.zeta_paired == pytest.approx(zeta_bisect(0.1, 0.95, (1.0,)), rel=1e-12)
