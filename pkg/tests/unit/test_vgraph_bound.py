import numpy as np
import pytest

from fsc_bounds.bounds.vgraph_bound import (
    QDist,
    build_product,
    check_connected,
    classify,
    evaluate_bundle,
    joint_law,
    optimize_q,
    q_from_policy,
    single_letter_bound,
    stationary,
    uniform_q,
)
from fsc_bounds.channels.fsc import Fsc
from fsc_bounds.channels.rll import DmcKind, RllSpec, make_dmc, make_rll_dmc
from fsc_bounds.channels.vgraph import (
    NO_EDGE,
    VGraph,
    constraint_vgraph,
    input_memory_vgraph,
    trivial_vgraph,
)
from fsc_bounds.solver.rvi import solve_average_reward
from fsc_bounds.utils.exceptions import (
    InvalidPolicyError,
    NoFeasibleQError,
    NotConnectedError,
    NotSingleClassError,
    PeriodicChainError,
    VGraphConditionError,
)
from fsc_bounds.utils.info import hb


def _constant_q(fsc, x):
    q = np.zeros((fsc.n_states, 1, fsc.n_inputs))
    q[:, :, x] = 1.0
    return QDist(q)


def test_product_of_the_one_inf_channel_and_its_constraint_graph(rll_bsc):
    fsc = rll_bsc(1, "inf", 0.1)
    pg = build_product(fsc, constraint_vgraph(RllSpec(1)))
    assert pg.shape == (2, 2)
    assert pg.live.all()
    assert pg.feasible[1, 1].tolist() == [True, True]
    assert pg.feasible[0, 0].tolist() == [True, False]
    assert pg.feasible[1, 0].tolist() == [True, False]
    assert pg.successor(1, 1, 1) == (0, 0)
    assert pg.successor(0, 0, 1) is None
    assert pg.graph.has_edge((1, 1), (0, 0))

    cls = classify(pg, uniform_q(fsc, pg.vgraph))
    assert cls.single_class
    assert cls.aperiodic
    assert cls.class_members == frozenset({(0, 0), (1, 1)})
    assert cls.start_vertex(0) == 0


def test_dead_vertices_are_pruned(rll_bsc):
    fsc = rll_bsc(1, "inf", 0.1)
    vg = VGraph(phi=np.array([[1, NO_EDGE], [NO_EDGE, 0]]))
    pg = build_product(fsc, vg)
    assert pg.live.tolist() == [[True, False], [True, True]]
    assert uniform_q(fsc, vg).q[0, 1].tolist() == [0.0, 0.0]
    with pytest.raises(NoFeasibleQError):
        optimize_q(fsc, vg)


def test_lifted_dp_policy_reproduces_the_dp_rate(rll_bsc):
    fsc = rll_bsc(1, "inf", 0.2)
    solution = solve_average_reward(fsc)
    vg = constraint_vgraph(RllSpec(1))
    q = q_from_policy(fsc, vg, solution.policy)
    assert single_letter_bound(fsc, vg, q) == pytest.approx(solution.rho, abs=1e-8)


def test_trivial_vgraph_on_a_bsc_finds_shannon_capacity():
    fsc = make_dmc(DmcKind.bsc(0.15))
    q, value = optimize_q(fsc, trivial_vgraph(2))
    assert value == pytest.approx(1.0 - hb(0.15), abs=1e-6)
    assert q.in_class_q and q.aperiodic
    assert q.q[0, 0].tolist() == pytest.approx([0.5, 0.5], abs=1e-3)


def test_input_memory_vgraph_matches_the_dp_on_one_inf(rll_bsc):
    fsc = rll_bsc(1, "inf", 0.1)
    rho = solve_average_reward(fsc).rho
    _, value = optimize_q(fsc, input_memory_vgraph(2, 1))
    assert value == pytest.approx(rho, abs=1e-6)


def test_bundle_carries_the_stationary_law(rll_bsc):
    fsc = rll_bsc(1, "inf", 0.1)
    vg = constraint_vgraph(RllSpec(1))
    bundle = evaluate_bundle(fsc, vg, uniform_q(fsc, vg))
    assert bundle.start_vertex == 0
    assert bundle.q.in_class_q
    pi = bundle.stationary.pi
    assert pi.sum() == pytest.approx(1.0)
    assert pi[0, 0] == pytest.approx(1.0 / 3.0)
    assert pi[1, 1] == pytest.approx(2.0 / 3.0)
    assert bundle.stationary.balance_residual <= 1e-12

    joint = joint_law(fsc, vg, uniform_q(fsc, vg))
    assert joint.shape == (2, 2, 2, 2)
    assert joint.sum() == pytest.approx(1.0)
    assert np.allclose(joint.sum(axis=(2, 3)), pi)
    assert joint[0, :, 1, :].sum() == 0.0


def test_disconnected_channel_is_rejected():
    fsc = Fsc.from_tables(
        next_state=[[0, 0], [1, 0]], emission=np.full((2, 2, 2), 0.5)
    )
    assert not check_connected(fsc)
    with pytest.raises(NotConnectedError):
        single_letter_bound(fsc, trivial_vgraph(2), _constant_q(fsc, 0))


def test_reducible_vgraph_is_rejected(toggle_channel):
    vg = VGraph(phi=np.array([[1, 1], [1, 1]]))
    with pytest.raises(VGraphConditionError, match="not irreducible"):
        optimize_q(toggle_channel, vg)


def test_several_closed_classes_are_rejected(toggle_channel):
    vg = trivial_vgraph(2)
    with pytest.raises(NotSingleClassError, match="2 closed classes"):
        single_letter_bound(toggle_channel, vg, _constant_q(toggle_channel, 0))


def test_periodic_class_is_rejected(toggle_channel):
    vg = trivial_vgraph(2)
    q = _constant_q(toggle_channel, 1)
    assert not classify(build_product(toggle_channel, vg), q).aperiodic
    with pytest.raises(PeriodicChainError):
        stationary(build_product(toggle_channel, vg), q)


def test_channel_that_is_always_periodic_has_no_feasible_q():
    fsc = Fsc.from_tables(
        next_state=[[1, 1], [0, 0]], emission=np.full((2, 2, 2), 0.5)
    )
    assert check_connected(fsc)
    with pytest.raises(NoFeasibleQError):
        optimize_q(fsc, trivial_vgraph(2))


def test_invalid_q_is_rejected(rll_bsc):
    fsc = rll_bsc(1, "inf", 0.1)
    vg = constraint_vgraph(RllSpec(1))
    q = np.array(uniform_q(fsc, vg).q)
    q[0, 0] = [0.5, 0.5]
    with pytest.raises(InvalidPolicyError, match="infeasible"):
        single_letter_bound(fsc, vg, q)
    with pytest.raises(InvalidPolicyError, match="shape"):
        single_letter_bound(fsc, vg, np.full((2, 1, 2), 0.5))
    with pytest.raises(InvalidPolicyError):
        QDist(np.ones((2, 2)))


@pytest.mark.parametrize("spec", [RllSpec(1), RllSpec(2)], ids=str)
def test_longer_input_memory_never_lowers_the_bound(spec):
    fsc = make_rll_dmc(spec, DmcKind.bsc(0.1))
    _, shorter = optimize_q(fsc, input_memory_vgraph(2, 1))
    _, longer = optimize_q(fsc, input_memory_vgraph(2, 2))
    assert longer >= shorter - 1e-9


@pytest.mark.parametrize(
    ("spec", "vg"),
    [
        (RllSpec(1), input_memory_vgraph(2, 1)),
        (RllSpec(1), input_memory_vgraph(2, 2)),
        (RllSpec(2), input_memory_vgraph(2, 2)),
        (RllSpec(1, 3), constraint_vgraph(RllSpec(1, 3))),
    ],
    ids=["1-inf-m1", "1-inf-m2", "2-inf-m2", "1-3-constraint"],
)
def test_optimized_q_sits_between_uniform_q_and_rho(spec, vg):
    # every vertex of these V-graphs determines the channel state
    fsc = make_rll_dmc(spec, DmcKind.bsc(0.1))
    rho = solve_average_reward(fsc).rho
    uniform = single_letter_bound(fsc, vg, uniform_q(fsc, vg))
    q, best = optimize_q(fsc, vg)
    assert best >= uniform - 1e-12
    assert best <= rho + 1e-8
    assert single_letter_bound(fsc, vg, q) == pytest.approx(best, abs=1e-9)
