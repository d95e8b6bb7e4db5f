"""Integrator behavior: accuracy, dense output, stationarity, chain expansion."""

import numpy as np
import pytest

from delaycrn import (
    HistoryFunction,
    IntegrationError,
    NetworkValidationError,
    SimConfig,
    chain_initial_state,
    expand_chain,
    parse_network,
    rhs,
    simulate,
    simulate_ode,
)

from conftest import CONST_TEXT, REF_TEXT

DECAY = "species A\nreaction A -> 0 ; rate 1 ; delay none\n"


def test_simconfig_validation():
    for bad in (dict(h=0.0), dict(t_end=0.0), dict(h=2.0, t_end=1.0), dict(eps_neg=-1.0)):
        with pytest.raises(ValueError):
            SimConfig(**bad)


def test_delay_free_network_matches_ode_path():
    net = parse_network(
        "species A B\n"
        "reaction A -> B ; rate 1 ; delay none\n"
        "reaction B -> A ; rate 0.5 ; delay none\n"
    )
    cfg = SimConfig(h=0.01, t_end=5.0)
    x0 = np.array([1.0, 0.0])
    dde = simulate(net, HistoryFunction.constant(x0), cfg)
    ode = simulate_ode(net, x0, cfg)
    np.testing.assert_allclose(dde.states, ode.states, atol=1e-12)


def test_exponential_decay_accuracy_and_dense_output():
    net = parse_network(DECAY)
    traj = simulate_ode(net, [1.0], SimConfig(h=0.01, t_end=2.0))
    t = np.linspace(0.0, 2.0, 501)  # off-grid points exercise the Hermite cells
    np.testing.assert_allclose(traj.eval(t)[0], np.exp(-t), atol=1e-9)


def test_eval_shapes_and_past_times():
    net = parse_network(DECAY)
    traj = simulate_ode(net, [1.0], SimConfig(h=0.1, t_end=1.0))
    assert traj.eval(0.5).shape == (1,)
    assert traj.eval(np.array([0.1, 0.2])).shape == (1, 2)
    assert traj.eval(-3.0)[0] == 1.0  # constant pre-history
    with pytest.raises(ValueError, match="beyond"):
        traj.eval(1.5)


def test_segment_view_windows_the_trajectory():
    net = parse_network(DECAY)
    traj = simulate_ode(net, [1.0], SimConfig(h=0.01, t_end=2.0))
    seg = traj.segment(1.5)
    assert seg(0.0)[0] == pytest.approx(np.exp(-1.5), abs=1e-9)
    assert seg(-0.5)[0] == pytest.approx(np.exp(-1.0), abs=1e-9)


@pytest.mark.parametrize("text", [REF_TEXT, CONST_TEXT])
def test_constant_equilibrium_is_stationary(text):
    # any state with x1 == x2 nulls the field, delayed or not
    net = parse_network(text)
    theta = HistoryFunction.constant([0.8, 0.8], tau=1.0)
    traj = simulate(net, theta, SimConfig(h=0.01, t_end=5.0))
    assert np.max(np.abs(traj.states - 0.8)) < 1e-13
    assert traj.clamp_count == 0


def test_rhs_matches_hand_computed_field():
    # d/dt (x1, x2) = (x1 x2 - x1^2) * (1, -1) at any constant window
    for text in (REF_TEXT, CONST_TEXT):
        net = parse_network(text)
        theta = HistoryFunction.constant([0.5, 1.5], tau=1.0)
        want = 0.5 * (1.5 - 0.5) * np.array([1.0, -1.0])
        np.testing.assert_allclose(rhs(net, theta), want, atol=1e-12)


def test_step_halving_improves_fourth_order():
    net = parse_network(CONST_TEXT)
    theta = HistoryFunction.constant([0.5, 1.5], tau=1.0)
    fine = simulate(net, theta, SimConfig(h=0.0025, t_end=5.0))

    def err(h):
        run = simulate(net, theta, SimConfig(h=h, t_end=5.0))
        return np.max(np.abs(run.states[-1] - fine.states[-1]))

    e1, e2 = err(0.02), err(0.01)
    assert e2 < e1 / 8.0


def test_distributed_step_halving_improves():
    net = parse_network(REF_TEXT)
    theta = HistoryFunction.constant([0.5, 1.5], tau=1.0)
    fine = simulate(net, theta, SimConfig(h=0.0025, t_end=5.0))

    def err(h):
        run = simulate(net, theta, SimConfig(h=h, t_end=5.0))
        return np.max(np.abs(run.states[-1] - fine.states[-1]))

    e1, e2 = err(0.02), err(0.01)
    assert e2 < e1 / 8.0


def test_history_must_cover_the_delay_window():
    net = parse_network(CONST_TEXT)
    with pytest.raises(NetworkValidationError, match="cover"):
        simulate(net, HistoryFunction.constant([1.0, 1.0], tau=0.5), SimConfig())


def test_history_length_must_match_species_count():
    net = parse_network(CONST_TEXT)
    with pytest.raises(NetworkValidationError, match="components"):
        simulate(net, HistoryFunction.constant([1.0], tau=1.0), SimConfig())


def test_step_too_large_for_delay_rejected():
    net = parse_network(CONST_TEXT)
    theta = HistoryFunction.constant([0.5, 1.5], tau=1.0)
    with pytest.raises(ValueError, match="tau/4"):
        simulate(net, theta, SimConfig(h=0.3, t_end=10.0))


def test_blow_up_raises_integration_error_with_time():
    net = parse_network("species A\nreaction 2 A -> 3 A ; rate 5 ; delay none\n")
    with pytest.raises(IntegrationError) as err:
        simulate_ode(net, [4.0], SimConfig(h=0.05, t_end=10.0))
    assert err.value.time > 0.0
    assert "at t =" in str(err.value)


def test_simulate_ode_rejects_delays_and_bad_initial_states():
    cnet = parse_network(CONST_TEXT)
    with pytest.raises(NetworkValidationError, match="delay-free"):
        simulate_ode(cnet, [1.0, 1.0], SimConfig())
    net = parse_network(DECAY)
    with pytest.raises(NetworkValidationError, match="length"):
        simulate_ode(net, [1.0, 2.0], SimConfig())
    with pytest.raises(NetworkValidationError, match="non-negative"):
        simulate_ode(net, [-1.0], SimConfig())


class TestChainExpansion:
    def test_structure_of_expanded_network(self):
        net = parse_network(CONST_TEXT)
        big = expand_chain(net, 3)
        # one delayed reaction gains 3 species and 3 extra reactions
        assert big.n == net.n + 3
        assert big.r == net.r + 3
        assert big.species_names[:2] == ["X1", "X2"]
        assert big.species_names[2:] == ["z1_1", "z1_2", "z1_3"]
        # entry keeps the original rate; conversions run at N/tau
        delayed = [r for r in big.reactions if r.source.coeffs[:2] == (2, 0)]
        assert delayed[0].rate == 1.0
        fast = [r for r in big.reactions if r.rate == 3.0]
        assert len(fast) == 3
        assert all(r.kernel.max_delay == 0.0 for r in big.reactions)

    def test_zero_delay_reactions_copied_unchanged(self):
        net = parse_network(CONST_TEXT)
        big = expand_chain(net, 4)
        undelayed = [r for r in big.reactions if r.source.coeffs[:2] == (1, 1)]
        assert len(undelayed) == 1
        assert undelayed[0].product.coeffs[:2] == (2, 0)
        assert undelayed[0].rate == 1.0

    def test_no_delays_returns_the_network_as_is(self):
        net = parse_network(DECAY)
        assert expand_chain(net, 8) is net

    def test_distributed_kernel_rejected(self):
        net = parse_network(REF_TEXT)
        with pytest.raises(NetworkValidationError, match="point-mass"):
            expand_chain(net, 8)
        with pytest.raises(NetworkValidationError, match="point-mass"):
            chain_initial_state(net, HistoryFunction.constant([1, 1], tau=1.0), 8)

    def test_bad_stage_count_rejected(self):
        net = parse_network(CONST_TEXT)
        with pytest.raises(NetworkValidationError, match=">= 1"):
            expand_chain(net, 0)

    def test_initial_state_loads_the_pipeline(self):
        net = parse_network(CONST_TEXT)
        theta = HistoryFunction.constant([0.5, 1.5], tau=1.0)
        z0 = chain_initial_state(net, theta, 3)
        np.testing.assert_allclose(z0[:2], [0.5, 1.5])
        # each stage holds kappa * (tau/N) * theta(-j tau/N)^y = (1/3) * 0.25
        np.testing.assert_allclose(z0[2:], [0.25 / 3.0] * 3)

    def test_chain_conserves_the_weighted_total(self):
        # v = (1, 1, 2, ..., 2) is conserved: the entry step trades two X1
        # for one stage token, the exit trades it back for X1 + X2
        net = parse_network(CONST_TEXT)
        theta = HistoryFunction.constant([0.5, 1.5], tau=1.0)
        big = expand_chain(net, 8)
        z0 = chain_initial_state(net, theta, 8)
        run = simulate_ode(big, z0, SimConfig(h=0.01, t_end=10.0))
        v = np.array([1.0, 1.0] + [2.0] * 8)
        totals = run.states @ v
        assert np.max(np.abs(totals - totals[0])) < 1e-12
