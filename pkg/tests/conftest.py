"""Shared fixtures: the reference networks and the expensive simulation runs.

The two-species loop (distributed and constant-delay variants) drives most
tests; its class equation is quadratic, so exact limits are available from
the quadratic formula.  Long runs are session-scoped and reused across
files to keep the suite fast.
"""

import time

import numpy as np
import pytest

from delaycrn import (
    AffinePower,
    Constant,
    HistoryFunction,
    SimConfig,
    analyze_structure,
    parse_network,
    simulate,
)

REF_TEXT = """\
species X1 X2
reaction 2 X1 -> X1 + X2 ; rate 1 ; delay uniform(0,1)
reaction X1 + X2 -> 2 X1 ; rate 1 ; delay none
"""

CONST_TEXT = """\
species X1 X2
reaction 2 X1 -> X1 + X2 ; rate 1 ; delay const(1)
reaction X1 + X2 -> 2 X1 ; rate 1 ; delay none
"""

# class equation of both variants at the conserved value C: xbar solves
#   xbar**2 + 2*xbar = C       (uniform(0,1) kernel, first moment 1/2)
# 2*xbar**2 + 2*xbar = C       (const(1) kernel, first moment 1)


def ref_limit(c: float) -> float:
    return -1.0 + np.sqrt(1.0 + c)


def const_limit(c: float) -> float:
    return 0.5 * (-1.0 + np.sqrt(1.0 + 2.0 * c))


@pytest.fixture(scope="session")
def ref_net():
    return parse_network(REF_TEXT)


@pytest.fixture(scope="session")
def ref_info(ref_net):
    return analyze_structure(ref_net)


@pytest.fixture(scope="session")
def const_net():
    return parse_network(CONST_TEXT)


def ref_histories() -> dict[str, HistoryFunction]:
    """The four canonical initial histories for the distributed variant."""
    return {
        "a": HistoryFunction((Constant(0.5), Constant(1.5)), 1.0),
        "b": HistoryFunction((AffinePower(1.0, 1.0, 0.5), Constant(0.5)), 1.0),
        "c": HistoryFunction((AffinePower(1.0, 1.0, 0.5), Constant(0.0)), 1.0),
        "d": HistoryFunction((Constant(0.0), AffinePower(1.0, 1.0, 1.0)), 1.0),
    }


# conserved value C = x1 + x1-backlog + x2 for each history above
REF_KEYS = {"a": 2.25, "b": 13.0 / 6.0, "c": 5.0 / 3.0, "d": 1.0}


@pytest.fixture(scope="session")
def ref_runs(ref_net):
    """The four long runs (h=0.01, t_end=100) plus wall-clock seconds each."""
    cfg = SimConfig(h=0.01, t_end=100.0)
    out = {}
    for name, theta in ref_histories().items():
        t0 = time.perf_counter()
        traj = simulate(ref_net, theta, cfg)
        out[name] = (traj, time.perf_counter() - t0)
    return out


@pytest.fixture(scope="session")
def ref_run_half_step(ref_net):
    """Run 'a' again at half the step, for the drift-halving check."""
    theta = ref_histories()["a"]
    return simulate(ref_net, theta, SimConfig(h=0.005, t_end=100.0))
