"""Shared fixtures and the acceptance-summary reporter."""

import numpy as np
import pytest

from smartran.config import ScenarioConfig
from smartran.netmodel import (
    PathLossModel,
    generate_topology,
    sample_channels,
    spawn_users,
)

# test_acceptance.py appends one line per criterion; the hook below
# prints them after the test summary so every run ends with the
# pass/fail ledger regardless of capture settings.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def tiny_cfg():
    """Two sites, four subcarriers, four users: big enough to exercise
    cross-site terms, small enough for per-test runs."""
    return ScenarioConfig(
        rrs_count=2,
        subcarriers=4,
        n_users=4,
        cell_edge_snr_db=20.0,
        train_slots=20,
        eval_slots=10,
    )


@pytest.fixture
def tiny_net(tiny_cfg):
    """(topology, users, channels, path-loss model, noise_w) for one slot."""
    topo = generate_topology(tiny_cfg, seed=3)
    users = spawn_users(topo, tiny_cfg.n_users, seed=3)
    model = PathLossModel.from_config(tiny_cfg)
    channels = sample_channels(topo, users, model, seed=3, slot=0)
    return topo, users, channels, model, tiny_cfg.noise_power_w
