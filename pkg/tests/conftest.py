import pytest

from rrdsim.adversary import AttackProfile
from rrdsim.frames import TimingConfig
from rrdsim.network import Network

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def timing():
    return TimingConfig()


def make_net(n_stations=0, seed=1, defense_mode="off", attacker=None, trace=False, traffic="none",
             positions=None, **kw):
    """AP at the centre plus ``n_stations`` stations; optional attacker profile."""
    net = Network(seed=seed, trace=trace, **kw)
    net.add_ap(defense_mode=defense_mode)
    for i in range(1, n_stations + 1):
        pos = positions.get(i) if positions else None
        net.add_station(i, position=pos, traffic=traffic, defense_mode=defense_mode)
    if attacker is not None:
        net.add_attacker(attacker, traffic="saturation" if attacker.mode == "inflate" else "poisson")
    return net


@pytest.fixture
def inflate_profile():
    return AttackProfile()
