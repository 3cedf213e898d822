# Five honest stations sending to the AP, with and without an RTS-inflating neighbour.
from rrdsim.adversary import AttackProfile
from rrdsim.metrics import mean_latency_us, throughput_bps
from rrdsim.network import Network

SECONDS = 20


def run(attacker):
    net = Network(seed=3)
    net.add_ap()
    for addr in range(1, 6):
        net.add_station(addr, mean_interarrival_us=20_000)
    if attacker:
        net.add_attacker(AttackProfile(claimed_duration_us=32767), mean_interarrival_us=20_000)
    return net.run_seconds(SECONDS)


for label, attacker in (("no attacker", False), ("inflating attacker", True)):
    led = run(attacker)
    print("%-20s throughput %7.0f kbit/s   mean latency %8.1f ms   attacker NAV hold %.2f s" % (
        label, throughput_bps(led) / 1e3, mean_latency_us(led) / 1e3, led.attacker_hold_us / 1e6))
