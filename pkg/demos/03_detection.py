# Detection and phase-2 prevention on a single inflated exchange, frame by frame.
from rrdsim.adversary import AttackProfile
from rrdsim.defense import DetectorConfig
from rrdsim.network import Network

net = Network(seed=1, trace=True)
net.add_ap(defense_mode="phase2", detector=DetectorConfig(variant="improved"))
net.add_station(1, traffic="none", defense_mode="phase2")
net.add_station(2, traffic="none", defense_mode="phase2")
attacker = net.add_attacker(AttackProfile(), traffic="none")
attacker.enqueue_payload(0, 8192)
led = net.run_until(60_000)

for ev in net.channel.log[:4]:
    f = ev.frame
    extra = " (blacklist notice naming %d)" % f.addr3 if f.is_blacklist_notice else ""
    print("%6d-%6d us  %-4s %4d -> %-4s duration %5d%s" % (
        ev.tx_start, ev.tx_end, f.kind.value, f.addr2, f.addr1, f.duration_us, extra))

v = led.verdicts[0]
print()
print("verdict at %d us: excess %d us, malicious=%s (basic %s, improved %s)" % (
    v.time, v.excess_us, v.malicious, v.basic_malicious, v.improved_malicious))
for sta in net.honest_stations:
    print("station %d: blacklist %s, NAV log %s" % (sta.address, sorted(sta.blacklist), sta.nav_log))
print("later RTS from the attacker ignored by the AP:", led.counters["rts_ignored_blacklisted"])
