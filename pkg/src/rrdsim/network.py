"""Assembles a run: kernel, topology, channel, AP, stations, attackers and traffic."""
import math

from .adversary import Attacker
from .engine import US_PER_SECOND, Simulator
from .frames import TimingConfig
from .mac import MacEntity
from .metrics import MetricsLedger
from .phy import Channel, PhyConfig, Topology

AP_ADDRESS = 0
ATTACKER_BASE = 1000

# substream purposes (first key element is the node address)
RNG_BACKOFF, RNG_TRAFFIC, RNG_PLACEMENT = 0, 1, 2


class PoissonSource:
    def __init__(self, entity, dest, payload_bits, mean_interarrival_us):
        self.entity = entity
        self.dest = dest
        self.payload_bits = payload_bits
        self.mean_us = mean_interarrival_us
        self.rng = entity.sim.rng(entity.address, RNG_TRAFFIC)
        self._next()

    def _next(self):
        gap = max(1, math.ceil(self.rng.exponential(self.mean_us)))
        sim = self.entity.sim
        sim.schedule(sim.now + gap, self._arrive, kind="packet-arrival", target=self.entity.address)

    def _arrive(self):
        self.entity.enqueue_payload(self.dest, self.payload_bits)
        self._next()


class SaturationSource:
    """Keeps the MAC queue full: refills at t=0 and after every departure."""

    def __init__(self, entity, dest, payload_bits):
        self.entity = entity
        self.dest = dest
        self.payload_bits = payload_bits
        entity.on_departure = self._refill
        entity.sim.schedule(entity.sim.now, self._refill, entity, kind="packet-arrival", target=entity.address)

    def _refill(self, entity):
        while len(entity.queue) < entity.queue_capacity:
            entity.enqueue_payload(self.dest, self.payload_bits)


class Network:
    def __init__(self, seed=0, timing=None, phy=None, width_m=200.0, height_m=200.0, trace=False,
                 require_single_domain=False):
        self.sim = Simulator(seed, trace=trace)
        self.timing = timing or TimingConfig()
        self.phy = phy or PhyConfig()
        self.topology = Topology(width_m, height_m)
        self.trace = trace
        self.tx_trace = [] if trace else None
        self.channel = Channel(self.sim, self.topology, self.phy, self.timing, log=trace)
        self.ledger = MetricsLedger()
        self.nodes = {}
        self.sources = []
        self.require_single_domain = require_single_domain
        self._honest = set()
        self._attackers = set()

    def _place(self, address, position):
        if position is None:
            self.topology.place_random(address, self.sim.rng(address, RNG_PLACEMENT))
        else:
            self.topology.place(address, *position)

    def add_node(self, entity, position=None):
        self._place(entity.address, position)
        self.channel.attach(entity.address, entity)
        self.nodes[entity.address] = entity
        if entity.honest:
            self._honest.add(entity.address)
        else:
            self._attackers.add(entity.address)
        self.ledger.honest = frozenset(self._honest)
        self.ledger.attackers = frozenset(self._attackers)
        return entity

    def add_ap(self, position=None, **mac_kw):
        if position is None:
            position = (self.topology.width_m / 2, self.topology.height_m / 2)
        return self.add_node(MacEntity(AP_ADDRESS, self, **mac_kw), position)

    def add_station(self, address, position=None, traffic="poisson", mean_interarrival_us=100_000,
                    payload_bits=8192, dest=AP_ADDRESS, **mac_kw):
        sta = self.add_node(MacEntity(address, self, **mac_kw), position)
        self._attach_source(sta, traffic, dest, payload_bits, mean_interarrival_us)
        return sta

    def _attach_source(self, sta, traffic, dest, payload_bits, mean_interarrival_us):
        if traffic == "poisson":
            self.sources.append(PoissonSource(sta, dest, payload_bits, mean_interarrival_us))
        elif traffic == "saturation":
            self.sources.append(SaturationSource(sta, dest, payload_bits))
        elif traffic != "none":
            raise ValueError(f"unknown traffic model {traffic!r}")

    def add_attacker(self, profile, address=None, position=None, dest=AP_ADDRESS, traffic="poisson",
                     mean_interarrival_us=100_000, **mac_kw):
        """Attackers get ids from ATTACKER_BASE so honest ids (and their random
        substreams) are the same with and without them."""
        if address is None:
            address = ATTACKER_BASE + len(self._attackers)
        att = self.add_node(Attacker(address, self, profile, dest=dest, **mac_kw), position)
        if profile.mode == "inflate":
            self._attach_source(att, traffic, dest, profile.actual_payload_bits, mean_interarrival_us)
        return att

    @property
    def honest_stations(self):
        return [n for a, n in sorted(self.nodes.items()) if n.honest and a != AP_ADDRESS]

    def run_until(self, end_us):
        if self.require_single_domain and not self.channel.single_collision_domain():
            raise RuntimeError("topology is not a single collision domain")
        self.sim.run_until(end_us)
        for node in self.nodes.values():
            node.finalize(end_us)
        led = self.ledger
        led.nav_busy_us = {a: n.nav_busy_us for a, n in sorted(self.nodes.items())}
        led.close(end_us)
        return led

    def run_seconds(self, seconds):
        return self.run_until(int(round(seconds * US_PER_SECOND)))
