"""Shared medium: log-distance path loss, threshold reception, all-or-nothing collisions."""
import math
from dataclasses import dataclass, field

import numpy as np

from .frames import airtime_us


@dataclass(frozen=True)
class PhyConfig:
    tx_power_mw: float = 100.0
    path_loss_alpha: float = 4.0
    sensitivity_dbm: float = -120.0
    carrier_sense_dbm: float = -120.0
    reference_distance_m: float = 1.0
    # recorded for fidelity, unused by the threshold model
    carrier_frequency_hz: float = 2.412e9
    thermal_noise_dbm: float = -110.0
    neighborhood_max_age_s: float = 100.0


def rx_power_dbm(distance_m, cfg):
    d = max(float(distance_m), cfg.reference_distance_m)
    return 10 * math.log10(cfg.tx_power_mw) - 10 * cfg.path_loss_alpha * math.log10(d / cfg.reference_distance_m)


@dataclass
class Topology:
    width_m: float = 200.0
    height_m: float = 200.0
    positions: dict = field(default_factory=dict)

    def place(self, node, x, y):
        if not (0 <= x <= self.width_m and 0 <= y <= self.height_m):
            raise ValueError(f"node {node} at ({x}, {y}) is outside the {self.width_m}x{self.height_m} m playground")
        if node in self.positions:
            raise ValueError(f"node {node} already placed")
        self.positions[node] = (float(x), float(y))

    def place_random(self, node, rng):
        self.place(node, rng.uniform(0, self.width_m), rng.uniform(0, self.height_m))

    def distance(self, a, b):
        (xa, ya), (xb, yb) = self.positions[a], self.positions[b]
        return math.hypot(xa - xb, ya - yb)


class ChannelEvent:
    __slots__ = ("uid", "transmitter", "frame", "tx_start", "tx_end", "corrupted_at")

    def __init__(self, uid, transmitter, frame, tx_start, tx_end):
        self.uid = uid
        self.transmitter = transmitter
        self.frame = frame
        self.tx_start = tx_start
        self.tx_end = tx_end
        self.corrupted_at = set()

    def __repr__(self):
        f = self.frame
        return f"ChannelEvent(#{self.uid} {f.kind.value} {self.transmitter}->{f.addr1} [{self.tx_start}, {self.tx_end}))"


class Channel:
    """One shared channel. Radios are attached with ``attach(node_id, radio)``;
    a radio implements ``on_frame(frame, at, uid)``, ``on_carrier_change(at)``
    and ``on_tx_end(ev)``.

    Reception succeeds iff rx power >= sensitivity and no other above-sensitivity
    transmission overlaps at that receiver, and the receiver is not itself
    transmitting during any part of the frame.
    """

    def __init__(self, sim, topology, phy, timing, log=False):
        self.sim = sim
        self.topology = topology
        self.phy = phy
        self.timing = timing
        self.radios = {}
        self.rx_neighbors = {}
        self.cs_neighbors = {}
        self._incoming = {}
        self._sensed = {}
        self._transmitting = {}
        self._uid = 0
        self.log = [] if log else None

    def attach(self, node, radio):
        if node not in self.topology.positions:
            raise ValueError(f"node {node} has no position")
        self.radios[node] = radio
        self._incoming[node] = []
        self._sensed[node] = 0
        self._transmitting[node] = None
        self._rebuild_neighbors()

    def _rebuild_neighbors(self):
        nodes = sorted(self.radios)
        for a in nodes:
            rx, cs = [], []
            for b in nodes:
                if a == b:
                    continue
                p = rx_power_dbm(self.topology.distance(a, b), self.phy)
                if p >= self.phy.sensitivity_dbm:
                    rx.append(b)
                if p >= self.phy.carrier_sense_dbm:
                    cs.append(b)
            self.rx_neighbors[a] = rx
            self.cs_neighbors[a] = cs

    def power_matrix(self):
        nodes = sorted(self.radios)
        m = np.full((len(nodes), len(nodes)), np.inf)
        for i, a in enumerate(nodes):
            for j, b in enumerate(nodes):
                if i != j:
                    m[i, j] = rx_power_dbm(self.topology.distance(a, b), self.phy)
        return nodes, m

    def single_collision_domain(self):
        n = len(self.radios)
        return all(len(v) == n - 1 for v in self.rx_neighbors.values()) and \
            all(len(v) == n - 1 for v in self.cs_neighbors.values())

    def is_transmitting(self, node):
        return self._transmitting[node] is not None

    def carrier_busy(self, node, at=None):
        return self._sensed[node] > 0 or self._transmitting[node] is not None

    def begin_transmission(self, transmitter, frame, at=None):
        now = self.sim.now
        if at is not None and at != now:
            raise ValueError("transmissions start at the current instant")
        if self._transmitting[transmitter] is not None:
            raise RuntimeError(f"node {transmitter} started a transmission while already transmitting "
                               f"{self._transmitting[transmitter]!r}")
        self._uid += 1
        ev = ChannelEvent(self._uid, transmitter, frame, now, now + airtime_us(frame.total_bits, self.timing))
        self._transmitting[transmitter] = ev
        # half duplex: anything arriving at the transmitter is lost
        for other in self._incoming[transmitter]:
            if other.tx_end > now:
                other.corrupted_at.add(transmitter)
        for r in self.rx_neighbors[transmitter]:
            live = [o for o in self._incoming[r] if o.tx_end > now]
            if live:
                ev.corrupted_at.add(r)
                for o in live:
                    o.corrupted_at.add(r)
            if self._transmitting[r] is not None:
                ev.corrupted_at.add(r)
            live.append(ev)
            self._incoming[r] = live
        changed = []
        for r in self.cs_neighbors[transmitter]:
            self._sensed[r] += 1
            if self._sensed[r] == 1:
                changed.append(r)
        if self.log is not None:
            self.log.append(ev)
        self.sim.schedule(ev.tx_end, self._end, ev, kind="tx-end", target=transmitter)
        for r in changed:
            self.radios[r].on_carrier_change(now)
        return ev

    def _end(self, ev):
        now = self.sim.now
        tx = ev.transmitter
        self._transmitting[tx] = None
        for r in self.cs_neighbors[tx]:
            self._sensed[r] -= 1
        delivered = []
        for r in self.rx_neighbors[tx]:
            self._incoming[r] = [o for o in self._incoming[r] if o is not ev]
            if r not in ev.corrupted_at:
                delivered.append(r)
        self.radios[tx].on_tx_end(ev)
        f = ev.frame
        for r in delivered:
            self.radios[r].on_frame(f, now, ev.uid)
        for r in self.cs_neighbors[tx]:
            if self._sensed[r] == 0:
                self.radios[r].on_carrier_change(now)
        self.radios[tx].on_carrier_change(now)
