"""Per-run measurement ledger and the derived throughput/latency/detection figures."""
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .engine import US_PER_SECOND


@dataclass(frozen=True)
class Delivery:
    node: int
    payload_bits: int
    enqueued_at: int
    acked_at: int

    @property
    def latency_us(self):
        return self.acked_at - self.enqueued_at


@dataclass(frozen=True)
class VerdictRecord:
    time: int
    detector: int
    transmitter: int
    excess_us: int
    malicious: bool
    basic_malicious: bool
    improved_malicious: bool
    action: str


@dataclass
class MetricsLedger:
    honest: frozenset = frozenset()
    attackers: frozenset = frozenset()
    run_us: int = 0
    deliveries: list = field(default_factory=list)
    offered: Counter = field(default_factory=Counter)
    accepted: Counter = field(default_factory=Counter)
    queue_drops: Counter = field(default_factory=Counter)
    retry_drops: Counter = field(default_factory=Counter)
    residual: Counter = field(default_factory=Counter)
    verdicts: list = field(default_factory=list)
    notices_sent: int = 0
    nav_busy_us: dict = field(default_factory=dict)
    attacker_hold_us: int = 0
    first_attacker_data_at: int = None
    counters: Counter = field(default_factory=Counter)
    frozen: bool = False
    _hold_until: int = field(default=0, repr=False)

    def _check_open(self):
        if self.frozen:
            raise RuntimeError("ledger is read-only after the run")

    def record_delivery(self, node, payload_bits, enqueued_at, acked_at):
        self._check_open()
        if node in self.attackers:
            self.counters["attacker_deliveries"] += 1
            return
        if acked_at <= enqueued_at:
            raise ValueError(f"ack at {acked_at} not after enqueue at {enqueued_at}")
        self.deliveries.append(Delivery(node, payload_bits, enqueued_at, acked_at))

    def note_attacker_hold(self, start, end):
        """Union of honest-NAV time reserved by attacker frames (starts arrive in time order)."""
        self._check_open()
        if end > self._hold_until:
            self.attacker_hold_us += end - max(self._hold_until, start)
            self._hold_until = end

    def release_attacker_hold(self, at):
        if self._hold_until > at:
            self.attacker_hold_us -= self._hold_until - at
            self._hold_until = at

    def close(self, end):
        if self._hold_until > end:
            self.attacker_hold_us -= self._hold_until - end
            self._hold_until = end
        self.run_us = end
        self.frozen = True

    def record_verdict(self, rec):
        self._check_open()
        self.verdicts.append(rec)

    @property
    def latency_series(self):
        return [(d.enqueued_at, d.acked_at) for d in self.deliveries]

    @property
    def delivered_payload_bits(self):
        return sum(d.payload_bits for d in self.deliveries)

    def delivered_bits_by_node(self):
        out = defaultdict(int)
        for d in self.deliveries:
            out[d.node] += d.payload_bits
        return dict(out)

    def delivered_count_by_node(self):
        return Counter(d.node for d in self.deliveries)

    @property
    def first_detection_at(self):
        hits = [v.time for v in self.verdicts if v.malicious and v.transmitter in self.attackers]
        return min(hits) if hits else None


def throughput_bps(ledger, run_seconds=None, since_us=0):
    """Honest payload bits per second; with ``since_us`` only deliveries acked after it count."""
    if run_seconds is None:
        run_seconds = ledger.run_us / US_PER_SECOND
    window_s = run_seconds - since_us / US_PER_SECOND
    if window_s <= 0:
        raise ValueError("throughput needs a positive run duration")
    bits = sum(d.payload_bits for d in ledger.deliveries if d.acked_at > since_us)
    return bits / window_s


def mean_latency_us(ledger):
    """Mean enqueue-to-ACK latency; ``None`` when nothing was delivered."""
    if not ledger.deliveries:
        return None
    return sum(d.latency_us for d in ledger.deliveries) / len(ledger.deliveries)


def detection_counts(ledger, ground_truth_attackers=None):
    """tpr: share of attackers flagged at least once (None with no attackers).
    fpr: share of verdicts on honest transmitters that were malicious.
    time_to_first_detection: absolute time of the first true detection, or None.
    """
    attackers = ledger.attackers if ground_truth_attackers is None else frozenset(ground_truth_attackers)
    flagged = {v.transmitter for v in ledger.verdicts if v.malicious}
    honest_verdicts = [v for v in ledger.verdicts if v.transmitter not in attackers]
    false_pos = sum(1 for v in honest_verdicts if v.malicious)
    tp_times = [v.time for v in ledger.verdicts if v.malicious and v.transmitter in attackers]
    return {
        "tpr": len(flagged & attackers) / len(attackers) if attackers else None,
        "fpr": false_pos / len(honest_verdicts) if honest_verdicts else 0.0,
        "true_positives": len(tp_times),
        "false_positives": false_pos,
        "time_to_first_detection": min(tp_times) if tp_times else None,
    }


def nav_busy_between(nav_log, start, end):
    """Time in [start, end) during which a NAV described by ``nav_log`` was set.

    ``nav_log`` holds ``(time, expires_at, source)`` entries in time order,
    each one the NAV value from that instant on.
    """
    busy = 0
    expires = 0
    t_prev = None
    for t, exp, _ in nav_log:
        if t_prev is not None:
            busy += _overlap(t_prev, min(expires, t), start, end)
        t_prev = t
        expires = exp
    if t_prev is not None:
        busy += _overlap(t_prev, expires, start, end)
    return busy


def _overlap(a, b, start, end):
    return max(0, min(b, end) - max(a, start))
