"""Per-node 802.11 DCF: carrier sense, NAV, backoff, RTS/CTS/DATA/ACK and retries."""
from collections import deque

from . import defense
from .defense import Verdict, detect_basic, detect_improved, expected_data_airtime_us
from .frames import (FrameKind, airtime_us, data_airtime_us, make_ack, make_cts, make_data,
                     make_rts, uses_rts)
from .metrics import VerdictRecord

CW_MIN = 31
CW_MAX = 1023
RETRY_LIMIT = 7
QUEUE_CAPACITY = 14


class Packet:
    __slots__ = ("dest", "payload_bits", "enqueued_at")

    def __init__(self, dest, payload_bits, enqueued_at):
        self.dest = dest
        self.payload_bits = payload_bits
        self.enqueued_at = enqueued_at


class Exchange:
    """The one frame exchange a node is part of, as initiator or responder."""

    __slots__ = ("peer", "role", "stage", "stored_rts_duration_us", "expected_data_airtime_us",
                 "timer", "packet")

    def __init__(self, peer, role, stage, packet=None, stored_rts_duration_us=None,
                 expected_data_airtime_us=None):
        self.peer = peer
        self.role = role
        self.stage = stage
        self.packet = packet
        self.stored_rts_duration_us = stored_rts_duration_us
        self.expected_data_airtime_us = expected_data_airtime_us
        self.timer = None


class MacEntity:
    honest = True
    respects_nav = True

    def __init__(self, address, net, defense_mode="off", detector=None,
                 queue_capacity=QUEUE_CAPACITY, cw_min=CW_MIN, cw_max=CW_MAX,
                 retry_limit=RETRY_LIMIT):
        if defense_mode not in defense.MODES:
            raise ValueError(f"unknown defense mode {defense_mode!r}")
        self.address = address
        self.net = net
        self.sim = net.sim
        self.channel = net.channel
        self.timing = net.timing
        self.ledger = net.ledger
        self.rng = self.sim.rng(address, 0)
        self.defense_mode = defense_mode
        self.detector = detector or defense.DetectorConfig(phase=defense_mode)
        self.queue_capacity = queue_capacity
        self.cw_min = cw_min
        self.cw_max = cw_max
        self.retry_limit = retry_limit

        self.queue = deque()
        self.cw = cw_min
        self.short_retry_count = 0
        self.backoff_slots_remaining = None
        self.nav_expires_at = 0
        self.nav_busy_us = 0
        self.nav_log = [] if net.trace else None
        self.blacklist = set()
        self.pending_exchange = None
        self.on_departure = None

        self._nav_ev = None
        self._access_ev = None
        self._countdown_start = 0
        self._response_ev = None

    def __repr__(self):
        return f"{type(self).__name__}({self.address})"

    # queue

    def enqueue_payload(self, dest, payload_bits, at=None):
        at = self.sim.now if at is None else at
        self.ledger.offered[self.address] += 1
        if len(self.queue) >= self.queue_capacity:
            self.ledger.queue_drops[self.address] += 1
            return False
        self.ledger.accepted[self.address] += 1
        self.queue.append(Packet(dest, payload_bits, at))
        self._kick()
        return True

    def _has_frame(self):
        return bool(self.queue)

    # carrier sense

    def medium_idle(self, at=None):
        at = self.sim.now if at is None else at
        if self.channel.carrier_busy(self.address, at):
            return False
        return not self.respects_nav or self.nav_expires_at <= at

    def nav_update(self, frame, at):
        if self.defense_mode == "phase2" and frame.addr2 in self.blacklist:
            self.ledger.counters["nav_update_suppressed"] += 1
            return
        new = at + frame.duration_us
        if new > self.nav_expires_at:
            if self.honest and self._attacker_induced(frame):
                self.ledger.note_attacker_hold(at, new)
            self._set_nav(new, frame.addr2)

    def _attacker_induced(self, frame):
        attackers = self.ledger.attackers
        return frame.addr2 in attackers or (frame.kind is FrameKind.CTS and frame.addr1 in attackers)

    def release_nav(self, at, source=None):
        if self.nav_expires_at > at:
            self.ledger.release_attacker_hold(at)
            self._set_nav(at, source)

    def _set_nav(self, new, source):
        now = self.sim.now
        old = self.nav_expires_at
        if new >= old:
            self.nav_busy_us += new - max(old, now)
        else:
            self.nav_busy_us -= old - max(new, now)
        self.nav_expires_at = new
        if self.nav_log is not None:
            self.nav_log.append((now, new, source))
        self.sim.cancel(self._nav_ev)
        self._nav_ev = None
        if new > now:
            self._nav_ev = self.sim.schedule(new, self._kick, kind="nav-expiry", target=self.address)
        self._kick()

    def on_carrier_change(self, at):
        self._kick()

    # contention

    def _kick(self):
        """Re-evaluate channel access after any change in queue, medium or exchange state."""
        now = self.sim.now
        if self.pending_exchange is not None or self._response_ev is not None or not self._has_frame():
            if self._access_ev is not None and self._access_ev.fire_at > now:
                self._freeze(now)
            return
        if self.backoff_slots_remaining is None:
            self.backoff_slots_remaining = int(self.rng.integers(0, self.cw + 1))
        if self.medium_idle(now):
            if self._access_ev is None:
                self._access_ev = self.sim.schedule(now + self.timing.difs_us, self._difs_done,
                                                    kind="difs", target=self.address)
        elif self._access_ev is not None and self._access_ev.fire_at > now:
            # a timer due right now is committed: the slot boundary has been reached
            self._freeze(now)

    start_access = _kick

    def _freeze(self, now):
        ev = self._access_ev
        if ev.kind == "backoff":
            self.backoff_slots_remaining -= (now - self._countdown_start) // self.timing.slot_us
        self.sim.cancel(ev)
        self._access_ev = None

    def _difs_done(self):
        self._access_ev = None
        now = self.sim.now
        if self.backoff_slots_remaining == 0:
            self._access_granted()
        elif self.medium_idle(now):
            self._countdown_start = now
            self._access_ev = self.sim.schedule(
                now + self.backoff_slots_remaining * self.timing.slot_us, self._backoff_done,
                kind="backoff", target=self.address)

    def _backoff_done(self):
        self._access_ev = None
        self.backoff_slots_remaining = 0
        self._access_granted()

    def _access_granted(self):
        self.backoff_slots_remaining = None
        if self.pending_exchange is not None or not self._has_frame():
            return
        self._start_exchange(self._head())

    def _head(self):
        return self.queue[0]

    def _start_exchange(self, packet):
        if uses_rts(packet.payload_bits, self.timing):
            frame = self._build_rts(packet)
            self.pending_exchange = Exchange(packet.dest, "initiator", "sending-rts", packet)
        else:
            frame = self._build_data(packet)
            self.pending_exchange = Exchange(packet.dest, "initiator", "sending-data", packet)
        self._transmit(frame)

    def _build_rts(self, packet):
        return make_rts(self.address, packet.dest, packet.payload_bits, self.timing)

    def _build_data(self, packet):
        return make_data(self.address, packet.dest, packet.payload_bits, self.timing)

    def _transmit(self, frame, response=False):
        if self.net.tx_trace is not None:
            self.net.tx_trace.append((self.sim.now, self.address, frame.kind, self.nav_expires_at, response))
        return self.channel.begin_transmission(self.address, frame)

    def _respond_after_sifs(self, frame):
        self._response_ev = self.sim.schedule(self.sim.now + self.timing.sifs_us, self._send_response,
                                              frame, kind="tx-start", target=self.address)

    def _send_response(self, frame):
        self._response_ev = None
        if self.channel.is_transmitting(self.address):
            self.ledger.counters["response_while_transmitting"] += 1
            return
        self._transmit(frame, response=True)

    def on_tx_end(self, ev):
        ex = self.pending_exchange
        kind = ev.frame.kind
        now = self.sim.now
        t = self.timing
        if ex is None:
            return
        if ex.role == "initiator" and kind is FrameKind.RTS and ex.stage == "sending-rts":
            ex.stage = "awaiting-cts"
            self._arm_timeout(ex, now + t.sifs_us + airtime_us(t.cts_bits, t) + t.slot_us)
        elif ex.role == "initiator" and kind is FrameKind.DATA and ex.stage == "sending-data":
            ex.stage = "awaiting-ack"
            self._arm_timeout(ex, now + t.sifs_us + airtime_us(t.ack_bits, t) + t.slot_us)
        elif ex.role == "responder" and kind is FrameKind.CTS and ex.stage == "sending-cts":
            ex.stage = "awaiting-data"
            expected = max(ex.expected_data_airtime_us, 0)
            self._arm_timeout(ex, now + t.sifs_us + expected + t.slot_us)

    def _arm_timeout(self, ex, at):
        ex.timer = self.sim.schedule(at, self.on_timeout, ex, kind="timer-expiry", target=self.address)

    # reception

    def on_frame(self, frame, at, uid):
        if frame.addr1 == self.address:
            self.on_receive(frame, at, uid)
        elif frame.is_blacklist_notice:
            defense.on_overhear_blacklist_ack(self, frame, at)
        else:
            self.nav_update(frame, at)

    def on_receive(self, frame, at, uid=0):
        kind = frame.kind
        if kind is FrameKind.RTS:
            self._on_rts(frame, at)
        elif kind is FrameKind.CTS:
            self._on_cts(frame, at)
        elif kind is FrameKind.DATA:
            self._on_data(frame, at, uid)
        else:
            self._on_ack(frame, at)

    def _malformed(self, what):
        self.ledger.counters[f"malformed_{what}"] += 1

    def _on_rts(self, frame, at):
        ex = self.pending_exchange
        if (ex is not None and ex.role == "initiator") or self._response_ev is not None:
            self._malformed("rts_busy")
            return
        if defense.filter_rts(self, frame) == "ignore":
            return
        if self.nav_expires_at > at:
            self.ledger.counters["cts_withheld_nav"] += 1
            return
        if ex is not None:
            self.sim.cancel(ex.timer)
        cts = make_cts(self.address, frame.addr2, frame.duration_us, self.timing)
        self.pending_exchange = Exchange(
            frame.addr2, "responder", "sending-cts",
            stored_rts_duration_us=frame.duration_us,
            expected_data_airtime_us=expected_data_airtime_us(cts.duration_us, self.timing))
        self._respond_after_sifs(cts)
        self._kick()

    def _on_cts(self, frame, at):
        ex = self.pending_exchange
        if ex is None or ex.role != "initiator" or ex.stage != "awaiting-cts" or ex.peer != frame.addr2:
            self._malformed("cts")
            return
        self.sim.cancel(ex.timer)
        ex.stage = "sending-data"
        self._respond_after_sifs(self._build_data(ex.packet))

    def _on_data(self, frame, at, uid):
        ex = self.pending_exchange
        sender = frame.addr2
        if ex is not None and ex.role == "responder" and ex.stage == "awaiting-data" and ex.peer == sender:
            self.sim.cancel(ex.timer)
            self.pending_exchange = None
            if sender in self.ledger.attackers and self.ledger.first_attacker_data_at is None:
                self.ledger.first_attacker_data_at = at
            reply = self._inspect_data(ex, frame, at, uid)
        elif ex is None and self._response_ev is None:
            reply = None
        else:
            self._malformed("data")
            return
        self._respond_after_sifs(reply or make_ack(self.address, sender, self.timing))

    def _inspect_data(self, ex, frame, at, uid):
        if self.defense_mode == "off":
            return None
        cfg = self.detector
        vb = detect_basic(ex.stored_rts_duration_us, frame.payload_bits, self.timing, cfg.slack_us, uid)
        vi = detect_improved(ex.expected_data_airtime_us, frame, self.timing, cfg.slack_us, uid)
        if not vi.malicious and vi.measured_excess_us < 0:
            self.ledger.counters["data_longer_than_claimed"] += 1
        chosen: Verdict = vb if cfg.variant == "basic" else vi
        reply = None
        action = "none"
        if chosen.malicious:
            reply = defense.on_malicious(self, chosen, frame.addr2, at)
            action = {"phase2": "notice", "phase1": "blacklist"}.get(self.defense_mode, "logged")
        self.ledger.record_verdict(VerdictRecord(
            at, self.address, frame.addr2, chosen.measured_excess_us, chosen.malicious,
            vb.malicious, vi.malicious, action))
        return reply

    def _on_ack(self, frame, at):
        ex = self.pending_exchange
        if ex is None or ex.role != "initiator" or ex.stage != "awaiting-ack" or ex.peer != frame.addr2:
            self._malformed("ack")
            return
        self.sim.cancel(ex.timer)
        self.pending_exchange = None
        packet = ex.packet
        self.ledger.record_delivery(self.address, packet.payload_bits, packet.enqueued_at, at)
        self.cw = self.cw_min
        self.short_retry_count = 0
        self._dequeue(packet)
        self._on_success(at)
        self._kick()

    def _on_success(self, at):
        pass

    def _dequeue(self, packet):
        if self.queue and self.queue[0] is packet:
            self.queue.popleft()
            if self.on_departure is not None:
                self.on_departure(self)

    # recovery

    def on_timeout(self, ex, stage=None):
        if ex is not self.pending_exchange:
            return
        self.pending_exchange = None
        if ex.role == "initiator":
            self.short_retry_count += 1
            self.cw = min(2 * (self.cw + 1) - 1, self.cw_max)
            if self.short_retry_count > self.retry_limit:
                self.ledger.retry_drops[self.address] += 1
                self.cw = self.cw_min
                self.short_retry_count = 0
                self._dequeue(ex.packet)
        self._kick()

    def finalize(self, end):
        if self.nav_expires_at > end:
            self.nav_busy_us -= self.nav_expires_at - max(end, self.sim.now)
        self.ledger.residual[self.address] = len(self.queue)
