"""Re-evaluation of RTS durations at the receiver and blacklist-based prevention.

Detection runs when a DATA frame arrives for an exchange this node opened with
a CTS. Two bookkeeping routes compute the same excess:

* basic: keep the RTS duration; at DATA time strip the three SIFS, CTS and ACK
  airtimes and compare what is left with the airtime the DATA frame needs.
* improved: at CTS time keep ``cts_duration - ACK - 2*SIFS`` (the DATA airtime
  the sender has claimed); at DATA time compare it directly.

Prevention: phase1 ignores RTS from blacklisted senders. phase2 additionally
replaces the ACK with a broadcast ACK naming the attacker in addr3; every node
that overhears it blacklists the attacker, drops its NAV, and stops accepting
NAV updates from that address.
"""
from dataclasses import dataclass

from .frames import BROADCAST, NONE, Frame, FrameKind, airtime_us, data_airtime_us

MODES = ("off", "detect-only", "phase1", "phase2")
VARIANTS = ("basic", "improved")


@dataclass(frozen=True)
class DetectorConfig:
    variant: str = "basic"
    slack_us: int = 0
    phase: str = "phase2"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown detector variant {self.variant!r}")
        if self.phase not in MODES:
            raise ValueError(f"unknown defense phase {self.phase!r}")
        if self.slack_us < 0:
            raise ValueError("slack_us must be >= 0")


@dataclass(frozen=True)
class Verdict:
    frame_id: int
    malicious: bool
    measured_excess_us: int


def detect_basic(stored_rts_duration_us, data_payload_bits, timing, slack_us=0, frame_id=0):
    claimed = (stored_rts_duration_us - 3 * timing.sifs_us
               - airtime_us(timing.cts_bits, timing) - airtime_us(timing.ack_bits, timing))
    excess = claimed - data_airtime_us(data_payload_bits, timing)
    return Verdict(frame_id, excess > slack_us, excess)


def expected_data_airtime_us(cts_duration, timing):
    return cts_duration - airtime_us(timing.ack_bits, timing) - 2 * timing.sifs_us


def detect_improved(expected_data_airtime, data_frame, timing, slack_us=0, frame_id=0):
    # one-sided: an under-claim is not an attack on the NAV
    excess = expected_data_airtime - data_airtime_us(data_frame.payload_bits, timing)
    return Verdict(frame_id, excess > slack_us, excess)


def make_blacklist_notice(detector, attacker, timing):
    if attacker is NONE or attacker == BROADCAST:
        raise ValueError("a blacklist notice must name a unicast address")
    return Frame(FrameKind.ACK, 0, BROADCAST, detector, addr3=attacker, header_bits=timing.ack_bits)


def filter_rts(entity, rts_frame):
    if entity.defense_mode in ("phase1", "phase2") and rts_frame.addr2 in entity.blacklist:
        entity.ledger.counters["rts_ignored_blacklisted"] += 1
        return "ignore"
    return "respond"


def on_malicious(entity, verdict, attacker, at):
    """Apply prevention for a malicious verdict; returns the frame to send after
    SIFS instead of the ACK, or None to send the normal ACK."""
    mode = entity.defense_mode
    if mode in ("phase1", "phase2"):
        entity.blacklist.add(attacker)
    if mode == "phase2":
        entity.ledger.notices_sent += 1
        return make_blacklist_notice(entity.address, attacker, entity.timing)
    return None


def on_overhear_blacklist_ack(entity, notice, at):
    if notice.addr3 == entity.address:
        entity.ledger.counters["notice_naming_self"] += 1
        return
    if entity.defense_mode != "phase2":
        entity.nav_update(notice, at)
        return
    entity.blacklist.add(notice.addr3)
    entity.release_nav(at, source=notice.addr2)
