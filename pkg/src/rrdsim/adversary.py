"""Stations that abuse the RTS duration field."""
from dataclasses import dataclass

from .frames import MAX_DURATION_US, Frame, FrameKind, make_data
from .mac import MacEntity, Packet

ATTACK_MODES = ("inflate", "chain", "flood")

AP = 0


@dataclass(frozen=True)
class AttackProfile:
    mode: str = "inflate"
    claimed_duration_us: int = MAX_DURATION_US
    actual_payload_bits: int = 8192
    chain_gap_us: int = 0
    flood_interval_us: int = 10_000
    flood_target: int = AP
    data_duration_override_us: int = None

    def __post_init__(self):
        if self.mode not in ATTACK_MODES:
            raise ValueError(f"unknown attack mode {self.mode!r}")
        if not 0 <= self.claimed_duration_us <= MAX_DURATION_US:
            raise ValueError(f"claimed_duration_us={self.claimed_duration_us} exceeds the "
                             f"{MAX_DURATION_US} us duration-field ceiling")
        if self.actual_payload_bits < 0 or self.chain_gap_us < 0:
            raise ValueError("payload and chain gap must be non-negative")
        if self.flood_interval_us <= 0:
            raise ValueError("flood_interval_us must be > 0")


def forge_rts(profile, target, at=None, src=None, cfg=None):
    """RTS whose duration is the claimed value, whatever the payload really needs."""
    header = cfg.rts_bits if cfg is not None else 160
    return Frame(FrameKind.RTS, profile.claimed_duration_us, target, src, header_bits=header)


class Attacker(MacEntity):
    """Station running one of the attack profiles.

    inflate: ordinary DCF contention for each queued payload, inflated RTS,
    real DATA of ``actual_payload_bits``.
    chain: always has something to send; re-reserves SIFS + chain_gap after
    every ACK, ignoring its own NAV.
    flood: inflated RTS to ``flood_target`` every ``flood_interval_us``, never
    sends DATA; defers only to physical carrier sense.
    """

    honest = False

    def __init__(self, address, net, profile, dest=AP, **kw):
        kw.setdefault("defense_mode", "off")
        super().__init__(address, net, **kw)
        self.profile = profile
        self.dest = dest
        self.respects_nav = profile.mode != "chain"
        if profile.mode == "flood":
            self.sim.schedule(0, self._flood_tick, kind="tx-start", target=address)

    def _has_frame(self):
        if self.profile.mode == "flood":
            return False
        return bool(self.queue) or self.profile.mode == "chain"

    def _head(self):
        if self.queue:
            return self.queue[0]
        return Packet(self.dest, self.profile.actual_payload_bits, self.sim.now)

    def _build_rts(self, packet):
        return forge_rts(self.profile, packet.dest, src=self.address, cfg=self.timing)

    def _build_data(self, packet):
        return make_data(self.address, packet.dest, self.profile.actual_payload_bits, self.timing,
                         duration_us=self.profile.data_duration_override_us)

    def _on_success(self, at):
        if self.profile.mode == "chain":
            if self._access_ev is not None:
                self.sim.cancel(self._access_ev)
                self._access_ev = None
            self.backoff_slots_remaining = None
            self._response_ev = self.sim.schedule(
                at + self.timing.sifs_us + self.profile.chain_gap_us, self._chain_rts,
                kind="tx-start", target=self.address)

    def _chain_rts(self):
        self._response_ev = None
        if self.pending_exchange is not None or self.channel.carrier_busy(self.address):
            self._kick()
            return
        self._start_exchange(self._head())

    def _flood_tick(self):
        now = self.sim.now
        if self.channel.carrier_busy(self.address):
            self.sim.schedule(now + self.timing.slot_us, self._flood_tick, kind="tx-start", target=self.address)
            return
        self._transmit(forge_rts(self.profile, self.profile.flood_target, src=self.address, cfg=self.timing))
        self.sim.schedule(now + self.profile.flood_interval_us, self._flood_tick, kind="tx-start",
                          target=self.address)

    def finalize(self, end):
        super().finalize(end)
        self.ledger.residual.pop(self.address, None)
