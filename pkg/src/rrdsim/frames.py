"""MAC frames and the duration-field arithmetic of RTS/CTS/DATA/ACK."""
import enum
from dataclasses import dataclass

MAX_DURATION_US = 32767

BROADCAST = -1
NONE = None


class DurationOverflowError(ValueError):
    pass


class FrameKind(str, enum.Enum):
    RTS = "RTS"
    CTS = "CTS"
    DATA = "DATA"
    ACK = "ACK"


CONTROL_KINDS = (FrameKind.RTS, FrameKind.CTS, FrameKind.ACK)


@dataclass(frozen=True)
class TimingConfig:
    sifs_us: int = 10
    difs_us: int = 50
    slot_us: int = 20
    bitrate_bps: int = 1_000_000
    phy_preamble_us: int = 0
    mac_header_bits: int = 272
    rts_bits: int = 160
    cts_bits: int = 112
    ack_bits: int = 112
    rts_cts_threshold_bytes: int = 400

    def __post_init__(self):
        for name in ("sifs_us", "difs_us", "slot_us", "bitrate_bps", "mac_header_bits",
                     "rts_bits", "cts_bits", "ack_bits", "rts_cts_threshold_bytes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.phy_preamble_us < 0:
            raise ValueError(f"phy_preamble_us must be >= 0, got {self.phy_preamble_us}")


# 802.11b long preamble + PLCP header
REALISTIC_TIMING = TimingConfig(phy_preamble_us=192)


@dataclass(frozen=True)
class Frame:
    kind: FrameKind
    duration_us: int
    addr1: int
    addr2: int
    addr3: int = NONE
    payload_bits: int = 0
    header_bits: int = 0

    def __post_init__(self):
        if not 0 <= self.duration_us <= MAX_DURATION_US:
            raise DurationOverflowError(
                f"duration field {self.duration_us} us outside 0..{MAX_DURATION_US}")
        if self.kind in CONTROL_KINDS and self.payload_bits:
            raise ValueError(f"{self.kind.value} frames carry no payload")
        if self.payload_bits < 0 or self.header_bits < 0:
            raise ValueError("bit counts must be non-negative")
        if self.addr3 is not NONE and not (self.kind is FrameKind.ACK and self.addr1 == BROADCAST):
            raise ValueError("addr3 is only carried by a broadcast ACK")

    @property
    def total_bits(self):
        return self.header_bits + self.payload_bits

    @property
    def is_blacklist_notice(self):
        return self.kind is FrameKind.ACK and self.addr1 == BROADCAST and self.addr3 is not NONE


def airtime_us(total_bits, cfg):
    if total_bits < 0:
        raise ValueError("total_bits must be >= 0")
    # ceil without floats
    return -(-total_bits * 1_000_000 // cfg.bitrate_bps) + cfg.phy_preamble_us


def data_airtime_us(payload_bits, cfg):
    return airtime_us(cfg.mac_header_bits + payload_bits, cfg)


def rts_duration_us(payload_bits, cfg):
    """Reservation an honest sender puts in its RTS: CTS + DATA + ACK and three SIFS."""
    if payload_bits < 0:
        raise ValueError("payload_bits must be >= 0")
    d = (3 * cfg.sifs_us + airtime_us(cfg.cts_bits, cfg)
         + data_airtime_us(payload_bits, cfg) + airtime_us(cfg.ack_bits, cfg))
    if d > MAX_DURATION_US:
        raise DurationOverflowError(
            f"payload of {payload_bits} bits needs {d} us, above the {MAX_DURATION_US} us ceiling")
    return d


def cts_duration_us(received_rts_duration, cfg):
    if received_rts_duration < 0:
        raise ValueError("received_rts_duration must be >= 0")
    return max(0, received_rts_duration - cfg.sifs_us - airtime_us(cfg.cts_bits, cfg))


def data_duration_us(cfg):
    return cfg.sifs_us + airtime_us(cfg.ack_bits, cfg)


def max_honest_payload_bits(cfg):
    fixed = rts_duration_us(0, cfg)
    lo, hi = 0, MAX_DURATION_US * cfg.bitrate_bps // 1_000_000 + 1
    if fixed > MAX_DURATION_US:
        return -1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        try:
            rts_duration_us(mid, cfg)
            lo = mid
        except DurationOverflowError:
            hi = mid - 1
    return lo


def uses_rts(payload_bits, cfg):
    return payload_bits >= cfg.rts_cts_threshold_bytes * 8


# honest frame builders

def make_rts(src, dst, payload_bits, cfg):
    return Frame(FrameKind.RTS, rts_duration_us(payload_bits, cfg), dst, src, header_bits=cfg.rts_bits)


def make_cts(src, dst, rts_duration, cfg):
    return Frame(FrameKind.CTS, cts_duration_us(rts_duration, cfg), dst, src, header_bits=cfg.cts_bits)


def make_data(src, dst, payload_bits, cfg, duration_us=None):
    if duration_us is None:
        duration_us = data_duration_us(cfg)
    return Frame(FrameKind.DATA, duration_us, dst, src, payload_bits=payload_bits,
                 header_bits=cfg.mac_header_bits)


def make_ack(src, dst, cfg):
    return Frame(FrameKind.ACK, 0, dst, src, header_bits=cfg.ack_bits)
