# How much of the channel an RTS reserves, and how much an attacker can add.
from rrdsim.frames import (TimingConfig, airtime_us, cts_duration_us, data_airtime_us,
                           data_duration_us, max_honest_payload_bits, rts_duration_us)

cfg = TimingConfig()
print("airtimes at 1 Mbps: RTS %d us, CTS %d us, ACK %d us" % (
    airtime_us(cfg.rts_bits, cfg), airtime_us(cfg.cts_bits, cfg), airtime_us(cfg.ack_bits, cfg)))

for payload_bytes in (400, 1024, 2048, max_honest_payload_bits(cfg) // 8):
    bits = payload_bytes * 8
    rts = rts_duration_us(bits, cfg)
    print("%5d B payload: DATA %5d us, RTS claims %5d, CTS %5d, DATA field %d" % (
        payload_bytes, data_airtime_us(bits, cfg), rts, cts_duration_us(rts, cfg), data_duration_us(cfg)))

honest = rts_duration_us(8192, cfg)
print()
print("1 KB honest claim: %d us" % honest)
print("maximum field value: 32767 us -> %d us of pure waste per exchange (%.1fx)" % (
    32767 - honest, 32767 / honest))
