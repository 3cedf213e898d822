import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rrdsim.adversary import AttackProfile, forge_rts
from rrdsim.defense import (DetectorConfig, detect_basic, detect_improved, expected_data_airtime_us,
                            filter_rts, make_blacklist_notice, on_malicious, on_overhear_blacklist_ack)
from rrdsim.frames import (BROADCAST, FrameKind, TimingConfig, cts_duration_us, make_data, make_rts,
                           max_honest_payload_bits, rts_duration_us)
from rrdsim.network import Network
from rrdsim.phy import PhyConfig

from conftest import make_net

T = TimingConfig()


def test_basic_honest_exchange_is_clean():
    v = detect_basic(8718, 8192, T)
    assert v.measured_excess_us == 0 and not v.malicious


def test_basic_max_claim_excess():
    v = detect_basic(32767, 8192, T)
    assert v.measured_excess_us == 24049 and v.malicious


def test_basic_one_microsecond_over():
    v = detect_basic(8719, 8192, T)
    assert v.measured_excess_us == 1 and v.malicious
    assert not detect_basic(8719, 8192, T, slack_us=1).malicious


def test_improved_examples():
    assert expected_data_airtime_us(8596, T) == 8464
    honest = detect_improved(8464, make_data(1, 0, 8192, T), T)
    assert honest.measured_excess_us == 0 and not honest.malicious
    cts = cts_duration_us(32767, T)
    inflated = detect_improved(expected_data_airtime_us(cts, T), make_data(1, 0, 8192, T), T)
    assert inflated.measured_excess_us == 24049 and inflated.malicious


def test_under_claim_is_not_malicious():
    v = detect_basic(8000, 8192, T)
    assert v.measured_excess_us < 0 and not v.malicious


@settings(max_examples=300, deadline=None)
@given(payload=st.integers(0, max_honest_payload_bits(T)), delta=st.integers(-500, 20000),
       slack=st.integers(0, 19))
def test_variants_agree(payload, delta, slack):
    rts = rts_duration_us(payload, T) + delta
    if not 0 <= rts <= 32767 or cts_duration_us(rts, T) == 0:
        return
    b = detect_basic(rts, payload, T, slack)
    i = detect_improved(expected_data_airtime_us(cts_duration_us(rts, T), T), make_data(1, 0, payload, T),
                        T, slack)
    assert b.measured_excess_us == i.measured_excess_us == delta
    assert b.malicious == i.malicious == (delta > slack)


def test_detector_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig(variant="fancy")
    with pytest.raises(ValueError):
        DetectorConfig(slack_us=-1)


def test_notice_shape():
    n = make_blacklist_notice(0, 1000, T)
    assert n.kind is FrameKind.ACK and n.addr1 == BROADCAST and n.addr3 == 1000
    assert n.duration_us == 0 and n.is_blacklist_notice
    with pytest.raises(ValueError):
        make_blacklist_notice(0, BROADCAST, T)


def test_filter_rts_by_mode():
    for mode, expect in (("off", "respond"), ("detect-only", "respond"), ("phase1", "ignore"),
                         ("phase2", "ignore")):
        net = make_net(1, defense_mode=mode)
        ap = net.nodes[0]
        ap.blacklist.add(7)
        assert filter_rts(ap, make_rts(7, 0, 8192, T)) == expect
        assert filter_rts(ap, make_rts(1, 0, 8192, T)) == "respond"


def test_on_malicious_is_idempotent_and_mode_dependent():
    v = detect_basic(32767, 8192, T)
    net = make_net(1, defense_mode="phase2")
    ap = net.nodes[0]
    assert on_malicious(ap, v, 1000, 0).addr3 == 1000
    on_malicious(ap, v, 1000, 0)
    assert ap.blacklist == {1000} and net.ledger.notices_sent == 2
    net1 = make_net(1, defense_mode="phase1")
    assert on_malicious(net1.nodes[0], v, 1000, 0) is None and net1.nodes[0].blacklist == {1000}
    net0 = make_net(1, defense_mode="detect-only")
    assert on_malicious(net0.nodes[0], v, 1000, 0) is None and not net0.nodes[0].blacklist
    assert net0.ledger.notices_sent == 0


def test_overheard_notice_releases_nav_and_blocks_later_updates():
    net = make_net(1, defense_mode="phase2", trace=True)
    sta = net.nodes[1]
    sta.on_frame(forge_rts(AttackProfile(), 0, src=1000, cfg=T), 0, 1)
    assert sta.nav_expires_at == 32767
    net.sim.run_until(9000)
    on_overhear_blacklist_ack(sta, make_blacklist_notice(0, 1000, T), 9000)
    assert sta.nav_expires_at <= 9000 and 1000 in sta.blacklist
    assert sta.medium_idle(9000)
    sta.nav_update(make_rts(1000, 0, 8192, T), 9000)
    assert sta.nav_expires_at <= 9000
    assert net.ledger.counters["nav_update_suppressed"] == 1


def test_notice_naming_self_is_ignored():
    net = make_net(1, defense_mode="phase2")
    sta = net.nodes[1]
    on_overhear_blacklist_ack(sta, make_blacklist_notice(0, 1, T), 0)
    assert not sta.blacklist and net.ledger.counters["notice_naming_self"] == 1


def test_detection_in_a_live_exchange():
    for variant in ("basic", "improved"):
        net = Network(seed=2, trace=True)
        net.add_ap(defense_mode="phase2", detector=DetectorConfig(variant=variant))
        net.add_station(1, traffic="none", defense_mode="phase2")
        att = net.add_attacker(AttackProfile(), traffic="none")
        att.enqueue_payload(0, 8192)
        led = net.run_until(200_000)
        data_end = [e.tx_end for e in net.channel.log if e.frame.kind is FrameKind.DATA][0]
        (v,) = led.verdicts
        assert v.malicious and v.excess_us == 24049 and v.time == data_end
        assert v.basic_malicious and v.improved_malicious and v.action == "notice"
        kinds = [e.frame.kind for e in net.channel.log[:4]]
        assert kinds == [FrameKind.RTS, FrameKind.CTS, FrameKind.DATA, FrameKind.ACK]
        assert net.channel.log[3].frame.is_blacklist_notice
        assert 1000 in net.nodes[1].blacklist
        # later RTS retries from the blacklisted sender go unanswered
        assert all(e.frame.kind is FrameKind.RTS for e in net.channel.log[4:])
        assert led.counters["rts_ignored_blacklisted"] == len(net.channel.log) - 4 > 0
        assert led.counters["attacker_deliveries"] == 0


def test_node_out_of_notice_range_keeps_its_nav():
    phy = PhyConfig(sensitivity_dbm=-60, carrier_sense_dbm=-60)
    net = Network(seed=1, phy=phy, width_m=300, height_m=200, trace=True)
    net.add_ap(position=(100, 100), defense_mode="phase2")
    near = net.add_station(1, position=(110, 100), traffic="none", defense_mode="phase2")
    far = net.add_station(2, position=(220, 100), traffic="none", defense_mode="phase2")
    att = net.add_attacker(AttackProfile(), position=(160, 100), traffic="none")
    att.enqueue_payload(0, 8192)
    net.run_until(100_000)
    rts = net.channel.log[0]
    notice = net.channel.log[3]
    assert notice.frame.is_blacklist_notice
    assert 1000 in near.blacklist and 1000 not in far.blacklist
    assert far.nav_log[0][1] == rts.tx_end + 32767
    assert all(exp >= rts.tx_end + 32767 for t, exp, _ in far.nav_log if t < notice.tx_end + 1000)
    assert any(exp == notice.tx_end for _, exp, _ in near.nav_log)
