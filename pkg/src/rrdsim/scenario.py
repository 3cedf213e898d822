"""Scenario files (INI), validation and single-run construction.

A scenario file is an INI document; every section and key is optional and
unknown ones are rejected. An empty file gives the reference setup::

    [scenario]
    node_count = 25
    run_seconds = 500
    seed = 1
    replications = 5

    [traffic]
    model = poisson          ; or saturation
    mean_interarrival_ms = 100

    [attacker]
    mode = inflate           ; inflate | chain | flood

See ``scenarios/reference.ini`` for the full key list.
"""
import configparser
import dataclasses
import math
import os
from dataclasses import dataclass, field

from .adversary import AttackProfile
from .defense import MODES as DEFENSE_MODES, VARIANTS, DetectorConfig
from .frames import MAX_DURATION_US, TimingConfig, max_honest_payload_bits
from .network import AP_ADDRESS, Network
from .phy import PhyConfig, rx_power_dbm

MIN_NODES, MAX_NODES = 2, 25


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class TrafficConfig:
    model: str = "poisson"
    mean_interarrival_ms: float = 100.0
    payload_bytes: int = 1024


@dataclass(frozen=True)
class MacConfig:
    queue_capacity: int = 14
    cw_min: int = 31
    cw_max: int = 1023
    retry_limit: int = 7


@dataclass(frozen=True)
class TopologyConfig:
    width_m: float = 200.0
    height_m: float = 200.0


@dataclass(frozen=True)
class DefenseConfig:
    variant: str = "basic"
    slack_us: int = 0


@dataclass(frozen=True)
class AttackerConfig:
    count: int = 1
    mode: str = "inflate"
    claimed_duration_us: int = MAX_DURATION_US
    actual_payload_bits: int = 8192
    chain_gap_us: int = 0
    flood_interval_us: int = 10_000
    flood_target: int = AP_ADDRESS
    data_duration_override_us: int = None

    def profile(self):
        return AttackProfile(self.mode, self.claimed_duration_us, self.actual_payload_bits,
                             self.chain_gap_us, self.flood_interval_us, self.flood_target,
                             self.data_duration_override_us)


@dataclass(frozen=True)
class SweepConfig:
    densities: tuple = tuple(range(MIN_NODES, MAX_NODES + 1))
    modes: tuple = ("no-attack", "attack-undefended", "attack-phase2")


@dataclass(frozen=True)
class RunConfig:
    node_count: int = 25
    run_seconds: float = 500.0
    seed: int = 1
    replications: int = 5
    allow_density_override: bool = False


@dataclass(frozen=True)
class Scenario:
    scenario: RunConfig = field(default_factory=RunConfig)
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    timing: TimingConfig = field(default_factory=TimingConfig)
    phy: PhyConfig = field(default_factory=PhyConfig)
    mac: MacConfig = field(default_factory=MacConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    defense: DefenseConfig = field(default_factory=DefenseConfig)
    attacker: AttackerConfig = field(default_factory=AttackerConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def replace(self, section, **changes):
        return dataclasses.replace(self, **{section: dataclasses.replace(getattr(self, section), **changes)})

    def to_ini(self):
        lines = []
        for sec in dataclasses.fields(self):
            lines.append(f"[{sec.name}]")
            obj = getattr(self, sec.name)
            for f in dataclasses.fields(obj):
                lines.append(f"{f.name} = {_format_value(getattr(obj, f.name))}")
            lines.append("")
        return "\n".join(lines)


# values taken from the published evaluation setup; everything else is a design default
PUBLISHED = {
    "scenario.node_count": "25 source nodes plus one AP",
    "scenario.run_seconds": "500 s per run",
    "topology.width_m": "200x200 m playground",
    "topology.height_m": "200x200 m playground",
    "phy.path_loss_alpha": "path loss coefficient 4",
    "phy.carrier_frequency_hz": "2.412 GHz carrier",
    "phy.tx_power_mw": "100 mW max transmit power",
    "phy.sensitivity_dbm": "-120 dBm attenuation threshold",
    "phy.thermal_noise_dbm": "-110 dBm thermal noise",
    "phy.neighborhood_max_age_s": "100 s neighbourhood max age (no effect here)",
    "timing.mac_header_bits": "272-bit MAC header",
    "timing.bitrate_bps": "1 Mbps basic bitrate",
    "timing.rts_cts_threshold_bytes": "400-byte RTS/CTS threshold",
    "mac.queue_capacity": "14-frame MAC queue",
    "traffic.payload_bytes": "1 KB payload",
    "attacker.count": "one malicious node",
    "attacker.claimed_duration_us": "32767 us duration-field ceiling",
}


def _format_value(v):
    if isinstance(v, tuple):
        return ", ".join(str(x) for x in v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def parse_densities(text):
    """``"2..25"``, ``"5,10,25"`` or a mix such as ``"2..5, 10"``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty density range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise ValueError("no densities given")
    return tuple(dict.fromkeys(out))


def parse_mode(label):
    """``no-attack[-<defense>]`` or ``attack-<undefended|detect-only|phase1|phase2>``
    -> (attack?, defense mode)."""
    if label == "no-attack":
        return False, "off"
    for prefix, attack in (("no-attack-", False), ("attack-", True)):
        if label.startswith(prefix):
            rest = label[len(prefix):]
            defense = "off" if rest == "undefended" else rest
            if defense in DEFENSE_MODES:
                return attack, defense
    raise ValueError(f"unknown mode {label!r}")


def _coerce(section, key, raw, default, annotation):
    where = f"{section}.{key}"
    raw = raw.strip()
    try:
        if key == "densities":
            return parse_densities(raw)
        if key == "modes":
            modes = tuple(m.strip() for m in raw.split(",") if m.strip())
            for m in modes:
                parse_mode(m)
            return modes
        if key == "flood_target":
            return AP_ADDRESS if raw.lower() == "ap" else int(raw)
        if isinstance(default, bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"expected a boolean, got {raw!r}")
        if default is None or annotation is int:
            if raw == "":
                return None
            return int(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError as e:
        raise ScenarioError(f"{where}: {e}") from None


def load_scenario(path):
    if not os.path.exists(path):
        raise ScenarioError(f"scenario file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario(text, source=str(path))


def parse_scenario(text, source="<string>"):
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None,
                                   default_section="__defaults__")
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as e:
        raise ScenarioError(f"cannot parse {source}: {e}") from None
    base = Scenario()
    sections = {f.name for f in dataclasses.fields(Scenario)}
    changes = {}
    for sec in cp.sections():
        if sec not in sections:
            raise ScenarioError(f"unknown section [{sec}] (known: {', '.join(sorted(sections))})")
        obj = getattr(base, sec)
        fields = {f.name: f for f in dataclasses.fields(obj)}
        kw = {}
        for key, raw in cp.items(sec):
            if key not in fields:
                raise ScenarioError(f"unknown key {sec}.{key}")
            kw[key] = _coerce(sec, key, raw, getattr(obj, key), fields[key].type)
        try:
            changes[sec] = dataclasses.replace(obj, **kw)
        except ValueError as e:
            raise ScenarioError(f"[{sec}]: {e}") from None
    scenario = dataclasses.replace(base, **changes)
    validate(scenario)
    return scenario


def validate(sc):
    """Raise ScenarioError naming the first offending key."""
    run = sc.scenario

    def check_density(n, key):
        if run.allow_density_override:
            if n < 1:
                raise ScenarioError(f"{key}={n}: need at least one source node")
        elif not MIN_NODES <= n <= MAX_NODES:
            raise ScenarioError(f"{key}={n}: outside {MIN_NODES}..{MAX_NODES} "
                                f"(set scenario.allow_density_override = true to go beyond)")

    check_density(run.node_count, "scenario.node_count")
    for n in sc.sweep.densities:
        check_density(n, "sweep.densities")
    if run.run_seconds <= 0:
        raise ScenarioError(f"scenario.run_seconds={run.run_seconds}: must be > 0")
    if run.replications < 1:
        raise ScenarioError(f"scenario.replications={run.replications}: must be >= 1")
    if not sc.sweep.modes:
        raise ScenarioError("sweep.modes: at least one mode is required")
    if sc.topology.width_m <= 0 or sc.topology.height_m <= 0:
        raise ScenarioError("topology.width_m/height_m: must be > 0")
    if sc.traffic.model not in ("poisson", "saturation"):
        raise ScenarioError(f"traffic.model={sc.traffic.model!r}: expected poisson or saturation")
    if sc.traffic.mean_interarrival_ms <= 0:
        raise ScenarioError("traffic.mean_interarrival_ms: must be > 0")
    limit = max_honest_payload_bits(sc.timing)
    if not 0 < sc.traffic.payload_bytes * 8 <= limit:
        raise ScenarioError(f"traffic.payload_bytes={sc.traffic.payload_bytes}: an honest RTS for it "
                            f"would exceed the {MAX_DURATION_US} us duration ceiling "
                            f"(max {limit // 8} bytes)")
    m = sc.mac
    if m.queue_capacity < 1 or m.retry_limit < 0 or not 0 < m.cw_min <= m.cw_max:
        raise ScenarioError("mac: need queue_capacity >= 1, retry_limit >= 0, 0 < cw_min <= cw_max")
    if sc.defense.variant not in VARIANTS:
        raise ScenarioError(f"defense.variant={sc.defense.variant!r}: expected one of {VARIANTS}")
    if not 0 <= sc.defense.slack_us < sc.timing.slot_us:
        raise ScenarioError(f"defense.slack_us={sc.defense.slack_us}: must be in [0, slot_us)")
    a = sc.attacker
    if a.claimed_duration_us > MAX_DURATION_US or a.claimed_duration_us < 0:
        raise ScenarioError(f"attacker.claimed_duration_us={a.claimed_duration_us}: exceeds the "
                            f"{MAX_DURATION_US} us duration-field ceiling")
    if a.count < 0:
        raise ScenarioError("attacker.count: must be >= 0")
    try:
        a.profile()
    except ValueError as e:
        raise ScenarioError(f"attacker: {e}") from None
    return sc


def banner(sc):
    """Every parameter with its value and where the value comes from."""
    lines = []
    for sec in dataclasses.fields(sc):
        obj = getattr(sc, sec.name)
        for f in dataclasses.fields(obj):
            key = f"{sec.name}.{f.name}"
            value = _format_value(getattr(obj, f.name))
            src = f"published: {PUBLISHED[key]}" if key in PUBLISHED else "design default"
            if getattr(obj, f.name) != getattr(getattr(Scenario(), sec.name), f.name):
                src = "overridden"
            lines.append(f"{key:40s} {value:>24s}  [{src}]")
    return "\n".join(lines)


def single_domain_guaranteed(sc):
    diag = math.hypot(sc.topology.width_m, sc.topology.height_m)
    p = rx_power_dbm(diag, sc.phy)
    return p >= sc.phy.sensitivity_dbm and p >= sc.phy.carrier_sense_dbm


def build_network(sc, node_count=None, mode="no-attack", seed=None, trace=False, variant=None):
    """One run's network: AP at the playground centre, ``node_count`` honest
    sources placed at random, plus the configured attackers when ``mode`` has
    an attack."""
    attack, defense_mode = parse_mode(mode)
    n = sc.scenario.node_count if node_count is None else node_count
    seed = sc.scenario.seed if seed is None else seed
    detector = DetectorConfig(variant or sc.defense.variant, sc.defense.slack_us, defense_mode)
    mac_kw = dict(queue_capacity=sc.mac.queue_capacity, cw_min=sc.mac.cw_min, cw_max=sc.mac.cw_max,
                  retry_limit=sc.mac.retry_limit)
    net = Network(seed, sc.timing, sc.phy, sc.topology.width_m, sc.topology.height_m, trace=trace)
    traffic = dict(traffic=sc.traffic.model, mean_interarrival_us=int(round(sc.traffic.mean_interarrival_ms * 1000)))
    net.add_ap(defense_mode=defense_mode, detector=detector, **mac_kw)
    for addr in range(1, n + 1):
        net.add_station(addr, payload_bits=sc.traffic.payload_bytes * 8, defense_mode=defense_mode,
                        detector=detector, **traffic, **mac_kw)
    if attack:
        for _ in range(sc.attacker.count):
            net.add_attacker(sc.attacker.profile(), **traffic, **mac_kw)
    if single_domain_guaranteed(sc) and not net.channel.single_collision_domain():
        raise AssertionError("playground fits inside radio range but the channel is partitioned")
    return net
