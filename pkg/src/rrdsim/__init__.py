"""Discrete-event 802.11 DCF simulator for RTS duration-inflation attacks and
receiver-side re-evaluation defenses."""
from .adversary import AttackProfile, Attacker, forge_rts
from .defense import DetectorConfig, Verdict, detect_basic, detect_improved
from .engine import Simulator
from .frames import Frame, FrameKind, TimingConfig
from .metrics import MetricsLedger, detection_counts, mean_latency_us, throughput_bps
from .network import Network
from .phy import PhyConfig, rx_power_dbm
from .scenario import Scenario, ScenarioError, build_network, load_scenario
from .sweep import emit_plots, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AttackProfile", "Attacker", "DetectorConfig", "Frame", "FrameKind", "MetricsLedger", "Network",
    "PhyConfig", "Scenario", "ScenarioError", "Simulator", "TimingConfig", "Verdict", "build_network",
    "detect_basic", "detect_improved", "detection_counts", "emit_plots", "forge_rts", "load_scenario",
    "mean_latency_us", "rx_power_dbm", "run_sweep", "throughput_bps",
]
