"""Density sweeps, CSV output and plot-script generation."""
import csv
import io
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .metrics import detection_counts, mean_latency_us, throughput_bps
from .scenario import build_network, parse_mode

SCHEMA_VERSION = 1
COLUMNS = ("node_count", "defense_mode", "detector_variant", "seed", "replication", "throughput_bps",
           "mean_latency_us", "tpr", "fpr", "queue_drops", "retry_drops", "attacker_hold_us",
           "notices_sent")
SUMMARY_COLUMNS = ("node_count", "defense_mode", "runs", "throughput_mean", "throughput_std",
                   "latency_mean", "latency_std")


class SweepError(RuntimeError):
    def __init__(self, cell, cause):
        super().__init__(f"run failed at node_count={cell[0]} mode={cell[1]} replication={cell[2]}: {cause!r}")
        self.cell = cell


def replication_seed(master_seed, replication):
    """Seed for one replication; shared by every density and mode so their runs pair up."""
    ss = np.random.SeedSequence([int(master_seed), int(replication)])
    return int(ss.generate_state(1, np.uint32)[0])


@dataclass(frozen=True)
class RunRow:
    node_count: int
    defense_mode: str
    detector_variant: str
    seed: int
    replication: int
    throughput_bps: float
    mean_latency_us: float
    tpr: float
    fpr: float
    queue_drops: int
    retry_drops: int
    attacker_hold_us: int
    notices_sent: int

    def as_csv(self):
        return [str(self.node_count), self.defense_mode, self.detector_variant, str(self.seed),
                str(self.replication), _f(self.throughput_bps), _f(self.mean_latency_us), _f(self.tpr, 6),
                _f(self.fpr, 6), str(self.queue_drops), str(self.retry_drops), str(self.attacker_hold_us),
                str(self.notices_sent)]


def _f(v, digits=3):
    return "" if v is None else f"{v:.{digits}f}"


def _opt_float(s):
    return None if s == "" else float(s)


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    scenario_ini: str = ""
    seeds: dict = field(default_factory=dict)

    def modes(self):
        return list(dict.fromkeys(r.defense_mode for r in self.rows))

    def summary(self):
        groups = {}
        for r in self.rows:
            groups.setdefault((r.node_count, r.defense_mode), []).append(r)
        out = []
        for (n, mode), rows in groups.items():
            thr = [r.throughput_bps for r in rows]
            lat = [r.mean_latency_us for r in rows if r.mean_latency_us is not None]
            out.append({
                "node_count": n, "defense_mode": mode, "runs": len(rows),
                "throughput_mean": statistics.fmean(thr),
                "throughput_std": statistics.stdev(thr) if len(thr) > 1 else None,
                "latency_mean": statistics.fmean(lat) if lat else None,
                "latency_std": statistics.stdev(lat) if len(lat) > 1 else None,
            })
        return out

    def to_csv(self):
        buf = io.StringIO()
        buf.write(f"# rrdsim sweep results, schema {SCHEMA_VERSION}\n")
        for line in self.scenario_ini.splitlines():
            buf.write(f"# scenario | {line}\n".rstrip() + "\n")
        for rep, seed in sorted(self.seeds.items()):
            buf.write(f"# seed replication={rep} seed={seed}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow(r.as_csv())
        return buf.getvalue()

    def summary_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for s in self.summary():
            w.writerow([s["node_count"], s["defense_mode"], s["runs"], _f(s["throughput_mean"]),
                        _f(s["throughput_std"]), _f(s["latency_mean"]), _f(s["latency_std"])])
        return buf.getvalue()

    def write(self, outdir):
        os.makedirs(outdir, exist_ok=True)
        results = os.path.join(outdir, "results.csv")
        with open(results, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())
        with open(os.path.join(outdir, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(self.summary_csv())
        return results


def read_csv(path):
    comments, body = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            (comments if line.startswith("#") else body).append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if header is None or tuple(header) != COLUMNS:
        raise ValueError(f"{path}: header does not match schema {SCHEMA_VERSION}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        rows.append(RunRow(int(rec[0]), rec[1], rec[2], int(rec[3]), int(rec[4]), float(rec[5]),
                           _opt_float(rec[6]), _opt_float(rec[7]), _opt_float(rec[8]), int(rec[9]),
                           int(rec[10]), int(rec[11]), int(rec[12])))
    ini = "\n".join(c[len("# scenario | "):].rstrip("\n") for c in comments if c.startswith("# scenario |"))
    return SweepResult(rows, ini)


def run_point(scenario, node_count, mode, seed, trace=False, variant=None):
    """Build and run one (density, mode, seed) cell; returns (network, ledger)."""
    net = build_network(scenario, node_count, mode, seed, trace=trace, variant=variant)
    ledger = net.run_seconds(scenario.scenario.run_seconds)
    return net, ledger


def _row(scenario, node_count, mode, seed, replication):
    _, led = run_point(scenario, node_count, mode, seed)
    det = detection_counts(led)
    honest = led.honest
    return RunRow(
        node_count=node_count, defense_mode=mode, detector_variant=scenario.defense.variant, seed=seed,
        replication=replication, throughput_bps=throughput_bps(led, scenario.scenario.run_seconds),
        mean_latency_us=mean_latency_us(led), tpr=det["tpr"],
        fpr=det["fpr"] if parse_mode(mode)[1] != "off" else None,
        queue_drops=sum(v for k, v in led.queue_drops.items() if k in honest),
        retry_drops=sum(v for k, v in led.retry_drops.items() if k in honest),
        attacker_hold_us=led.attacker_hold_us, notices_sent=led.notices_sent)


def _cell(args):
    scenario, n, mode, seed, rep = args
    try:
        return _row(scenario, n, mode, seed, rep)
    except Exception as e:  # noqa: BLE001 - reported with the failing cell
        raise SweepError((n, mode, rep), e) from e


def run_sweep(scenario, densities=None, modes=None, replications=None, seed=None, jobs=1, progress=None):
    densities = tuple(scenario.sweep.densities if densities is None else densities)
    modes = tuple(scenario.sweep.modes if modes is None else modes)
    replications = scenario.scenario.replications if replications is None else replications
    master = scenario.scenario.seed if seed is None else seed
    for m in modes:
        parse_mode(m)
    seeds = {r: replication_seed(master, r) for r in range(replications)}
    cells = [(scenario, n, mode, seeds[r], r) for n in densities for mode in modes for r in range(replications)]
    rows = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for row in pool.map(_cell, cells):
                rows.append(row)
                if progress:
                    progress(row)
    else:
        for c in cells:
            row = _cell(c)
            rows.append(row)
            if progress:
                progress(row)
    return SweepResult(rows, scenario.to_ini(), seeds)


_PLOT_TEMPLATE = '''"""{title} from an rrdsim sweep CSV.

Usage: python {name} [results.csv] [output.png]
Averages every replication per (node_count, defense_mode) series.
"""
import csv
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = {csv_path!r}
COLUMN = {column!r}
YLABEL = {ylabel!r}
SCALE = {scale!r}
SERIES = {series!r}


def load(path):
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    data = defaultdict(lambda: defaultdict(list))
    for rec in csv.DictReader(lines):
        if rec[COLUMN] != "":
            data[rec["defense_mode"]][int(rec["node_count"])].append(float(rec[COLUMN]) * SCALE)
    return data


def main(argv):
    path = argv[1] if len(argv) > 1 else CSV_PATH
    out = argv[2] if len(argv) > 2 else {png!r}
    data = load(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for mode in SERIES:
        pts = sorted((n, sum(v) / len(v)) for n, v in data.get(mode, {{}}).items())
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=mode)
    ax.set_xlabel("number of nodes")
    ax.set_ylabel(YLABEL)
    ax.set_title({title!r})
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main(sys.argv)
'''


def emit_plots(sweep, outdir, csv_path="results.csv"):
    """Write latency- and throughput-vs-density plot scripts; returns their paths."""
    if not sweep.rows:
        raise ValueError("refusing to plot an empty sweep")
    os.makedirs(outdir, exist_ok=True)
    series = sweep.modes()
    specs = [
        ("latency_vs_density.py", "Latency vs density", "mean_latency_us", "mean latency (ms)", 1e-3),
        ("throughput_vs_density.py", "Throughput vs density", "throughput_bps", "throughput (kbit/s)", 1e-3),
    ]
    paths = []
    for name, title, column, ylabel, scale in specs:
        path = os.path.join(outdir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(_PLOT_TEMPLATE.format(title=title, name=name, csv_path=csv_path, column=column,
                                           ylabel=ylabel, scale=scale, series=series,
                                           png=name.replace(".py", ".png")))
        paths.append(path)
    return paths
