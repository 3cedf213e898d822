# A small density sweep written to ./demo_results, plus the two plot scripts.
# The full study is `rrdsim simulate scenarios/loaded.ini`.
import subprocess
import sys

from rrdsim.scenario import Scenario
from rrdsim.sweep import emit_plots, run_sweep

sc = Scenario().replace("scenario", run_seconds=5).replace("traffic", mean_interarrival_ms=20)
res = run_sweep(sc, densities=(2, 5, 10, 15), replications=2)
res.write("demo_results")
paths = emit_plots(res, "demo_results")

for s in res.summary():
    print("n=%2d %-18s throughput %7.0f kbit/s  latency %8.1f ms" % (
        s["node_count"], s["defense_mode"], s["throughput_mean"] / 1e3, s["latency_mean"] / 1e3))

try:
    import matplotlib  # noqa: F401
except ImportError:
    print("matplotlib not installed; plot scripts written but not run")
else:
    for p in paths:
        subprocess.run([sys.executable, p.split("/")[-1]], cwd="demo_results", check=True)
