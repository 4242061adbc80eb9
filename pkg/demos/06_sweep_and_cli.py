"""
Width sweeps and the command line
=================================

A sweep trains every (width, seed) pair and reports the smallest width
whose best run reaches the threshold.  The same run is available from
the shell as ``syknqs sweep``.
"""

import tempfile
from pathlib import Path

from syknqs import TrainSettings, build_problem, scaling_sweep, write_records_csv
from syknqs.cli import main

settings = TrainSettings(t_max=5000, truncation=False)
results = scaling_sweep([build_problem("syk", 8, 0)], "alpha", [1, 2], seeds=[0, 1], settings=settings)
for r in results:
    print(f"L={r.L}: alpha_min={r.value_min}, N_par={r.n_par}, dim H={r.dim_h}")

out = Path(tempfile.mkdtemp())
print((write_records_csv(results, out / "sweep.csv")).read_text())

# %%
# The CLI persists the ground state once; training and compression reuse it.
args = ["--model", "syk", "--L", "8", "--seed", "0", "--output-dir", str(out)]
main(["ed", *args])
main(["train", *args, "--set", "t_max=3000"])
main(["compress", *args, "--set", "rel_thresholds=[0.0, 0.05]"])
print(sorted(p.name for p in out.iterdir()))
