"""
Low-rank truncation of a trained network
========================================

Zero small singular values of each weight matrix and recompute the energy.
"""

from syknqs import Architecture, TrainSettings, build_problem, compression_scan, train

problem = build_problem("syk", 8, coupling_seed=0)
rec = train(problem.objective("overlap"), Architecture(8, 2, 2), 0,
            TrainSettings(t_max=3000, truncation=False, early_stop=False))
print(f"trained: delta_E = {rec.best_delta_e:.2e}")

for r in compression_scan(rec.best_params, [0.0, 0.01, 0.02, 0.05, 0.1, 0.2], problem.objective("voe")):
    print(f"lambda={r.rel_threshold:<5} q={r.q:.3f} ranks={r.ranks}  delta_E={r.delta_e_after:.2e}")
