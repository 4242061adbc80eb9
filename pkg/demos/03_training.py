"""
Supervised training to the ground state
=======================================

Train on the overlap loss and watch the relative energy error.  The
Heisenberg chain needs only one hidden unit per site; SYK needs more
parameters than there are basis states.
"""

from syknqs import Architecture, TrainSettings, build_problem, num_params, train

settings = TrainSettings(t_max=20_000, delta_t=10_000, window=1001, max_steps=40_000)

heis = build_problem("heisenberg", 8)
rec = train(heis.objective("overlap"), Architecture(8, 1, 2), 0, settings)
print(f"Heisenberg L=8 alpha=1: {rec.verdict} at step {rec.best_step}, delta_E = {rec.best_delta_e:.2e}")

# %%
syk = build_problem("syk", 8, coupling_seed=0)
for alpha in (1, 2):
    arch = Architecture(8, alpha, 2)
    rec = train(syk.objective("overlap"), arch, 0, settings)
    print(f"SYK L=8 alpha={alpha} (N_par={num_params(arch)}, dim={syk.dim}): "
          f"{rec.verdict} after {rec.n_steps} steps, delta_E = {rec.best_delta_e:.2e}")

# %%
# The energy loss works too but is slower to converge.
rec = train(syk.objective("voe"), Architecture(8, 2, 2), 0,
            TrainSettings(loss="voe", t_max=3000, truncation=False))
print(f"voe training: best delta_E = {rec.best_delta_e:.2e}")
