"""
The complex feed-forward ansatz
===============================

Evaluate log-amplitudes over the whole sector and compare the analytic
gradient against a finite difference.
"""

import numpy as np

from syknqs import Architecture, build_problem, gradient, init_params, log_amplitudes, num_params
from syknqs.nqs import NetworkParams

problem = build_problem("syk", 8, coupling_seed=0)
arch = Architecture(L=8, alpha=2, mu=2)
print("parameters:", num_params(arch), "  sector dimension:", problem.dim)

params = init_params(arch, seed=0)
logpsi = log_amplitudes(params, problem.basis)
psi = np.exp(logpsi - logpsi.real.max())
print("norm of unnormalised psi:", np.linalg.norm(psi))

# %%
# Both losses are exact sums over the sector.
for kind in ("overlap", "voe"):
    loss = problem.objective(kind).evaluate(params)
    print(f"{kind:8s} loss = {loss.value:+.6f}   delta_E = {loss.delta_e:.4f}")

# %%
# Gradients come back as (d/dRe, d/dIm) pairs, interleaved.
obj = problem.objective("voe")
g = gradient(params, obj)
x = params.real_vector().copy()
i, h = 5, 1e-5
xp, xm = x.copy(), x.copy()
xp[i] += h
xm[i] -= h
fd = (obj.evaluate(NetworkParams.from_real_vector(arch, xp)).value
      - obj.evaluate(NetworkParams.from_real_vector(arch, xm)).value) / (2 * h)
print(f"component {i}: analytic {g[i]:.10f}, finite difference {fd:.10f}")
