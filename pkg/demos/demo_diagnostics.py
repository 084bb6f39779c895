"""Inspect a design matrix before trusting recovery guarantees on it.

The restricted-isometry report measures how far support-restricted Gram
matrices deviate from the identity; the noise statistic measures the worst
correlated-noise mass over admissible supports and is compared to its
high-probability envelope.
"""

import numpy as np

from doublesparse import diagnostics, simulate, stream

m, d, s, s0 = 6, 5, 2, 2
n = 120
p = m * d
rng = stream(3)

# a scaled identity design is a perfect isometry
X_id = simulate.gen_design(p, p, "identity_scaled", rng)
rep = diagnostics.dsrip(X_id, m, d, s, s0)
print(f"identity design: delta = {rep.delta_s} (u = {rep.u_s}, l = {rep.l_s})")

# a random design is close but not perfect
X = simulate.gen_design(n, p, "gaussian_iid", rng)
rep = diagnostics.dsrip(X, m, d, s, s0)
print(f"gaussian design: delta = {rep.delta_s:.3f} "
      f"(u = {rep.u_s:.1f}, l = {rep.l_s:.1f})")

# sampled supports give a cheaper lower bound on delta
mc = diagnostics.dsrip(X, m, d, s, s0, method="monte_carlo", trials=200, seed=1)
print(f"monte-carlo (200 supports): delta >= {mc.delta_s:.3f}")

# doubled-budget extreme singular values, as used in error analyses
tau_u, tau_l = diagnostics.sparse_eigen_constants(X, m, d, 2 * s, 2 * s0)
print(f"doubled-budget constants: tau_u = {tau_u:.3f}, tau_l = {tau_l:.3f}, "
      f"1 - (tau_l/tau_u)^2 = {1 - (tau_l / tau_u) ** 2:.3f}")

# worst-case correlated noise over supports vs its envelope
sigma = 1.0
bound = diagnostics.noise_event_bound(sigma, n, p, d, s, s0)
stats = []
for _ in range(200):
    xi = rng.normal(0.0, sigma, size=n)
    stats.append(diagnostics.noise_event_stat(X, xi, m, d, s, s0))
stats = np.array(stats)
print(f"\nnoise statistic over 200 draws: median {np.median(stats):.4f}, "
      f"max {stats.max():.4f}, envelope {bound:.4f}")
print(f"fraction exceeding the envelope: {np.mean(stats > bound):.3f}")
