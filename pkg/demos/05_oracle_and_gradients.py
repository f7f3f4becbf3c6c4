"""Exact enumeration oracle and the auxiliary marginal's analytic gradient.

Small systems admit full enumeration of the q^n configurations, which gives
log Z, E[phi], and the exact pmf to validate every sampler against.  The
auxiliary-Gaussian marginal log-density also has a closed-form gradient;
central differences confirm it to near machine precision.
"""
import numpy as np

import pottsmc as pm

print("== enumeration oracle: 3x3 lattice, q=2 ==")
coup = pm.lattice_2d(3)
for beta in (0.2, 0.44, 0.9):
    s = pm.exact_summary(pm.PottsModel(coup, beta, 2))
    print("beta=%.2f: log Z = %10.5f, E[phi] = %8.5f"
          % (beta, s.log_partition, s.mean_phi))

print()
print("== the pmf orders configurations like an odometer ==")
model = pm.PottsModel(pm.curie_weiss(4), 0.8, 2)
s = pm.exact_summary(model, want_pmf=True)
best = int(np.argmax(s.pmf))
digits = [(best // 2 ** (3 - i)) % 2 for i in range(4)]
print("pmf sums to %.12f; most likely index %d = states %s (prob %.4f)"
      % (s.pmf.sum(), best, digits, s.pmf[best]))

print()
print("== analytic gradient vs central differences ==")
model = pm.PottsModel(pm.hopfield(6, 3, pm.RngStream(12, 0)), 0.9, 3)
full = pm.precompute_ag(model.coupling, model.beta)
low = pm.precompute_lowrank(model.coupling, model.beta, 1e-10)
rng = np.random.default_rng(5)
h = 1e-6
for label, pre, cols in (("full (q x n)", full, model.n),
                         ("low-rank (q x k)", low, low.k)):
    worst = 0.0
    for _ in range(10):
        z = rng.standard_normal((model.q, cols))
        _, grad = pm.marginal_z_logdensity(pre, z)
        num = np.empty_like(z)
        for idx in np.ndindex(z.shape):
            zp, zm = z.copy(), z.copy()
            zp[idx] += h
            zm[idx] -= h
            fp, _ = pm.marginal_z_logdensity(pre, zp)
            fm, _ = pm.marginal_z_logdensity(pre, zm)
            num[idx] = (fp - fm) / (2 * h)
        rel = np.abs(grad - num).max() / max(np.abs(grad).max(), 1.0)
        worst = max(worst, rel)
    print("%-18s worst relative error over 10 points: %.2e" % (label, worst))
