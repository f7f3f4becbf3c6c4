"""Retained rank of Hopfield couplings as the truncation level varies.

A Hopfield matrix built from d random patterns is a rank-d Gram matrix,
so the shifted spectrum has d meaningful directions and n-d numerical
zeros.  Sweeping the truncation threshold shows where the meaningful
spectrum ends, and the enumeration certificate bounds what a coarser
truncation costs in log Z and KL.
"""
import numpy as np

import pottsmc as pm

N, BETA = 256, 1.0

print("== retained rank k vs threshold (n=%d) ==" % N)
print("%6s" % "d", *("%10.0e" % e for e in (1e-6, 1e-10, 1e-12, 1e-15)))
for d in (1, 5, 25):
    coup = pm.hopfield(N, d, pm.RngStream(d, 0))
    ks = [pm.precompute_lowrank(coup, BETA, eps).k
          for eps in (1e-6, 1e-10, 1e-12, 1e-15)]
    print("%6d" % d, *("%10d" % k for k in ks))

print()
print("== what lives in the spectrum (d=5) ==")
coup = pm.hopfield(N, 5, pm.RngStream(5, 0))
lam = np.linalg.eigvalsh(coup.entries)[::-1]
shifted = lam + abs(lam.min())
print("top 7 shifted eigenvalues:", " ".join("%.3e" % v for v in shifted[:7]))
print("largest discarded value:  %.3e" % shifted[7])

print()
print("== certificate on an enumerable instance (n=8, d=2, q=3) ==")
model = pm.PottsModel(pm.hopfield(8, 2, pm.RngStream(7, 0)), BETA, 3)
print("%8s %4s %12s %12s %12s %12s" % ("eps", "k", "|dlogZ|", "bound",
                                        "maxKL", "bound"))
for eps in (1e-10, 0.01, 0.05, 0.2, 1.0):
    cert = pm.lemma1_certificate(model, eps)
    print("%8.0e %4d %12.3e %12.3e %12.3e %12.3e"
          % (eps, cert.k, abs(cert.delta_log_z), cert.bound_log_z,
             max(cert.kl_pq, cert.kl_qp), cert.bound_kl))

print()
print("== low-rank chain tracks its truncated target (n=6, d=2) ==")
small_coup = pm.hopfield(6, 2, pm.RngStream(3, 0))
model = pm.PottsModel(small_coup, BETA, 3)
trunc, lr = pm.truncated_model(model, 1e-10)
from pottsmc.model import phi_table
target = float(pm.exact_summary(trunc, want_pmf=True).pmf @ phi_table(model))
tr = pm.run_chain(pm.SamplerKind.LOWRANK_AG_GIBBS, model, "random",
                  m=40000, burn_in=2000, stream=pm.RngStream(11, 1))
print("k = %d, E_Q[phi_A] = %.5f, chain mean = %.5f"
      % (lr.k, target, tr.phi_series.mean()))
