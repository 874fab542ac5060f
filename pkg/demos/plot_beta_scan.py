"""
Transmission sweep
==================

How effective is optimal treatment as transmission rises? Each cell
recomputes the equilibrium and the optimal schedule. Set
``TB_OPTCTL_WORKERS`` to spread cells over processes.
"""

import tbctl
from tbctl.scenarios import env_workers

workers = env_workers()
results = tbctl.sweep_beta(range(50, 301, 25), sigma_r_rule="sigma", workers=workers)

print(" beta   Ebar    tr1    tr2")
for r in results:
    m = r.measures
    print(f"{r.spec.params.beta:5g}  {m.effectiveness:.4f}  {m.tr1:.2f}  {m.tr2:.2f}")

###############################################################################
# Reinfection of treated individuals changes which control is worth paying for

for rule in ("sigma/2", "2sigma"):
    (r,) = tbctl.sweep_beta([100.0], sigma_r_rule=rule)
    print(rule, "max u2 =", round(float(r.solution.control_traj.values[:, 1].max()), 4))
