"""
Horizon and weight sensitivity
==============================

Longer programmes avert more cases but prevalence creeps back once
treatment is released. Dearer controls lower the terminal efficacy.
"""

import tbctl

base = tbctl.ScenarioSpec(tbctl.Parameters(beta=100.0))

for r in tbctl.sweep_tf([5, 10, 20], base):
    i = r.solution.state_traj.values[:, 2]
    print(f"t_f={r.spec.params.t_f:g}  A={r.measures.cases_averted:.1f}  "
          f"I(t_f)={i[-1]:.2f}  min I={i.min():.2f}")

###############################################################################
# W1 = W2 sweep with W0 fixed at 50

for r in tbctl.sweep_weights([(50, w, w) for w in (5, 50, 500)], base):
    e = r.measures.efficacy_traj.values[-1, 0]
    print(f"W1=W2={r.spec.params.w1:g}  E(t_f)={e:.3f}")
