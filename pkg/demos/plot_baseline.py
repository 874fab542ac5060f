"""
Optimal treatment at the baseline scenario
==========================================

Start from the endemic equilibrium at beta = 100 and solve for the
treatment schedule that balances infectious prevalence against the
cost of treating early and persistent latents.
"""

import numpy as np

import tbctl

# all rates per year; only beta has no default
params = tbctl.Parameters(beta=100.0)
print("R0 =", round(tbctl.basic_reproduction_number(params), 3))

eq = tbctl.endemic_equilibrium(params)
print("equilibrium (S, L1, I, L2, R):", ", ".join(f"{v:.1f}" for v in eq.state))

###############################################################################
# Forward-backward sweep from the equilibrium

sol = tbctl.solve_fbs(params, eq.state)
print("converged in", sol.iterations, "iterations, J =", round(sol.objective, 2))

t = sol.grid.times
u = sol.control_traj.values
i = sol.state_traj.values[:, 2]
for year in range(6):
    k = np.searchsorted(t, year)
    print(f"t={year}  u1={u[k, 0]:.3f}  u2={u[k, 1]:.3f}  I={i[k]:.2f}")

###############################################################################
# Summary measures

m = tbctl.summarize(sol)
print(f"cases averted {m.cases_averted:.1f}, total cost {m.total_cost:.0f}, ACER {m.acer:.1f}")
print(f"u1 leaves its bound at {m.tr1:.2f} yr, u2 at {m.tr2:.2f} yr")
