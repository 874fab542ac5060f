"""
Comparing intervention strategies
=================================

Treat both latent classes (a), only early latents (b) or only
persistent latents (c), then rank the strategies by incremental
cost-effectiveness.
"""

import tbctl

results, table = tbctl.strategy_comparison(beta=100.0, sigma_r=0.25)

for r in results:
    m = r.measures
    print(f"{r.spec.strategy}: A={m.cases_averted:6.1f}  TC={m.total_cost:8.1f}  ACER={m.acer:7.1f}")

###############################################################################
# Dominated strategies are dropped before computing ICERs

for row in table:
    if row.dominated_by:
        print(f"{row.label}: dominated by {row.dominated_by}")
    else:
        print(f"{row.label}: ICER {row.icer:.1f}")
