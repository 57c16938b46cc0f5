"""
Repairing a CMG with a shared PAC weight
========================================

When every case in a CMG carries the same PAC weight, Model 1 gives every
case the same cost. Model 2 redistributes the CMG's weight sum in
proportion to each case's RIW.
"""

from casecost import CostProcess, SyntheticSpec, evaluate_model, generate_synthetic
from casecost.models import compute_pac_mod

spec = SyntheticSpec(
    n_cmgs=1,
    cases_per_cmg_range=(9, 9),
    cost_process=CostProcess.PROPORTIONAL_TO_RIW,
    degenerate_pac_fraction=1.0,
    degenerate_both_fraction=0.0,
    seed=2,
)
ds, truth = generate_synthetic(spec)
weights = compute_pac_mod(ds.cases)

print(f"{'case':>8} {'pac':>7} {'riw':>7} {'pac_mod':>8} {'true cost':>10}")
for c in ds.cases:
    print(f"{c.case_id:>8} {c.pac_riw:7.4f} {c.riw:7.4f} {weights[c.case_id]:8.4f} {truth[c.case_id]:10.2f}")

print(f"\n{'model':>6} {'e_total':>10} {'e_min':>10} {'e_max':>10}")
for model in ("m1", "m2"):
    (e,) = evaluate_model(model, ds)[1]
    print(f"{model.upper():>6} {e.e_total:10.2f} {e.e_min:10.2f} {e.e_max:10.2f}")
