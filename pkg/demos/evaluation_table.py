"""
Comparing models against benchmark costs
========================================

Per-CMG errors, bucketed by relative total-cost error, for all five
models and the hybrid.
"""

from casecost import ModelConfig, ModelId, SyntheticSpec, evaluate_model, generate_synthetic
from casecost.reports import format_table

ds, _ = generate_synthetic(SyntheticSpec(seed=42, noise=0.2))
print(f"{len(ds.cases)} cases, {len(ds.benchmark)} CMGs\n")

config = ModelConfig(ModelId.M5, 1.3, 0.5, 2.85)
tables = [evaluate_model(m, ds, config)[2] for m in ("m1", "m2", "m3", "m4", "m5", "hybrid")]
print(format_table(tables))

# The worst CMGs under Model 1, by relative total error.
_, errors, _ = evaluate_model("m1", ds)
worst = sorted(errors, key=lambda e: -abs(e.rel_total))[:5]
print("\nlargest M1 misses:")
for e in worst:
    print(f"  CMG {e.cmg}: rel {e.rel_total:+.1%}, e_min {e.e_min:+,.0f}, e_max {e.e_max:+,.0f}")
