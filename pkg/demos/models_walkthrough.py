"""
Case cost estimates, model by model
===================================

Five ways of turning case records into dollar estimates, applied to one
small generated hospital.
"""

from casecost import ModelConfig, ModelId, SyntheticSpec, generate_synthetic
from casecost.aggregation import aggregate
from casecost.models import estimate

# A small dataset: 12 CMGs, a mix of weight-driven and stay-driven costs.
ds, truth = generate_synthetic(SyntheticSpec(n_cmgs=12, cases_per_cmg_range=(3, 15), seed=7, noise=0.1))
print(f"{len(ds.cases)} cases in {len(ds.groups)} CMGs, cpwc={ds.params.cpwc}, cpd={ds.params.cpd_total}")

# One case, every model. M3, M4 and M5 are rescaled so the hospital-wide
# total matches the benchmark; M1 and M2 are not.
case = ds.cases[0]
print(f"\ncase {case.case_id} (CMG {case.cmg}): pac={case.pac_riw} riw={case.riw} "
      f"los={case.los_total} alc={case.los_alc} sc_hours={case.sc_hours}")
config = ModelConfig(ModelId.M5, 1.3, 0.5, 2.85)
for model in ("m1", "m2", "m3", "m4", "m5"):
    est = {e.case_id: e.cce for e in estimate(model, ds, config)}
    print(f"  {model.upper()}: {est[case.case_id]:10.2f}")
print(f"  true: {truth[case.case_id]:10.2f}")

# Hospital-wide totals.
bench = sum(s.total for s in ds.benchmark.values())
print(f"\nbenchmark total {bench:,.2f}")
for model in ("m1", "m2", "m3", "m4", "m5"):
    total = sum(e.cce for e in estimate(model, ds, config))
    print(f"  {model.upper()} total {total:,.2f}")

# Per-CMG statistics of one model next to the benchmark.
stats = aggregate(estimate("m5", ds, config))
cmg = sorted(stats)[0]
print(f"\nCMG {cmg}: estimated {stats[cmg]}")
print(f"CMG {cmg}: actual    {ds.benchmark[cmg]}")
