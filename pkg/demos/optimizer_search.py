"""
Tuning the stay-type coefficients
=================================

Grid search over (k1, k2, k3). Candidates are ranked by the share of CMGs
with large errors (fewer is better), then very large errors, then small
errors (more is better).
"""

from casecost import CoefRange, CostProcess, GridSpec, SyntheticSpec, generate_synthetic, grid_search

# Costs generated from the stay-type formula with known coefficients.
true_k = (1.3, 0.5, 2.85)
ds, _ = generate_synthetic(SyntheticSpec(cost_process=CostProcess.STAY_TYPE, stay_k=true_k, seed=3))

grid = GridSpec(CoefRange(1.0, 2.0, 0.1), CoefRange(0.3, 0.7, 0.1), CoefRange(2.0, 3.0, 0.05))
result = grid_search(ds, grid, keep_trace=True)
print(f"searched {result.n_points} points")
print(f"generating k = {true_k}, recovered k = {result.k}")
print(f"criteria: {result.criteria}")

# With noisy costs the optimum moves and ties become common.
noisy, _ = generate_synthetic(SyntheticSpec(cost_process=CostProcess.STAY_TYPE, stay_k=true_k, seed=3, noise=0.3))
r = grid_search(noisy, grid)
print(f"\nwith 30% log-normal noise: best k = {r.k}, criteria {r.criteria}")

# Trace rows come in grid order: k1 outermost, k3 innermost.
for t in result.trace[:3]:
    print(t)
