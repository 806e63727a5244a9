"""
Long and short sums over floor(n^c)
===================================

S = sum_{n <= N} psi(floor(n^c)).  Trivially |S| <= N; in the admissible
window the sum shows strong cancellation.
"""

import numpy as np

from kloostlab import (
    PsiParams, SequenceSpec, admissible_N_range, bound_ratio, c_constant,
    decomposition, long_sum, short_sum, theorem_delta,
)

spec = SequenceSpec.power(1.2)
p, eps, kappa = 10007, 0.01, 0.8
lo, hi = admissible_N_range(p, eps, kappa)
print(f"admissible N for p={p}: [{lo}, {hi}]")

delta = theorem_delta(eps, kappa)
rng = np.random.default_rng(0)
ratios = []
for _ in range(10):
    x, y = (int(v) for v in rng.integers(1, p, 2))
    rec = long_sum(spec, PsiParams(x, y, p), 2000, theory_delta=delta)
    ratios.append(rec.ratio)
    print(f"x={x:5d} y={y:5d}  |S|/N = {rec.ratio:.4f}  implied constant = {bound_ratio(rec, delta):.4f}")
print("square-root heuristic 1/sqrt(N) =", round(2000 ** -0.5, 4))

# a short interval (K, K+L]
rec = short_sum(spec, PsiParams(1, 1, p), K=1500, L=400)
print("short sum over (1500, 1900]:", rec.value, rec.n_terms, "terms")

# geometric cut points of (N p^-c, N]
d = decomposition(1000, p, c_constant(0.1, 0.8), 0.8)
print(f"R = {d.R} segments, Delta = {d.Delta:.3e}, last cut = {d.boundaries[-1]:.3f}")
