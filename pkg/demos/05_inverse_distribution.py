"""
Where do the inverses land?
===========================

Count n <= N whose inverse of floor(n^c) mod p lies in an interval, measure
the star discrepancy of the normalised inverses, and compare it with the
Erdos-Turan bound built from the same exponential sums.
"""

from kloostlab import (
    PsiParams, ResidueInterval, SequenceSpec, count_inverses, erdos_turan_bound,
    existence_search, existence_xi, inverse_points, long_sum, star_discrepancy,
)

spec = SequenceSpec.power(1.2)
p, N = 10007, 10_000

iv = ResidueInterval(K=0, H=5000)
res = count_inverses(spec, N, p, iv)
print(f"count = {res.count}, HN/p = {res.main_term:.1f}, (H-1)N/p = {res.main_term_members:.1f},"
      f" skipped = {res.skipped}")

inv, ok = inverse_points(spec, 2000, p)
pts = inv[ok] / p
d = star_discrepancy(pts)
S = [long_sum(spec, PsiParams(0, k, p), 2000).value for k in range(1, 51)]
print(f"star discrepancy {d:.4f} <= Erdos-Turan bound {erdos_turan_bound(S, len(pts), 50):.4f}")

print("admissible xi for kappa=0.8:", existence_xi(0.8))
hit = existence_search(spec, 101, 101, ResidueInterval(10, 80), xi=0.1)
print("first n with inverse in [11, 89] mod 101:", hit.witness, " hypotheses hold:", hit.hypotheses_hold)
