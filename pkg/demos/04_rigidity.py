# Exact correlations inside a finite tower, with a rigorous error bound.

from fractions import Fraction

from stacklab import LevelSet, build_tower, cesaro_score, chacon_spec, correlation, odometer_spec, rigidity_scan

chacon = build_tower(chacon_spec(12))

# A = all of the stage-1 tower; shift by h_1 = 4
A = LevelSet.full(chacon, 1)
r = correlation(A, A, 4, 7, chacon)
print(f"value {float(r.value):.5f} +- {float(r.error_bound):.5f}, normalised lower bound {float(r.normalized_lower):.4f}")

# a smaller set: two adjacent levels at stage 1
B = LevelSet(1, [0, 1])
shifts = [chacon[k].h for k in range(1, 9)] + [1]
for hit in rigidity_scan(B, shifts, 12, chacon, Fraction(1, 2)):
    print(f"  shift {hit.n}: overlap >= {float(hit.lower):.3f}")

# Cesaro averages of |P(T^n A & A) - P(A)^2|: the odometer sits near 1/8, Chacon a little lower at this horizon
odo = build_tower(odometer_spec(12))
c = LevelSet(2, range(chacon[2].h // 2))
o = LevelSet(2, range(odo[2].h // 2))
print("chacon  ", float(cesaro_score(c, c, 500, 12, chacon).score))
print("odometer", float(cesaro_score(o, o, 500, 12, odo).score))
