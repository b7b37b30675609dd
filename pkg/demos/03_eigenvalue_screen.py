# Screen for eigenvalue candidates: points alpha with ||n_k alpha|| < eps along a window.

from fractions import Fraction

from stacklab import build_tower, chacon_spec, chain_intersect, eigenvalue_screen, odometer_spec

eps = Fraction(1, 5)

# the dyadic odometer keeps j/2^k1 for every window: it is not weakly mixing
odo = build_tower(odometer_spec(10))
screen = eigenvalue_screen(odo, eps, (3, 10))
print("odometer survivors:", [str(a.center) for a in screen.chain.survivors])
print("weak mixing evidence:", screen.weak_mixing_evidence)

# Chacon: 2/9 sits at distance exactly 1/9 from the integers along every h_k,
# so it survives every window starting at k >= 1 at this eps
chacon = build_tower(chacon_spec(9))
for window in [(0, 9), (1, 9), (4, 9)]:
    s = eigenvalue_screen(chacon, eps, window)
    print(f"chacon window {window}: {len(s.nontrivial)} nontrivial arcs")

# the arc chain itself, on a hand-picked sequence
chain = chain_intersect((4, 8, 16), Fraction(1, 20))
for a in chain.survivors:
    print(f"  center {a.center}, half width {a.half_width}")
print("counts per stage:", chain.nontrivial_counts())
