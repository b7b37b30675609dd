# Sample random Ornstein spacers and check the two height recursions agree.

from stacklab import build_tower, chacon_pattern_scan, ornstein_spec, sample_omega, trial_seeds
from stacklab.ensemble import frequency_sequence

# p = 4 columns per stage, half-range t_k = k^2
spec = ornstein_spec(10, 4, lambda k: k * k)
draw = sample_omega(spec, seed=7)
tower = build_tower(spec, draw)

for k in range(4):
    print(f"stage {k}: draws {draw.x[k]}  spacers {tower.spacers[k].a}")

h = tower.heights
ok = all(h[k + 1] == spec.p[k] * (h[k] + 2 * spec.t[k]) + spec.x_last[k] for k in range(spec.K))
print("closed-form heights agree:", ok)

# n_k = h_k + x_{k,1}; the ratio bound only holds once t_k is small against h_k
n = frequency_sequence(draw, h, check_ratio=False)
print("frequencies:", n.n[:6], "...")

# how often does the +1 spacer step show up?
seeds = trial_seeds(1, 50)
hits = sum(bool(chacon_pattern_scan(build_tower(spec, sample_omega(spec, s)).spacers, range(1, 11))) for s in seeds)
print(f"trials with the +1 step somewhere in stages 1..10: {hits}/50")
