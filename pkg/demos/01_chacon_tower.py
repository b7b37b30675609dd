# Build the Chacon tower by cutting and stacking and look at it a few ways.

from stacklab import build_tower, chacon_spec, decode_level, mass_report, symbolic_name

tower = build_tower(chacon_spec(8))

# heights follow h -> 3h + 1
print("heights:", tower.heights)
print("widths of the last stage:", tower[8].w)

# the stage-2 tower as a word: B is a base level, s a spacer
print("stage 2:", symbolic_name(2, tower))

# where does level 5 of the stage-2 tower come from?
print("level 5 of stage 2 ->", decode_level(5, tower[2]))
print("level 3 of stage 1 ->", decode_level(3, tower[1]))

# total measure stays bounded (it tends to 3/2)
m = mass_report(tower.spec, tower.heights)
print("mass at K = 8:", m.total_mass_at_K, "~", float(m.total_mass_at_K))
