"""Build a model house: a catalog of replacement blocks for a teacher.

The house pairs sampled teacher sub-networks with compatible alternatives
harvested from donor networks (equal spatial change, boundary channels at
least as wide), then grows extra pruned variants. Wider alternatives get
a boolean channel mask so their boundary matches the target exactly.
"""

import random
from fractions import Fraction

from blockswap import model_house as mh
from blockswap.synth import NetSpec, gen_network, gen_pool

teacher = gen_network(NetSpec(layers=6, edge_prob=0.25, seed=42, name="teacher"))
pool = gen_pool(teacher, 4, (2, 3), seed=43)
print("teacher layers:", sorted(teacher.layers))
print("donor pool:", [n.name for n in pool])

rng = random.Random(42)
params = mh.HouseParams(n_t=6, n_p=10, n_expand=4, r=Fraction(1), seed=42)
house = mh.construct(teacher, pool, params, rng)
house = mh.expand(house, params.n_expand, rng=rng)

print(f"\nsampled {len(house.teacher_subnets)} teacher sub-networks")
for tid, sn in sorted(house.teacher_subnets.items()):
    print(f"  {tid}: {sorted(sn.layer_ids)}  channels {sn.in_channels}->{sn.out_channels}")

print(f"\n{len(house.alternatives)} alternatives")
for aid, alt in sorted(house.alternatives.items()):
    masked = "masked" if alt.mask else "exact"
    print(
        f"  {aid}: origin={alt.origin:<10} target={alt.target_id} "
        f"{alt.subnet.in_channels}->{alt.subnet.out_channels} ({masked})"
    )

# Every alternative is compatible with its target, and a masked view has
# the target's exact boundary widths.
for aid, alt in house.alternatives.items():
    target = house.teacher_subnets[alt.target_id]
    assert mh.is_compatible(alt.subnet, target)
    if alt.mask:
        eff = mh.apply_mask(alt)
        assert (eff.in_channels, eff.out_channels) == (
            target.in_channels, target.out_channels,
        )
print("\nall alternatives compatible; masked boundaries match their targets")

# Houses round-trip through canonical JSON.
blob = mh.serialize_house(house)
assert mh.serialize_house(mh.parse_house(blob)) == blob
print(f"serialized house: {len(blob)} bytes, round-trips byte-identically")
